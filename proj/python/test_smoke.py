"""Smoke tests for the python module: parse, simulate, enumerate, compile,
verify equivalence and render against the sample machine."""

import os
import sys

import _sigmach as sm

SAMPLE = """
[metasignals]
a 1
b -1
accept 0
[rules]
a,b -> accept | a
[accept]
accept
[initial]
a@0
b@4
"""


def main():
    sample_path = os.environ.get("SIGMACH_SAMPLE")
    text = open(sample_path).read() if sample_path else SAMPLE

    machine = sm.Machine.parse(text)
    assert machine.validate() == []
    assert not machine.is_deterministic()
    assert len(machine.meta_signals) == 3

    round_trip = sm.Machine.parse(machine.serialize())
    assert round_trip.serialize() == machine.serialize()
    assert round_trip.hash() == machine.hash()

    accepting = sm.simulate(machine, choices="0")
    assert accepting["accepted"] is True
    assert accepting["halt"] == "quiescent"
    rejecting = sm.simulate(machine, choices="1")
    assert rejecting["accepted"] is False

    paths = sm.enumerate_paths(machine, k=1)
    assert [p["choices"] for p in paths] == ["0", "1"]
    assert [p["accepted"] for p in paths] == [True, False]

    verdict = sm.accepts(machine, k=1)
    assert verdict == {"accepted": True, "witness": "0"}

    compiled = sm.compile_machine(machine, k=1)
    assert compiled["leaves"] == 2
    assert compiled["dsm"].is_deterministic()
    assert "accept" in compiled["provenance"]

    equiv = sm.verify_equivalence(machine, k=1)
    assert equiv["equivalent"] is True
    assert equiv["nn_accepts"] is True

    svg = sm.render_svg(machine, accepting["trace"])
    assert svg.startswith("<svg")
    assert "</svg>" in svg

    mid = sm.build_middle_machine("0", "1")
    summary = sm.simulate(mid)
    assert ("mid", "1/2") in [tuple(s) for s in summary["final"]]

    rnd = sm.random_machine(7)
    assert rnd.serialize() == sm.random_machine(7).serialize()

    print("python smoke: ok")


if __name__ == "__main__":
    main()
