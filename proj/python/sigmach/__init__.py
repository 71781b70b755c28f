"""Exact-arithmetic signal machine toolkit."""

from _sigmach import (  # noqa: F401
    Machine,
    accepts,
    build_middle_machine,
    compile_machine,
    enumerate_paths,
    random_machine,
    render_svg,
    simulate,
    verify_equivalence,
)

__all__ = [
    "Machine",
    "accepts",
    "build_middle_machine",
    "compile_machine",
    "enumerate_paths",
    "random_machine",
    "render_svg",
    "simulate",
    "verify_equivalence",
]
