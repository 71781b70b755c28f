#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sigmach/machine_io.hpp"
#include "sigmach/nondet.hpp"
#include "sigmach/randmach.hpp"

using namespace sigmach;

static const char* kSample =
    "[metasignals]\n"
    "a 1          # name speed\n"
    "b -1\n"
    "accept 0\n"
    "[rules]\n"
    "a,b -> accept | a   # two outcomes = nondeterministic\n"
    "[accept]\n"
    "accept\n"
    "[initial]\n"
    "a@0\n"
    "b@4\n";

TEST_CASE("parse the reference document") {
    auto res = parse_machine(kSample);
    REQUIRE(res.machine);
    const Machine& m = *res.machine;
    CHECK(m.meta_count() == 3);
    REQUIRE(m.rules.size() == 1);
    CHECK(m.rules[0].outcomes.size() == 2);
    CHECK(m.initial.signals.size() == 2);
    REQUIRE(m.accept);
    CHECK(m.name_of(*m.accept) == "accept");
    CHECK(m.speed_of(*m.find_meta("b")) == Rational(-1));
}

TEST_CASE("parse errors carry locations") {
    SUBCASE("zero denominator") {
        auto res = parse_machine("[metasignals]\na 1/0\n");
        REQUIRE(!res.machine);
        CHECK(res.errors[0].code == "SyntaxError");
        CHECK(res.errors[0].line == 2);
    }
    SUBCASE("undeclared meta-signal in a rule") {
        auto res = parse_machine("[metasignals]\na 1\nb -1\n[rules]\na,z -> b\n[initial]\na@0\n");
        REQUIRE(!res.machine);
        CHECK(res.errors[0].code == "UnknownMetaSignal");
        CHECK(res.errors[0].line == 5);
    }
    SUBCASE("duplicate rule input") {
        auto res = parse_machine("[metasignals]\na 1\nb -1\n[rules]\na,b -> a\nb,a -> b\n");
        REQUIRE(!res.machine);
        CHECK(res.errors[0].code == "DuplicateRuleInput");
    }
    SUBCASE("speed redefinition") {
        auto res = parse_machine("[metasignals]\na 1\na 2\n");
        REQUIRE(!res.machine);
        CHECK(res.errors[0].code == "SpeedRedefinition");
    }
    SUBCASE("malformed input never crashes, always diagnoses") {
        for (const char* bad : {"x", "[metasignals]\na\n", "[rules]\n->\n", "[initial]\nq@@1\n", "[wat]\n"}) {
            auto res = parse_machine(bad);
            CHECK(!res.machine);
            CHECK(!res.errors.empty());
        }
    }
}

TEST_CASE("serialization is canonical") {
    auto res = parse_machine(kSample);
    REQUIRE(res.machine);
    auto s1 = serialize_machine(*res.machine);
    auto back = parse_machine(s1);
    REQUIRE(back.machine);
    CHECK(serialize_machine(*back.machine) == s1);  // byte-identical second pass

    SUBCASE("speeds canonicalize") {
        auto r2 = parse_machine("[metasignals]\nm -3/6\n[initial]\nm@2/4\n");
        REQUIRE(r2.machine);
        auto text = serialize_machine(*r2.machine);
        CHECK(text.find("m -1/2") != std::string::npos);
        CHECK(text.find("m@1/2") != std::string::npos);
    }
    SUBCASE("empty rules section is preserved") {
        auto r2 = parse_machine("[metasignals]\nm 1\n[rules]\n[initial]\nm@0\n");
        REQUIRE(r2.machine);
        CHECK(serialize_machine(*r2.machine).find("[rules]\n") != std::string::npos);
    }
    SUBCASE("nonzero initial time round-trips") {
        auto r2 = parse_machine("[metasignals]\nm 1\n[time]\n-3/2\n[initial]\nm@0\n");
        REQUIRE(r2.machine);
        CHECK(r2.machine->initial.time == Rational(-3, 2));
        auto back = parse_machine(serialize_machine(*r2.machine));
        REQUIRE(back.machine);
        CHECK(back.machine->initial.time == Rational(-3, 2));
    }
}

TEST_CASE("round trip on seeded random machines") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Machine m = random_machine(seed);
        if (!validate_machine(m).ok()) continue;
        auto text = serialize_machine(m);
        auto back = parse_machine(text);
        REQUIRE(back.machine);
        CHECK(machines_equal(m, *back.machine));
        CHECK(machine_hash(m) == machine_hash(*back.machine));
    }
}

TEST_CASE("trace export / import round trip") {
    auto res = parse_machine(kSample);
    REQUIRE(res.machine);
    const Machine& m = *res.machine;
    auto path = run_with_choices(m, {0}, {});
    auto text = export_trace(path.trace, m);
    auto imp = import_trace(text, m);
    REQUIRE(imp.trace);
    CHECK(*imp.trace == path.trace);
    CHECK(export_trace(*imp.trace, m) == text);
}

TEST_CASE("trace import rejects a different machine") {
    auto res = parse_machine(kSample);
    REQUIRE(res.machine);
    auto path = run_with_choices(*res.machine, {0}, {});
    auto text = export_trace(path.trace, *res.machine);

    Machine other = *res.machine;
    other.add_meta("ghost", 2);
    auto imp = import_trace(text, other);
    CHECK(!imp.trace);
    REQUIRE(!imp.errors.empty());
    CHECK(imp.errors[0].code == "HashMismatch");
}

TEST_CASE("trace import verifies the recorded final configuration") {
    auto res = parse_machine(kSample);
    REQUIRE(res.machine);
    auto path = run_with_choices(*res.machine, {1}, {});
    auto text = export_trace(path.trace, *res.machine);
    auto pos = text.find("final a@");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 8, "final b@");
    auto imp = import_trace(text, *res.machine);
    CHECK(!imp.trace);
}

TEST_CASE("standalone trace loading rebuilds the meta table") {
    auto res = parse_machine(kSample);
    REQUIRE(res.machine);
    auto path = run_with_choices(*res.machine, {0}, {});
    auto text = export_trace(path.trace, *res.machine);
    std::vector<ParseError> errors;
    auto st = load_trace_standalone(text, errors);
    REQUIRE(st);
    CHECK(st->machine.meta_count() == 3);
    CHECK(st->trace.events.size() == path.trace.events.size());
}

TEST_CASE("horizon-halted traces round trip (final past the last event)") {
    auto res = parse_machine(kSample);
    REQUIRE(res.machine);
    Machine m = *res.machine;
    m.rules[0].outcomes.resize(1);  // deterministic variant
    m.add_initial("a", 20);
    m.add_initial("b", 120);  // collides at t=50, past the horizon
    Budget b;
    b.time_horizon = Rational(10);
    auto tr = run(m, b);
    REQUIRE(tr.halt == Halt::TimeHorizonReached);
    REQUIRE(tr.final.time == Rational(10));
    auto text = export_trace(tr, m);
    auto imp = import_trace(text, m);
    REQUIRE(imp.trace);
    CHECK(*imp.trace == tr);
}

TEST_CASE("trace round trip on random machines") {
    Budget b;
    b.max_events = 60;
    for (std::uint64_t seed = 1000; seed < 1040; ++seed) {
        Machine m = random_machine(seed);
        if (!validate_machine(m).ok()) continue;
        auto path = run_with_choices(m, {1, 0, 1}, b);
        auto text = export_trace(path.trace, m);
        auto imp = import_trace(text, m);
        REQUIRE(imp.trace);
        CHECK(*imp.trace == path.trace);
    }
}
