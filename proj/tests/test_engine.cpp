#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "sigmach/engine.hpp"
#include "sigmach/machine_io.hpp"
#include "sigmach/nondet.hpp"
#include "sigmach/randmach.hpp"

using namespace sigmach;

namespace {

Machine two_signal_machine(Rational va, Rational vb, Rational xa, Rational xb) {
    Machine m;
    auto a = m.add_meta("a", va);
    auto b = m.add_meta("b", vb);
    m.add_initial(a, xa);
    m.add_initial(b, xb);
    return m;
}

}  // namespace

TEST_CASE("next_collisions: symmetric closing pair") {
    Machine m = two_signal_machine(1, -1, 0, 4);
    auto groups = next_collisions(m.initial, m.speeds);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].time == Rational(2));
    CHECK(groups[0].position == Rational(2));
    CHECK(groups[0].participants.size() == 2);
}

TEST_CASE("next_collisions: parallel signals never meet") {
    Machine m = two_signal_machine(Rational(1, 2), Rational(1, 2), 0, 3);
    CHECK(next_collisions(m.initial, m.speeds).empty());
}

TEST_CASE("next_collisions: three world-lines through one point") {
    Machine m;
    m.add_meta("a", 1);
    m.add_meta("b", 0);
    m.add_meta("c", Rational(-1));
    m.add_initial("a", 0);
    m.add_initial("b", 2);
    m.add_initial("c", 4);
    auto groups = next_collisions(m.initial, m.speeds);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].time == Rational(2));
    CHECK(groups[0].position == Rational(2));
    CHECK(groups[0].participants.size() == 3);
}

TEST_CASE("next_collisions: same-time groups sorted by position") {
    Machine m;
    m.add_meta("a", 1);
    m.add_meta("b", Rational(-1));
    m.add_initial("a", 10);
    m.add_initial("b", 12);
    m.add_initial("a", 0);
    m.add_initial("b", 2);
    auto groups = next_collisions(m.initial, m.speeds);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].position == Rational(1));
    CHECK(groups[1].position == Rational(11));
    CHECK(groups[0].time == groups[1].time);
}

TEST_CASE("step applies the exactly-matching rule") {
    Machine m = two_signal_machine(1, -1, 0, 4);
    auto c = m.add_meta("c", 0);
    m.add_rule({{*m.find_meta("a"), *m.find_meta("b")}, {{c}}});

    auto st = step(m.initial, m, deterministic_resolver());
    REQUIRE(st.events.size() == 1);
    CHECK(!st.events[0].identity);
    CHECK(st.config.time == Rational(2));
    REQUIRE(st.config.signals.size() == 1);
    CHECK(st.config.signals[0].meta == c);
    CHECK(st.config.signals[0].position == Rational(2));
}

TEST_CASE("step: identity crossing when no rule matches") {
    Machine m = two_signal_machine(1, -1, 0, 4);
    auto st = step(m.initial, m, deterministic_resolver());
    REQUIRE(st.events.size() == 1);
    CHECK(st.events[0].identity);
    CHECK(st.events[0].outgoing == st.events[0].incoming);
    CHECK(st.config.signals.size() == 2);
    // both continue through x=2
    for (const auto& s : st.config.signals) CHECK(s.position == Rational(2));
}

TEST_CASE("step: annihilation leaves an empty configuration") {
    Machine m = two_signal_machine(1, -1, 0, 4);
    m.add_rule({{*m.find_meta("a"), *m.find_meta("b")}, {{}}});
    auto st = step(m.initial, m, deterministic_resolver());
    CHECK(st.config.signals.empty());
}

TEST_CASE("step throws NoFutureCollision on a quiescent configuration") {
    Machine m = two_signal_machine(1, 1, 0, 4);
    CHECK_THROWS_AS(step(m.initial, m, deterministic_resolver()), EngineError);
}

TEST_CASE("run: one collision then quiescent") {
    Machine m = two_signal_machine(1, -1, 0, 4);
    auto c = m.add_meta("c", 0);
    m.add_rule({{*m.find_meta("a"), *m.find_meta("b")}, {{c}}});
    auto tr = run(m, {});
    CHECK(tr.halt == Halt::Quiescent);
    CHECK(tr.events.size() == 1);
    CHECK(tr.final.signals.size() == 1);
}

TEST_CASE("run: zero rules, parallel signals") {
    Machine m;
    m.add_meta("a", 1);
    m.add_initial("a", 0);
    m.add_initial("a", 1);
    m.add_initial("a", 2);
    auto tr = run(m, {});
    CHECK(tr.halt == Halt::Quiescent);
    CHECK(tr.events.empty());
}

// Bouncing machine: walls drift inward at +-1/4, the ball reflects between
// them. Reflection times form a convergent series (the walls meet at t=16),
// so the run is Zeno and must exhaust any event budget. The oracle below
// computes the reflection times independently from the closed-form crossing
// equations:
//   rightward ball from (t,x) meets wr:  s = 4/5 * (8 - x + t)
//   leftward ball from (t,x) meets wl:   s = 4/5 * (x + t)
TEST_CASE("run: Zeno bouncing exhausts the budget") {
    Machine m;
    auto wl = m.add_meta("wl", Rational(1, 4));
    auto wr = m.add_meta("wr", Rational(-1, 4));
    auto ball = m.add_meta("ball", 1);
    auto ballL = m.add_meta("ballL", Rational(-1));
    m.add_rule({{ball, wr}, {{wr, ballL}}});
    m.add_rule({{ballL, wl}, {{wl, ball}}});
    m.add_initial(wl, 0);
    m.add_initial(wr, 8);
    m.add_initial(ball, 1);

    Budget b;
    b.max_events = 50;
    auto tr = run(m, b);
    CHECK(tr.halt == Halt::BudgetExhausted);
    CHECK(tr.events.size() == 50);

    Rational t = 0, x = 1;
    bool right = true;
    for (std::size_t i = 0; i < tr.events.size(); ++i) {
        Rational s = right ? Rational(4, 5) * (Rational(8) - x + t) : Rational(4, 5) * (x + t);
        Rational pos = right ? Rational(8) - s * Rational(1, 4) : s * Rational(1, 4);
        CAPTURE(i);
        CHECK(tr.events[i].time == s);
        CHECK(tr.events[i].position == pos);
        t = s;
        x = pos;
        right = !right;
    }
    // all bounces happen strictly before the walls meet at t=16
    CHECK(tr.events.back().time < Rational(16));
}

TEST_CASE("run honors the time horizon and advances the final configuration") {
    Machine m = two_signal_machine(1, -1, 0, 4);
    Budget b;
    b.time_horizon = Rational(1);
    auto tr = run(m, b);
    CHECK(tr.halt == Halt::TimeHorizonReached);
    CHECK(tr.events.empty());
    CHECK(tr.final.time == Rational(1));
    std::set<std::string> pos;
    for (const auto& s : tr.final.signals) pos.insert(s.position.str());
    CHECK(pos == std::set<std::string>{"1", "3"});
}

TEST_CASE("exactness: incoming signals extrapolate to the event point") {
    Machine m;
    m.add_meta("a", Rational(3, 7));
    m.add_meta("b", Rational(-2, 5));
    m.add_meta("c", Rational(1, 3));
    m.add_initial("a", Rational(-1, 3));
    m.add_initial("b", Rational(9, 2));
    m.add_initial("c", Rational(1, 5));
    auto tr = run(m, {});
    auto lines = world_lines(m, tr);
    for (const auto& ev : tr.events) {
        for (MetaId mid : ev.incoming) {
            bool found = false;
            for (const auto& wl : lines) {
                if (wl.meta != mid || !wl.consumer) continue;
                if (tr.events[*wl.consumer] == ev)
                    found = wl.birth_pos + m.speed_of(mid) * (ev.time - wl.birth_time) == ev.position;
                if (found) break;
            }
            CHECK(found);
        }
    }
}

TEST_CASE("replay reproduces the final configuration exactly") {
    Machine m;
    m.add_meta("a", 1);
    m.add_meta("b", Rational(-1));
    m.add_meta("c", 2);
    m.add_rule({{*m.find_meta("a"), *m.find_meta("b")}, {{*m.find_meta("c")}}});
    m.add_initial("a", 0);
    m.add_initial("b", 4);
    m.add_initial("b", 10);
    auto tr = run(m, {});
    auto replayed = replay_events(m, tr.initial, tr.events);
    auto norm = [](Configuration c) {
        std::sort(c.signals.begin(), c.signals.end(), [](const SignalInstance& a, const SignalInstance& b) {
            if (a.position != b.position) return a.position < b.position;
            return a.meta < b.meta;
        });
        return c;
    };
    CHECK(norm(replayed) == norm(tr.final));
}

TEST_CASE("event list is (time, position) sorted and times increase per signal chain") {
    Machine m;
    m.add_meta("a", 1);
    m.add_meta("b", Rational(-1));
    m.add_initial("a", 0);
    m.add_initial("b", 2);
    m.add_initial("a", 6);
    m.add_initial("b", 8);
    m.add_initial("b", 20);
    auto tr = run(m, {});
    for (std::size_t i = 0; i + 1 < tr.events.size(); ++i) {
        const auto& e1 = tr.events[i];
        const auto& e2 = tr.events[i + 1];
        bool ordered = e1.time < e2.time || (e1.time == e2.time && e1.position < e2.position);
        CHECK(ordered);
    }
}

TEST_CASE("crossing default conserves the meta-signal multiset") {
    Machine m;
    m.add_meta("a", 1);
    m.add_meta("b", Rational(-1));
    m.add_meta("c", 0);
    m.add_initial("a", 0);
    m.add_initial("a", 1);
    m.add_initial("b", 5);
    m.add_initial("c", 3);
    auto tr = run(m, {});
    CHECK(tr.halt == Halt::Quiescent);
    auto count = [&](const Configuration& c, const char* name) {
        std::size_t n = 0;
        for (const auto& s : c.signals)
            if (m.name_of(s.meta) == name) ++n;
        return n;
    };
    CHECK(count(tr.final, "a") == 2);
    CHECK(count(tr.final, "b") == 1);
    CHECK(count(tr.final, "c") == 1);
}

TEST_CASE("run is deterministic") {
    Machine m;
    m.add_meta("a", 1);
    m.add_meta("b", Rational(-1));
    m.add_meta("c", Rational(1, 2));
    m.add_rule({{*m.find_meta("a"), *m.find_meta("b")}, {{*m.find_meta("c")}}});
    m.add_initial("a", 0);
    m.add_initial("b", 4);
    m.add_initial("b", 8);
    auto t1 = run(m, {});
    auto t2 = run(m, {});
    CHECK(t1 == t2);
    CHECK(export_trace(t1, m) == export_trace(t2, m));
}

namespace {

// a -> c -> e -> g cascade; three rule collisions in sequence
Machine cascade3() {
    Machine m;
    auto a = m.add_meta("a", 1);
    auto b = m.add_meta("b", Rational(-1));
    auto c = m.add_meta("c", 1);
    auto d = m.add_meta("d", Rational(-1));
    auto e = m.add_meta("e", 0);
    auto f = m.add_meta("f", Rational(-1));
    auto g = m.add_meta("g", 0);
    m.add_rule({{a, b}, {{c}}});
    m.add_rule({{c, d}, {{e}}});
    m.add_rule({{e, f}, {{g}}});
    m.add_initial(a, 0);
    m.add_initial(b, 2);
    m.add_initial(d, 6);
    m.add_initial(f, 9);
    return m;
}

}  // namespace

TEST_CASE("collision dag: single collision") {
    Machine m = two_signal_machine(1, -1, 0, 4);
    auto c = m.add_meta("c", 0);
    m.add_rule({{*m.find_meta("a"), *m.find_meta("b")}, {{c}}});
    auto tr = run(m, {});
    auto dag = collision_dag(m, tr);
    CHECK(dag.vertex_count == 1);
    std::size_t initial_edges = 0;
    for (const auto& e : dag.edges)
        if (e.from == -1) ++initial_edges;
    CHECK(initial_edges == 2);
    auto meas = complexity_measures(dag, tr);
    CHECK(meas.time_depth == 1);
    CHECK(meas.space_width == 2);
}

TEST_CASE("collision dag: three-collision cascade has depth 3") {
    Machine m = cascade3();
    auto tr = run(m, {});
    REQUIRE(tr.events.size() == 3);
    // hand-checked event coordinates
    CHECK(tr.events[0].time == Rational(1));
    CHECK(tr.events[0].position == Rational(1));
    CHECK(tr.events[1].time == Rational(3));
    CHECK(tr.events[1].position == Rational(3));
    CHECK(tr.events[2].time == Rational(6));
    CHECK(tr.events[2].position == Rational(3));
    auto dag = collision_dag(m, tr);
    auto meas = complexity_measures(dag, tr);
    CHECK(meas.time_depth == 3);
    CHECK(meas.space_width == 4);
}

TEST_CASE("collision dag: empty trace") {
    Machine m;
    m.add_meta("a", 0);
    for (int i = 0; i < 5; ++i) m.add_initial("a", i);
    auto tr = run(m, {});
    auto dag = collision_dag(m, tr);
    CHECK(dag.vertex_count == 0);
    auto meas = complexity_measures(dag, tr);
    CHECK(meas.time_depth == 0);
    CHECK(meas.space_width == 5);
}

TEST_CASE("dag of a truncated run is partial and measures refuse it") {
    Machine m;
    m.add_meta("a", 1);
    m.add_meta("b", Rational(-1));
    m.add_initial("a", 0);
    m.add_initial("b", 100);
    Budget b;
    b.max_events = 0;
    auto tr = run(m, b);
    CHECK(tr.halt == Halt::BudgetExhausted);
    auto dag = collision_dag(m, tr);
    CHECK(dag.partial);
    CHECK_THROWS_AS(complexity_measures(dag, tr), std::invalid_argument);
}

TEST_CASE("fuzz: validated machines never break engine invariants") {
    // random machines that pass validation must run to a clean halt; the
    // engine may never throw on them
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        Machine m = random_machine(seed);
        if (!validate_machine(m).ok()) continue;
        Budget b;
        b.max_events = 60;
        ChoiceString bits;
        for (int i = 0; i < 8; ++i) bits.push_back((seed >> i) & 1);
        CAPTURE(seed);
        CHECK_NOTHROW((void)run_with_choices(m, bits, b));
    }
}

TEST_CASE("malformed simultaneity containment on an out-of-contract machine") {
    // outcome with two equal speeds never validates; the engine still refuses
    // to build the ill-formed configuration
    Machine m = two_signal_machine(1, -1, 0, 4);
    auto c = m.add_meta("c", 2);
    auto d = m.add_meta("d", 2);
    m.add_rule({{*m.find_meta("a"), *m.find_meta("b")}, {{c, d}}});
    CHECK(!validate_machine(m).ok());
    CHECK_THROWS_AS(run(m, {}), EngineError);
}
