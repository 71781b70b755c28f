#include "sigmach/nondet.hpp"

#include <algorithm>
#include <map>
#include <thread>

namespace sigmach {

std::string choices_str(const ChoiceString& c) {
    std::string s;
    for (auto b : c) s += b ? '1' : '0';
    return s;
}

ChoiceString choices_from_index(std::uint64_t index, int k) {
    ChoiceString c(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < k; ++i) c[static_cast<std::size_t>(i)] = (index >> (k - 1 - i)) & 1;
    return c;
}

std::optional<std::size_t> accept_event(const Machine& machine, const Trace& trace) {
    if (!machine.accept) return std::nullopt;
    MetaId acc = *machine.accept;
    for (const auto& s : trace.initial.signals)
        if (s.meta == acc) return 0;  // degenerate: accepted before any collision
    for (std::size_t e = 0; e < trace.events.size(); ++e)
        if (std::find(trace.events[e].outgoing.begin(), trace.events[e].outgoing.end(), acc) !=
            trace.events[e].outgoing.end())
            return e;
    return std::nullopt;
}

PathResult run_with_choices(const Machine& machine, const ChoiceString& choices, const Budget& budget) {
    PathResult pr;
    pr.choices = choices;

    Budget b = budget;
    b.max_events = std::min<std::size_t>(b.max_events, choices.size());

    Resolver resolver = [&](std::size_t event_index, const Rule&) -> int {
        if (event_index >= choices.size())
            throw std::logic_error("choice underflow: two-outcome rule past the end of the choice string");
        return choices[event_index];
    };
    pr.trace = run(machine, b, resolver);
    if (pr.trace.halt == Halt::BudgetExhausted && choices.size() <= budget.max_events)
        pr.trace.halt = Halt::ChoicesExhausted;

    // runtime k-RNSM condition: no two collisions at exactly the same time
    for (std::size_t i = 0; i + 1 < pr.trace.events.size(); ++i)
        if (pr.trace.events[i].time == pr.trace.events[i + 1].time)
            pr.violations.push_back("two collisions at time " + pr.trace.events[i].time.str() + " (path " +
                                    choices_str(choices) + ")");

    bool initial_accept = false;
    if (machine.accept)
        for (const auto& s : pr.trace.initial.signals)
            if (s.meta == *machine.accept) initial_accept = true;
    if (auto ev = accept_event(machine, pr.trace)) {
        pr.accepted = true;
        pr.collisions_before_accept = initial_accept ? 0 : *ev;
    }
    return pr;
}

std::vector<PathResult> enumerate_paths(const Machine& machine, int k, const Budget& budget, int jobs) {
    std::uint64_t total = std::uint64_t{1} << k;
    std::vector<PathResult> results(total);
    auto work = [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t i = begin; i < end; ++i)
            results[i] = run_with_choices(machine, choices_from_index(i, k), budget);
    };
    if (jobs <= 1 || total < 2) {
        work(0, total);
    } else {
        std::vector<std::thread> pool;
        std::uint64_t n = std::min<std::uint64_t>(static_cast<std::uint64_t>(jobs), total);
        for (std::uint64_t w = 0; w < n; ++w)
            pool.emplace_back([&, w] {
                for (std::uint64_t i = w; i < total; i += n) work(i, i + 1);
            });
        for (auto& t : pool) t.join();
    }
    // annotate duplicate traces (never removed)
    for (std::size_t i = 0; i < results.size(); ++i) {
        results[i].trace_group = i;
        for (std::size_t j = 0; j < i; ++j)
            if (results[j].trace == results[i].trace) {
                results[i].trace_group = results[j].trace_group;
                break;
            }
    }
    return results;
}

AcceptVerdict accepts(const Machine& machine, int k, const Budget& budget, int jobs) {
    AcceptVerdict v;
    auto paths = enumerate_paths(machine, k, budget, jobs);
    for (const auto& p : paths) {
        if (p.accepted && p.collisions_before_accept && *p.collisions_before_accept <= static_cast<std::size_t>(k)) {
            v.accepted = true;
            v.witness = p.choices;  // paths are in lexicographic order
            break;
        }
    }
    return v;
}

ValidationReport runtime_k_rnsm_report(std::span<const PathResult> results) {
    ValidationReport rep;
    for (const auto& p : results)
        for (const auto& viol : p.violations)
            rep.violations.push_back({"simultaneous_collisions", viol, "path " + choices_str(p.choices)});
    return rep;
}

}  // namespace sigmach
