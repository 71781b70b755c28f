#include "sigmach/engine.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace sigmach {

const char* halt_name(Halt h) {
    switch (h) {
        case Halt::Quiescent: return "quiescent";
        case Halt::BudgetExhausted: return "budget";
        case Halt::TimeHorizonReached: return "horizon";
        case Halt::ChoicesExhausted: return "choices";
    }
    return "?";
}

Resolver deterministic_resolver() {
    return [](std::size_t, const Rule&) -> int {
        throw std::logic_error("nondeterministic rule reached without a choice resolver");
    };
}

std::vector<CollisionGroup> next_collisions(const Configuration& config, const std::vector<Rational>& speeds) {
    const auto& sig = config.signals;
    const std::size_t n = sig.size();
    std::vector<CollisionGroup> out;
    if (n < 2) return out;

    // Order by (position, speed). Before the first future crossing the
    // spatial order is unchanged, so the earliest crossing pair is adjacent
    // in this order; co-located signals separate immediately and order by
    // speed.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        int c = sig[a].position < sig[b].position ? -1 : (sig[a].position == sig[b].position ? 0 : 1);
        if (c != 0) return c < 0;
        return speeds[sig[a].meta] < speeds[sig[b].meta];
    });

    std::optional<Rational> best_dt;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto& a = sig[order[i]];
        const auto& b = sig[order[i + 1]];
        const Rational& va = speeds[a.meta];
        const Rational& vb = speeds[b.meta];
        if (!(va > vb)) continue;  // left signal must outrun the right one
        if (a.position == b.position) continue;  // co-located: they only diverge
        Rational dt = (b.position - a.position) / (va - vb);
        if (!best_dt || dt < *best_dt) best_dt = dt;
    }
    if (!best_dt) return out;

    Rational t = config.time + *best_dt;
    std::map<Rational, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < n; ++i) {
        Rational p = sig[i].position + speeds[sig[i].meta] * *best_dt;
        buckets[std::move(p)].push_back(i);
    }
    for (auto& [pos, members] : buckets) {
        if (members.size() < 2) continue;
        out.push_back({t, pos, std::move(members)});
    }
    return out;
}

static void check_wellformed(const Configuration& cfg, const std::vector<Rational>& speeds, const Rational& t) {
    std::map<Rational, std::vector<MetaId>> at;
    for (const auto& s : cfg.signals) at[s.position].push_back(s.meta);
    for (const auto& [pos, metas] : at) {
        for (std::size_t i = 0; i < metas.size(); ++i)
            for (std::size_t j = i + 1; j < metas.size(); ++j)
                if (metas[i] == metas[j] || speeds[metas[i]] == speeds[metas[j]])
                    throw EngineError(EngineError::Code::MalformedSimultaneity,
                                      "same-time collision produced an ill-formed configuration at t=" + t.str());
    }
}

StepResult step(const Configuration& config, const Machine& machine, const Resolver& resolver,
                std::size_t first_event_index) {
    auto groups = next_collisions(config, machine.speeds);
    if (groups.empty())
        throw EngineError(EngineError::Code::NoFutureCollision, "no future collision exists");

    const Rational& t = groups.front().time;
    Rational dt = t - config.time;

    std::vector<bool> involved(config.signals.size(), false);
    for (const auto& g : groups)
        for (auto idx : g.participants) involved[idx] = true;

    StepResult res;
    res.config.time = t;
    for (std::size_t i = 0; i < config.signals.size(); ++i) {
        if (involved[i]) continue;
        const auto& s = config.signals[i];
        res.config.signals.push_back({s.meta, s.position + machine.speed_of(s.meta) * dt});
    }

    std::size_t event_index = first_event_index;
    for (const auto& g : groups) {
        CollisionEvent ev;
        ev.time = g.time;
        ev.position = g.position;
        std::vector<MetaId> in;
        for (auto idx : g.participants) in.push_back(config.signals[idx].meta);
        ev.incoming = sorted_ids(std::move(in));

        const Rule* rule = machine.rule_for(ev.incoming);
        if (rule) {
            int pick = 0;
            if (rule->outcomes.size() == 2) pick = resolver(event_index, *rule) ? 1 : 0;
            ev.rule = static_cast<std::size_t>(rule - machine.rules.data());
            ev.outcome = pick;
            ev.outgoing = rule->outcomes[pick];
            ev.identity = false;
        } else {
            ev.outgoing = ev.incoming;
            ev.identity = true;
        }
        for (MetaId m : ev.outgoing) res.config.signals.push_back({m, g.position});
        res.events.push_back(std::move(ev));
        ++event_index;
    }
    check_wellformed(res.config, machine.speeds, t);
    return res;
}

static void advance_to(Configuration& cfg, const std::vector<Rational>& speeds, const Rational& t) {
    Rational dt = t - cfg.time;
    for (auto& s : cfg.signals) s.position += speeds[s.meta] * dt;
    cfg.time = t;
}

Trace run(const Machine& machine, const Budget& budget, const Resolver& resolver) {
    Trace tr;
    tr.initial = machine.initial;
    Configuration cfg = machine.initial;
    for (;;) {
        auto groups = next_collisions(cfg, machine.speeds);
        if (groups.empty()) {
            tr.halt = Halt::Quiescent;
            break;
        }
        if (budget.time_horizon && groups.front().time > *budget.time_horizon) {
            advance_to(cfg, machine.speeds, *budget.time_horizon);
            tr.halt = Halt::TimeHorizonReached;
            break;
        }
        if (tr.events.size() + groups.size() > budget.max_events) {
            tr.halt = Halt::BudgetExhausted;
            break;
        }
        auto st = step(cfg, machine, resolver, tr.events.size());
        cfg = std::move(st.config);
        for (auto& ev : st.events) tr.events.push_back(std::move(ev));
    }
    tr.final = std::move(cfg);
    return tr;
}

Trace run(const Machine& machine, const Budget& budget) { return run(machine, budget, deterministic_resolver()); }

Configuration replay_events(const Machine& machine, const Configuration& initial,
                            const std::vector<CollisionEvent>& events) {
    Configuration cfg = initial;
    for (const auto& ev : events) {
        if (ev.time > cfg.time) advance_to(cfg, machine.speeds, ev.time);
        // remove one instance per incoming meta at the event position
        for (MetaId m : ev.incoming) {
            auto it = std::find_if(cfg.signals.begin(), cfg.signals.end(), [&](const SignalInstance& s) {
                return s.meta == m && s.position == ev.position;
            });
            if (it == cfg.signals.end())
                throw std::runtime_error("replay: incoming signal missing at event t=" + ev.time.str());
            cfg.signals.erase(it);
        }
        for (MetaId m : ev.outgoing) cfg.signals.push_back({m, ev.position});
    }
    return cfg;
}

std::vector<WorldLine> world_lines(const Machine& machine, const Trace& trace) {
    std::vector<WorldLine> lines;
    std::vector<std::size_t> active;  // indices into lines
    for (const auto& s : trace.initial.signals) {
        lines.push_back({s.meta, trace.initial.time, s.position, -1, std::nullopt, {}, {}});
        active.push_back(lines.size() - 1);
    }
    for (std::size_t e = 0; e < trace.events.size(); ++e) {
        const auto& ev = trace.events[e];
        for (MetaId m : ev.incoming) {
            auto it = std::find_if(active.begin(), active.end(), [&](std::size_t li) {
                const auto& wl = lines[li];
                if (wl.meta != m) return false;
                return wl.birth_pos + machine.speed_of(m) * (ev.time - wl.birth_time) == ev.position;
            });
            if (it == active.end())
                throw std::runtime_error("world_lines: no active signal matches event input");
            lines[*it].consumer = e;
            lines[*it].end_time = ev.time;
            lines[*it].end_pos = ev.position;
            active.erase(it);
        }
        for (MetaId m : ev.outgoing) {
            lines.push_back({m, ev.time, ev.position, static_cast<int>(e), std::nullopt, {}, {}});
            active.push_back(lines.size() - 1);
        }
    }
    for (auto li : active) {
        auto& wl = lines[li];
        wl.end_time = trace.final.time;
        wl.end_pos = wl.birth_pos + machine.speed_of(wl.meta) * (trace.final.time - wl.birth_time);
    }
    return lines;
}

CollisionDag collision_dag(const Machine& machine, const Trace& trace) {
    CollisionDag dag;
    dag.vertex_count = trace.events.size();
    dag.partial = trace.halt == Halt::BudgetExhausted;
    for (const auto& wl : world_lines(machine, trace))
        if (wl.consumer) dag.edges.push_back({wl.producer, *wl.consumer, wl.meta});
    return dag;
}

Measures complexity_measures(const CollisionDag& dag, const Trace& trace) {
    if (dag.partial)
        throw std::invalid_argument("complexity_measures: refused on a partial (budget-exhausted) DAG");
    Measures m;
    std::vector<std::size_t> depth(dag.vertex_count, 1);
    // events are time-ordered, so edges always point forward
    for (const auto& e : dag.edges) {
        if (e.from < 0) continue;
        depth[e.to] = std::max(depth[e.to], depth[static_cast<std::size_t>(e.from)] + 1);
    }
    for (auto d : depth) m.time_depth = std::max(m.time_depth, d);

    std::size_t count = trace.initial.signals.size();
    m.space_width = count;
    std::size_t i = 0;
    while (i < trace.events.size()) {
        std::size_t j = i;
        while (j < trace.events.size() && trace.events[j].time == trace.events[i].time) {
            count -= trace.events[j].incoming.size();
            count += trace.events[j].outgoing.size();
            ++j;
        }
        m.space_width = std::max(m.space_width, count);
        i = j;
    }
    return m;
}

}  // namespace sigmach
