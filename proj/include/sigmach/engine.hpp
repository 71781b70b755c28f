#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sigmach/machine.hpp"

namespace sigmach {

struct CollisionEvent {
    Rational time;
    Rational position;
    std::vector<MetaId> incoming;  // sorted, >= 2, pairwise distinct speeds
    std::vector<MetaId> outgoing;  // sorted
    std::optional<std::size_t> rule;  // index into machine.rules
    std::optional<int> outcome;       // chosen outcome index when a rule fired
    bool identity = false;            // no rule matched; signals crossed unchanged

    bool operator==(const CollisionEvent& o) const {
        return time == o.time && position == o.position && incoming == o.incoming && outgoing == o.outgoing &&
               rule == o.rule && outcome == o.outcome && identity == o.identity;
    }
};

enum class Halt {
    Quiescent,           // no future collision exists
    BudgetExhausted,     // event budget spent
    TimeHorizonReached,  // next collision lies beyond the horizon
    ChoicesExhausted,    // nondet run consumed all its choice bits
};

const char* halt_name(Halt h);

struct Budget {
    std::size_t max_events = 10000;
    std::optional<Rational> time_horizon;
};

struct Trace {
    Configuration initial;
    std::vector<CollisionEvent> events;
    Configuration final;
    Halt halt = Halt::Quiescent;

    bool operator==(const Trace& o) const {
        return initial == o.initial && events == o.events && final == o.final && halt == o.halt;
    }
};

// Chooses the outcome index for a two-outcome rule at the given event index
// (0-based over all events of the run so far).
using Resolver = std::function<int(std::size_t event_index, const Rule& rule)>;

// Resolver for machines that are expected to be deterministic; throws if a
// two-outcome rule is ever reached.
Resolver deterministic_resolver();

struct CollisionGroup {
    Rational time;
    Rational position;
    std::vector<std::size_t> participants;  // indices into config.signals
};

// All earliest-time collision groups strictly after config.time, sorted by
// position. Empty iff no future collision exists.
std::vector<CollisionGroup> next_collisions(const Configuration& config, const std::vector<Rational>& speeds);

class EngineError : public std::runtime_error {
public:
    enum class Code { NoFutureCollision, MalformedSimultaneity };
    EngineError(Code c, const std::string& msg) : std::runtime_error(msg), code(c) {}
    Code code;
};

struct StepResult {
    Configuration config;
    std::vector<CollisionEvent> events;  // position-ascending, all at the same time
};

// Advances to the earliest collision time; applies the exactly-matching rule
// to each same-time group (identity crossing otherwise). Throws EngineError
// with NoFutureCollision when the configuration is quiescent.
StepResult step(const Configuration& config, const Machine& machine, const Resolver& resolver,
                std::size_t first_event_index = 0);

Trace run(const Machine& machine, const Budget& budget, const Resolver& resolver);
Trace run(const Machine& machine, const Budget& budget = {});  // deterministic machines

// Replays trace events on top of `initial`; returns the configuration at the
// last event (used for trace verification and import).
Configuration replay_events(const Machine& machine, const Configuration& initial,
                            const std::vector<CollisionEvent>& events);

// One signal's straight world-line segment, from its creation (initial
// configuration or producing event) to its consuming event or the end of the
// trace. Shared by the DAG builder and the SVG renderer.
struct WorldLine {
    MetaId meta;
    Rational birth_time, birth_pos;
    int producer;                        // event index, -1 for initial configuration
    std::optional<std::size_t> consumer; // event index
    Rational end_time, end_pos;          // consumer point, or final configuration point
};

std::vector<WorldLine> world_lines(const Machine& machine, const Trace& trace);

struct CollisionDag {
    struct Edge {
        int from;  // producing event index, -1 for initial configuration
        std::size_t to;
        MetaId meta;
    };
    std::size_t vertex_count = 0;
    std::vector<Edge> edges;
    bool partial = false;  // true when built from a budget-exhausted trace
};

CollisionDag collision_dag(const Machine& machine, const Trace& trace);

struct Measures {
    std::size_t time_depth = 0;   // longest vertex chain in the DAG
    std::size_t space_width = 0;  // max number of coexisting signals
};

// Requires a complete (non-partial) DAG.
Measures complexity_measures(const CollisionDag& dag, const Trace& trace);

}  // namespace sigmach
