#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "sigmach/geometry.hpp"
#include "sigmach/nondet.hpp"

namespace sigmach {

class CompileError : public std::runtime_error {
public:
    enum class Code { Precondition, ParameterInconsistency };
    CompileError(Code c, const std::string& msg) : std::runtime_error(msg), code(c) {}
    Code code;
};

struct CompileParams {
    std::optional<Rational> freeze_speed;  // collision-envelope sweep speed; default 2*S_max + 2
    Rational per_level_scale = Rational(1, 4);
    std::optional<Rational> leaf_pitch;    // room per leaf; default derived from a static run bound
    std::optional<Rational> capture_speed; // cloud capture; default derived
};

struct MetaProvenance {
    enum class Role {
        Original,     // a meta-signal of the source machine
        Frozen,       // envelope-frozen variant of an original
        Pending,      // suspended collision awaiting its message
        Message,      // encoded choice bit in flight
        ArmCarrier,   // advances the beam cursor and reports the read value
        FreezeSweep,
        ThawSweep,
        RawBeam,      // b_i before its level rewrites it
        BeamBit,      // 0_i / 1_i in a leaf
        ArmedBit,     // the cursor position of the beam
        UsedBit,
        BeamEnd,
        Wall,
        CloudScaffold,  // slots, transits, controls, relays, capture, activators
    };
    Role role;
    std::optional<MetaId> source;                 // original meta for per-meta variants
    std::optional<std::vector<MetaId>> source_set;  // colliding set for pendings
    std::string detail;
};

struct CompiledMachine {
    Machine dsm;  // deterministic by construction
    int k = 0;
    CloudSpec cloud;
    std::map<MetaId, MetaProvenance> provenance;
    std::set<MetaId> accept_family;  // every compiled variant of the accept signal
    std::map<MetaId, std::vector<MetaId>> pending_inputs;  // pending meta -> source set
    std::set<MetaId> pending_choice;  // pendings whose source rule has two outcomes
    std::map<MetaId, int> message_value;                   // message meta -> read bit value
    std::size_t original_meta_count = 0;
    Rational freeze_speed;
};

// Compiles a k-RNSM into a deterministic machine: stage 1 spreads the input
// over a 2^k-leaf fractal cloud with a distinct binary beam per leaf; stage 2
// wraps every collision in a freeze / read-bit / unfreeze envelope so leaf
// beta replays exactly the choice string beta.
CompiledMachine compile(const Machine& nn, int k, const CompileParams& params = {});

// The provenance sidecar table (one line per compiled meta-signal).
std::string provenance_table(const CompiledMachine& cm);

struct DsmVerdict {
    enum class State { Accepted, Rejected, Unknown } state = State::Unknown;
    std::optional<ChoiceString> leaf;  // beam of the leaf that produced accept
    std::string note;
};

DsmVerdict dsm_accepts(const CompiledMachine& cm, const Budget& budget);

struct EquivResult {
    std::optional<bool> equivalent;  // empty when a verdict is unknown
    AcceptVerdict nn_verdict;
    DsmVerdict dsm_verdict;
    std::string discrepancy;
};

EquivResult verify_equivalence(const Machine& nn, int k, const CompileParams& params, const Budget& budget,
                               int jobs = 1);

// Confirms that no un-frozen original signals collided inside any freeze
// window of the compiled run; violations mean the freeze speed was too small
// for this input.
ValidationReport freeze_window_check(const Trace& trace, const CompiledMachine& cm);

struct SpaceReport {
    std::size_t s = 0;          // max space width over the source machine's paths
    std::size_t dsm_width = 0;  // space width of the compiled run
    std::size_t bound_value = 0;  // k * 2^k * s
    std::optional<Rational> ratio;  // dsm_width / bound_value; empty when s = 0
};

SpaceReport space_report(const Machine& nn, int k, const Trace& compiled_trace,
                         std::span<const PathResult> nn_paths);

// Per-leaf sequences of resolved collisions (input set and chosen outcome),
// for checking leaf-path correspondence against the choice-string oracle.
struct LeafResolution {
    std::vector<MetaId> input_set;  // original metas
    int outcome = 0;
};
std::vector<std::vector<LeafResolution>> leaf_resolutions(const CompiledMachine& cm, const Trace& trace);

}  // namespace sigmach
