#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "sigmach/engine.hpp"
#include "sigmach/machine.hpp"
#include "sigmach/nondet.hpp"

namespace sigmach {

class GeometryError : public std::runtime_error {
public:
    enum class Code {
        DegenerateInterval,
        SpeedClash,
        PayloadOverflow,
        MalformedCloud,
        ReservedInput,
    };
    GeometryError(Code c, const std::string& msg) : std::runtime_error(msg), code(c) {}
    Code code;
};

// ---- middle point (two stationary boundary signals) ------------------------

struct MiddleMachine {
    Machine machine;
    MetaId left, right, mid;
};

// The 3:1 bounce construction: a probe at speed 3 reflects off the far
// boundary and meets a speed-1 ray exactly at the midpoint. The run ends
// quiescent with `mid` parked at (x1+x2)/2.
MiddleMachine build_middle_machine(const Rational& x1, const Rational& x2);

// ---- freezing / unfreezing --------------------------------------------------

struct FrozenVariantMap {
    std::map<MetaId, MetaId> frozen;                   // original -> frozen variant
    std::map<std::vector<MetaId>, MetaId> frozen_set;  // rule input set -> frozen collision
    MetaId freeze, unfreeze;
    Rational frozen_speed, freeze_speed;
};

// Augments the machine with frozen variants of every meta-signal and of every
// rule-input set, plus `freeze`/`unfreeze` carrier signals at freeze_speed.
// The caller launches carriers by placing instances in a configuration.
std::pair<Machine, FrozenVariantMap> add_freeze_support(const Machine& m, const Rational& frozen_speed,
                                                        const Rational& freeze_speed);

// ---- scaling ----------------------------------------------------------------

struct ScaledMachine {
    Machine machine;
    Rational factor;
    std::size_t original_meta_count;  // metas [0, n) are the original machine's
    FrozenVariantMap freeze;
    MetaId scaler;
};

// Freezes the computation before its first collision, contracts the parallel
// frozen beam by `factor` with a crossing-line construction, and unfreezes.
// The unfrozen run is geometrically similar to the original: same collision
// DAG, all inter-event offsets multiplied by factor.
ScaledMachine scale_computation(const Machine& m, const Rational& factor);

// Events of a scaled (or otherwise augmented) run that belong to the original
// machine: identity crossings among original metas and applications of the
// original rules, in trace order.
std::vector<CollisionEvent> project_original_events(const Machine& augmented, const Trace& trace,
                                                    std::size_t original_meta_count);

// ---- fractal cloud ----------------------------------------------------------

struct CloudLeaf {
    std::size_t index = 0;       // beam read as a binary number, bit 1 most significant
    ChoiceString beam;
    Rational region_left, region_right;
    Configuration payload;       // positions in cloud coordinates, metas of the payload machine
};

struct CloudLeafSpec {
    std::string path;  // k branch bits, left = 0
    ChoiceString beam;
    Rational region_left, region_right;
    Rational map_scale, map_offset;  // captured position -> leaf position
};

// What a content meta-signal of the built cloud stands for.
struct CloudContentInfo {
    enum class Kind { Payload, RawBit, BitZero, BitOne, ArmedZero, ArmedOne, BeamEnd };
    Kind kind;
    int leaf = -1;       // leaf index for leaf-slot metas, -1 for earlier phases
    MetaId payload_meta = 0;
    int bit_index = 0;   // 1-based
};

struct CloudSpec {
    int k = 0;
    Rational per_level_scale;
    Rational capture_speed;  // the capture line starts at (t=0, capture_x0)
    Rational capture_x0;
    Rational span_left, span_right;
    std::vector<Rational> wall_positions;
    std::vector<CloudLeafSpec> leaves;           // ordered by beam index
    std::map<MetaId, CloudContentInfo> decode;   // leaf-slot metas (and active bits) -> meaning
    std::set<MetaId> scaffold;                   // walls, controls, relays, capture
    Rational completion_time;                    // all leaves landed by this time
};

struct CloudMachine {
    Machine machine;
    CloudSpec spec;
};

struct CloudOptions {
    Rational per_level_scale = Rational(1, 4);
    std::optional<Rational> capture_speed;  // computed when absent
    Rational min_capture_speed = 0;         // floor for the computed speed
    bool activate = false;                  // unfreeze leaf contents (compiler mode)
    Rational leaf_pitch_slack = 4;          // extra room per leaf region
    std::optional<Rational> leaf_pitch;     // override the computed leaf pitch
};

// Builds a machine whose run splits space into 2^k leaf regions, each holding
// a scaled frozen replica of the payload machine's initial configuration and
// a distinct k-bit binary beam (raw bit i rewritten to 0/1 at level i).
// The payload machine's rules are not carried over; callers that need live
// leaves (the determinizing compiler) pass activate=true and add their own
// collision rules.
CloudMachine build_fractal_cloud(const Machine& payload, int k, const Rational& span_left,
                                 const Rational& span_right, const CloudOptions& options = {});

// Decodes leaf regions, beams and payload replicas from the final
// configuration of a cloud run. Throws MalformedCloud on truncated runs or
// when the beam bits do not decode.
std::vector<CloudLeaf> extract_leaves(const Trace& trace, const CloudSpec& spec);

// Smallest |v_a - v_b| over meta pairs with distinct speeds (used for static
// run-extent bounds); nullopt when no two speeds differ.
std::optional<Rational> min_speed_gap(const Machine& m);

// First future collision time of the machine's initial configuration.
std::optional<Rational> first_collision_time(const Machine& m);

}  // namespace sigmach
