#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sigmach/rational.hpp"

namespace sigmach {

using MetaId = std::uint32_t;

// Names starting with this character are minted by the construction modules
// (freeze support, clouds, the determinizing compiler). Machines fed into
// those modules must not already contain marked names.
inline constexpr char kReservedMark = '~';

struct SignalInstance {
    MetaId meta;
    Rational position;

    bool operator==(const SignalInstance& o) const { return meta == o.meta && position == o.position; }
};

// Time-stamped snapshot of the signals on the line. Equality is set
// semantics: the order signals are stored in carries no meaning.
struct Configuration {
    Rational time;
    std::vector<SignalInstance> signals;

    bool operator==(const Configuration& o) const;
};

// A collision rule: fires when the set of colliding meta-signals equals
// `input` exactly. One outcome set means deterministic, two means the engine
// asks a resolver which one applies.
struct Rule {
    std::vector<MetaId> input;                  // sorted, size >= 2
    std::vector<std::vector<MetaId>> outcomes;  // 1 or 2 entries, each sorted (possibly empty)
};

struct Machine {
    std::vector<std::string> meta_names;  // id -> name
    std::vector<Rational> speeds;         // id -> speed
    std::vector<Rule> rules;
    std::map<std::vector<MetaId>, std::size_t> rule_by_input;
    Configuration initial;
    std::optional<MetaId> accept;

    std::size_t meta_count() const { return meta_names.size(); }
    const std::string& name_of(MetaId m) const { return meta_names[m]; }
    const Rational& speed_of(MetaId m) const { return speeds[m]; }

    std::optional<MetaId> find_meta(std::string_view name) const;
    MetaId add_meta(std::string name, Rational speed);
    // Registers the rule; returns false when a rule for the same input set
    // already exists (the new one is dropped).
    bool add_rule(Rule rule);
    const Rule* rule_for(const std::vector<MetaId>& sorted_input) const;

    void add_initial(MetaId meta, Rational position) { initial.signals.push_back({meta, std::move(position)}); }
    void add_initial(std::string_view name, Rational position);

    // Largest |speed| over all meta-signals (zero for an empty alphabet).
    Rational max_abs_speed() const;
    bool has_reserved_names() const;
};

struct Violation {
    std::string code;
    std::string message;
    std::string where;
};

struct ValidationReport {
    std::vector<Violation> violations;
    std::vector<std::string> deferred;  // runtime conditions noted, not checked here

    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

// Reports every structural invariant violation; empty report iff well-formed.
ValidationReport validate_machine(const Machine& m);

// True iff every rule has exactly one outcome.
bool is_deterministic(const Machine& m);

// Statically checkable k-RNSM conditions. Runtime conditions (no simultaneous
// collisions, at most k collisions before accept) are listed as deferred.
ValidationReport static_k_rnsm_check(const Machine& m, int k);

// Helpers shared across modules.
std::vector<MetaId> sorted_ids(std::vector<MetaId> ids);
std::string meta_set_names(const Machine& m, const std::vector<MetaId>& ids);
// '+'-joined variant, safe inside generated meta-signal names
std::string meta_set_label(const Machine& m, const std::vector<MetaId>& ids);

}  // namespace sigmach
