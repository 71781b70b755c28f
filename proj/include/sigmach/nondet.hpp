#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sigmach/engine.hpp"

namespace sigmach {

// Finite bit sequence resolving nondeterministic collisions in order; bit i
// belongs to the (i+1)-th collision of the run, counting every collision
// (identity crossings and single-outcome rules consume their bit silently).
using ChoiceString = std::vector<std::uint8_t>;

std::string choices_str(const ChoiceString& c);
ChoiceString choices_from_index(std::uint64_t index, int k);  // bit 0 of the string = most significant

struct PathResult {
    ChoiceString choices;
    Trace trace;
    bool accepted = false;
    std::optional<std::size_t> collisions_before_accept;
    std::vector<std::string> violations;  // runtime k-RNSM violations on this path
    std::size_t trace_group = 0;          // index of the first path with an identical trace
};

// Runs the machine, resolving the i-th collision's two-outcome rule (if any)
// with choices[i]; halts with ChoicesExhausted once |choices| collisions have
// happened. Throws EngineError-style logic error only on resolver misuse.
PathResult run_with_choices(const Machine& machine, const ChoiceString& choices, const Budget& budget);

// All 2^k paths in choice-string order (numeric order of the k-bit strings).
// jobs > 1 evaluates paths concurrently; results are order-independent of
// scheduling.
std::vector<PathResult> enumerate_paths(const Machine& machine, int k, const Budget& budget, int jobs = 1);

struct AcceptVerdict {
    bool accepted = false;
    std::optional<ChoiceString> witness;  // lexicographically least accepting string
};

AcceptVerdict accepts(const Machine& machine, int k, const Budget& budget, int jobs = 1);

// Aggregates per-path runtime violations; empty report certifies the machine
// k-RNSM-conformant on this input.
ValidationReport runtime_k_rnsm_report(std::span<const PathResult> results);

// Index of the event whose outgoing set contains the accept meta-signal, or
// nullopt. An accept signal already present in the initial configuration is
// reported as acceptance with zero prior collisions.
std::optional<std::size_t> accept_event(const Machine& machine, const Trace& trace);

}  // namespace sigmach
