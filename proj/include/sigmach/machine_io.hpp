#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sigmach/engine.hpp"
#include "sigmach/machine.hpp"

namespace sigmach {

struct ParseError {
    std::size_t line = 0;  // 1-based
    std::size_t col = 0;   // 1-based
    std::string code;
    std::string message;

    std::string to_string() const;
};

struct ParseResult {
    std::optional<Machine> machine;  // present iff errors is empty
    std::vector<ParseError> errors;
};

// Parses an SMF document:
//
//   [metasignals]
//   a 1          # name speed
//   b -1
//   [rules]
//   a,b -> accept | a
//   [accept]
//   accept
//   [initial]
//   a@0
//   b@4
//
// Rationals are `p`, `-p` or `p/q` with q > 0. `#` starts a comment. The
// optional `[time]` section sets the initial configuration's time (default 0).
ParseResult parse_machine(std::string_view text);

// Canonical SMF output: fixed section order, meta-signals sorted by name,
// rules sorted by input-set names, rationals canonical. Stable across runs;
// two machines are semantically equal iff their serializations are equal.
std::string serialize_machine(const Machine& m);

bool machines_equal(const Machine& a, const Machine& b);

// FNV-1a 64-bit hash of the canonical serialization; the trace format embeds
// it so traces can be checked against the machine they came from.
std::uint64_t machine_hash(const Machine& m);

// Line-oriented event log; self-contained enough to re-render (meta table and
// initial configuration repeated in the header).
std::string export_trace(const Trace& t, const Machine& m);

struct TraceImport {
    std::optional<Trace> trace;
    std::vector<ParseError> errors;
};

// Parses and validates an exported trace against `m`: the embedded hash must
// match (HashMismatch otherwise) and replaying the events must reproduce the
// recorded final configuration.
TraceImport import_trace(std::string_view text, const Machine& m);

// Rebuilds a renderable (machine, trace) pair from a trace log alone, using
// the embedded meta table; no hash or rule binding is checked.
struct StandaloneTrace {
    Machine machine;
    Trace trace;
};
std::optional<StandaloneTrace> load_trace_standalone(std::string_view text, std::vector<ParseError>& errors);

}  // namespace sigmach
