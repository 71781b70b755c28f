// sigmach: exact signal-machine simulator, nondeterministic path explorer and
// determinizing compiler, with SVG space-time diagrams.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "sigmach/determinize.hpp"
#include "sigmach/machine_io.hpp"
#include "sigmach/randmach.hpp"
#include "sigmach/render.hpp"

using namespace sigmach;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitReject = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBudget = 3;

std::optional<std::string> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

bool spill(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    return static_cast<bool>(out);
}

std::optional<Machine> load_machine(const std::string& path) {
    auto text = slurp(path);
    if (!text) {
        std::cerr << path << ": cannot read file\n";
        return std::nullopt;
    }
    auto res = parse_machine(*text);
    if (!res.machine) {
        for (const auto& e : res.errors) std::cerr << path << ":" << e.to_string() << "\n";
        return std::nullopt;
    }
    return std::move(res.machine);
}

std::optional<Rational> parse_rational_arg(const std::string& text, const char* what) {
    auto r = Rational::parse(text);
    if (!r) std::cerr << what << ": bad rational literal '" << text << "'\n";
    return r;
}

std::optional<ChoiceString> parse_bits(const std::string& text) {
    ChoiceString c;
    for (char ch : text) {
        if (ch != '0' && ch != '1') return std::nullopt;
        c.push_back(ch == '1');
    }
    return c;
}

void print_config(const Machine& m, const Configuration& cfg) {
    std::vector<const SignalInstance*> sigs;
    for (const auto& s : cfg.signals) sigs.push_back(&s);
    std::sort(sigs.begin(), sigs.end(), [&](const SignalInstance* a, const SignalInstance* b) {
        if (a->position != b->position) return a->position < b->position;
        return m.name_of(a->meta) < m.name_of(b->meta);
    });
    for (const auto* s : sigs) std::cout << "  " << m.name_of(s->meta) << "@" << s->position.str() << "\n";
}

int cmd_validate(const std::string& path) {
    auto text = slurp(path);
    if (!text) {
        std::cerr << path << ": cannot read file\n";
        return kExitUsage;
    }
    auto res = parse_machine(*text);
    if (!res.machine) {
        for (const auto& e : res.errors) std::cerr << path << ":" << e.to_string() << "\n";
        return kExitUsage;
    }
    auto rep = validate_machine(*res.machine);
    std::cout << rep.to_string();
    if (rep.ok()) {
        std::cout << "ok: " << res.machine->meta_count() << " meta-signals, " << res.machine->rules.size()
                  << " rules, " << res.machine->initial.signals.size() << " initial signals, "
                  << (is_deterministic(*res.machine) ? "deterministic" : "nondeterministic") << "\n";
        return kExitOk;
    }
    return kExitUsage;
}

struct SimulateArgs {
    std::string machine_path;
    std::size_t max_events = 10000;
    std::string until, choices, svg_out, trace_out;
};

int cmd_simulate(const SimulateArgs& a) {
    auto m = load_machine(a.machine_path);
    if (!m) return kExitUsage;
    Budget budget;
    budget.max_events = a.max_events;
    if (!a.until.empty()) {
        auto t = parse_rational_arg(a.until, "--until");
        if (!t) return kExitUsage;
        budget.time_horizon = *t;
    }

    Trace trace;
    if (!a.choices.empty()) {
        auto bits = parse_bits(a.choices);
        if (!bits) {
            std::cerr << "--choices must be a string of 0s and 1s\n";
            return kExitUsage;
        }
        trace = run_with_choices(*m, *bits, budget).trace;
    } else if (is_deterministic(*m)) {
        trace = run(*m, budget);
    } else {
        std::cerr << "machine is nondeterministic; resolve it with --choices BITS\n";
        return kExitUsage;
    }

    std::cout << "events " << trace.events.size() << "\n";
    std::cout << "halt " << halt_name(trace.halt) << "\n";
    std::cout << "final t=" << trace.final.time.str() << "\n";
    print_config(*m, trace.final);
    if (m->accept) std::cout << (accept_event(*m, trace) ? "ACCEPT" : "REJECT") << "\n";

    if (!a.trace_out.empty() && !spill(a.trace_out, export_trace(trace, *m))) {
        std::cerr << a.trace_out << ": cannot write\n";
        return kExitUsage;
    }
    if (!a.svg_out.empty() && !spill(a.svg_out, render_svg(*m, trace))) {
        std::cerr << a.svg_out << ": cannot write\n";
        return kExitUsage;
    }
    return trace.halt == Halt::BudgetExhausted ? kExitBudget : kExitOk;
}

struct EnumerateArgs {
    std::string machine_path;
    int k = 1;
    std::size_t max_events = 10000;
    bool json = false;
    int jobs = 1;
};

int cmd_enumerate(const EnumerateArgs& a) {
    auto m = load_machine(a.machine_path);
    if (!m) return kExitUsage;
    auto krep = static_k_rnsm_check(*m, a.k);
    if (!krep.ok()) {
        std::cerr << krep.to_string();
        return kExitUsage;
    }
    Budget budget;
    budget.max_events = a.max_events;
    auto paths = enumerate_paths(*m, a.k, budget, a.jobs);
    auto runtime = runtime_k_rnsm_report(paths);

    std::optional<ChoiceString> witness;
    for (const auto& p : paths)
        if (p.accepted && !witness) witness = p.choices;

    if (a.json) {
        ordered_json doc;
        doc["k"] = a.k;
        doc["paths"] = ordered_json::array();
        for (const auto& p : paths) {
            ordered_json jp;
            jp["choices"] = choices_str(p.choices);
            jp["events"] = p.trace.events.size();
            jp["halt"] = halt_name(p.trace.halt);
            jp["accepted"] = p.accepted;
            if (p.collisions_before_accept) jp["collisions_before_accept"] = *p.collisions_before_accept;
            jp["trace_group"] = p.trace_group;
            doc["paths"].push_back(jp);
        }
        doc["conformant"] = runtime.ok();
        doc["accepted"] = witness.has_value();
        if (witness) doc["witness"] = choices_str(*witness);
        std::cout << doc.dump(2) << "\n";
    } else {
        for (const auto& p : paths) {
            std::cout << "path " << choices_str(p.choices) << " events=" << p.trace.events.size() << " halt="
                      << halt_name(p.trace.halt) << (p.accepted ? " ACCEPT" : "") << " group=" << p.trace_group
                      << "\n";
        }
        if (!runtime.ok()) std::cout << runtime.to_string();
        if (witness) std::cout << "ACCEPT witness=" << choices_str(*witness) << "\n";
        else std::cout << "REJECT\n";
    }
    return witness ? kExitOk : kExitReject;
}

struct CompileArgs {
    std::string machine_path, out_path, provenance_path;
    int k = 1;
    std::string freeze_speed, scale;
};

int cmd_compile(const CompileArgs& a) {
    auto m = load_machine(a.machine_path);
    if (!m) return kExitUsage;
    CompileParams params;
    if (!a.freeze_speed.empty()) {
        auto r = parse_rational_arg(a.freeze_speed, "--freeze-speed");
        if (!r) return kExitUsage;
        params.freeze_speed = *r;
    }
    if (!a.scale.empty()) {
        auto r = parse_rational_arg(a.scale, "--scale");
        if (!r) return kExitUsage;
        params.per_level_scale = *r;
    }
    try {
        auto cm = compile(*m, a.k, params);
        if (!spill(a.out_path, serialize_machine(cm.dsm))) {
            std::cerr << a.out_path << ": cannot write\n";
            return kExitUsage;
        }
        if (!a.provenance_path.empty() && !spill(a.provenance_path, provenance_table(cm))) {
            std::cerr << a.provenance_path << ": cannot write\n";
            return kExitUsage;
        }
        std::cout << "compiled: " << cm.dsm.meta_count() << " meta-signals, " << cm.dsm.rules.size() << " rules, "
                  << cm.cloud.leaves.size() << " leaves\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "compile failed: " << e.what() << "\n";
        return kExitUsage;
    }
}

struct EquivArgs {
    std::string machine_path;
    int k = 1;
    std::uint64_t seed = 0;
    int count = 0;
    std::size_t max_events = 500000;
    int jobs = 1;
};

int cmd_equiv(const EquivArgs& a) {
    Budget budget;
    budget.max_events = a.max_events;
    CompileParams params;

    std::vector<std::pair<std::string, Machine>> machines;
    if (!a.machine_path.empty()) {
        auto m = load_machine(a.machine_path);
        if (!m) return kExitUsage;
        machines.emplace_back(a.machine_path, std::move(*m));
    }
    for (int i = 0; i < a.count; ++i)
        machines.emplace_back("random#" + std::to_string(i), random_krnsm(a.seed, i, a.k, budget));
    if (machines.empty()) {
        std::cerr << "nothing to check: give a machine file or --count N\n";
        return kExitUsage;
    }

    int equivalent = 0, unknown = 0;
    for (auto& [name, m] : machines) {
        try {
            auto r = verify_equivalence(m, a.k, params, budget, a.jobs);
            if (!r.equivalent) {
                ++unknown;
                std::cout << name << ": UNKNOWN (" << r.dsm_verdict.note << ")\n";
            } else if (*r.equivalent) {
                ++equivalent;
                std::cout << name << ": equivalent ("
                          << (r.nn_verdict.accepted ? "accepts" : "rejects") << ")\n";
            } else {
                std::cout << name << ": MISMATCH " << r.discrepancy << "\n";
            }
        } catch (const std::exception& e) {
            std::cout << name << ": ERROR " << e.what() << "\n";
        }
    }
    std::cout << equivalent << "/" << machines.size() << " equivalent\n";
    if (unknown) return kExitBudget;
    return equivalent == static_cast<int>(machines.size()) ? kExitOk : kExitReject;
}

int cmd_render(const std::string& trace_path, const std::string& svg_out) {
    auto text = slurp(trace_path);
    if (!text) {
        std::cerr << trace_path << ": cannot read file\n";
        return kExitUsage;
    }
    std::vector<ParseError> errors;
    auto st = load_trace_standalone(*text, errors);
    if (!st) {
        for (const auto& e : errors) std::cerr << trace_path << ":" << e.to_string() << "\n";
        return kExitUsage;
    }
    if (!spill(svg_out, render_svg(st->machine, st->trace))) {
        std::cerr << svg_out << ": cannot write\n";
        return kExitUsage;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact-arithmetic signal machine toolkit"};
    app.require_subcommand(1);

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "check a machine description");
    validate->add_option("machine", validate_path, "SMF machine file")->required();

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "run a machine");
    simulate->add_option("machine", sim.machine_path, "SMF machine file")->required();
    simulate->add_option("--max-events", sim.max_events, "event budget");
    simulate->add_option("--until", sim.until, "time horizon (rational)");
    simulate->add_option("--choices", sim.choices, "choice bits for nondeterministic rules");
    simulate->add_option("--svg", sim.svg_out, "write a space-time diagram");
    simulate->add_option("--trace", sim.trace_out, "write the event log");

    EnumerateArgs en;
    auto* enumerate = app.add_subcommand("enumerate", "run all 2^k choice paths");
    enumerate->add_option("machine", en.machine_path, "SMF machine file")->required();
    enumerate->add_option("--k", en.k, "choice-string length")->required();
    enumerate->add_option("--max-events", en.max_events, "event budget per path");
    enumerate->add_flag("--json", en.json, "JSON output");
    enumerate->add_option("--jobs", en.jobs, "parallel path evaluation");

    CompileArgs co;
    auto* compile_cmd = app.add_subcommand("compile", "determinize a k-RNSM");
    compile_cmd->add_option("machine", co.machine_path, "SMF machine file")->required();
    compile_cmd->add_option("--k", co.k, "collision bound")->required();
    compile_cmd->add_option("--freeze-speed", co.freeze_speed, "envelope sweep speed (rational)");
    compile_cmd->add_option("--scale", co.scale, "per-level scale factor (rational)");
    compile_cmd->add_option("-o,--output", co.out_path, "output SMF file")->required();
    compile_cmd->add_option("--provenance", co.provenance_path, "write the meta-signal provenance table");

    EquivArgs eq;
    auto* equiv = app.add_subcommand("equiv", "compare a machine against its determinization");
    equiv->add_option("machine", eq.machine_path, "SMF machine file");
    equiv->add_option("--k", eq.k, "collision bound")->required();
    equiv->add_option("--seed", eq.seed, "random harness seed");
    equiv->add_option("--count", eq.count, "number of seeded random machines");
    equiv->add_option("--max-events", eq.max_events, "event budget");
    equiv->add_option("--jobs", eq.jobs, "parallel path evaluation");

    std::string render_trace, render_svg_out;
    auto* render_cmd = app.add_subcommand("render", "render an exported trace");
    render_cmd->add_option("trace", render_trace, "trace log file")->required();
    render_cmd->add_option("--svg", render_svg_out, "output SVG file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*validate) return cmd_validate(validate_path);
        if (*simulate) return cmd_simulate(sim);
        if (*enumerate) return cmd_enumerate(en);
        if (*compile_cmd) return cmd_compile(co);
        if (*equiv) return cmd_equiv(eq);
        if (*render_cmd) return cmd_render(render_trace, render_svg_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
