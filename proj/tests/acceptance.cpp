// Acceptance suite: one line per criterion, exit nonzero on any failure.
// Every expected value is exact; no tolerances appear anywhere.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "sigmach/determinize.hpp"
#include "sigmach/machine_io.hpp"
#include "sigmach/randmach.hpp"
#include "sigmach/render.hpp"

using namespace sigmach;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& what) {
    std::printf("criterion %d %s: %s\n", criterion, pass ? "PASS" : "FAIL", what.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

Configuration originals_at(const Machine& m, const Configuration& cfg, std::size_t n_orig) {
    Configuration out;
    out.time = cfg.time;
    for (const auto& s : cfg.signals)
        if (s.meta < n_orig) out.signals.push_back(s);
    std::sort(out.signals.begin(), out.signals.end(), [](const SignalInstance& a, const SignalInstance& b) {
        if (a.position != b.position) return a.position < b.position;
        return a.meta < b.meta;
    });
    return out;
}

// extrapolates a halted configuration to a later instant (no collision can
// occur in between when the run halted quiescent or at its horizon)
Configuration advance_config(const Machine& m, Configuration cfg, const Rational& t) {
    Rational dt = t - cfg.time;
    for (auto& s : cfg.signals) s.position += m.speed_of(s.meta) * dt;
    cfg.time = t;
    return cfg;
}

Machine deterministic_variant(Machine m) {
    for (auto& r : m.rules)
        if (r.outcomes.size() > 1) r.outcomes.resize(1);
    return m;
}

// --- 1. midpoint exactness ---------------------------------------------------

void criterion1() {
    RandomStream rng(0x5151u);
    int checked = 0;
    bool ok = true;
    while (checked < 1000) {
        Rational x1(rng.range(-500, 500), rng.range(1, 60));
        Rational x2(rng.range(-500, 500), rng.range(1, 60));
        if (x1 == x2) continue;
        ++checked;
        auto mm = build_middle_machine(x1, x2);
        auto tr = run(mm.machine, {});
        bool found = false;
        for (const auto& s : tr.final.signals)
            if (s.meta == mm.mid) found = s.position == (x1 + x2) / Rational(2);
        if (tr.halt != Halt::Quiescent || !found) {
            ok = false;
            break;
        }
    }
    report(1, ok, "midpoint construction places mid at (x1+x2)/2 exactly, 1000 random rational pairs");
}

// --- 2. freeze round trip ----------------------------------------------------

void criterion2() {
    int checked = 0;
    bool ok = true;
    std::uint64_t seed = 0;
    while (checked < 100 && seed < 4000) {
        Machine m = deterministic_variant(random_machine(0xF0F0u + seed++));
        if (!validate_machine(m).ok() || m.initial.signals.empty()) continue;

        Rational smax = m.max_abs_speed();
        Rational xmin = m.initial.signals[0].position, xmax = xmin;
        for (const auto& s : m.initial.signals) {
            xmin = min(xmin, s.position);
            xmax = max(xmax, s.position);
        }
        Rational x0 = xmin - 1;
        Rational f = smax * 2 + 2;
        if (auto tc = first_collision_time(m)) f = max(f, smax + (xmax - x0) / *tc + 1);

        Rational w = (seed % 2) ? Rational(0) : Rational(1, 2);  // frozen beam speed
        if (w == f) continue;
        Rational tau = 2;
        Rational d = f * tau / (f - w);  // uniform suspension per signal
        Rational horizon = 40;

        Budget base_b;
        base_b.time_horizon = horizon - d;
        auto base = run(m, base_b);
        if (base.halt == Halt::BudgetExhausted) continue;  // Zeno input, not a freeze question

        auto [aug, fm] = add_freeze_support(m, w, f);
        aug.add_initial(fm.freeze, x0);
        aug.add_initial(fm.unfreeze, x0 - f * tau);
        Budget frozen_b;
        frozen_b.time_horizon = horizon;
        frozen_b.max_events = 100000;
        auto frozen = run(aug, frozen_b);
        if (frozen.halt == Halt::BudgetExhausted) continue;

        // compare at matching instants: frozen time H corresponds to base H - d
        auto want = originals_at(m, advance_config(m, base.final, horizon - d), m.meta_count());
        auto got = originals_at(aug, advance_config(aug, frozen.final, horizon), m.meta_count());
        bool same = want.signals.size() == got.signals.size();
        for (std::size_t i = 0; same && i < want.signals.size(); ++i)
            same = got.signals[i].meta == want.signals[i].meta &&
                   got.signals[i].position == want.signals[i].position + w * d;
        if (!same) {
            ok = false;
            break;
        }
        ++checked;
    }
    std::ostringstream os;
    os << "freeze/unfreeze equals the unfrozen run shifted by frozen_speed*suspension, " << checked
       << " machines, exact";
    report(2, ok && checked == 100, os.str());
}

// --- 3. scaling similarity ---------------------------------------------------

// restricted DAG over the projected original events; edges from scaffold
// events (the thaw line) count as initial edges
std::vector<std::tuple<int, int, MetaId>> original_dag(const Machine& m, const Trace& tr,
                                                       std::size_t n_orig) {
    std::vector<int> proj_index(tr.events.size(), -1);
    int next = 0;
    for (std::size_t e = 0; e < tr.events.size(); ++e) {
        bool all = true;
        for (MetaId in : tr.events[e].incoming) all &= in < n_orig;
        if (all) proj_index[e] = next++;
    }
    std::vector<std::tuple<int, int, MetaId>> edges;
    for (const auto& wl : world_lines(m, tr)) {
        if (wl.meta >= n_orig || !wl.consumer) continue;
        int to = proj_index[*wl.consumer];
        if (to < 0) continue;
        int from = wl.producer >= 0 ? proj_index[static_cast<std::size_t>(wl.producer)] : -1;
        edges.emplace_back(from, to, wl.meta);
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

void criterion3() {
    const Rational factors[] = {Rational(1, 2), Rational(1, 3), Rational(1, 4)};
    int checked = 0;
    bool ok = true;
    std::uint64_t seed = 0;
    while (checked < 50 && seed < 6000) {
        Machine m = deterministic_variant(random_machine(0x3C3Cu + seed++));
        if (!validate_machine(m).ok() || m.initial.signals.empty()) continue;
        Budget base_b;
        base_b.max_events = 300;
        auto base = run(m, base_b);
        if (base.halt != Halt::Quiescent || base.events.empty()) continue;
        auto base_edges = original_dag(m, base, m.meta_count());

        bool machine_ok = true;
        for (const auto& factor : factors) {
            auto sm = scale_computation(m, factor);
            Budget sb;
            sb.max_events = 100000;
            auto tr = run(sm.machine, sb);
            if (tr.halt != Halt::Quiescent) {
                machine_ok = false;
                break;
            }
            auto proj = project_original_events(sm.machine, tr, sm.original_meta_count);
            if (proj.size() != base.events.size()) {
                machine_ok = false;
                break;
            }
            for (std::size_t i = 0; i < proj.size() && machine_ok; ++i) {
                machine_ok = proj[i].incoming == base.events[i].incoming &&
                             proj[i].outgoing == base.events[i].outgoing;
                if (i > 0 && machine_ok)
                    machine_ok =
                        proj[i].time - proj[i - 1].time == factor * (base.events[i].time - base.events[i - 1].time) &&
                        proj[i].position - proj[i - 1].position ==
                            factor * (base.events[i].position - base.events[i - 1].position);
            }
            if (machine_ok) machine_ok = original_dag(sm.machine, tr, sm.original_meta_count) == base_edges;
            if (!machine_ok) break;
        }
        if (!machine_ok) {
            ok = false;
            break;
        }
        ++checked;
    }
    std::ostringstream os;
    os << "scaled runs are similarity images (isomorphic DAG, offsets scaled exactly), " << checked
       << " machines x factors {1/2,1/3,1/4}";
    report(3, ok && checked == 50, os.str());
}

// --- 4. fractal cloud --------------------------------------------------------

void criterion4() {
    bool ok = true;
    std::string detail;
    for (int k = 1; k <= 4 && ok; ++k) {
        Machine payload;
        auto p = payload.add_meta("p", 1);
        auto q = payload.add_meta("q", Rational(-1));
        payload.add_initial(p, 0);
        payload.add_initial(q, 6);
        auto cloud = build_fractal_cloud(payload, k, 0, 0);
        Budget b;
        b.max_events = 2000000;
        auto tr = run(cloud.machine, b);
        if (tr.halt != Halt::Quiescent) {
            ok = false;
            detail = "k=" + std::to_string(k) + " did not settle";
            break;
        }
        auto leaves = extract_leaves(tr, cloud.spec);
        if (leaves.size() != (std::size_t{1} << k)) ok = false;
        std::set<std::string> beams;
        for (std::size_t j = 0; j < leaves.size(); ++j) {
            beams.insert(choices_str(leaves[j].beam));
            if (choices_str(leaves[j].beam) != choices_str(choices_from_index(j, k))) ok = false;
            if (leaves[j].payload.signals.size() != 2) ok = false;
        }
        if (beams.size() != leaves.size()) ok = false;
        if (!ok) detail = "k=" + std::to_string(k);
    }
    report(4, ok, "fractal cloud yields exactly 2^k leaves whose beams are precisely {0,1}^k, k in 1..4" +
                      (detail.empty() ? "" : " (" + detail + ")"));
}

// --- 5 + 6 + 9. determinization equivalence, space report, runtime conformance

bool criterion9_pass = false;

void criteria569() {
    Budget budget;
    budget.max_events = 500000;
    CompileParams params;

    int total = 0, equal = 0;
    bool conformant_all = true;
    std::optional<Rational> max_ratio;
    std::string first_mismatch;

    for (int k = 1; k <= 3; ++k) {
        for (int i = 0; i < 100; ++i) {
            Machine nn = random_krnsm(0xE05Au + static_cast<std::uint64_t>(k), i, k, budget);
            ++total;

            auto paths = enumerate_paths(nn, k, budget);
            if (!runtime_k_rnsm_report(paths).ok()) conformant_all = false;

            AcceptVerdict oracle;
            for (const auto& p : paths)
                if (p.accepted && !oracle.accepted) {
                    oracle.accepted = true;
                    oracle.witness = p.choices;
                }

            try {
                auto cm = compile(nn, k, params);
                auto tr = run(cm.dsm, budget);
                if (tr.halt == Halt::BudgetExhausted) {
                    if (first_mismatch.empty())
                        first_mismatch = "k=" + std::to_string(k) + " #" + std::to_string(i) + " budget";
                    continue;
                }
                bool dsm_acc = false;
                for (const auto& ev : tr.events)
                    for (MetaId out : ev.outgoing)
                        if (cm.accept_family.count(out)) dsm_acc = true;
                if (dsm_acc == oracle.accepted) {
                    ++equal;
                } else if (first_mismatch.empty()) {
                    first_mismatch = "k=" + std::to_string(k) + " #" + std::to_string(i) +
                                     (oracle.accepted ? " nn accepts, dsm rejects" : " nn rejects, dsm accepts");
                }

                auto rep = space_report(nn, k, tr, paths);
                if (rep.ratio && (!max_ratio || *rep.ratio > *max_ratio)) max_ratio = rep.ratio;
            } catch (const std::exception& e) {
                if (first_mismatch.empty())
                    first_mismatch = "k=" + std::to_string(k) + " #" + std::to_string(i) + " threw: " + e.what();
            }
        }
    }

    std::ostringstream os5;
    os5 << "acceptance equivalence nn vs compiled DSM, " << equal << "/" << total << " seeded k-RNSMs";
    if (!first_mismatch.empty()) os5 << " (first failure: " << first_mismatch << ")";
    report(5, equal == total, os5.str());

    std::ostringstream os6;
    os6 << "space usage ratio dsm_width/(k*2^k*s) finite on the whole harness; observed max = "
        << (max_ratio ? max_ratio->str() : "none");
    report(6, max_ratio.has_value(), os6.str());

    // hand-built machine with two simultaneous collisions on every path
    Machine bad;
    auto a = bad.add_meta("a", 1);
    auto b = bad.add_meta("b", Rational(-1));
    bad.add_meta("accept", 0);
    bad.accept = bad.find_meta("accept");
    bad.add_initial(a, 0);
    bad.add_initial(b, 2);
    bad.add_initial(a, 10);
    bad.add_initial(b, 12);
    auto bad_paths = enumerate_paths(bad, 2, budget);
    bool bad_flagged = !runtime_k_rnsm_report(bad_paths).ok();
    criterion9_pass = conformant_all && bad_flagged;
}

// --- 7. determinism across repeats and parallelism ---------------------------

#ifndef SIGMACH_CLI_PATH
#define SIGMACH_CLI_PATH "sigmach"
#endif

std::optional<std::string> run_cli(const std::string& args, const std::string& out_file) {
    std::string cmd = std::string(SIGMACH_CLI_PATH) + " " + args + " > " + out_file + " 2>&1";
    if (std::system(cmd.c_str()) == -1) return std::nullopt;
    std::ifstream in(out_file, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void criterion7() {
    const char* smf =
        "[metasignals]\na 1\nb -1\naccept 0\n[rules]\na,b -> accept | a\n[accept]\naccept\n[initial]\na@0\nb@4\n";
    std::string dir = "acceptance_tmp";
    std::system(("mkdir -p " + dir).c_str());
    std::ofstream(dir + "/m.smf") << smf;

    bool ok = true;
    std::vector<std::string> sim_outs, svg_outs;
    for (int i = 0; i < 3; ++i) {
        std::string svg = dir + "/out" + std::to_string(i) + ".svg";
        auto out =
            run_cli("simulate " + dir + "/m.smf --choices 0 --svg " + svg, dir + "/sim" + std::to_string(i) + ".txt");
        if (!out) {
            ok = false;
            break;
        }
        sim_outs.push_back(*out);
        std::ifstream svg_in(svg, std::ios::binary);
        std::ostringstream os;
        os << svg_in.rdbuf();
        svg_outs.push_back(os.str());
    }
    ok = ok && sim_outs.size() == 3 && sim_outs[0] == sim_outs[1] && sim_outs[1] == sim_outs[2];
    ok = ok && svg_outs[0] == svg_outs[1] && svg_outs[1] == svg_outs[2];

    auto eq1 = run_cli("equiv --k 2 --count 3 --seed 7 --jobs 1", dir + "/eq1.txt");
    auto eq8 = run_cli("equiv --k 2 --count 3 --seed 7 --jobs 8", dir + "/eq8.txt");
    auto eq1b = run_cli("equiv --k 2 --count 3 --seed 7 --jobs 1", dir + "/eq1b.txt");
    ok = ok && eq1 && eq8 && eq1b && *eq1 == *eq8 && *eq1 == *eq1b;

    report(7, ok, "simulate and equiv outputs byte-identical across 3 repeats and jobs 1 vs 8");
}

// --- 8. format round trip ----------------------------------------------------

void criterion8() {
    int machines = 0, traces = 0;
    bool ok = true;
    std::uint64_t seed = 0;
    while (machines < 1000 && seed < 8000) {
        Machine m = random_machine(0x10AAu + seed++);
        if (!validate_machine(m).ok()) continue;
        ++machines;
        auto text = serialize_machine(m);
        auto back = parse_machine(text);
        if (!back.machine || !machines_equal(m, *back.machine) || serialize_machine(*back.machine) != text) {
            ok = false;
            break;
        }
        if (machines % 5 == 0) {
            Budget b;
            b.max_events = 100;
            auto path = run_with_choices(m, {1, 0, 1}, b);
            auto log = export_trace(path.trace, m);
            auto imp = import_trace(log, m);
            if (!imp.trace || !(*imp.trace == path.trace) || export_trace(*imp.trace, m) != log) {
                ok = false;
                break;
            }
            ++traces;
        }
    }
    std::ostringstream os;
    os << "parse(serialize) identity on " << machines << " machines; export/import identity on " << traces
       << " traces";
    report(8, ok && machines == 1000, os.str());
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criteria569();
    criterion7();
    criterion8();
    report(9, criterion9_pass,
           "no same-time collisions on any certified harness path; hand-built violator is reported");
    if (failures) std::printf("%d criterion(s) FAILED\n", failures);
    else std::printf("all criteria passed\n");
    return failures ? 1 : 0;
}
