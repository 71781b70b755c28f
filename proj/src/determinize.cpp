#include "sigmach/determinize.hpp"

#include <bit>
#include <algorithm>
#include <sstream>

namespace sigmach {

namespace {

// every >=2-subset of the source metas with pairwise distinct speeds can
// collide and therefore needs an envelope rule
std::vector<std::vector<MetaId>> colliding_subsets(const Machine& nn) {
    std::vector<std::vector<MetaId>> out;
    const std::size_t n = nn.meta_count();
    if (n > 20) throw CompileError(CompileError::Code::Precondition, "alphabet too large to enumerate collisions");
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (std::popcount(mask) < 2) continue;
        std::vector<MetaId> set;
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            if (!((mask >> i) & 1)) continue;
            for (MetaId prev : set)
                if (nn.speed_of(prev) == nn.speed_of(static_cast<MetaId>(i))) ok = false;
            set.push_back(static_cast<MetaId>(i));
        }
        if (ok) out.push_back(std::move(set));
    }
    return out;
}

}  // namespace

CompiledMachine compile(const Machine& nn, int k, const CompileParams& params) {
    {
        auto rep = validate_machine(nn);
        if (!rep.ok())
            throw CompileError(CompileError::Code::Precondition, "source machine invalid:\n" + rep.to_string());
        auto krep = static_k_rnsm_check(nn, k);
        if (!krep.ok())
            throw CompileError(CompileError::Code::Precondition, "not a k-RNSM:\n" + krep.to_string());
    }

    const Rational smax = nn.max_abs_speed();

    // Leaf pitch: a static bound on how far k+1 collisions can wander.
    // Signals inside a hull of width W with speeds within [-V, V] and minimal
    // converging speed gap delta stay within a cone that grows by a factor of
    // at most (1 + 2V/delta) per collision.
    Rational lam_k = 1;
    for (int i = 0; i < k; ++i) lam_k = lam_k * params.per_level_scale;
    Rational pitch;
    if (params.leaf_pitch) {
        pitch = *params.leaf_pitch;
    } else {
        Rational hull = 0;
        if (!nn.initial.signals.empty()) {
            Rational lo = nn.initial.signals[0].position, hi = lo;
            for (const auto& s : nn.initial.signals) {
                lo = min(lo, s.position);
                hi = max(hi, s.position);
            }
            hull = hi - lo;
        }
        hull += Rational(2 * (k + 2));  // the beam rides along
        Rational growth = 1;
        if (auto delta = min_speed_gap(nn)) {
            Rational per = Rational(1) + smax * 2 / *delta;
            for (int i = 0; i <= k; ++i) growth = growth * per;
        }
        pitch = lam_k * hull * growth * 2 + 4;
    }

    // Envelope sweep speed. The sweeps (and the read/return latency) must fit
    // between consecutive leaf collisions. Collision times are multiples of
    // 1 / (D0 * G^(k+1)) where D0 collects initial-position denominators and
    // G the speed-difference numerators and speed denominators, so the
    // minimal nonzero gap is known statically; the leaf pitch over lambda^k
    // bounds the sweep distance in unscaled coordinates.
    Rational F;
    if (params.freeze_speed) {
        F = *params.freeze_speed;
    } else {
        Rational d0 = 1, g = 1;
        for (const auto& s : nn.initial.signals) d0 = Rational::integer_lcm(d0, s.position.denominator_value());
        for (const auto& v : nn.speeds) g = Rational::integer_lcm(g, v.denominator_value());
        for (std::size_t i = 0; i < nn.speeds.size(); ++i)
            for (std::size_t j = i + 1; j < nn.speeds.size(); ++j) {
                Rational dv = nn.speeds[i] - nn.speeds[j];
                if (!dv.is_zero()) g = Rational::integer_lcm(g, dv.numerator_abs_value());
            }
        Rational gap_inv = d0;
        for (int i = 0; i <= k; ++i) gap_inv = gap_inv * g;
        F = smax * 2 + 2 + gap_inv * (pitch / lam_k) * 8;
    }
    if (!(F > smax))
        throw CompileError(CompileError::Code::ParameterInconsistency,
                           "freeze speed must exceed every source speed");

    CloudOptions copts;
    copts.per_level_scale = params.per_level_scale;
    copts.capture_speed = params.capture_speed;
    // the activation line must outrun the envelope sweeps; otherwise a sweep
    // could reach content the activator has not thawed yet
    copts.min_capture_speed = F + 1;
    copts.activate = true;
    copts.leaf_pitch = pitch;

    CloudMachine cloud = [&] {
        try {
            return build_fractal_cloud(nn, k, 0, 0, copts);
        } catch (const GeometryError& e) {
            throw CompileError(CompileError::Code::ParameterInconsistency, e.what());
        }
    }();
    CompiledMachine cm;
    cm.dsm = std::move(cloud.machine);
    cm.cloud = std::move(cloud.spec);
    cm.k = k;
    cm.original_meta_count = nn.meta_count();
    cm.freeze_speed = F;
    Machine& M = cm.dsm;

    // stage-2 metas
    const Rational A = F * Rational(3, 4);  // arm carriers stay behind the sweep
    MetaId fzL = M.add_meta("~fzL", -F);
    MetaId fzR = M.add_meta("~fzR", F);
    MetaId uL = M.add_meta("~uL", -F);
    MetaId uR = M.add_meta("~uR", F);
    MetaId armF = M.add_meta("~cF", -A);
    MetaId armT = M.add_meta("~cT", -A);
    MetaId mFL = M.add_meta("~mFL", -F);
    MetaId mFR = M.add_meta("~mFR", F);
    MetaId mTL = M.add_meta("~mTL", -F);
    MetaId mTR = M.add_meta("~mTR", F);
    MetaId used = M.add_meta("~used", 0);
    cm.message_value[mFL] = 0;
    cm.message_value[mFR] = 0;
    cm.message_value[mTL] = 1;
    cm.message_value[mTR] = 1;

    std::map<MetaId, MetaId> frozen;  // original -> envelope-frozen variant
    for (MetaId id = 0; id < nn.meta_count(); ++id) {
        MetaId fz = M.add_meta("~fz:" + nn.name_of(id), 0);
        frozen[id] = fz;
        M.add_rule({{fzL, id}, {{fzL, fz}}});
        M.add_rule({{fzR, id}, {{fzR, fz}}});
        M.add_rule({{uL, fz}, {{uL, id}}});
        M.add_rule({{uR, fz}, {{uR, id}}});
    }

    // collision envelope: replace the collision by a pending marker, freeze
    // the leaf in both directions, read the armed beam bit, resolve
    for (const auto& S : colliding_subsets(nn)) {
        MetaId pending = M.add_meta("~p:" + meta_set_label(nn, S), 0);
        cm.pending_inputs[pending] = S;
        M.add_rule({S, {{pending, fzL, fzR}}});

        std::vector<MetaId> out0, out1;
        if (const Rule* r = nn.rule_for(S)) {
            out0 = r->outcomes[0];
            out1 = r->outcomes.size() == 2 ? r->outcomes[1] : r->outcomes[0];
            if (r->outcomes.size() == 2) cm.pending_choice.insert(pending);
        } else {
            out0 = out1 = S;  // identity crossing, wrapped all the same
        }
        auto resolve = [&](MetaId msg, std::vector<MetaId> outs) {
            outs.push_back(uL);
            outs.push_back(uR);
            M.add_rule({{pending, msg}, {std::vector<std::vector<MetaId>>{sorted_ids(std::move(outs))}}});
        };
        resolve(mFL, out0);
        resolve(mFR, out0);
        resolve(mTL, out1);
        resolve(mTR, out1);
    }

    // beam reading: the sweep consumes the armed bit and sends an arm carrier
    // down the beam; arming the next bit emits the message pair
    std::vector<MetaId> armed_zero(static_cast<std::size_t>(k) + 1), armed_one(static_cast<std::size_t>(k) + 1);
    for (int i = 1; i <= k; ++i) {
        std::string si = std::to_string(i);
        armed_zero[i] = M.add_meta("~A0_" + si, 0);
        armed_one[i] = M.add_meta("~A1_" + si, 0);
    }
    for (int i = 1; i <= k; ++i) {
        for (MetaId sweep : {fzL, fzR}) {
            M.add_rule({{sweep, armed_zero[i]}, {{sweep, used, armF}}});
            M.add_rule({{sweep, armed_one[i]}, {{sweep, used, armT}}});
        }
        MetaId zero = *M.find_meta("~0_" + std::to_string(i));
        MetaId one = *M.find_meta("~1_" + std::to_string(i));
        M.add_rule({{armF, zero}, {{armed_zero[i], mFL, mFR}}});
        M.add_rule({{armF, one}, {{armed_one[i], mFL, mFR}}});
        M.add_rule({{armT, zero}, {{armed_zero[i], mTL, mTR}}});
        M.add_rule({{armT, one}, {{armed_one[i], mTL, mTR}}});
    }
    MetaId bend = *M.find_meta("~bend");
    M.add_rule({{armF, bend}, {{bend, mFL, mFR}}});
    M.add_rule({{armT, bend}, {{bend, mTL, mTR}}});

    // walls absorb stage-2 traffic and any original signal leaving its leaf;
    // pair rules catch two absorbees arriving at the same instant (exact-set
    // matching would otherwise let both cross as an unhandled triple)
    {
        std::vector<MetaId> absorbees{fzL, fzR, uL, uR, mFL, mFR, mTL, mTR};
        for (MetaId id = 0; id < nn.meta_count(); ++id)
            if (!nn.speed_of(id).is_zero()) absorbees.push_back(id);  // stationary signals never reach a wall
        for (std::size_t j = 0; j < cm.cloud.wall_positions.size(); ++j) {
            MetaId wall = *M.find_meta("~w" + std::to_string(j));
            for (MetaId x : absorbees) M.add_rule({{wall, x}, {{wall}}});
            for (std::size_t a = 0; a < absorbees.size(); ++a)
                for (std::size_t b = a + 1; b < absorbees.size(); ++b) {
                    if (M.speed_of(absorbees[a]) == M.speed_of(absorbees[b])) continue;
                    M.add_rule({{wall, absorbees[a], absorbees[b]}, {{wall}}});
                }
        }
    }

    // accept family: the accept signal and every compiled variant of it
    MetaId acc = *nn.accept;
    cm.accept_family.insert(acc);
    cm.accept_family.insert(frozen[acc]);
    std::string acc_name = nn.name_of(acc);
    for (std::size_t i = 0; i < M.meta_count(); ++i) {
        const std::string& nm = M.meta_names[i];
        auto colon = nm.rfind(':');
        if (colon != std::string::npos && nm.substr(colon + 1) == acc_name &&
            (nm[1] == 's' || nm[1] == 'l' || nm[1] == 'r' || nm.rfind("~f", 0) == 0))
            cm.accept_family.insert(static_cast<MetaId>(i));
    }

    // provenance
    auto tag = [&](MetaId id, MetaProvenance::Role role, std::optional<MetaId> src = std::nullopt,
                   std::string detail = {}) {
        cm.provenance[id] = {role, src, std::nullopt, std::move(detail)};
    };
    for (MetaId id = 0; id < nn.meta_count(); ++id) tag(id, MetaProvenance::Role::Original, id);
    for (auto& [orig, fz] : frozen) tag(fz, MetaProvenance::Role::Frozen, orig);
    for (auto& [pending, S] : cm.pending_inputs) {
        cm.provenance[pending] = {MetaProvenance::Role::Pending, std::nullopt, S, meta_set_names(nn, S)};
    }
    for (MetaId id : {mFL, mFR, mTL, mTR})
        tag(id, MetaProvenance::Role::Message, std::nullopt, cm.message_value[id] ? "true" : "false");
    tag(armF, MetaProvenance::Role::ArmCarrier, std::nullopt, "false");
    tag(armT, MetaProvenance::Role::ArmCarrier, std::nullopt, "true");
    tag(fzL, MetaProvenance::Role::FreezeSweep);
    tag(fzR, MetaProvenance::Role::FreezeSweep);
    tag(uL, MetaProvenance::Role::ThawSweep);
    tag(uR, MetaProvenance::Role::ThawSweep);
    tag(used, MetaProvenance::Role::UsedBit);
    tag(bend, MetaProvenance::Role::BeamEnd);
    for (int i = 1; i <= k; ++i) {
        tag(*M.find_meta("~b" + std::to_string(i)), MetaProvenance::Role::RawBeam, std::nullopt, std::to_string(i));
        tag(*M.find_meta("~0_" + std::to_string(i)), MetaProvenance::Role::BeamBit, std::nullopt,
            "0_" + std::to_string(i));
        tag(*M.find_meta("~1_" + std::to_string(i)), MetaProvenance::Role::BeamBit, std::nullopt,
            "1_" + std::to_string(i));
        tag(armed_zero[i], MetaProvenance::Role::ArmedBit, std::nullopt, "0_" + std::to_string(i));
        tag(armed_one[i], MetaProvenance::Role::ArmedBit, std::nullopt, "1_" + std::to_string(i));
    }
    for (std::size_t i = 0; i < M.meta_count(); ++i) {
        MetaId id = static_cast<MetaId>(i);
        if (cm.provenance.count(id)) continue;
        if (M.name_of(id).rfind("~w", 0) == 0) tag(id, MetaProvenance::Role::Wall);
        else tag(id, MetaProvenance::Role::CloudScaffold, std::nullopt, M.name_of(id));
    }

    auto rep = validate_machine(M);
    if (!rep.ok())
        throw CompileError(CompileError::Code::ParameterInconsistency,
                           "compiled machine failed validation:\n" + rep.to_string());
    if (!is_deterministic(M))
        throw CompileError(CompileError::Code::ParameterInconsistency, "compiled machine is not deterministic");
    return cm;
}

std::string provenance_table(const CompiledMachine& cm) {
    static const char* role_names[] = {"original", "frozen",   "pending", "message", "arm",     "freeze", "thaw",
                                       "raw-beam", "beam-bit", "armed",   "used",    "beam-end", "wall",  "scaffold"};
    std::ostringstream os;
    for (std::size_t i = 0; i < cm.dsm.meta_count(); ++i) {
        MetaId id = static_cast<MetaId>(i);
        auto it = cm.provenance.find(id);
        os << cm.dsm.name_of(id) << "\t";
        if (it == cm.provenance.end()) {
            os << "scaffold\n";
            continue;
        }
        os << role_names[static_cast<int>(it->second.role)];
        if (it->second.source) os << "\t" << cm.dsm.name_of(*it->second.source);
        else if (!it->second.detail.empty()) os << "\t" << it->second.detail;
        os << "\n";
    }
    return os.str();
}

DsmVerdict dsm_accepts(const CompiledMachine& cm, const Budget& budget) {
    Trace tr = run(cm.dsm, budget);
    DsmVerdict v;
    if (tr.halt == Halt::BudgetExhausted) {
        v.state = DsmVerdict::State::Unknown;
        v.note = "event budget exhausted before the run settled; raise the budget";
        return v;
    }
    v.state = DsmVerdict::State::Rejected;
    for (const auto& ev : tr.events) {
        bool hit = false;
        for (MetaId out : ev.outgoing)
            if (cm.accept_family.count(out)) hit = true;
        if (!hit) continue;
        v.state = DsmVerdict::State::Accepted;
        if (ev.time > cm.cloud.completion_time) {
            for (const auto& leaf : cm.cloud.leaves)
                if (ev.position >= leaf.region_left && ev.position <= leaf.region_right) v.leaf = leaf.beam;
        }
        break;
    }
    return v;
}

EquivResult verify_equivalence(const Machine& nn, int k, const CompileParams& params, const Budget& budget,
                               int jobs) {
    EquivResult r;
    r.nn_verdict = accepts(nn, k, budget, jobs);
    CompiledMachine cm = compile(nn, k, params);
    r.dsm_verdict = dsm_accepts(cm, budget);
    if (r.dsm_verdict.state == DsmVerdict::State::Unknown) return r;
    bool dsm_acc = r.dsm_verdict.state == DsmVerdict::State::Accepted;
    r.equivalent = (dsm_acc == r.nn_verdict.accepted);
    if (!*r.equivalent) {
        std::ostringstream os;
        os << "source machine " << (r.nn_verdict.accepted ? "accepts" : "rejects") << " but compiled machine "
           << (dsm_acc ? "accepts" : "rejects");
        if (r.nn_verdict.witness) os << "; witness " << choices_str(*r.nn_verdict.witness);
        r.discrepancy = os.str();
    }
    return r;
}

ValidationReport freeze_window_check(const Trace& trace, const CompiledMachine& cm) {
    ValidationReport rep;
    auto leaf_of = [&](const Rational& x) -> int {
        for (std::size_t j = 0; j < cm.cloud.leaves.size(); ++j)
            if (x >= cm.cloud.leaves[j].region_left && x <= cm.cloud.leaves[j].region_right)
                return static_cast<int>(j);
        return -1;
    };
    MetaId fzL = *cm.dsm.find_meta("~fzL");
    MetaId fzR = *cm.dsm.find_meta("~fzR");
    MetaId uL = *cm.dsm.find_meta("~uL");
    MetaId uR = *cm.dsm.find_meta("~uR");

    // An envelope owns four sweeps (freeze pair, thaw pair); a new collision
    // while any sweep is live means the freeze speed was too small for this
    // input -- except when it struck at the very same instant (simultaneous
    // source collisions, which no sweep outruns), and except past the choice
    // horizon, where the leaf has no bits left, stalled envelopes never
    // resolve, and overlaps cannot affect acceptance.
    std::map<int, int> open_sweeps;
    std::map<int, Rational> last_pending_time;
    std::map<int, int> pendings_seen;
    for (const auto& ev : trace.events) {
        int leaf = leaf_of(ev.position);
        // other signals may cross a parked pending by identity; only rule
        // events create or consume one
        bool pending_created = false, pending_resolved = false;
        if (!ev.identity) {
            for (MetaId out : ev.outgoing)
                if (cm.pending_inputs.count(out)) pending_created = true;
            for (MetaId in : ev.incoming)
                if (cm.pending_inputs.count(in)) pending_resolved = true;
        }

        std::size_t originals = 0;
        for (MetaId in : ev.incoming)
            if (in < cm.original_meta_count) ++originals;

        if (pending_created) {
            if (leaf >= 0 && open_sweeps[leaf] > 0) {
                bool past_horizon = pendings_seen[leaf] >= cm.k;
                bool same_instant = last_pending_time.count(leaf) && last_pending_time.at(leaf) == ev.time;
                const char* code = past_horizon    ? "post_horizon_overlap"
                                   : same_instant ? "simultaneous_collisions"
                                                  : "freeze_window";
                const char* why = past_horizon    ? " overlapped a stalled envelope past the choice horizon"
                                  : same_instant ? " coincides with another collision"
                                                 : " fired before the previous envelope finished sweeping";
                rep.violations.push_back({code,
                                          "collision at t=" + ev.time.str() + " x=" + ev.position.str() + why,
                                          "leaf " + std::to_string(leaf)});
            }
            if (leaf >= 0) {
                open_sweeps[leaf] += 2;  // freeze pair launched
                last_pending_time[leaf] = ev.time;
                ++pendings_seen[leaf];
            }
        } else if (ev.identity && originals >= 2) {
            rep.violations.push_back({"skipped_collision",
                                      "collision of source signals at t=" + ev.time.str() + " x=" + ev.position.str() +
                                          " crossed unhandled (coincided with other traffic)",
                                      "leaf " + std::to_string(leaf)});
        }
        if (pending_resolved && leaf >= 0) open_sweeps[leaf] += 2;  // thaw pair launched

        bool wall_event = false;
        for (MetaId in : ev.incoming)
            if (cm.provenance.count(in) && cm.provenance.at(in).role == MetaProvenance::Role::Wall) wall_event = true;
        if (wall_event) {
            // a leftward sweep dies at its leaf's left wall, a rightward one
            // at the right wall; wall j is leaf j's left boundary
            int wall_index = -1;
            for (std::size_t j = 0; j < cm.cloud.wall_positions.size(); ++j)
                if (cm.cloud.wall_positions[j] == ev.position) wall_index = static_cast<int>(j);
            for (MetaId in : ev.incoming) {
                int owner = -1;
                if (in == fzL || in == uL) owner = wall_index;
                else if (in == fzR || in == uR) owner = wall_index - 1;
                else continue;
                if (owner >= 0 && owner < static_cast<int>(cm.cloud.leaves.size()) && open_sweeps[owner] > 0)
                    --open_sweeps[owner];
            }
        }
    }
    return rep;
}

SpaceReport space_report(const Machine& nn, int k, const Trace& compiled_trace,
                         std::span<const PathResult> nn_paths) {
    SpaceReport r;
    for (const auto& p : nn_paths) {
        auto dag = collision_dag(nn, p.trace);
        if (dag.partial) continue;
        r.s = std::max(r.s, complexity_measures(dag, p.trace).space_width);
    }
    {
        CollisionDag dag;  // width needs only the trace, not the edges
        dag.vertex_count = compiled_trace.events.size();
        dag.partial = compiled_trace.halt == Halt::BudgetExhausted;
        if (!dag.partial) r.dsm_width = complexity_measures(dag, compiled_trace).space_width;
    }
    r.bound_value = static_cast<std::size_t>(k) * (std::size_t{1} << k) * r.s;
    if (r.bound_value > 0)
        r.ratio = Rational(static_cast<long>(r.dsm_width)) / Rational(static_cast<long>(r.bound_value));
    return r;
}

std::vector<std::vector<LeafResolution>> leaf_resolutions(const CompiledMachine& cm, const Trace& trace) {
    std::vector<std::vector<LeafResolution>> out(cm.cloud.leaves.size());
    for (const auto& ev : trace.events) {
        // a resolution consumes {pending, message}
        std::optional<std::vector<MetaId>> set;
        std::optional<int> value;
        for (MetaId in : ev.incoming) {
            auto p = cm.pending_inputs.find(in);
            if (p != cm.pending_inputs.end()) set = p->second;
            auto mv = cm.message_value.find(in);
            if (mv != cm.message_value.end()) value = mv->second;
        }
        if (!set || !value) continue;
        bool choice = false;
        for (MetaId in : ev.incoming)
            if (cm.pending_choice.count(in)) choice = true;
        for (std::size_t j = 0; j < cm.cloud.leaves.size(); ++j)
            if (ev.position >= cm.cloud.leaves[j].region_left && ev.position <= cm.cloud.leaves[j].region_right) {
                out[j].push_back({*set, choice ? *value : 0});
                break;
            }
    }
    return out;
}

}  // namespace sigmach
