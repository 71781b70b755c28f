#include "sigmach/geometry.hpp"

#include <algorithm>

namespace sigmach {

namespace {

// world line x(t) = x0 + v * (t - t0)
struct Line {
    Rational t0, x0, v;
    Rational at(const Rational& t) const { return x0 + v * (t - t0); }
};

Rational cross_time(const Line& a, const Line& b) {
    return (b.x0 - b.v * b.t0 - a.x0 + a.v * a.t0) / (a.v - b.v);
}

void require_plain_names(const Machine& m, const char* who) {
    if (m.has_reserved_names())
        throw GeometryError(GeometryError::Code::ReservedInput,
                            std::string(who) + ": input machine uses reserved '~' names");
}

}  // namespace

std::optional<Rational> min_speed_gap(const Machine& m) {
    std::optional<Rational> best;
    for (std::size_t i = 0; i < m.speeds.size(); ++i)
        for (std::size_t j = i + 1; j < m.speeds.size(); ++j) {
            if (m.speeds[i] == m.speeds[j]) continue;
            Rational gap = (m.speeds[i] - m.speeds[j]).abs();
            if (!best || gap < *best) best = gap;
        }
    return best;
}

std::optional<Rational> first_collision_time(const Machine& m) {
    auto groups = next_collisions(m.initial, m.speeds);
    if (groups.empty()) return std::nullopt;
    return groups.front().time;
}

// ---- middle -----------------------------------------------------------------

MiddleMachine build_middle_machine(const Rational& x1, const Rational& x2) {
    if (x1 == x2) throw GeometryError(GeometryError::Code::DegenerateInterval, "x1 = x2");
    Rational dir = x2 > x1 ? Rational(1) : Rational(-1);

    MiddleMachine mm;
    Machine& m = mm.machine;
    mm.left = m.add_meta("left", 0);
    mm.right = m.add_meta("right", 0);
    MetaId probe = m.add_meta("probe", dir * Rational(3));
    MetaId back = m.add_meta("probeBack", dir * Rational(-3));
    MetaId ray = m.add_meta("ray", dir);
    mm.mid = m.add_meta("mid", 0);
    m.add_rule({{probe, mm.right}, {{mm.right, back}}});
    m.add_rule({{back, ray}, {{mm.mid}}});
    m.add_initial(mm.left, x1);
    m.add_initial(mm.right, x2);
    m.add_initial(probe, x1);
    m.add_initial(ray, x1);
    return mm;
}

// ---- freezing ---------------------------------------------------------------

std::pair<Machine, FrozenVariantMap> add_freeze_support(const Machine& m, const Rational& frozen_speed,
                                                        const Rational& freeze_speed) {
    require_plain_names(m, "add_freeze_support");
    Rational smax = m.max_abs_speed();
    if (!(freeze_speed.abs() > smax))
        throw GeometryError(GeometryError::Code::SpeedClash,
                            "freeze speed must exceed every signal speed in absolute value");
    if (frozen_speed == freeze_speed)
        throw GeometryError(GeometryError::Code::SpeedClash, "frozen speed equals the freeze speed");

    Machine out = m;
    FrozenVariantMap fm;
    fm.frozen_speed = frozen_speed;
    fm.freeze_speed = freeze_speed;
    fm.freeze = out.add_meta("~freeze", freeze_speed);
    fm.unfreeze = out.add_meta("~unfreeze", freeze_speed);

    const std::size_t n = m.meta_count();
    for (MetaId id = 0; id < n; ++id) {
        MetaId fz = out.add_meta("~f:" + m.name_of(id), frozen_speed);
        fm.frozen[id] = fz;
        out.add_rule({{fm.freeze, id}, {{fm.freeze, fz}}});
        out.add_rule({{fm.unfreeze, fz}, {{fm.unfreeze, id}}});
    }
    for (const auto& rule : m.rules) {
        MetaId fzset = out.add_meta("~F:" + meta_set_label(m, rule.input), frozen_speed);
        fm.frozen_set[rule.input] = fzset;
        std::vector<MetaId> freeze_in = rule.input;
        freeze_in.push_back(fm.freeze);
        out.add_rule({freeze_in, {{fm.freeze, fzset}}});
        Rule thaw;
        thaw.input = {fm.unfreeze, fzset};
        for (const auto& outcome : rule.outcomes) {
            std::vector<MetaId> o = outcome;
            o.push_back(fm.unfreeze);
            thaw.outcomes.push_back(sorted_ids(std::move(o)));
        }
        if (thaw.outcomes.size() == 2 && thaw.outcomes[0] == thaw.outcomes[1]) thaw.outcomes.pop_back();
        out.add_rule(std::move(thaw));
    }
    return {std::move(out), std::move(fm)};
}

// ---- scaling ----------------------------------------------------------------

ScaledMachine scale_computation(const Machine& m, const Rational& factor) {
    require_plain_names(m, "scale_computation");
    if (!(factor > Rational(0) && factor < Rational(1)))
        throw std::invalid_argument("scale factor must lie strictly between 0 and 1");
    auto rep = validate_machine(m);
    if (!rep.ok()) throw std::invalid_argument("scale_computation: machine does not validate");

    Rational smax = m.max_abs_speed();
    Rational xmin = 0, xmax = 0;
    if (!m.initial.signals.empty()) {
        xmin = xmax = m.initial.signals[0].position;
        for (const auto& s : m.initial.signals) {
            xmin = min(xmin, s.position);
            xmax = max(xmax, s.position);
        }
    }
    Rational x0 = xmin - 1;

    // the capture must finish strictly before the first collision
    Rational f = smax * 2 + 2;
    if (auto tc = first_collision_time(m)) f = max(f, smax + (xmax - x0) / *tc + 1);
    Rational c = f / Rational(2);
    // a stationary frozen beam crossed by the scaler emerges at speed w2 with
    // spatial factor (c - w2)/c; combined with the parallel capture and thaw
    // lines the resumed run is a similarity image with ratio `factor`
    Rational w2 = c * f * (Rational(1) - factor) / (f - factor * c);

    auto [aug, fm] = add_freeze_support(m, 0, f);
    ScaledMachine sm{std::move(aug), factor, m.meta_count(), fm, 0};
    Machine& out = sm.machine;
    sm.scaler = out.add_meta("~scale", c);
    for (auto& [orig, fz] : fm.frozen) {
        MetaId fz2 = out.add_meta("~g:" + m.name_of(orig), w2);
        out.add_rule({{sm.scaler, fz}, {{sm.scaler, fz2}}});
        out.add_rule({{fm.unfreeze, fz2}, {{fm.unfreeze, orig}}});
    }
    for (auto& [input, fzset] : fm.frozen_set) {
        MetaId fzset2 = out.add_meta("~G:" + meta_set_label(m, input), w2);
        out.add_rule({{sm.scaler, fzset}, {{sm.scaler, fzset2}}});
        Rule thaw;
        thaw.input = {fm.unfreeze, fzset2};
        for (const auto& outcome : m.rules[m.rule_by_input.at(input)].outcomes) {
            std::vector<MetaId> o = outcome;
            o.push_back(fm.unfreeze);
            thaw.outcomes.push_back(sorted_ids(std::move(o)));
        }
        if (thaw.outcomes.size() == 2 && thaw.outcomes[0] == thaw.outcomes[1]) thaw.outcomes.pop_back();
        out.add_rule(std::move(thaw));
    }

    // the scaler's last conversion bounds the thaw launch delay
    Rational s_last = 0;
    for (const auto& s : m.initial.signals) {
        Rational ti = (s.position - x0) / (f - m.speed_of(s.meta));
        Rational p = s.position + m.speed_of(s.meta) * ti;
        s_last = max(s_last, (p - x0) / c);
    }
    Rational tau = s_last * (f - c) / f + 1;

    out.add_initial(fm.freeze, x0);
    out.add_initial(sm.scaler, x0);
    out.add_initial(fm.unfreeze, x0 - f * tau);  // thaw line x = x0 + f (t - tau)
    return sm;
}

std::vector<CollisionEvent> project_original_events(const Machine& augmented, const Trace& trace,
                                                    std::size_t original_meta_count) {
    (void)augmented;
    std::vector<CollisionEvent> out;
    for (const auto& ev : trace.events) {
        bool all_original = true;
        for (MetaId mid : ev.incoming)
            if (mid >= original_meta_count) all_original = false;
        if (all_original) out.push_back(ev);
    }
    return out;
}

// ---- fractal cloud ----------------------------------------------------------

namespace {

// wall and beam coordinates carry this prime in their denominators, so they
// never coincide with collision coordinates of machines built from plain data
constexpr long kDodge = 9973;

struct Spawn {
    Rational time;
    Rational position;
    Rational speed;
    std::string name;
};

struct BranchPlan {
    std::string path;
    Rational slot_left;
    Rational scale;
};

}  // namespace

CloudMachine build_fractal_cloud(const Machine& payload, int k, const Rational& span_left,
                                 const Rational& span_right, const CloudOptions& options) {
    require_plain_names(payload, "build_fractal_cloud");
    if (k < 1) throw std::invalid_argument("cloud depth k must be >= 1");
    const Rational lambda = options.per_level_scale;
    if (!(lambda > Rational(0) && lambda < Rational(1, 2)))
        throw std::invalid_argument("per-level scale must lie in (0, 1/2)");

    // stage speeds: a leftward duplicator splits the stationary slot into two
    // transit beams; per-side stoppers are solved so both sides contract by
    // exactly lambda per level
    const Rational cd = 8, vt = 4;
    const Rational uL = vt * Rational(2) * lambda / (Rational(1) - lambda * Rational(2));
    const Rational uR = vt * Rational(2) * lambda / (Rational(3) - lambda * Rational(2));

    CloudMachine cm;
    Machine& M = cm.machine;
    CloudSpec& spec = cm.spec;
    spec.k = k;
    spec.per_level_scale = lambda;

    for (std::size_t i = 0; i < payload.meta_count(); ++i) M.add_meta(payload.meta_names[i], payload.speeds[i]);
    const Rational smax = payload.max_abs_speed();

    // content: beam end, bits b_k .. b_1 (bit 1 nearest the payload), payload
    Rational hull_lo = 0, hull_hi = 0;
    if (!payload.initial.signals.empty()) {
        hull_lo = hull_hi = payload.initial.signals[0].position;
        for (const auto& s : payload.initial.signals) {
            hull_lo = min(hull_lo, s.position);
            hull_hi = max(hull_hi, s.position);
        }
    }
    const Rational gapu = Rational(1) + Rational(1, kDodge);
    std::vector<MetaId> raw_bits(static_cast<std::size_t>(k) + 1);
    for (int i = 1; i <= k; ++i) raw_bits[i] = M.add_meta("~b" + std::to_string(i), 0);
    MetaId raw_end = M.add_meta("~bE", 0);

    struct ContentSignal {
        MetaId base;
        Rational position;
        Rational speed;
    };
    std::vector<ContentSignal> content;
    for (const auto& s : payload.initial.signals) content.push_back({s.meta, s.position, payload.speed_of(s.meta)});
    for (int i = 1; i <= k; ++i) content.push_back({raw_bits[i], hull_lo - Rational(2) - gapu * Rational(i), 0});
    content.push_back({raw_end, hull_lo - Rational(2) - gapu * Rational(k + 1), 0});

    Rational cx0 = content.front().position, cx1 = cx0;
    for (const auto& c : content) {
        cx0 = min(cx0, c.position);
        cx1 = max(cx1, c.position);
    }
    Rational x0 = cx0 - 1;

    // capture speed: outrun everything, finish before the first collision
    Rational f;
    {
        Rational bound = max(smax * 2 + 2, options.min_capture_speed);
        if (auto tc = first_collision_time(payload)) bound = max(bound, smax + (cx1 - x0) / *tc + 1);
        if (options.capture_speed) {
            if (*options.capture_speed < bound)
                throw GeometryError(GeometryError::Code::PayloadOverflow,
                                    "capture speed too small: payload collides before it is frozen");
            f = *options.capture_speed;
        } else {
            f = bound;
        }
    }
    spec.capture_speed = f;
    spec.capture_x0 = x0;

    std::vector<Rational> captured(content.size());
    Rational t_f = 0;
    for (std::size_t i = 0; i < content.size(); ++i) {
        Rational ti = (content[i].position - x0) / (f - content[i].speed);
        captured[i] = content[i].position + content[i].speed * ti;
        t_f = max(t_f, ti);
    }
    Rational p_min = captured[0], p_max = captured[0];
    for (const auto& p : captured) {
        p_min = min(p_min, p);
        p_max = max(p_max, p);
    }
    const Rational w0 = p_max - p_min;
    const Rational root_anchor = p_min;

    Rational lam_k = 1;
    for (int i = 0; i < k; ++i) lam_k = lam_k * lambda;

    // leaf pitch: the scaled content must fit, and every level's targets must
    // clear their source slot
    Rational pitch = lam_k * (w0 * 6 + 4) + options.leaf_pitch_slack;
    {
        // child anchors sit at parent +- pitch * 2^(k-l-1); that displacement
        // must clear the source slot plus the landed copy at every level
        Rational wl = w0;
        for (int l = 1; l <= k; ++l) {
            Rational disp_unit = 1;
            for (int i = 0; i < k - l - 1; ++i) disp_unit = disp_unit * 2;
            for (int i = 0; i < l + 1 - k; ++i) disp_unit = disp_unit / 2;
            pitch = max(pitch, (wl * (Rational(1) + lambda) + 2) / disp_unit);
            wl = wl * lambda;
        }
    }
    if (options.leaf_pitch) pitch = max(pitch, *options.leaf_pitch);
    const std::size_t nleaves = std::size_t{1} << k;

    std::vector<Rational> leaf_anchor(nleaves);
    for (std::size_t j = 0; j < nleaves; ++j)
        leaf_anchor[j] =
            root_anchor + pitch * Rational(2 * static_cast<long>(j) - static_cast<long>(nleaves) + 1, 2);
    spec.wall_positions.resize(nleaves + 1);
    for (std::size_t j = 0; j <= nleaves; ++j)
        spec.wall_positions[j] = leaf_anchor[0] - pitch / Rational(2) + pitch * Rational(static_cast<long>(j)) +
                                 Rational(1, kDodge);
    if (span_left != span_right) {
        if (spec.wall_positions.front() < span_left || spec.wall_positions.back() > span_right ||
            cx0 < span_left || cx1 > span_right)
            throw GeometryError(GeometryError::Code::PayloadOverflow,
                                "payload and its cloud do not fit inside the span");
    }
    spec.span_left = spec.wall_positions.front();
    spec.span_right = spec.wall_positions.back();

    auto block_anchor = [&](const std::string& path) {
        std::size_t lo = 0;
        for (char ch : path) lo = lo * 2 + (ch == '1');
        int rem = k - static_cast<int>(path.size());
        std::size_t width = std::size_t{1} << rem;
        lo <<= rem;
        return (leaf_anchor[lo] + leaf_anchor[lo + width - 1]) / Rational(2);
    };

    std::vector<Spawn> spawns;

    // walls materialize right after the capture completes, so live payload
    // signals never meet an absorbing wall before they are frozen
    for (std::size_t j = 0; j <= nleaves; ++j) {
        M.add_meta("~w" + std::to_string(j), 0);
        spawns.push_back({t_f + Rational(1, 2) + Rational(static_cast<long>(j), 1024), spec.wall_positions[j], 0,
                          "~w" + std::to_string(j)});
    }
    auto wall_id = [&](std::size_t j) { return *M.find_meta("~w" + std::to_string(j)); };
    auto first_wall_left_of = [&](const Rational& x) -> std::size_t {
        std::size_t best = 0;
        for (std::size_t j = 0; j <= nleaves; ++j)
            if (spec.wall_positions[j] < x) best = j;
        return best;
    };
    auto first_wall_right_of = [&](const Rational& x) -> std::size_t {
        for (std::size_t j = 0; j <= nleaves; ++j)
            if (spec.wall_positions[j] > x) return j;
        return nleaves;
    };

    MetaId cap = M.add_meta("~cap", f);
    std::vector<MetaId> bit_zero(static_cast<std::size_t>(k) + 1), bit_one(static_cast<std::size_t>(k) + 1);
    for (int i = 1; i <= k; ++i) {
        bit_zero[i] = M.add_meta("~0_" + std::to_string(i), 0);
        bit_one[i] = M.add_meta("~1_" + std::to_string(i), 0);
    }

    auto alive_bases = [&](const std::string& path) {
        std::vector<MetaId> bases;
        for (std::size_t i = 0; i < payload.meta_count(); ++i) bases.push_back(static_cast<MetaId>(i));
        bases.push_back(raw_end);
        for (int i = static_cast<int>(path.size()) + 1; i <= k; ++i) bases.push_back(raw_bits[i]);
        for (int i = 1; i <= static_cast<int>(path.size()); ++i)
            bases.push_back(path[i - 1] == '0' ? bit_zero[i] : bit_one[i]);
        return bases;
    };

    std::map<std::pair<std::string, MetaId>, MetaId> slot_meta;
    auto slot_of = [&](const std::string& path, MetaId base) {
        auto key = std::make_pair(path, base);
        auto it = slot_meta.find(key);
        if (it != slot_meta.end()) return it->second;
        std::string name = "~s" + path + ":" + M.name_of(base);
        MetaId id = M.add_meta(std::move(name), 0);
        slot_meta[key] = id;
        return id;
    };

    for (const auto& c : content) M.add_rule({{cap, c.base}, {{cap, slot_of("", c.base)}}});

    int relay_serial = 0;
    auto add_control_spawn = [&](const Rational& anchor_t, const Rational& anchor_x, const Rational& speed,
                                 const std::string& name) {
        Rational margin = Rational(1, 4) + Rational(relay_serial++, 512);
        spawns.push_back({anchor_t - margin, anchor_x - speed * margin, speed, name});
    };

    std::vector<BranchPlan> frontier{{std::string(), root_anchor, Rational(1)}};
    Rational level_start = t_f + 1;

    for (int level = 1; level <= k; ++level) {
        std::vector<BranchPlan> next;
        Rational level_end = level_start;
        for (const auto& br : frontier) {
            const Rational w = br.scale * w0;
            const Rational sa = br.slot_left;
            const std::string lpath = br.path + "0";
            const std::string rpath = br.path + "1";
            const Rational ta_L = block_anchor(lpath);
            const Rational ta_R = block_anchor(rpath);
            if (!(ta_L + lambda * w < sa) || !(ta_R > sa + w))
                throw GeometryError(GeometryError::Code::PayloadOverflow,
                                    "branch targets overlap their source slot");

            std::string tag = br.path.empty() ? std::string("_") : br.path;
            MetaId dup = M.add_meta("~d" + tag, -cd);
            MetaId el = M.add_meta("~eL" + tag, uL);
            MetaId er = M.add_meta("~eR" + tag, -uR);

            Line dup_line{level_start + 1, sa + w, -cd};
            Rational t1_left = dup_line.t0 + w / cd;  // last conversion (slot's left edge)
            Rational t1_right = dup_line.t0;          // first conversion (right edge)

            Rational thL = t1_left + (sa - ta_L) / vt;
            Line el_line{thL, ta_L, uL};
            Rational thR = t1_right + (ta_R + lambda * w - (sa + w)) / vt;
            Line er_line{thR, ta_R + lambda * w, -uR};

            Line left_last_transit{t1_right, sa + w, -vt};
            Line right_last_transit{t1_left, sa, vt};
            level_end = max(level_end, max(cross_time(el_line, left_last_transit),
                                           cross_time(er_line, right_last_transit)));

            add_control_spawn(dup_line.t0, dup_line.x0, -cd, M.name_of(dup));
            add_control_spawn(el_line.t0, el_line.x0, uL, M.name_of(el));
            add_control_spawn(er_line.t0, er_line.x0, -uR, M.name_of(er));

            for (MetaId base : alive_bases(br.path)) {
                MetaId src = slot_of(br.path, base);
                MetaId outL_base = base, outR_base = base;
                if (base == raw_bits[level]) {
                    outL_base = bit_zero[level];
                    outR_base = bit_one[level];
                }
                MetaId tl = M.add_meta("~l" + tag + ":" + std::string(M.name_of(outL_base)), -vt);
                MetaId tr = M.add_meta("~r" + tag + ":" + std::string(M.name_of(outR_base)), vt);
                M.add_rule({{dup, src}, {{dup, tl, tr}}});
                M.add_rule({{el, tl}, {{el, slot_of(lpath, outL_base)}}});
                M.add_rule({{er, tr}, {{er, slot_of(rpath, outR_base)}}});
            }

            std::size_t dup_wall = first_wall_left_of(ta_L - 1);
            std::size_t el_wall = first_wall_right_of(ta_L + lambda * w + 1);
            std::size_t er_wall = first_wall_left_of(ta_R - 1);
            M.add_rule({{wall_id(dup_wall), dup}, {{wall_id(dup_wall)}}});
            M.add_rule({{wall_id(el_wall), el}, {{wall_id(el_wall)}}});
            M.add_rule({{wall_id(er_wall), er}, {{wall_id(er_wall)}}});

            next.push_back({lpath, ta_L, br.scale * lambda});
            next.push_back({rpath, ta_R, br.scale * lambda});
        }
        frontier = std::move(next);
        level_start = level_end + 1;
    }

    spec.completion_time = level_start;

    MetaId armed_zero1 = 0, armed_one1 = 0, bend = 0;
    if (options.activate) {
        armed_zero1 = M.add_meta("~A0_1", 0);
        armed_one1 = M.add_meta("~A1_1", 0);
        bend = M.add_meta("~bend", 0);
        spec.decode[bend] = {CloudContentInfo::Kind::BeamEnd, -1, 0, 0};
        spec.decode[armed_zero1] = {CloudContentInfo::Kind::ArmedZero, -1, 0, 1};
        spec.decode[armed_one1] = {CloudContentInfo::Kind::ArmedOne, -1, 0, 1};
        for (int i = 1; i <= k; ++i) {
            spec.decode[bit_zero[i]] = {CloudContentInfo::Kind::BitZero, -1, 0, i};
            spec.decode[bit_one[i]] = {CloudContentInfo::Kind::BitOne, -1, 0, i};
        }
    }

    for (std::size_t j = 0; j < nleaves; ++j) {
        CloudLeafSpec leaf;
        for (int i = k - 1; i >= 0; --i) leaf.path += ((j >> i) & 1) ? '1' : '0';
        leaf.beam = choices_from_index(j, k);
        leaf.region_left = spec.wall_positions[j];
        leaf.region_right = spec.wall_positions[j + 1];
        leaf.map_scale = lam_k;
        leaf.map_offset = block_anchor(leaf.path) - lam_k * root_anchor;
        spec.leaves.push_back(leaf);

        MetaId act = 0;
        if (options.activate) act = M.add_meta("~a" + std::to_string(j), f);

        for (MetaId base : alive_bases(leaf.path)) {
            MetaId slot = slot_of(leaf.path, base);
            CloudContentInfo info;
            info.leaf = static_cast<int>(j);
            info.kind = CloudContentInfo::Kind::Payload;
            if (base < payload.meta_count()) {
                info.payload_meta = base;
            } else if (base == raw_end) {
                info.kind = CloudContentInfo::Kind::BeamEnd;
            } else {
                for (int i = 1; i <= k; ++i) {
                    if (base == bit_zero[i]) {
                        info.kind = CloudContentInfo::Kind::BitZero;
                        info.bit_index = i;
                    } else if (base == bit_one[i]) {
                        info.kind = CloudContentInfo::Kind::BitOne;
                        info.bit_index = i;
                    }
                }
            }
            spec.decode[slot] = info;

            if (options.activate) {
                MetaId active = base;
                if (base == bit_zero[1]) active = armed_zero1;
                else if (base == bit_one[1]) active = armed_one1;
                else if (base == raw_end) active = bend;
                M.add_rule({{act, slot}, {{act, active}}});
            }
        }
        if (options.activate) {
            // activation line parallel to the capture line: the resumed run is
            // an exact similarity image of the payload's own run
            Rational slot_left = block_anchor(leaf.path);
            Line act_line{spec.completion_time + 1 + Rational(static_cast<long>(j), 64), slot_left - 1, f};
            add_control_spawn(act_line.t0, act_line.x0, f, M.name_of(act));
            M.add_rule({{wall_id(j + 1), act}, {{wall_id(j + 1)}}});
        }
    }

    M.add_rule({{wall_id(nleaves), cap}, {{wall_id(nleaves)}}});

    for (std::size_t i = payload.meta_count(); i < M.meta_count(); ++i)
        if (!spec.decode.count(static_cast<MetaId>(i))) spec.scaffold.insert(static_cast<MetaId>(i));

    // initial configuration: content, capture, then one relay pair per spawn
    M.initial.time = 0;
    for (const auto& c : content) M.add_initial(c.base, c.position);
    M.add_initial(cap, x0);
    Rational ign_speed(1, 64);
    for (bool clash = true; clash;) {
        clash = false;
        for (const auto& s : M.speeds)
            if (s == ign_speed) clash = true;
        if (clash) ign_speed = ign_speed / 2;
    }
    int serial = 0;
    for (const auto& sp : spawns) {
        MetaId rl_id = M.add_meta("~rl" + std::to_string(serial), 0);
        MetaId ig_id = M.add_meta("~ig" + std::to_string(serial), ign_speed);
        ++serial;
        M.add_rule({{ig_id, rl_id}, {{*M.find_meta(sp.name)}}});
        M.add_initial(rl_id, sp.position);
        M.add_initial(ig_id, sp.position - ign_speed * sp.time);
        spec.scaffold.insert(rl_id);
        spec.scaffold.insert(ig_id);
    }

    auto repv = validate_machine(M);
    if (!repv.ok())
        throw GeometryError(GeometryError::Code::PayloadOverflow,
                            "cloud construction produced an ill-formed machine:\n" + repv.to_string());
    return cm;
}

std::vector<CloudLeaf> extract_leaves(const Trace& trace, const CloudSpec& spec) {
    if (trace.halt == Halt::BudgetExhausted)
        throw GeometryError(GeometryError::Code::MalformedCloud, "cloud run was truncated by the event budget");

    std::vector<CloudLeaf> leaves(spec.leaves.size());
    std::vector<std::map<int, int>> bits(spec.leaves.size());
    for (std::size_t j = 0; j < spec.leaves.size(); ++j) {
        leaves[j].index = j;
        leaves[j].region_left = spec.leaves[j].region_left;
        leaves[j].region_right = spec.leaves[j].region_right;
        leaves[j].payload.time = trace.final.time;
    }

    for (const auto& s : trace.final.signals) {
        auto it = spec.decode.find(s.meta);
        if (it == spec.decode.end()) continue;
        const CloudContentInfo& info = it->second;
        if (info.leaf < 0) continue;
        auto leaf = static_cast<std::size_t>(info.leaf);
        if (s.position < spec.leaves[leaf].region_left || s.position > spec.leaves[leaf].region_right)
            throw GeometryError(GeometryError::Code::MalformedCloud, "leaf content escaped its region");
        switch (info.kind) {
            case CloudContentInfo::Kind::Payload:
                leaves[leaf].payload.signals.push_back({info.payload_meta, s.position});
                break;
            case CloudContentInfo::Kind::BitZero:
            case CloudContentInfo::Kind::BitOne:
                if (!bits[leaf].emplace(info.bit_index, info.kind == CloudContentInfo::Kind::BitOne ? 1 : 0).second)
                    throw GeometryError(GeometryError::Code::MalformedCloud, "duplicated beam bit");
                break;
            default:
                break;
        }
    }

    for (std::size_t j = 0; j < leaves.size(); ++j) {
        for (int i = 1; i <= spec.k; ++i) {
            auto it = bits[j].find(i);
            if (it == bits[j].end())
                throw GeometryError(GeometryError::Code::MalformedCloud, "leaf beam bits missing");
            leaves[j].beam.push_back(static_cast<std::uint8_t>(it->second));
        }
        std::sort(leaves[j].payload.signals.begin(), leaves[j].payload.signals.end(),
                  [](const SignalInstance& a, const SignalInstance& b) {
                      if (a.position != b.position) return a.position < b.position;
                      return a.meta < b.meta;
                  });
    }
    return leaves;
}

}  // namespace sigmach
