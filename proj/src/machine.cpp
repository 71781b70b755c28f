#include "sigmach/machine.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sigmach {

std::vector<MetaId> sorted_ids(std::vector<MetaId> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

std::string meta_set_names(const Machine& m, const std::vector<MetaId>& ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += ',';
        out += m.name_of(ids[i]);
    }
    return out;
}

std::string meta_set_label(const Machine& m, const std::vector<MetaId>& ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += '+';
        out += m.name_of(ids[i]);
    }
    return out;
}

bool Configuration::operator==(const Configuration& o) const {
    if (time != o.time || signals.size() != o.signals.size()) return false;
    auto norm = [](std::vector<SignalInstance> v) {
        std::sort(v.begin(), v.end(), [](const SignalInstance& a, const SignalInstance& b) {
            if (a.position != b.position) return a.position < b.position;
            return a.meta < b.meta;
        });
        return v;
    };
    return norm(signals) == norm(o.signals);
}

std::optional<MetaId> Machine::find_meta(std::string_view name) const {
    for (std::size_t i = 0; i < meta_names.size(); ++i)
        if (meta_names[i] == name) return static_cast<MetaId>(i);
    return std::nullopt;
}

MetaId Machine::add_meta(std::string name, Rational speed) {
    if (auto existing = find_meta(name)) return *existing;
    meta_names.push_back(std::move(name));
    speeds.push_back(std::move(speed));
    return static_cast<MetaId>(meta_names.size() - 1);
}

bool Machine::add_rule(Rule rule) {
    rule.input = sorted_ids(std::move(rule.input));
    for (auto& out : rule.outcomes) out = sorted_ids(std::move(out));
    auto [it, inserted] = rule_by_input.try_emplace(rule.input, rules.size());
    if (!inserted) return false;
    rules.push_back(std::move(rule));
    return true;
}

const Rule* Machine::rule_for(const std::vector<MetaId>& sorted_input) const {
    auto it = rule_by_input.find(sorted_input);
    return it == rule_by_input.end() ? nullptr : &rules[it->second];
}

void Machine::add_initial(std::string_view name, Rational position) {
    auto id = find_meta(name);
    if (!id) throw std::invalid_argument("unknown meta-signal: " + std::string(name));
    add_initial(*id, std::move(position));
}

Rational Machine::max_abs_speed() const {
    Rational best = 0;
    for (const auto& s : speeds) best = max(best, s.abs());
    return best;
}

bool Machine::has_reserved_names() const {
    for (const auto& n : meta_names)
        if (!n.empty() && n[0] == kReservedMark) return true;
    return false;
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const auto& v : violations) os << v.code << " at " << v.where << ": " << v.message << "\n";
    for (const auto& d : deferred) os << "deferred: " << d << "\n";
    return os.str();
}

static bool speeds_pairwise_distinct(const Machine& m, const std::vector<MetaId>& ids) {
    for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = i + 1; j < ids.size(); ++j)
            if (m.speed_of(ids[i]) == m.speed_of(ids[j])) return false;
    return true;
}

ValidationReport validate_machine(const Machine& m) {
    ValidationReport rep;
    auto add = [&](std::string code, std::string msg, std::string where) {
        rep.violations.push_back({std::move(code), std::move(msg), std::move(where)});
    };

    std::set<std::string> seen_names;
    for (std::size_t i = 0; i < m.meta_names.size(); ++i) {
        const auto& n = m.meta_names[i];
        if (n.empty()) add("empty_name", "meta-signal name is empty", "meta #" + std::to_string(i));
        if (!seen_names.insert(n).second) add("duplicate_name", "meta-signal name declared twice", n);
    }
    if (m.speeds.size() != m.meta_names.size())
        add("speed_map", "speed map is not total over the meta-signal set", "machine");

    for (std::size_t r = 0; r < m.rules.size(); ++r) {
        const Rule& rule = m.rules[r];
        std::string where = "rule " + meta_set_names(m, rule.input);
        for (MetaId id : rule.input)
            if (id >= m.meta_count()) add("unknown_meta", "rule references undeclared meta-signal", where);
        if (rule.input.size() < 2) add("rule_input_small", "rule input needs at least two meta-signals", where);
        if (!speeds_pairwise_distinct(m, rule.input))
            add("rule_input_speeds", "rule input speeds not distinct", where);
        if (rule.outcomes.empty() || rule.outcomes.size() > 2)
            add("rule_outcomes", "rule must have one or two outcomes", where);
        for (const auto& out : rule.outcomes) {
            for (MetaId id : out)
                if (id >= m.meta_count()) add("unknown_meta", "outcome references undeclared meta-signal", where);
            if (!speeds_pairwise_distinct(m, out))
                add("outcome_speeds", "outcome speeds not distinct", where);
        }
        if (rule.outcomes.size() == 2 && rule.outcomes[0] == rule.outcomes[1])
            add("outcomes_equal", "the two outcomes of a nondeterministic rule must differ", where);
    }

    for (std::size_t i = 0; i < m.initial.signals.size(); ++i) {
        const auto& a = m.initial.signals[i];
        if (a.meta >= m.meta_count()) {
            add("unknown_meta", "initial configuration references undeclared meta-signal",
                "initial #" + std::to_string(i));
            continue;
        }
        for (std::size_t j = i + 1; j < m.initial.signals.size(); ++j) {
            const auto& b = m.initial.signals[j];
            if (b.meta >= m.meta_count()) continue;
            std::string where = m.name_of(a.meta) + "@" + a.position.str();
            if (a.meta == b.meta && a.position == b.position)
                add("duplicate_instance", "duplicate signal instance", where);
            else if (a.position == b.position && m.speed_of(a.meta) == m.speed_of(b.meta))
                add("colocated_parallel", "co-located signals with equal speeds can never separate", where);
        }
    }

    if (m.accept && *m.accept >= m.meta_count())
        add("unknown_meta", "accept meta-signal is not declared", "accept");
    return rep;
}

bool is_deterministic(const Machine& m) {
    for (const auto& r : m.rules)
        if (r.outcomes.size() != 1) return false;
    return true;
}

ValidationReport static_k_rnsm_check(const Machine& m, int k) {
    ValidationReport rep;
    if (k < 1) {
        rep.violations.push_back({"precondition", "k must be >= 1", "k"});
        return rep;
    }
    for (const auto& r : m.rules)
        if (r.outcomes.size() > 2)
            rep.violations.push_back(
                {"too_many_outcomes", "more than two rules defined for a collision", meta_set_names(m, r.input)});
    if (!m.accept) rep.violations.push_back({"no_accept", "no accept meta-signal declared", "machine"});
    if (m.has_reserved_names())
        rep.violations.push_back(
            {"reserved_name", "meta-signal names starting with '~' are reserved for compiled machines", "machine"});
    rep.deferred.push_back("no two collisions occur in exactly same time (checked per run)");
    rep.deferred.push_back("at most " + std::to_string(k) + " collisions before accept (checked per run)");
    return rep;
}

}  // namespace sigmach
