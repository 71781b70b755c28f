#include "sigmach/randmach.hpp"

#include <set>

#include "sigmach/nondet.hpp"

namespace sigmach {

Machine random_machine(std::uint64_t seed) {
    RandomStream rng(seed);
    Machine m;
    const int n_metas = static_cast<int>(rng.range(2, 5));
    for (int i = 0; i < n_metas; ++i)
        m.add_meta(std::string(1, static_cast<char>('a' + i)), Rational(rng.range(-2, 2)));
    MetaId acc = m.add_meta("accept", Rational(rng.range(-2, 2)));
    m.accept = acc;

    const int n_rules = static_cast<int>(rng.range(1, 4));
    int two_outcome_rules = 0;
    for (int r = 0; r < n_rules; ++r) {
        // input: 2..3 metas with pairwise distinct speeds
        std::vector<MetaId> input;
        std::set<std::string> used_speeds;
        int want = static_cast<int>(rng.range(2, 3));
        for (int tries = 0; tries < 16 && static_cast<int>(input.size()) < want; ++tries) {
            MetaId cand = static_cast<MetaId>(rng.below(m.meta_count()));
            bool dup = false;
            for (MetaId got : input)
                if (got == cand || m.speed_of(got) == m.speed_of(cand)) dup = true;
            if (!dup) input.push_back(cand);
        }
        if (input.size() < 2) continue;
        auto outcome = [&] {
            std::vector<MetaId> out;
            int n_out = static_cast<int>(rng.range(0, 3));
            for (int tries = 0; tries < 16 && static_cast<int>(out.size()) < n_out; ++tries) {
                MetaId cand = static_cast<MetaId>(rng.below(m.meta_count()));
                bool dup = false;
                for (MetaId got : out)
                    if (got == cand || m.speed_of(got) == m.speed_of(cand)) dup = true;
                if (!dup) out.push_back(cand);
            }
            return sorted_ids(std::move(out));
        };
        Rule rule;
        rule.input = std::move(input);
        rule.outcomes.push_back(outcome());
        bool second = two_outcome_rules == 0 || rng.below(2) == 0;
        if (second) {
            auto alt = outcome();
            for (int tries = 0; tries < 8 && alt == rule.outcomes[0]; ++tries) alt = outcome();
            if (alt != rule.outcomes[0]) {
                rule.outcomes.push_back(std::move(alt));
                ++two_outcome_rules;
            }
        }
        m.add_rule(std::move(rule));
    }

    const int n_init = static_cast<int>(rng.range(1, 6));
    for (int i = 0; i < n_init; ++i) {
        MetaId meta = static_cast<MetaId>(rng.below(m.meta_count()));
        Rational pos(rng.range(-10, 10));
        bool clash = false;
        for (const auto& s : m.initial.signals)
            if (s.position == pos && (s.meta == meta || m.speed_of(s.meta) == m.speed_of(meta))) clash = true;
        if (!clash) m.add_initial(meta, pos);
    }
    return m;
}

Machine random_krnsm(std::uint64_t seed, int index, int k, const Budget& budget) {
    RandomStream base(seed);
    std::uint64_t salt = base.next();
    int found = 0;
    for (std::uint64_t attempt = 0;; ++attempt) {
        Machine m = random_machine(salt ^ (attempt * 0x9e3779b97f4a7c15ull + attempt));
        if (!validate_machine(m).ok()) continue;
        if (!static_k_rnsm_check(m, k).ok()) continue;
        bool has_choice = false;
        for (const auto& r : m.rules) has_choice |= r.outcomes.size() == 2;
        if (!has_choice) continue;
        auto paths = enumerate_paths(m, k, budget);
        if (!runtime_k_rnsm_report(paths).ok()) continue;
        if (found == index) return m;
        ++found;
    }
}

}  // namespace sigmach
