#include "sigmach/machine_io.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace sigmach {

std::string ParseError::to_string() const {
    std::ostringstream os;
    os << line << ":" << col << ": " << code << ": " << message;
    return os.str();
}

namespace {

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '~' || c == ':' || c == '.' || c == '+';
}

struct Cursor {
    std::string_view text;
    std::size_t pos = 0;
    std::size_t line = 1;
    std::size_t line_start = 0;

    std::size_t col() const { return pos - line_start + 1; }
};

// One logical line with its comment stripped.
struct LineRec {
    std::string content;
    std::size_t line;
};

std::vector<LineRec> split_lines(std::string_view text) {
    std::vector<LineRec> out;
    std::size_t lineno = 1;
    std::size_t i = 0;
    while (i <= text.size()) {
        std::size_t j = text.find('\n', i);
        std::string_view raw = text.substr(i, (j == std::string_view::npos ? text.size() : j) - i);
        if (auto h = raw.find('#'); h != std::string_view::npos) raw = raw.substr(0, h);
        // trim
        std::size_t b = 0, e = raw.size();
        while (b < e && std::isspace(static_cast<unsigned char>(raw[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1]))) --e;
        if (e > b) out.push_back({std::string(raw.substr(b, e - b)), lineno});
        if (j == std::string_view::npos) break;
        i = j + 1;
        ++lineno;
    }
    return out;
}

std::vector<std::string> split_list(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i <= s.size()) {
        std::size_t j = s.find(sep, i);
        std::string_view part = s.substr(i, (j == std::string_view::npos ? s.size() : j) - i);
        std::size_t b = 0, e = part.size();
        while (b < e && std::isspace(static_cast<unsigned char>(part[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(part[e - 1]))) --e;
        out.push_back(std::string(part.substr(b, e - b)));
        if (j == std::string_view::npos) break;
        i = j + 1;
    }
    return out;
}

}  // namespace

ParseResult parse_machine(std::string_view text) {
    ParseResult res;
    Machine m;
    std::vector<ParseError>& errs = res.errors;
    auto err = [&](std::size_t line, std::size_t col, std::string code, std::string msg) {
        errs.push_back({line, col, std::move(code), std::move(msg)});
    };

    enum Section { None, Metas, Rules, Accept, Initial, Time };
    Section sec = None;

    struct PendingRule {
        std::string text;
        std::size_t line;
    };
    std::vector<PendingRule> rule_lines;
    std::vector<std::pair<std::string, std::size_t>> accept_lines;
    std::vector<std::pair<std::string, std::size_t>> initial_lines;
    std::vector<std::pair<std::string, std::size_t>> time_lines;

    for (const auto& rec : split_lines(text)) {
        const std::string& s = rec.content;
        if (s.front() == '[') {
            if (s == "[metasignals]") sec = Metas;
            else if (s == "[rules]") sec = Rules;
            else if (s == "[accept]") sec = Accept;
            else if (s == "[initial]") sec = Initial;
            else if (s == "[time]") sec = Time;
            else err(rec.line, 1, "SyntaxError", "unknown section " + s);
            continue;
        }
        switch (sec) {
            case None: err(rec.line, 1, "SyntaxError", "content before any section header"); break;
            case Metas: {
                std::istringstream is(s);
                std::string name, speed, extra;
                is >> name >> speed;
                if (speed.empty() || (is >> extra && !extra.empty())) {
                    err(rec.line, 1, "SyntaxError", "expected `name speed`");
                    break;
                }
                for (char c : name)
                    if (!ident_char(c)) {
                        err(rec.line, 1, "SyntaxError", "bad character in meta-signal name: " + name);
                        name.clear();
                        break;
                    }
                if (name.empty()) break;
                auto r = Rational::parse(speed);
                if (!r) {
                    err(rec.line, static_cast<std::size_t>(s.find(speed) + 1), "SyntaxError",
                        "bad rational literal: " + speed);
                    break;
                }
                if (m.find_meta(name)) {
                    err(rec.line, 1, "SpeedRedefinition", "meta-signal " + name + " declared twice");
                    break;
                }
                m.add_meta(name, *r);
                break;
            }
            case Rules: rule_lines.push_back({s, rec.line}); break;
            case Accept: accept_lines.emplace_back(s, rec.line); break;
            case Initial: initial_lines.emplace_back(s, rec.line); break;
            case Time: time_lines.emplace_back(s, rec.line); break;
        }
    }

    auto lookup = [&](const std::string& name, std::size_t line) -> std::optional<MetaId> {
        auto id = m.find_meta(name);
        if (!id) err(line, 1, "UnknownMetaSignal", "meta-signal " + name + " is not declared");
        return id;
    };

    for (const auto& rl : rule_lines) {
        auto arrow = rl.text.find("->");
        if (arrow == std::string::npos) {
            err(rl.line, 1, "SyntaxError", "rule needs `inputs -> outputs`");
            continue;
        }
        Rule rule;
        bool bad = false;
        for (const auto& name : split_list(rl.text.substr(0, arrow), ',')) {
            if (name.empty()) {
                err(rl.line, 1, "SyntaxError", "empty name in rule input");
                bad = true;
                continue;
            }
            auto id = lookup(name, rl.line);
            if (id) rule.input.push_back(*id);
            else bad = true;
        }
        for (const auto& outcome : split_list(rl.text.substr(arrow + 2), '|')) {
            std::vector<MetaId> out;
            if (!outcome.empty()) {
                for (const auto& name : split_list(outcome, ',')) {
                    if (name.empty()) continue;
                    auto id = lookup(name, rl.line);
                    if (id) out.push_back(*id);
                    else bad = true;
                }
            }
            rule.outcomes.push_back(std::move(out));
        }
        if (bad) continue;
        if (rule.outcomes.size() > 2) {
            err(rl.line, 1, "SyntaxError", "a rule may have at most two outcomes");
            continue;
        }
        if (!m.add_rule(std::move(rule))) err(rl.line, 1, "DuplicateRuleInput", "a rule for this input set exists");
    }

    for (const auto& [s, line] : accept_lines) {
        if (m.accept) {
            err(line, 1, "SyntaxError", "accept declared twice");
            continue;
        }
        if (auto id = lookup(s, line)) m.accept = *id;
    }

    for (const auto& [s, line] : time_lines) {
        auto r = Rational::parse(s);
        if (!r) err(line, 1, "SyntaxError", "bad rational literal: " + s);
        else m.initial.time = *r;
    }

    for (const auto& [s, line] : initial_lines) {
        auto at = s.find('@');
        if (at == std::string::npos) {
            err(line, 1, "SyntaxError", "initial signal needs `name@position`");
            continue;
        }
        auto id = lookup(s.substr(0, at), line);
        auto pos = Rational::parse(s.substr(at + 1));
        if (!pos) {
            err(line, static_cast<std::size_t>(at + 2), "SyntaxError", "bad rational literal: " + s.substr(at + 1));
            continue;
        }
        if (id) m.add_initial(*id, *pos);
    }

    if (errs.empty()) {
        auto rep = validate_machine(m);
        for (const auto& v : rep.violations) err(0, 0, v.code, v.message + " (" + v.where + ")");
    }
    if (errs.empty()) res.machine = std::move(m);
    return res;
}

std::string serialize_machine(const Machine& m) {
    std::ostringstream os;
    std::vector<MetaId> order(m.meta_count());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<MetaId>(i);
    std::sort(order.begin(), order.end(), [&](MetaId a, MetaId b) { return m.name_of(a) < m.name_of(b); });

    os << "[metasignals]\n";
    for (MetaId id : order) os << m.name_of(id) << " " << m.speed_of(id).str() << "\n";

    os << "[rules]\n";
    std::vector<const Rule*> rules;
    for (const auto& r : m.rules) rules.push_back(&r);
    auto key = [&](const Rule* r) {
        std::vector<std::string> names;
        for (MetaId id : r->input) names.push_back(m.name_of(id));
        std::sort(names.begin(), names.end());
        return names;
    };
    std::sort(rules.begin(), rules.end(), [&](const Rule* a, const Rule* b) { return key(a) < key(b); });
    for (const Rule* r : rules) {
        auto names = key(r);
        for (std::size_t i = 0; i < names.size(); ++i) os << (i ? "," : "") << names[i];
        os << " ->";
        for (std::size_t o = 0; o < r->outcomes.size(); ++o) {
            if (o) os << " |";
            std::vector<std::string> outs;
            for (MetaId id : r->outcomes[o]) outs.push_back(m.name_of(id));
            std::sort(outs.begin(), outs.end());
            for (std::size_t i = 0; i < outs.size(); ++i) os << (i ? "," : " ") << outs[i];
        }
        os << "\n";
    }

    if (m.accept) {
        os << "[accept]\n" << m.name_of(*m.accept) << "\n";
    }
    if (!m.initial.time.is_zero()) {
        os << "[time]\n" << m.initial.time.str() << "\n";
    }
    os << "[initial]\n";
    std::vector<const SignalInstance*> init;
    for (const auto& s : m.initial.signals) init.push_back(&s);
    std::sort(init.begin(), init.end(), [&](const SignalInstance* a, const SignalInstance* b) {
        if (a->position != b->position) return a->position < b->position;
        return m.name_of(a->meta) < m.name_of(b->meta);
    });
    for (const auto* s : init) os << m.name_of(s->meta) << "@" << s->position.str() << "\n";
    return os.str();
}

bool machines_equal(const Machine& a, const Machine& b) { return serialize_machine(a) == serialize_machine(b); }

std::uint64_t machine_hash(const Machine& m) {
    std::string s = serialize_machine(m);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

static std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string export_trace(const Trace& t, const Machine& m) {
    std::ostringstream os;
    os << "# smtrace 1\n";
    os << "machine " << hex64(machine_hash(m)) << "\n";
    std::vector<MetaId> order(m.meta_count());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<MetaId>(i);
    std::sort(order.begin(), order.end(), [&](MetaId a, MetaId b) { return m.name_of(a) < m.name_of(b); });
    for (MetaId id : order) os << "meta " << m.name_of(id) << " " << m.speed_of(id).str() << "\n";
    auto canonical = [&](const Configuration& cfg) {
        std::vector<const SignalInstance*> sigs;
        for (const auto& s : cfg.signals) sigs.push_back(&s);
        std::sort(sigs.begin(), sigs.end(), [&](const SignalInstance* a, const SignalInstance* b) {
            if (a->position != b->position) return a->position < b->position;
            return m.name_of(a->meta) < m.name_of(b->meta);
        });
        return sigs;
    };
    os << "time0 " << t.initial.time.str() << "\n";
    for (const auto* s : canonical(t.initial)) os << "init " << m.name_of(s->meta) << "@" << s->position.str() << "\n";
    auto sorted_names = [&](const std::vector<MetaId>& ids) {
        std::vector<std::string> names;
        for (MetaId id : ids) names.push_back(m.name_of(id));
        std::sort(names.begin(), names.end());
        return names;
    };
    for (const auto& ev : t.events) {
        os << "event t=" << ev.time.str() << " x=" << ev.position.str() << " in=";
        auto in = sorted_names(ev.incoming);
        for (std::size_t i = 0; i < in.size(); ++i) os << (i ? "," : "") << in[i];
        os << " out=";
        auto outn = sorted_names(ev.outgoing);
        for (std::size_t i = 0; i < outn.size(); ++i) os << (i ? "," : "") << outn[i];
        os << " kind=" << (ev.identity ? "identity" : "rule");
        if (ev.rule && m.rules[*ev.rule].outcomes.size() == 2) os << " choice=" << *ev.outcome;
        os << "\n";
    }
    os << "halt " << halt_name(t.halt) << "\n";
    os << "tfinal " << t.final.time.str() << "\n";
    for (const auto* s : canonical(t.final)) os << "final " << m.name_of(s->meta) << "@" << s->position.str() << "\n";
    return os.str();
}

namespace {

// strict mode binds events to `machine`'s rules and verifies the hash;
// standalone mode reconstructs the meta table from the log itself
TraceImport import_trace_impl(std::string_view text, const Machine* strict_machine, Machine* rebuilt) {
    TraceImport out;
    Trace t;
    Machine local;
    const Machine* mp = strict_machine ? strict_machine : &local;
    std::vector<ParseError>& errs = out.errors;
    auto err = [&](std::size_t line, std::string code, std::string msg) {
        errs.push_back({line, 1, std::move(code), std::move(msg)});
    };

    bool halt_seen = false;
    for (const auto& rec : split_lines(text)) {
        const std::string& s = rec.content;
        std::istringstream is(s);
        std::string tag;
        is >> tag;
        auto rest = [&] {
            std::string r;
            std::getline(is, r);
            std::size_t b = 0;
            while (b < r.size() && std::isspace(static_cast<unsigned char>(r[b]))) ++b;
            return r.substr(b);
        };
        auto parse_signal = [&](const std::string& body) -> std::optional<SignalInstance> {
            auto at = body.find('@');
            if (at == std::string::npos) return std::nullopt;
            auto id = mp->find_meta(body.substr(0, at));
            auto pos = Rational::parse(body.substr(at + 1));
            if (!id || !pos) return std::nullopt;
            return SignalInstance{*id, *pos};
        };
        if (tag == "machine") {
            if (strict_machine && rest() != hex64(machine_hash(*strict_machine))) {
                err(rec.line, "HashMismatch", "trace was produced by a different machine");
                return out;
            }
        } else if (tag == "meta") {
            // authoritative in standalone mode, informational otherwise
            if (!strict_machine) {
                std::string name, speed;
                is >> name >> speed;
                auto r = Rational::parse(speed);
                if (name.empty() || !r) err(rec.line, "SyntaxError", "bad meta line");
                else local.add_meta(name, *r);
            }
        } else if (tag == "time0") {
            auto r = Rational::parse(rest());
            if (!r) err(rec.line, "SyntaxError", "bad time0");
            else t.initial.time = *r;
        } else if (tag == "init") {
            auto sig = parse_signal(rest());
            if (!sig) err(rec.line, "SyntaxError", "bad init line");
            else t.initial.signals.push_back(*sig);
        } else if (tag == "event") {
            CollisionEvent ev;
            std::string field;
            bool ok = true;
            std::optional<int> choice;
            std::istringstream fs(s.substr(5));  // fields after "event"
            while (fs >> field) {
                auto eq = field.find('=');
                if (eq == std::string::npos) {
                    ok = false;
                    break;
                }
                std::string k = field.substr(0, eq), v = field.substr(eq + 1);
                if (k == "t") {
                    auto r = Rational::parse(v);
                    if (!r) ok = false;
                    else ev.time = *r;
                } else if (k == "x") {
                    auto r = Rational::parse(v);
                    if (!r) ok = false;
                    else ev.position = *r;
                } else if (k == "in" || k == "out") {
                    std::vector<MetaId> ids;
                    if (!v.empty())
                        for (const auto& name : split_list(v, ',')) {
                            auto id = mp->find_meta(name);
                            if (!id) {
                                ok = false;
                                break;
                            }
                            ids.push_back(*id);
                        }
                    if (k == "in") ev.incoming = sorted_ids(std::move(ids));
                    else ev.outgoing = sorted_ids(std::move(ids));
                } else if (k == "kind") {
                    ev.identity = (v == "identity");
                } else if (k == "choice") {
                    choice = v == "1" ? 1 : 0;
                } else {
                    ok = false;
                }
            }
            if (!ok) {
                err(rec.line, "SyntaxError", "bad event line");
                continue;
            }
            if (!ev.identity && strict_machine) {
                const Rule* rule = strict_machine->rule_for(ev.incoming);
                if (!rule) {
                    err(rec.line, "SyntaxError", "event references a rule the machine does not define");
                    continue;
                }
                ev.rule = static_cast<std::size_t>(rule - strict_machine->rules.data());
                if (rule->outcomes.size() == 2) {
                    if (!choice) {
                        err(rec.line, "SyntaxError", "two-outcome rule event lacks choice=");
                        continue;
                    }
                    ev.outcome = *choice;
                } else {
                    ev.outcome = 0;
                }
            }
            t.events.push_back(std::move(ev));
        } else if (tag == "halt") {
            std::string h = rest();
            halt_seen = true;
            if (h == "quiescent") t.halt = Halt::Quiescent;
            else if (h == "budget") t.halt = Halt::BudgetExhausted;
            else if (h == "horizon") t.halt = Halt::TimeHorizonReached;
            else if (h == "choices") t.halt = Halt::ChoicesExhausted;
            else err(rec.line, "SyntaxError", "unknown halt reason " + h);
        } else if (tag == "tfinal") {
            auto r = Rational::parse(rest());
            if (!r) err(rec.line, "SyntaxError", "bad tfinal");
            else t.final.time = *r;
        } else if (tag == "final") {
            auto sig = parse_signal(rest());
            if (!sig) err(rec.line, "SyntaxError", "bad final line");
            else t.final.signals.push_back(*sig);
        } else {
            err(rec.line, "SyntaxError", "unknown line tag " + tag);
        }
    }
    if (!halt_seen) err(0, "SyntaxError", "missing halt line");
    if (!errs.empty()) return out;

    // the recorded final configuration must match an exact replay
    try {
        Configuration replayed = replay_events(*mp, t.initial, t.events);
        if (t.final.time > replayed.time) {
            Rational dt = t.final.time - replayed.time;
            for (auto& s : replayed.signals) s.position += mp->speed_of(s.meta) * dt;
            replayed.time = t.final.time;
        }
        auto norm = [&](Configuration c) {
            std::sort(c.signals.begin(), c.signals.end(), [](const SignalInstance& a, const SignalInstance& b) {
                if (a.position != b.position) return a.position < b.position;
                return a.meta < b.meta;
            });
            return c;
        };
        if (!(norm(replayed) == norm(t.final))) {
            err(0, "ReplayMismatch", "recorded final configuration does not match replay");
            return out;
        }
    } catch (const std::exception& e) {
        err(0, "ReplayMismatch", e.what());
        return out;
    }
    if (rebuilt) *rebuilt = std::move(local);
    out.trace = std::move(t);
    return out;
}

}  // namespace

TraceImport import_trace(std::string_view text, const Machine& m) { return import_trace_impl(text, &m, nullptr); }

std::optional<StandaloneTrace> load_trace_standalone(std::string_view text, std::vector<ParseError>& errors) {
    StandaloneTrace st;
    auto r = import_trace_impl(text, nullptr, &st.machine);
    errors = r.errors;
    if (!r.trace) return std::nullopt;
    st.trace = std::move(*r.trace);
    return st;
}

}  // namespace sigmach
