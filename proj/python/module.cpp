// Python bindings for the main operations: parsing, validation, simulation,
// path enumeration, determinization, equivalence checking and SVG rendering.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sigmach/determinize.hpp"
#include "sigmach/machine_io.hpp"
#include "sigmach/randmach.hpp"
#include "sigmach/render.hpp"

namespace py = pybind11;
using namespace sigmach;

namespace {

Machine parse_or_throw(const std::string& text) {
    auto res = parse_machine(text);
    if (!res.machine) {
        std::string msg;
        for (const auto& e : res.errors) msg += e.to_string() + "\n";
        throw py::value_error(msg);
    }
    return std::move(*res.machine);
}

Budget make_budget(std::size_t max_events, const std::optional<std::string>& horizon) {
    Budget b;
    b.max_events = max_events;
    if (horizon) {
        auto t = Rational::parse(*horizon);
        if (!t) throw py::value_error("bad rational literal: " + *horizon);
        b.time_horizon = *t;
    }
    return b;
}

ChoiceString bits_from_string(const std::string& s) {
    ChoiceString c;
    for (char ch : s) {
        if (ch != '0' && ch != '1') throw py::value_error("choice string must contain only 0 and 1");
        c.push_back(ch == '1');
    }
    return c;
}

py::dict trace_summary(const Machine& m, const Trace& t) {
    py::dict d;
    d["events"] = t.events.size();
    d["halt"] = halt_name(t.halt);
    d["final_time"] = t.final.time.str();
    py::list final;
    for (const auto& s : t.final.signals) final.append(py::make_tuple(m.name_of(s.meta), s.position.str()));
    d["final"] = final;
    if (m.accept) d["accepted"] = accept_event(m, t).has_value();
    return d;
}

}  // namespace

PYBIND11_MODULE(_sigmach, m) {
    m.doc() = "exact-arithmetic signal machine toolkit";

    py::class_<Machine>(m, "Machine")
        .def_static("parse", &parse_or_throw, py::arg("text"))
        .def("serialize", [](const Machine& self) { return serialize_machine(self); })
        .def("validate",
             [](const Machine& self) {
                 py::list out;
                 for (const auto& v : validate_machine(self).violations)
                     out.append(v.code + " at " + v.where + ": " + v.message);
                 return out;
             })
        .def("is_deterministic", [](const Machine& self) { return is_deterministic(self); })
        .def("hash", [](const Machine& self) { return machine_hash(self); })
        .def_property_readonly("meta_signals",
                               [](const Machine& self) {
                                   py::list out;
                                   for (std::size_t i = 0; i < self.meta_count(); ++i)
                                       out.append(py::make_tuple(self.meta_names[i], self.speeds[i].str()));
                                   return out;
                               })
        .def("__repr__", [](const Machine& self) {
            return "<sigmach.Machine with " + std::to_string(self.meta_count()) + " meta-signals, " +
                   std::to_string(self.rules.size()) + " rules>";
        });

    m.def(
        "simulate",
        [](const Machine& machine, std::size_t max_events, const std::optional<std::string>& until,
           const std::optional<std::string>& choices) {
            Budget b = make_budget(max_events, until);
            Trace t;
            if (choices) t = run_with_choices(machine, bits_from_string(*choices), b).trace;
            else t = run(machine, b);
            py::dict d = trace_summary(machine, t);
            d["trace"] = export_trace(t, machine);
            return d;
        },
        py::arg("machine"), py::arg("max_events") = 10000, py::arg("until") = std::nullopt,
        py::arg("choices") = std::nullopt);

    m.def(
        "enumerate_paths",
        [](const Machine& machine, int k, std::size_t max_events, int jobs) {
            Budget b;
            b.max_events = max_events;
            auto paths = enumerate_paths(machine, k, b, jobs);
            py::list out;
            for (const auto& p : paths) {
                py::dict d;
                d["choices"] = choices_str(p.choices);
                d["events"] = p.trace.events.size();
                d["halt"] = halt_name(p.trace.halt);
                d["accepted"] = p.accepted;
                d["trace_group"] = p.trace_group;
                out.append(d);
            }
            return out;
        },
        py::arg("machine"), py::arg("k"), py::arg("max_events") = 10000, py::arg("jobs") = 1);

    m.def(
        "accepts",
        [](const Machine& machine, int k, std::size_t max_events) {
            Budget b;
            b.max_events = max_events;
            auto v = accepts(machine, k, b);
            py::dict d;
            d["accepted"] = v.accepted;
            if (v.witness) d["witness"] = choices_str(*v.witness);
            return d;
        },
        py::arg("machine"), py::arg("k"), py::arg("max_events") = 10000);

    m.def(
        "compile_machine",
        [](const Machine& machine, int k, const std::optional<std::string>& freeze_speed) {
            CompileParams params;
            if (freeze_speed) {
                auto r = Rational::parse(*freeze_speed);
                if (!r) throw py::value_error("bad rational literal: " + *freeze_speed);
                params.freeze_speed = *r;
            }
            auto cm = compile(machine, k, params);
            py::dict d;
            d["dsm"] = cm.dsm;
            d["smf"] = serialize_machine(cm.dsm);
            d["provenance"] = provenance_table(cm);
            d["leaves"] = cm.cloud.leaves.size();
            return d;
        },
        py::arg("machine"), py::arg("k"), py::arg("freeze_speed") = std::nullopt);

    m.def(
        "verify_equivalence",
        [](const Machine& machine, int k, std::size_t max_events, int jobs) {
            Budget b;
            b.max_events = max_events;
            auto r = verify_equivalence(machine, k, {}, b, jobs);
            py::dict d;
            if (r.equivalent) d["equivalent"] = *r.equivalent;
            else d["equivalent"] = py::none();
            d["nn_accepts"] = r.nn_verdict.accepted;
            if (!r.discrepancy.empty()) d["discrepancy"] = r.discrepancy;
            return d;
        },
        py::arg("machine"), py::arg("k"), py::arg("max_events") = 500000, py::arg("jobs") = 1);

    m.def(
        "render_svg",
        [](const Machine& machine, const std::string& trace_text) {
            auto imp = import_trace(trace_text, machine);
            if (!imp.trace) {
                std::string msg;
                for (const auto& e : imp.errors) msg += e.to_string() + "\n";
                throw py::value_error(msg);
            }
            return render_svg(machine, *imp.trace);
        },
        py::arg("machine"), py::arg("trace_text"));

    m.def("random_machine", [](std::uint64_t seed) { return random_machine(seed); }, py::arg("seed"));

    m.def(
        "build_middle_machine",
        [](const std::string& x1, const std::string& x2) {
            auto r1 = Rational::parse(x1), r2 = Rational::parse(x2);
            if (!r1 || !r2) throw py::value_error("bad rational literal");
            return build_middle_machine(*r1, *r2).machine;
        },
        py::arg("x1"), py::arg("x2"));
}
