#include "sigmach/render.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace sigmach {

namespace {

const char* kPalette[] = {
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
    "#e377c2", "#17becf", "#bcbd22", "#7f7f7f", "#aec7e8", "#98df8a",
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

std::string render_svg(const Machine& machine, const Trace& trace, const RenderOptions& options) {
    auto lines = world_lines(machine, trace);

    // bounding box over every segment endpoint, with a 5% margin
    Rational x_lo = 0, x_hi = 0, t_lo = trace.initial.time, t_hi = trace.final.time;
    bool first = true;
    for (const auto& wl : lines) {
        for (const Rational& x : {wl.birth_pos, wl.end_pos}) {
            if (first || x < x_lo) x_lo = x;
            if (first || x > x_hi) x_hi = x;
            first = false;
        }
        t_hi = max(t_hi, wl.end_time);
    }
    double xmin = x_lo.to_double(), xmax = x_hi.to_double();
    double tmin = t_lo.to_double(), tmax = t_hi.to_double();
    if (xmax - xmin < 1e-9) {
        xmin -= 1;
        xmax += 1;
    }
    if (tmax - tmin < 1e-9) tmax = tmin + 1;  // zero-event traces still get height
    double xpad = (xmax - xmin) * 0.05, tpad = (tmax - tmin) * 0.05;
    xmin -= xpad;
    xmax += xpad;
    tmin -= tpad;
    tmax += tpad;

    const double W = options.width_px, H = options.height_px;
    auto sx = [&](const Rational& x) { return (x.to_double() - xmin) / (xmax - xmin) * W; };
    auto sy = [&](const Rational& t) {
        double f = (t.to_double() - tmin) / (tmax - tmin);
        return options.time_up ? H * (1.0 - f) : H * f;
    };
    auto color_of = [&](MetaId m) -> std::string {
        auto it = options.color_overrides.find(m);
        if (it != options.color_overrides.end()) return it->second;
        return kPalette[m % (sizeof kPalette / sizeof *kPalette)];
    };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width_px << "\" height=\""
       << options.height_px << "\" viewBox=\"0 0 " << options.width_px << " " << options.height_px << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (const auto& wl : lines) {
        bool generated = machine.name_of(wl.meta).rfind('~', 0) == 0;
        std::string opacity = (generated && options.show_frozen_dimmed) ? " stroke-opacity=\"0.25\"" : "";
        // zero-length segments (signals born at the final instant) still get a dot below
        os << "<line x1=\"" << fmt(sx(wl.birth_pos)) << "\" y1=\"" << fmt(sy(wl.birth_time)) << "\" x2=\""
           << fmt(sx(wl.end_pos)) << "\" y2=\"" << fmt(sy(wl.end_time)) << "\" stroke=\"" << color_of(wl.meta)
           << "\" stroke-width=\"1.2\"" << opacity << "><title>" << machine.name_of(wl.meta) << "</title></line>\n";
    }
    for (const auto& ev : trace.events) {
        os << "<circle cx=\"" << fmt(sx(ev.position)) << "\" cy=\"" << fmt(sy(ev.time)) << "\" r=\"2.2\" fill=\""
           << (ev.identity ? "#bbbbbb" : "black") << "\"/>\n";
    }

    // legend: user meta-signals first, generated ones only if present
    std::vector<MetaId> order;
    for (std::size_t i = 0; i < machine.meta_count(); ++i) order.push_back(static_cast<MetaId>(i));
    std::stable_sort(order.begin(), order.end(), [&](MetaId a, MetaId b) {
        bool ga = machine.name_of(a).rfind('~', 0) == 0, gb = machine.name_of(b).rfind('~', 0) == 0;
        return ga < gb;
    });
    int y = 14;
    int shown = 0;
    for (MetaId id : order) {
        if (shown >= 24) break;  // compiled machines have hundreds of metas
        bool used = false;
        for (const auto& wl : lines) used |= wl.meta == id;
        if (!used) continue;
        os << "<line x1=\"8\" y1=\"" << y << "\" x2=\"28\" y2=\"" << y << "\" stroke=\"" << color_of(id)
           << "\" stroke-width=\"2\"/>"
           << "<text x=\"32\" y=\"" << y + 4 << "\" font-family=\"monospace\" font-size=\"11\">"
           << machine.name_of(id) << " (" << machine.speed_of(id).str() << ")</text>\n";
        y += 14;
        ++shown;
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace sigmach
