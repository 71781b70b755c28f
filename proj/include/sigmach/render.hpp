#pragma once

#include <map>
#include <string>

#include "sigmach/engine.hpp"

namespace sigmach {

struct RenderOptions {
    int width_px = 800;
    int height_px = 600;
    bool time_up = true;           // time increases upwards
    bool show_frozen_dimmed = true;  // generated ('~') meta-signals drawn faded
    std::map<MetaId, std::string> color_overrides;
};

// Space-time diagram: every signal is a straight segment from its creation to
// its consuming event or the diagram edge, collision points are marked, and a
// legend lists the meta-signals. Deterministic: identical trace and options
// give byte-identical output.
std::string render_svg(const Machine& machine, const Trace& trace, const RenderOptions& options = {});

}  // namespace sigmach
