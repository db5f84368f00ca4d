#pragma once

#include <string>

#include "wassos/hierarchy.hpp"

namespace wassos {

/// Static line chart of a sweep: one mean line per level r over a log eps
/// axis, with the 20%-80% quantile band shaded behind it.
std::string band_chart_svg(const BoundSweep& sweep, const std::string& title, const std::string& y_label);

}  // namespace wassos
