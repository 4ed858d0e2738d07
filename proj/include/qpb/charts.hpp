#pragma once

#include <string>
#include <vector>

#include "qpb/fidelity.hpp"

namespace qpb {

struct ChartSpec {
    std::string title;
    std::string x_label = "key";
    double threshold = 0.0;  // horizontal line; 0 disables
};

/// Self-contained SVG bar chart: one bar per estimate showing the mean, a
/// whisker from min to max with a dot at the minimum, and the threshold as a
/// dashed line. Byte output depends only on the inputs.
std::string render_bar_chart_svg(const std::vector<FidelityEstimate>& estimates,
                                 const ChartSpec& spec);

}  // namespace qpb
