#include "qpb/charts.hpp"

#include <cstdio>
#include <sstream>

#include "qpb/errors.hpp"

namespace qpb {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_bar_chart_svg(const std::vector<FidelityEstimate>& estimates,
                                 const ChartSpec& spec) {
    if (estimates.empty()) throw InvalidArgument("chart needs at least one estimate");

    const double left = 56.0, top = 40.0, bottom = 64.0;
    const double bar_w = 26.0, gap = 10.0;
    const double plot_h = 280.0;
    const double plot_w = estimates.size() * (bar_w + gap) + gap;
    const double width = left + plot_w + 24.0;
    const double height = top + plot_h + bottom;
    auto y_of = [&](double fidelity) { return top + (1.0 - fidelity) * plot_h; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
        << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n";
    svg << "<rect width=\"" << num(width) << "\" height=\"" << num(height)
        << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << num(left) << "\" y=\"22\" font-family=\"sans-serif\" "
           "font-size=\"14\">"
        << escape_xml(spec.title) << "</text>\n";

    for (int grid = 0; grid <= 4; ++grid) {
        const double f = grid * 0.25;
        const double y = y_of(f);
        svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(y) << "\" x2=\""
            << num(left + plot_w) << "\" y2=\"" << num(y)
            << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << num(left - 8.0) << "\" y=\"" << num(y + 4.0)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(f)
            << "</text>\n";
    }

    double x = left + gap;
    for (const FidelityEstimate& e : estimates) {
        const double y_mean = y_of(e.mean);
        svg << "<rect x=\"" << num(x) << "\" y=\"" << num(y_mean) << "\" width=\"" << num(bar_w)
            << "\" height=\"" << num(y_of(0.0) - y_mean)
            << "\" fill=\"#4a7fb5\" class=\"bar\"/>\n";
        const double cx = x + bar_w / 2.0;
        svg << "<line x1=\"" << num(cx) << "\" y1=\"" << num(y_of(e.min)) << "\" x2=\""
            << num(cx) << "\" y2=\"" << num(y_of(e.max))
            << "\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n";
        svg << "<line x1=\"" << num(cx - 5.0) << "\" y1=\"" << num(y_of(e.max)) << "\" x2=\""
            << num(cx + 5.0) << "\" y2=\"" << num(y_of(e.max))
            << "\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n";
        svg << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(y_of(e.min))
            << "\" r=\"3\" fill=\"#c23b3b\"/>\n";
        svg << "<text x=\"" << num(cx) << "\" y=\"" << num(top + plot_h + 16.0)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
            << escape_xml(e.key.text()) << "</text>\n";
        x += bar_w + gap;
    }

    if (spec.threshold > 0.0) {
        const double y = y_of(spec.threshold);
        svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(y) << "\" x2=\""
            << num(left + plot_w) << "\" y2=\"" << num(y)
            << "\" stroke=\"#c23b3b\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\" "
               "class=\"threshold\"/>\n";
        svg << "<text x=\"" << num(left + plot_w + 4.0) << "\" y=\"" << num(y + 4.0)
            << "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#c23b3b\">"
            << num(spec.threshold) << "</text>\n";
    }

    svg << "<text x=\"" << num(left + plot_w / 2.0) << "\" y=\"" << num(height - 20.0)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << escape_xml(spec.x_label) << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace qpb
