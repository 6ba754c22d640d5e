#include <algorithm>
#include <cmath>
#include <sstream>

#include "nsduel/harness.hpp"
#include "nsduel/ledger.hpp"

namespace nsduel::harness {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string num(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string regret_svg(const std::vector<Curve>& curves, const std::string& title) {
    double xmax = 1.0, ymax = 1.0;
    for (const auto& c : curves) {
        for (double x : c.x) xmax = std::max(xmax, x);
        for (const auto& s : c.y) ymax = std::max(ymax, s.mean + s.stddev);
    }
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + pw * x / xmax; };
    auto py = [&](double y) { return kTop + ph * (1.0 - std::max(0.0, y) / ymax); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kLeft << "\" y=\"24\" font-size=\"14\">" << escape(title) << "</text>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw << "\" y2=\"" << kTop + ph
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + ph
        << "\" stroke=\"black\"/>\n";
    for (int n = 0; n <= 5; ++n) {
        const double xv = xmax * n / 5.0;
        const double yv = ymax * n / 5.0;
        svg << "<text x=\"" << num(px(xv)) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
            << num(xv) << "</text>\n";
        svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">" << num(yv)
            << "</text>\n";
        svg << "<line x1=\"" << kLeft << "\" y1=\"" << num(py(yv)) << "\" x2=\"" << kLeft + pw << "\" y2=\""
            << num(py(yv)) << "\" stroke=\"#e0e0e0\"/>\n";
    }
    svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">round t</text>\n";

    for (std::size_t c = 0; c < curves.size(); ++c) {
        const auto& curve = curves[c];
        const char* color = kPalette[c % (sizeof(kPalette) / sizeof(kPalette[0]))];
        std::ostringstream band, line;
        for (std::size_t n = 0; n < curve.x.size(); ++n) {
            band << num(px(curve.x[n])) << "," << num(py(curve.y[n].mean + curve.y[n].stddev)) << " ";
            line << num(px(curve.x[n])) << "," << num(py(curve.y[n].mean)) << " ";
        }
        for (std::size_t n = curve.x.size(); n-- > 0;) {
            band << num(px(curve.x[n])) << "," << num(py(curve.y[n].mean - curve.y[n].stddev)) << " ";
        }
        svg << "<polygon points=\"" << band.str() << "\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
        svg << "<polyline points=\"" << line.str() << "\" fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\"/>\n";
        const double ly = kTop + 16.0 * static_cast<double>(c);
        svg << "<line x1=\"" << kLeft + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + pw + 32 << "\" y2=\""
            << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << kLeft + pw + 38 << "\" y=\"" << ly + 4 << "\">" << escape(curve.label) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace nsduel::harness
