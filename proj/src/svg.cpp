#include "quantcredit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace quantcredit {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

std::string escape(const std::string& s) {
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

std::string render_line_chart(const std::string& title, const std::string& xlabel,
                              const std::string& ylabel, const std::vector<Series>& series,
                              double y_ceiling) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
    double y0 = x0, y1 = -x0;
    auto clip = [&](double y) { return std::min(y, y_ceiling); };
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            const double y = clip(s.y[i]);
            if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (!(x1 >= x0)) x0 = 0, x1 = 1;
    if (!(y1 >= y0)) y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + (y0 == 0 ? 1 : std::abs(y0) * 0.1);
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;

    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(title) << "</text>\n";
    o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 5; ++i) {
        const double xv = x0 + (x1 - x0) * i / 5.0, yv = y0 + (y1 - y0) * i / 5.0;
        o << "<line x1=\"" << num(px(xv)) << "\" y1=\"" << kTop + ph << "\" x2=\"" << num(px(xv))
          << "\" y2=\"" << kTop + ph + 5 << "\" stroke=\"black\"/>";
        o << "<text x=\"" << num(px(xv)) << "\" y=\"" << kTop + ph + 18
          << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
        o << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(py(yv)) << "\" x2=\"" << kLeft
          << "\" y2=\"" << num(py(yv)) << "\" stroke=\"black\"/>";
        o << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">"
          << num(yv) << "</text>\n";
    }
    o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
      << escape(xlabel) << "</text>\n";
    o << "<text transform=\"translate(16," << kTop + ph / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(ylabel) << "</text>\n";

    double legend_y = kTop + 16;
    for (const auto& s : series) {
        o << "<polyline fill=\"none\" stroke=\"" << escape(s.color) << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            const double y = clip(s.y[i]);
            if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
            o << (first ? "" : " ") << num(px(s.x[i])) << ',' << num(py(y));
            first = false;
        }
        o << "\"/>\n";
        if (!s.label.empty()) {
            o << "<line x1=\"" << kLeft + pw - 150 << "\" y1=\"" << legend_y << "\" x2=\""
              << kLeft + pw - 125 << "\" y2=\"" << legend_y << "\" stroke=\"" << escape(s.color)
              << "\" stroke-width=\"2\"/>";
            o << "<text x=\"" << kLeft + pw - 118 << "\" y=\"" << legend_y + 4 << "\">"
              << escape(s.label) << "</text>\n";
            legend_y += 16;
        }
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace quantcredit
