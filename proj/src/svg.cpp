#include "fedrisk/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "fedrisk/errors.hpp"

namespace fedrisk {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 616.0;
constexpr double kTop = 24.0;
constexpr double kBottom = 372.0;

const char* kPalette[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string escape_xml(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (const char c : s) {
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

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace

void emit_svg_lines(std::span<const Series> series, const std::string& path, const std::string& x_label,
                    const std::string& y_label) {
    if (series.empty()) {
        throw ContractError("emit_svg_lines: need at least one series");
    }
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size() || s.x.size() < 2) {
            throw ContractError("emit_svg_lines: each series needs >= 2 (x, y) points");
        }
        for (const double v : s.x) {
            xmin = std::min(xmin, v);
            xmax = std::max(xmax, v);
        }
        for (const double v : s.y) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (xmax - xmin < 1e-12) {
        xmax = xmin + 1.0;
    }
    if (ymax - ymin < 1e-12) {
        ymax = ymin + 1.0;
    }
    const auto sx = [&](double v) { return kLeft + (v - xmin) / (xmax - xmin) * (kRight - kLeft); };
    const auto sy = [&](double v) { return kBottom - (v - ymin) / (ymax - ymin) * (kBottom - kTop); };

    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("emit_svg_lines: cannot write " + path);
    }
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight << "\" y2=\"" << kBottom
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kBottom
        << "\" stroke=\"black\"/>\n";

    // 5 ticks per axis.
    for (int i = 0; i <= 4; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 4.0;
        const double px = sx(fx);
        out << "<line x1=\"" << fmt(px) << "\" y1=\"" << kBottom << "\" x2=\"" << fmt(px) << "\" y2=\"" << kBottom + 5
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fmt(px) << "\" y=\"" << kBottom + 18 << "\" font-size=\"11\" text-anchor=\"middle\">"
            << fmt_tick(fx) << "</text>\n";
        const double fy = ymin + (ymax - ymin) * i / 4.0;
        const double py = sy(fy);
        out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << fmt(py) << "\" x2=\"" << kLeft << "\" y2=\"" << fmt(py)
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(py + 4) << "\" font-size=\"11\" text-anchor=\"end\">"
            << fmt_tick(fy) << "</text>\n";
    }
    if (!x_label.empty()) {
        out << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kHeight - 8
            << "\" font-size=\"12\" text-anchor=\"middle\">" << escape_xml(x_label) << "</text>\n";
    }
    if (!y_label.empty()) {
        out << "<text x=\"14\" y=\"" << (kTop + kBottom) / 2 << "\" font-size=\"12\" text-anchor=\"middle\" "
            << "transform=\"rotate(-90 14 " << (kTop + kBottom) / 2 << ")\">" << escape_xml(y_label) << "</text>\n";
    }

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            if (i > 0) {
                out << ' ';
            }
            out << fmt(sx(series[s].x[i])) << ',' << fmt(sy(series[s].y[i]));
        }
        out << "\"/>\n";
        // Legend row.
        const double ly = kTop + 16.0 * static_cast<double>(s);
        out << "<line x1=\"" << kLeft + 10 << "\" y1=\"" << fmt(ly + 4) << "\" x2=\"" << kLeft + 34 << "\" y2=\""
            << fmt(ly + 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << kLeft + 40 << "\" y=\"" << fmt(ly + 8) << "\" font-size=\"11\">"
            << escape_xml(series[s].name) << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) {
        throw std::runtime_error("emit_svg_lines: write failed for " + path);
    }
}

} // namespace fedrisk
