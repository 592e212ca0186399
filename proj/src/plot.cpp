// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#include "inkdet/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "inkdet/errors.hpp"

namespace inkdet {

namespace {

const char* kPalette[] = {"#1f6fb2", "#d1495b", "#3a8f5f", "#8f6bb2",
                          "#c98a2c", "#4d4d4d", "#7fb0d4", "#e0a1ab"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace

void write_svg_plot(const std::string& path, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<PlotSeries>& series) {
    if (series.empty()) throw ContractError("write_svg_plot: no series");

    double xmin = 1e300, xmax = -1e300, ymin = 0.0, ymax = -1e300;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymax = std::max(ymax, y);
        }
    }
    if (xmax < xmin) throw ContractError("write_svg_plot: empty series");
    if (xmax == xmin) xmax = xmin + 1.0;
    ymax = std::max(ymax * 1.05, 1e-9);

    const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
    const double pw = W - L - R, ph = H - T - B;
    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return T + ph - y / ymax * ph; };

    std::ofstream out(path);
    if (!out) throw IoError("write_svg_plot: cannot open " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title
        << "</text>\n";

    // axes + ticks
    out << "<line x1=\"" << L << "\" y1=\"" << T + ph << "\" x2=\"" << L + pw << "\" y2=\""
        << T + ph << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << T + ph
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double x = xmin + (xmax - xmin) * i / 5.0;
        const double y = ymax * i / 5.0;
        out << "<line x1=\"" << fmt(px(x)) << "\" y1=\"" << T + ph << "\" x2=\"" << fmt(px(x))
            << "\" y2=\"" << T + ph + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fmt(px(x)) << "\" y=\"" << T + ph + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(x) << "</text>\n";
        out << "<line x1=\"" << L - 5 << "\" y1=\"" << fmt(py(y)) << "\" x2=\"" << L << "\" y2=\""
            << fmt(py(y)) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << L - 8 << "\" y=\"" << fmt(py(y) + 4)
            << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(y) << "</text>\n";
    }
    out << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 10
        << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
    out << "<text x=\"16\" y=\"" << T + ph / 2 << "\" text-anchor=\"middle\" font-size=\"12\" "
        << "transform=\"rotate(-90 16 " << T + ph / 2 << ")\">" << y_label << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : series[si].points) {
            out << fmt(px(x)) << "," << fmt(py(y)) << " ";
        }
        out << "\"/>\n";
        const double ly = T + 14 + 14.0 * static_cast<double>(si);
        out << "<line x1=\"" << L + pw - 150 << "\" y1=\"" << fmt(ly) << "\" x2=\"" << L + pw - 130
            << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << L + pw - 125 << "\" y=\"" << fmt(ly + 4) << "\" font-size=\"11\">"
            << series[si].name << "</text>\n";
    }
    out << "</svg>\n";
}

void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("write_table: cannot open " + path);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "\t" : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "\t" : "") << row[i];
        out << "\n";
    }
}

} // namespace inkdet
