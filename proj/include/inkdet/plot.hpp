// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

namespace inkdet {

struct PlotSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

/// Minimal self-contained SVG line chart. Output bytes depend only on the
/// inputs, so replotting a log reproduces the file exactly.
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<PlotSeries>& series);

/// Tab-separated table with a fixed header row.
void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows);

} // namespace inkdet
