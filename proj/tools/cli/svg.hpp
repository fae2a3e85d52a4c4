#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "radarcast/field.hpp"

namespace radarcast::cli {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct ChartOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool markers = true;
};

/// Line chart; NaN points break the line.
void write_line_chart(const std::filesystem::path& path, const std::vector<Series>& series, const ChartOptions& opts);

void write_bar_chart(const std::filesystem::path& path, const std::vector<double>& values, const ChartOptions& opts,
                     double reference = -1.0);

/// Points coloured by `color_value` on a blue-to-red ramp over [0, color_max].
void write_scatter(const std::filesystem::path& path, const std::vector<double>& x, const std::vector<double>& y,
                   const std::vector<double>& color_value, double color_max, const ChartOptions& opts);

/// Frames side by side on a shared dBZ colour scale.
void write_frames(const std::filesystem::path& path, const std::vector<ReflectivityField>& frames,
                  const std::vector<std::string>& captions, double vmin, double vmax);

}  // namespace radarcast::cli
