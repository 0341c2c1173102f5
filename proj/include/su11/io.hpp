#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace su11 {

/// Fixed 12-digit scientific form, so reruns give byte-identical files.
std::string format_number(double v);

/// Write through a sibling temp file and rename over the target.
void write_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_text(const std::filesystem::path& path);

std::uint64_t fnv1a(std::string_view data);
std::string hex64(std::uint64_t v);

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

/// Bare-bones line plot: axes, ticks at the ends, one polyline per series.
std::string svg_plot(std::span<const PlotSeries> series, std::string_view title, std::string_view x_label,
                     std::string_view y_label);

} // namespace su11
