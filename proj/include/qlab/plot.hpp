#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace qlab {

enum class PlotKind { heatmap, curves, scatter };

struct PlotSeries {
  std::string name;
  std::vector<double> x, y;
};

// Curves and scatter use series; heatmap uses a row-major grid of values
// with rows along the vertical axis.
struct PlotData {
  std::string title, x_label, y_label;
  std::vector<PlotSeries> series;
  int rows = 0, cols = 0;
  std::vector<double> grid;
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;  // heatmap extent

  bool empty() const;
};

// Writes an SVG render at path and its CSV twin next to it (same stem,
// .csv). Empty data is rejected before any file is created. Returns the
// paths written, image first.
std::vector<std::filesystem::path> emit_plot(const PlotData& data, PlotKind kind,
                                             const std::filesystem::path& path);

}  // namespace qlab
