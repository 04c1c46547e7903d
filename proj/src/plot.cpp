#include "qlab/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "qlab/error.hpp"

namespace qlab {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;

// Fixed palette for series, fixed diverging map for heatmaps.
constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                 "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f"};

std::string color_of(double t) {
  // Blue -> white -> red.
  t = std::clamp(t, 0.0, 1.0);
  int r, g, b;
  if (t < 0.5) {
    const double s = t / 0.5;
    r = static_cast<int>(std::lround(40 + s * 215));
    g = static_cast<int>(std::lround(70 + s * 185));
    b = 255;
  } else {
    const double s = (t - 0.5) / 0.5;
    r = 255;
    g = static_cast<int>(std::lround(255 - s * 200));
    b = static_cast<int>(std::lround(255 - s * 215));
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += ch;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void axes(std::ostream& os, const Frame& f, const PlotData& d) {
  os << "<rect x='" << kLeft << "' y='" << kTop << "' width='" << kWidth - kLeft - kRight
     << "' height='" << kHeight - kTop - kBottom << "' fill='none' stroke='black'/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0, yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    os << "<text x='" << f.px(xv) << "' y='" << kHeight - kBottom + 16
       << "' font-size='11' text-anchor='middle'>" << num(xv) << "</text>\n";
    os << "<text x='" << kLeft - 6 << "' y='" << f.py(yv) + 4
       << "' font-size='11' text-anchor='end'>" << num(yv) << "</text>\n";
  }
  os << "<text x='" << kWidth / 2 << "' y='" << kHeight - 12 << "' font-size='13' text-anchor='middle'>"
     << escape(d.x_label) << "</text>\n";
  os << "<text x='16' y='" << kHeight / 2 << "' font-size='13' text-anchor='middle' transform='rotate(-90 16 "
     << kHeight / 2 << ")'>" << escape(d.y_label) << "</text>\n";
  os << "<text x='" << kWidth / 2 << "' y='24' font-size='14' text-anchor='middle'>" << escape(d.title)
     << "</text>\n";
}

Frame series_frame(const PlotData& d) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : d.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-300) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-300) y0 -= 0.5, y1 += 0.5;
  const double mx = 0.03 * (x1 - x0), my = 0.05 * (y1 - y0);
  return {x0 - mx, x1 + mx, y0 - my, y1 + my};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace

bool PlotData::empty() const {
  if (rows > 0 && cols > 0 && grid.size() == static_cast<std::size_t>(rows) * cols) return false;
  for (const auto& s : series)
    if (!s.x.empty()) return false;
  return true;
}

std::vector<std::filesystem::path> emit_plot(const PlotData& data, PlotKind kind,
                                             const std::filesystem::path& path) {
  for (const auto& s : data.series)
    if (s.x.size() != s.y.size()) throw InvalidArgument("emit_plot: series '" + s.name + "' has x/y size mismatch");
  const bool heat = kind == PlotKind::heatmap;
  if (heat ? !(data.rows > 0 && data.cols > 0 &&
               data.grid.size() == static_cast<std::size_t>(data.rows) * data.cols)
           : data.empty())
    throw InvalidArgument("emit_plot: no data to plot");

  std::ostringstream svg, csv;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
      << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  csv.precision(17);

  if (heat) {
    const Frame f{data.x_min, data.x_max, data.y_min, data.y_max};
    double lo = *std::min_element(data.grid.begin(), data.grid.end());
    double hi = *std::max_element(data.grid.begin(), data.grid.end());
    const double span = std::max(std::abs(lo), std::abs(hi));
    lo = -span;
    hi = span;
    // At most 320 columns are drawn; wider grids are strided.
    const int stride = std::max(1, data.cols / 320);
    const double cw = (f.px(data.x_max) - f.px(data.x_min)) / data.cols * stride;
    const double rh = (f.py(data.y_min) - f.py(data.y_max)) / data.rows;
    for (int r = 0; r < data.rows; ++r)
      for (int c = 0; c < data.cols; c += stride) {
        const double v = data.grid[static_cast<std::size_t>(r) * data.cols + c];
        const double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
        svg << "<rect x='" << num(f.px(data.x_min) + c / stride * cw) << "' y='"
            << num(f.py(data.y_max) + (data.rows - 1 - r) * rh) << "' width='" << num(cw + 0.05)
            << "' height='" << num(rh + 0.05) << "' fill='" << color_of(t) << "'/>\n";
      }
    axes(svg, f, data);
    csv << "row,col,value\n";
    for (int r = 0; r < data.rows; ++r)
      for (int c = 0; c < data.cols; ++c)
        csv << r << ',' << c << ',' << data.grid[static_cast<std::size_t>(r) * data.cols + c] << '\n';
  } else {
    const Frame f = series_frame(data);
    for (std::size_t k = 0; k < data.series.size(); ++k) {
      const auto& s = data.series[k];
      const char* col = kPalette[k % kPalette.size()];
      if (kind == PlotKind::curves) {
        svg << "<polyline fill='none' stroke='" << col << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < s.x.size(); ++i)
          if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) svg << num(f.px(s.x[i])) << ',' << num(f.py(s.y[i])) << ' ';
        svg << "'/>\n";
      } else {
        for (std::size_t i = 0; i < s.x.size(); ++i)
          if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
            svg << "<circle cx='" << num(f.px(s.x[i])) << "' cy='" << num(f.py(s.y[i]))
                << "' r='2.2' fill='" << col << "'/>\n";
      }
      svg << "<text x='" << kWidth - kRight - 6 << "' y='" << kTop + 16 + 14 * k
          << "' font-size='11' text-anchor='end' fill='" << col << "'>" << escape(s.name) << "</text>\n";
    }
    axes(svg, f, data);
    csv << "series,x,y\n";
    for (const auto& s : data.series)
      for (std::size_t i = 0; i < s.x.size(); ++i) csv << s.name << ',' << s.x[i] << ',' << s.y[i] << '\n';
  }
  svg << "</svg>\n";

  auto csv_path = path;
  csv_path.replace_extension(".csv");
  write_file(path, svg.str());
  write_file(csv_path, csv.str());
  return {path, csv_path};
}

}  // namespace qlab
