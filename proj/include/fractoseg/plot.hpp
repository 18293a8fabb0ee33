#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "fractoseg/image.hpp"
#include "fractoseg/taxonomy.hpp"

namespace fractoseg {

/// Minimal raster plotting: enough to emit heatmaps, scatters, and box plots
/// as PNG files without an external plotting dependency. Tick labels are
/// numeric only (5x7 bitmap glyphs).
class Canvas {
 public:
  Canvas(int height, int width, Rgb background = {255, 255, 255});

  void set_pixel(int x, int y, Rgb color);
  void draw_line(int x0, int y0, int x1, int y1, Rgb color);
  void draw_rect(int x0, int y0, int x1, int y1, Rgb color, bool fill = false);
  void draw_marker(int x, int y, Rgb color);                     // 3x3 dot
  void draw_number(int x, int y, double value, Rgb color);       // %.3g
  void draw_label(int x, int y, const std::string& text, Rgb color);

  int width() const { return int(img_.width()); }
  int height() const { return int(img_.height()); }
  void save(const std::string& path) const;
  const ImageRgb8& image() const { return img_; }

 private:
  ImageRgb8 img_;
};

/// Square matrix heat map with a value-range color bar.
void save_heatmap_png(const Eigen::MatrixXd& values, const std::string& path, double vmin = 0,
                      double vmax = 1);

struct ScatterSeries {
  std::vector<double> x, y;
  Rgb color = {31, 119, 180};
};

struct ScatterOptions {
  bool diagonal = false;        // draw y = x
  double band_pct = 0;          // +- relative band around the diagonal, in percent
  double x_min = 0, x_max = 0;  // equal bounds auto-scale
  double y_min = 0, y_max = 0;
  bool log_x = false;
};

void save_scatter_png(const std::vector<ScatterSeries>& series, const std::string& path,
                      const ScatterOptions& options = {});

/// One box per group: quartile box, median line, min/max whiskers.
void save_boxplot_png(const std::vector<std::vector<double>>& groups,
                      const std::vector<std::string>& labels, const std::string& path);

/// Class-id mask rendered with the documented 7-color palette.
ImageRgb8 colorize_mask(const Mask& mask);

}  // namespace fractoseg
