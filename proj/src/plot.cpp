#include "fractoseg/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fractoseg/png_io.hpp"
#include "fractoseg/ssim.hpp"

namespace fractoseg {

namespace {

// 5x7 glyphs for numeric labels, one bit per pixel, row-major
struct Glyph {
  char ch;
  std::uint8_t rows[7];
};

const Glyph kGlyphs[] = {
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}},
    {'e', {0x00, 0x00, 0x0E, 0x11, 0x1F, 0x10, 0x0E}},
    {'x', {0x00, 0x00, 0x11, 0x0A, 0x04, 0x0A, 0x11}},
};

const Glyph* find_glyph(char c) {
  for (const auto& g : kGlyphs)
    if (g.ch == c) return &g;
  return nullptr;
}

Rgb colormap(double t) {
  // dark blue -> teal -> yellow
  t = std::clamp(t, 0.0, 1.0);
  const double r = std::clamp(2.0 * t - 0.8, 0.0, 1.0);
  const double g = std::clamp(1.6 * t, 0.0, 1.0) * 0.9;
  const double b = std::clamp(1.0 - 1.4 * t, 0.05, 1.0);
  return Rgb{std::uint8_t(255 * r), std::uint8_t(255 * g), std::uint8_t(255 * b)};
}

}  // namespace

Canvas::Canvas(int height, int width, Rgb background) : img_(height, width) {
  img_.ch[0].setConstant(background.r);
  img_.ch[1].setConstant(background.g);
  img_.ch[2].setConstant(background.b);
}

void Canvas::set_pixel(int x, int y, Rgb color) {
  if (x < 0 || y < 0 || x >= width() || y >= height()) return;
  img_.ch[0](y, x) = color.r;
  img_.ch[1](y, x) = color.g;
  img_.ch[2](y, x) = color.b;
}

void Canvas::draw_line(int x0, int y0, int x1, int y1, Rgb color) {
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    set_pixel(x0, y0, color);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void Canvas::draw_rect(int x0, int y0, int x1, int y1, Rgb color, bool fill) {
  if (x0 > x1) std::swap(x0, x1);
  if (y0 > y1) std::swap(y0, y1);
  if (fill) {
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) set_pixel(x, y, color);
  } else {
    draw_line(x0, y0, x1, y0, color);
    draw_line(x0, y1, x1, y1, color);
    draw_line(x0, y0, x0, y1, color);
    draw_line(x1, y0, x1, y1, color);
  }
}

void Canvas::draw_marker(int x, int y, Rgb color) {
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) set_pixel(x + dx, y + dy, color);
}

void Canvas::draw_label(int x, int y, const std::string& text, Rgb color) {
  int cx = x;
  for (char c : text) {
    if (const Glyph* g = find_glyph(c)) {
      for (int row = 0; row < 7; ++row)
        for (int col = 0; col < 5; ++col)
          if (g->rows[row] & (1 << (4 - col))) set_pixel(cx + col, y + row, color);
    }
    cx += 6;
  }
}

void Canvas::draw_number(int x, int y, double value, Rgb color) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", value);
  draw_label(x, y, buf, color);
}

void Canvas::save(const std::string& path) const { write_png_rgb8(path, img_); }

void save_heatmap_png(const Eigen::MatrixXd& values, const std::string& path, double vmin,
                      double vmax) {
  require(values.rows() > 0 && values.cols() > 0, ErrorCode::EmptyInput, "empty heatmap");
  const int cell = std::max(2, int(480 / std::max(values.rows(), values.cols())));
  const int mh = int(values.rows()) * cell, mw = int(values.cols()) * cell;
  Canvas canvas(mh + 40, mw + 70);
  for (Eigen::Index r = 0; r < values.rows(); ++r)
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const double t = (values(r, c) - vmin) / (vmax - vmin);
      canvas.draw_rect(20 + int(c) * cell, 20 + int(r) * cell, 20 + int(c + 1) * cell - 1,
                       20 + int(r + 1) * cell - 1, colormap(t), true);
    }
  // color bar
  const int bar_x = mw + 80 - 50;
  for (int y = 0; y < mh; ++y) {
    const double t = 1.0 - double(y) / double(mh - 1);
    canvas.draw_rect(bar_x, 20 + y, bar_x + 12, 20 + y, colormap(t), true);
  }
  canvas.draw_number(bar_x - 2, 8, vmax, {0, 0, 0});
  canvas.draw_number(bar_x - 2, mh + 24, vmin, {0, 0, 0});
  canvas.save(path);
}

namespace {

struct AxisMap {
  double lo, hi;
  int px0, px1;
  bool log_scale;

  int map(double v) const {
    const double t = log_scale ? (std::log10(std::max(v, 1e-12)) - std::log10(lo)) /
                                     (std::log10(hi) - std::log10(lo))
                               : (v - lo) / (hi - lo);
    return px0 + int(std::lround(t * double(px1 - px0)));
  }
};

}  // namespace

void save_scatter_png(const std::vector<ScatterSeries>& series, const std::string& path,
                      const ScatterOptions& options) {
  require(!series.empty(), ErrorCode::EmptyInput, "no scatter series");
  double xmin = options.x_min, xmax = options.x_max, ymin = options.y_min, ymax = options.y_max;
  if (xmin == xmax || ymin == ymax) {
    xmin = ymin = std::numeric_limits<double>::infinity();
    xmax = ymax = -std::numeric_limits<double>::infinity();
    for (const auto& s : series) {
      for (double v : s.x) {
        xmin = std::min(xmin, v);
        xmax = std::max(xmax, v);
      }
      for (double v : s.y) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
    }
    if (options.diagonal) {  // shared scale keeps the diagonal meaningful
      xmin = ymin = std::min(xmin, ymin);
      xmax = ymax = std::max(xmax, ymax);
    }
    const double xpad = (xmax - xmin) * 0.08 + 1e-9, ypad = (ymax - ymin) * 0.08 + 1e-9;
    if (!options.log_x) xmin -= xpad;
    xmax += xpad;
    ymin -= ypad;
    ymax += ypad;
  }

  const int W = 560, H = 420, m = 48;
  Canvas canvas(H, W);
  const AxisMap ax{xmin, xmax, m, W - 16, options.log_x};
  const AxisMap ay{ymin, ymax, H - m, 16, false};

  canvas.draw_line(m, H - m, W - 16, H - m, {0, 0, 0});
  canvas.draw_line(m, H - m, m, 16, {0, 0, 0});
  for (int i = 0; i <= 4; ++i) {
    const double xv = options.log_x
                          ? std::pow(10.0, std::log10(xmin) +
                                               i * (std::log10(xmax) - std::log10(xmin)) / 4)
                          : xmin + i * (xmax - xmin) / 4;
    const double yv = ymin + i * (ymax - ymin) / 4;
    canvas.draw_line(ax.map(xv), H - m, ax.map(xv), H - m + 4, {0, 0, 0});
    canvas.draw_number(ax.map(xv) - 10, H - m + 7, xv, {0, 0, 0});
    canvas.draw_line(m - 4, ay.map(yv), m, ay.map(yv), {0, 0, 0});
    canvas.draw_number(2, ay.map(yv) - 3, yv, {0, 0, 0});
  }

  if (options.diagonal) {
    const double lo = std::max(xmin, ymin), hi = std::min(xmax, ymax);
    canvas.draw_line(ax.map(lo), ay.map(lo), ax.map(hi), ay.map(hi), {120, 120, 120});
    if (options.band_pct > 0) {
      const double f = options.band_pct / 100.0;
      canvas.draw_line(ax.map(lo), ay.map(lo * (1 + f)), ax.map(hi), ay.map(hi * (1 + f)),
                       {200, 160, 160});
      canvas.draw_line(ax.map(lo), ay.map(lo * (1 - f)), ax.map(hi), ay.map(hi * (1 - f)),
                       {200, 160, 160});
    }
  }

  for (const auto& s : series) {
    require(s.x.size() == s.y.size(), ErrorCode::ShapeMismatch, "scatter series length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i)
      canvas.draw_marker(ax.map(s.x[i]), ay.map(s.y[i]), s.color);
  }
  canvas.save(path);
}

void save_boxplot_png(const std::vector<std::vector<double>>& groups,
                      const std::vector<std::string>& labels, const std::string& path) {
  require(!groups.empty(), ErrorCode::EmptyInput, "no boxplot groups");
  require(labels.size() == groups.size(), ErrorCode::ShapeMismatch, "labels/groups mismatch");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& g : groups) {
    require(!g.empty(), ErrorCode::EmptyInput, "empty boxplot group");
    for (double v : g) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const double pad = (hi - lo) * 0.1 + 1e-9;
  lo -= pad;
  hi += pad;

  const int W = 120 * int(groups.size()) + 80, H = 400, m = 42;
  Canvas canvas(H, W);
  const AxisMap ay{lo, hi, H - m, 16, false};
  canvas.draw_line(m, H - m, W - 10, H - m, {0, 0, 0});
  canvas.draw_line(m, H - m, m, 16, {0, 0, 0});
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + i * (hi - lo) / 4;
    canvas.draw_number(2, ay.map(v) - 3, v, {0, 0, 0});
    canvas.draw_line(m - 4, ay.map(v), m, ay.map(v), {0, 0, 0});
  }

  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const BoxSummary box = box_summary(groups[gi]);
    const int cx = m + 60 + 120 * int(gi);
    const int half = 34;
    const Rgb color{31, 119, 180};
    canvas.draw_line(cx, ay.map(box.min), cx, ay.map(box.q1), color);
    canvas.draw_line(cx, ay.map(box.q3), cx, ay.map(box.max), color);
    canvas.draw_line(cx - 12, ay.map(box.min), cx + 12, ay.map(box.min), color);
    canvas.draw_line(cx - 12, ay.map(box.max), cx + 12, ay.map(box.max), color);
    canvas.draw_rect(cx - half, ay.map(box.q3), cx + half, ay.map(box.q1), color, false);
    canvas.draw_line(cx - half, ay.map(box.median), cx + half, ay.map(box.median), {214, 39, 40});
    canvas.draw_label(cx - half, H - m + 8, labels[gi], {0, 0, 0});
  }
  canvas.save(path);
}

ImageRgb8 colorize_mask(const Mask& mask) {
  ImageRgb8 out(mask.height(), mask.width());
  const auto& palette = class_palette();
  for (Eigen::Index y = 0; y < mask.height(); ++y)
    for (Eigen::Index x = 0; x < mask.width(); ++x) {
      const Rgb c = palette[mask.labels(y, x) % kNumClasses];
      out.ch[0](y, x) = c.r;
      out.ch[1](y, x) = c.g;
      out.ch[2](y, x) = c.b;
    }
  return out;
}

}  // namespace fractoseg
