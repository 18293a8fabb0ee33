#include "fractoseg/measure.hpp"

#include <algorithm>
#include <cmath>

namespace fractoseg {

namespace {

bool is_fracture_class(std::uint8_t c) {
  return c == kErosionNotch || c == kFatiguePrecrack || c == kDuctileFracture ||
         c == kBrittleFracture;
}

bool is_crack_class(std::uint8_t c) { return c == kErosionNotch || c == kFatiguePrecrack; }

Mask transposed(const Mask& mask) {
  return Mask(PlaneU8(mask.labels.transpose()));
}

double median(std::vector<long long> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return double(v[n / 2]);
  return 0.5 * double(v[n / 2 - 1] + v[n / 2]);
}

/// Median fracture-band extent over rows that intersect the crack classes.
/// Rows are the cross-sections when the crack propagates along rows.
double net_thickness_from_mask(const Mask& mask) {
  std::vector<long long> extents;
  for (Eigen::Index y = 0; y < mask.height(); ++y) {
    bool crosses = false;
    long long extent = 0;
    for (Eigen::Index x = 0; x < mask.width(); ++x) {
      const std::uint8_t c = mask.labels(y, x);
      if (is_crack_class(c)) crosses = true;
      if (is_fracture_class(c)) ++extent;
    }
    if (crosses) extents.push_back(extent);
  }
  require(!extents.empty(), ErrorCode::DegenerateWidth, "no crack cross-sections in mask");
  return median(std::move(extents));
}

struct CrackFrame {
  Eigen::Index origin_row = 0;  // outermost erosion-notch row
  int direction = 1;            // +1: depth grows with the row index
};

CrackFrame locate_origin(const Mask& mask) {
  Eigen::Index min_row = mask.height(), max_row = -1;
  for (Eigen::Index y = 0; y < mask.height(); ++y)
    for (Eigen::Index x = 0; x < mask.width(); ++x)
      if (mask.labels(y, x) == kErosionNotch) {
        min_row = std::min(min_row, y);
        max_row = std::max(max_row, y);
      }
  require(max_row >= 0, ErrorCode::FrontNotFound, "mask has no erosion notch pixels");
  CrackFrame f;
  if (min_row <= mask.height() - 1 - max_row) {
    f.origin_row = min_row;
    f.direction = 1;
  } else {
    f.origin_row = max_row;
    f.direction = -1;
  }
  return f;
}

}  // namespace

MeasurementResult area_average_a0(const Mask& mask, const SpecimenGeometry& geometry,
                                  std::optional<double> scale_mm_per_px) {
  geometry.validate();
  require(!mask.empty(), ErrorCode::EmptyImage, "empty mask");
  const Mask work = geometry.orientation == CrackOrientation::kRows ? mask : transposed(mask);

  MeasurementResult result;
  result.scale_mm_per_px = scale_mm_per_px;
  for (Eigen::Index y = 0; y < work.height(); ++y)
    for (Eigen::Index x = 0; x < work.width(); ++x)
      result.crack_pixel_counts[work.labels(y, x)]++;

  const long long crack_area = result.crack_pixel_counts[kErosionNotch] +
                               result.crack_pixel_counts[kFatiguePrecrack];
  require(crack_area > 0, ErrorCode::NoCrackPixels,
          "mask contains neither erosion notch nor fatigue precrack pixels");

  if (geometry.net_thickness_mm && scale_mm_per_px)
    result.b_n_px = *geometry.net_thickness_mm / *scale_mm_per_px;
  else
    result.b_n_px = net_thickness_from_mask(work);
  require(result.b_n_px > 0, ErrorCode::DegenerateWidth, "net thickness is zero");

  result.a0_px = double(crack_area) / result.b_n_px;
  if (scale_mm_per_px) result.a0_mm = result.a0_px * *scale_mm_per_px;
  return result;
}

FivePointResult five_point_a0(const Mask& mask, const SpecimenGeometry& geometry,
                              std::optional<double> scale_mm_per_px) {
  geometry.validate();
  require(!mask.empty(), ErrorCode::EmptyImage, "empty mask");
  const Mask work = geometry.orientation == CrackOrientation::kRows ? mask : transposed(mask);
  const CrackFrame frame = locate_origin(work);

  // deepest crack pixel per thickness station column
  const Eigen::Index w = work.width();
  std::vector<double> depth(std::size_t(w), -1.0);
  Eigen::Index c_min = w, c_max = -1;
  bool any_precrack = false;
  for (Eigen::Index x = 0; x < w; ++x) {
    for (Eigen::Index y = 0; y < work.height(); ++y) {
      if (!is_crack_class(work.labels(y, x))) continue;
      if (work.labels(y, x) == kFatiguePrecrack) any_precrack = true;
      const double d = double(frame.direction * (y - frame.origin_row)) + 1.0;
      depth[std::size_t(x)] = std::max(depth[std::size_t(x)], d);
      c_min = std::min(c_min, x);
      c_max = std::max(c_max, x);
    }
  }
  require(any_precrack && c_max >= c_min, ErrorCode::FrontNotFound,
          "no measurable fatigue precrack front");

  FivePointResult result;
  const Eigen::Index band = c_max - c_min;
  double sum = 0;
  for (int i = 0; i < 5; ++i) {
    const Eigen::Index x =
        c_min + Eigen::Index(std::lround(double(i + 1) / 6.0 * double(band)));
    require(depth[std::size_t(x)] >= 0, ErrorCode::FrontNotFound,
            "no crack front at station " + std::to_string(i));
    result.station_positions[std::size_t(i)] = x;
    result.station_depths_px[std::size_t(i)] = depth[std::size_t(x)];
    sum += depth[std::size_t(x)];
  }
  result.a0_px = sum / 5.0;
  if (scale_mm_per_px) result.a0_mm = result.a0_px * *scale_mm_per_px;
  return result;
}

MeasurementStats measurement_stats(const std::vector<MeasurementPair>& pairs, double band_pct,
                                   const std::set<std::string>& exclude) {
  MeasurementStats stats;
  for (const auto& p : pairs) {
    if (exclude.count(p.id)) continue;
    require(p.reference_mm > 0, ErrorCode::InvalidSpec,
            "reference measurement must be positive for '" + p.id + "'");
    const double d = p.measured_mm - p.reference_mm;
    const double rel = 100.0 * d / p.reference_mm;
    stats.deviations_mm.push_back(d);
    stats.deviations_pct.push_back(rel);
    if (std::abs(rel) > band_pct) stats.outliers.push_back(p.id);
    ++stats.n;
  }
  require(stats.n > 0, ErrorCode::EmptyInput, "no measurement pairs");

  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / double(v.size());
  };
  auto sample_std = [&](const std::vector<double>& v, double mu) {
    if (v.size() < 2) return 0.0;
    double s = 0;
    for (double x : v) s += (x - mu) * (x - mu);
    return std::sqrt(s / double(v.size() - 1));
  };
  stats.delta_mm = mean(stats.deviations_mm);
  stats.delta_pct = mean(stats.deviations_pct);
  stats.sigma_mm = sample_std(stats.deviations_mm, stats.delta_mm);
  stats.sigma_pct = sample_std(stats.deviations_pct, stats.delta_pct);
  return stats;
}

double mean_pairwise_difference(const std::vector<double>& a, const std::vector<double>& b) {
  require(a.size() == b.size(), ErrorCode::ShapeMismatch, "series lengths differ");
  require(!a.empty(), ErrorCode::EmptyInput, "no measurements");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] - b[i];
  return s / double(a.size());
}

}  // namespace fractoseg
