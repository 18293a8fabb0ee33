#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fractoseg/image.hpp"
#include "fractoseg/taxonomy.hpp"

namespace fractoseg {

/// Axis along which the crack propagates through the mask raster.
enum class CrackOrientation { kRows, kCols };

struct SpecimenGeometry {
  double width_mm = 0;                       // W
  double thickness_mm = 0;                   // B
  std::optional<double> net_thickness_mm;    // B_N (between side-groove roots)
  std::optional<double> starter_notch_mm;    // a_k
  CrackOrientation orientation = CrackOrientation::kRows;

  void validate() const {
    require(width_mm > 0, ErrorCode::InvalidSpec, "specimen width must be positive");
    if (net_thickness_mm) {
      require(*net_thickness_mm > 0, ErrorCode::InvalidSpec, "B_N must be positive");
      if (thickness_mm > 0)
        require(*net_thickness_mm <= thickness_mm, ErrorCode::InvalidSpec, "B_N must be <= B");
    }
  }
};

struct MeasurementResult {
  double a0_px = 0;                     // area-average initial crack size in pixels
  std::optional<double> a0_mm;          // present when a scale is known
  double b_n_px = 0;                    // net thickness used by the division
  std::optional<double> scale_mm_per_px;
  std::array<long long, kNumClasses> crack_pixel_counts{};
};

/// Area-average method: a0 = (notch pixels + precrack pixels) / B_N. B_N in
/// pixels comes from the geometry when (B_N, scale) pin it, otherwise from the
/// mask as the median fracture-band extent across crack cross-sections.
MeasurementResult area_average_a0(const Mask& mask, const SpecimenGeometry& geometry,
                                  std::optional<double> scale_mm_per_px);

struct FivePointResult {
  double a0_px = 0;
  std::optional<double> a0_mm;
  std::array<double, 5> station_depths_px{};
  std::array<Eigen::Index, 5> station_positions{};
};

/// Automated 5-point average: the crack front is sampled at thickness
/// stations 1/6 .. 5/6 across the crack band and the depths are averaged.
FivePointResult five_point_a0(const Mask& mask, const SpecimenGeometry& geometry,
                              std::optional<double> scale_mm_per_px);

// --- error statistics ------------------------------------------------------------

struct MeasurementPair {
  std::string id;
  double reference_mm = 0;
  double measured_mm = 0;
};

struct MeasurementStats {
  int n = 0;
  double delta_mm = 0;    // mean signed deviation, measured - reference
  double delta_pct = 0;   // mean signed relative deviation in percent
  double sigma_mm = 0;    // sample standard deviation of the deviations
  double sigma_pct = 0;
  std::vector<std::string> outliers;    // beyond the relative deviation band
  std::vector<double> deviations_mm;    // per pair, aggregates recompute from these
  std::vector<double> deviations_pct;
};

/// `exclude` drops specimens from every aggregate (the bracketed-results
/// workflow); `band_pct` is the outlier band, default +-1 %.
MeasurementStats measurement_stats(const std::vector<MeasurementPair>& pairs,
                                   double band_pct = 1.0,
                                   const std::set<std::string>& exclude = {});

/// Mean pairwise difference mu_d between two measurement series on the same
/// specimens (element-wise a - b).
double mean_pairwise_difference(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace fractoseg
