#pragma once

#include <Eigen/Core>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fractoseg/image.hpp"

namespace fractoseg {

/// SSIM(x, y) = l^alpha * c^beta * s^gamma, averaged over local windows.
/// Images are converted to luminance and resized to working_size first, since
/// the compared photographs generally differ in resolution.
struct SsimConfig {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  int window = 11;           // odd side length of the uniform local window
  double k1 = 0.01;          // stabilizer factors for an 8-bit dynamic range
  double k2 = 0.03;
  double dynamic_range = 255.0;
  int working_height = 256;
  int working_width = 256;
  bool grayscale = true;

  double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }

  void validate() const {
    require(std::isfinite(alpha) && std::isfinite(beta) && std::isfinite(gamma),
            ErrorCode::ConfigInvalid, "ssim exponents must be finite");
    require(window >= 3 && window % 2 == 1, ErrorCode::ConfigInvalid,
            "ssim window must be odd and >= 3");
    require(c1() > 0 && c2() > 0, ErrorCode::ConfigInvalid, "ssim stabilizers must be positive");
    require(working_height >= window && working_width >= window, ErrorCode::ConfigInvalid,
            "working size smaller than the window");
  }
};

struct SsimMatrix {
  std::vector<std::string> ids;
  Eigen::MatrixXd values;  // N x N, symmetric, unit diagonal

  int size() const { return int(ids.size()); }
};

enum class SsimSelection { kVsFirst, kAllPairs };

struct SsimStats {
  double mu = 0;
  double sigma = 0;
  SsimSelection selection = SsimSelection::kAllPairs;
  int n = 0;
};

/// Mean similarity over all fully interior local windows of the two images.
double ssim(const ImageRgb8& x, const ImageRgb8& y, const SsimConfig& cfg);

/// Luminance-plane variant used once both images are already normalized.
double ssim_luminance(const PlaneD& x, const PlaneD& y, const SsimConfig& cfg);

SsimMatrix ssim_matrix(const std::vector<std::string>& ids,
                       const std::vector<ImageRgb8>& images, const SsimConfig& cfg);

/// mu/sigma over a selection: vs-first uses row 0 excluding the diagonal,
/// all-pairs uses the strict upper triangle. sigma is the population deviation.
SsimStats dataset_stats(const SsimMatrix& matrix, SsimSelection selection);

struct QualityPoint {
  std::string id;
  double ssim = 0;
  double miou = 0;
};

struct BoxSummary {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  double iqr() const { return q3 - q1; }
};

/// Paired per-image (SSIM, mIoU) records plus box summaries; mirrors the
/// similarity-versus-quality scatter and box views.
struct SsimQualityReport {
  std::vector<QualityPoint> points;  // SSIM taken vs the first image of the matrix
  BoxSummary ssim_box;
  BoxSummary miou_box;
  bool miou_spread_smaller = false;  // IQR(mIoU) < IQR(SSIM)
};

SsimQualityReport ssim_quality_report(const SsimMatrix& matrix,
                                      const std::map<std::string, double>& per_image_miou);

BoxSummary box_summary(std::vector<double> values);

void save_matrix_csv(const SsimMatrix& matrix, const std::string& path);
void save_stats_json(const SsimStats& stats, const std::string& path);

}  // namespace fractoseg
