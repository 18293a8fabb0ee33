#include "fractoseg/ssim.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace fractoseg {

namespace {

// sign-preserving power so a negative structure term survives non-unit gamma
double spow(double base, double expo) {
  if (expo == 1.0) return base;
  return base < 0 ? -std::pow(-base, expo) : std::pow(base, expo);
}

/// Sliding-window sums over w x w windows, one value per fully interior window.
PlaneD box_sums(const PlaneD& img, int w) {
  const Eigen::Index h = img.rows(), c = img.cols();
  PlaneD rows(h, c - w + 1);
  for (Eigen::Index y = 0; y < h; ++y) {
    double acc = 0;
    for (int x = 0; x < w; ++x) acc += img(y, x);
    rows(y, 0) = acc;
    for (Eigen::Index x = 1; x + w - 1 < c; ++x) {
      acc += img(y, x + w - 1) - img(y, x - 1);
      rows(y, x) = acc;
    }
  }
  PlaneD out(h - w + 1, c - w + 1);
  for (Eigen::Index x = 0; x < out.cols(); ++x) {
    double acc = 0;
    for (int y = 0; y < w; ++y) acc += rows(y, x);
    out(0, x) = acc;
    for (Eigen::Index y = 1; y + w - 1 < h; ++y) {
      acc += rows(y + w - 1, x) - rows(y - 1, x);
      out(y, x) = acc;
    }
  }
  return out;
}

}  // namespace

double ssim_luminance(const PlaneD& x, const PlaneD& y, const SsimConfig& cfg) {
  cfg.validate();
  require(x.size() > 0 && y.size() > 0, ErrorCode::EmptyImage, "ssim on empty image");
  require(x.rows() == y.rows() && x.cols() == y.cols(), ErrorCode::ShapeMismatch,
          "ssim inputs must share the working size");

  const int w = cfg.window;
  const double n = double(w) * double(w);
  const double c1 = cfg.c1(), c2 = cfg.c2(), c3 = cfg.c2() / 2.0;

  const PlaneD sx = box_sums(x, w);
  const PlaneD sy = box_sums(y, w);
  const PlaneD sxx = box_sums(PlaneD(x * x), w);
  const PlaneD syy = box_sums(PlaneD(y * y), w);
  const PlaneD sxy = box_sums(PlaneD(x * y), w);

  double total = 0;
  for (Eigen::Index r = 0; r < sx.rows(); ++r) {
    for (Eigen::Index c = 0; c < sx.cols(); ++c) {
      const double mx = sx(r, c) / n;
      const double my = sy(r, c) / n;
      const double vx = std::max(0.0, sxx(r, c) / n - mx * mx);
      const double vy = std::max(0.0, syy(r, c) / n - my * my);
      const double cov = sxy(r, c) / n - mx * my;
      const double dx = std::sqrt(vx), dy = std::sqrt(vy);

      const double l = (2 * mx * my + c1) / (mx * mx + my * my + c1);
      const double con = (2 * dx * dy + c2) / (vx + vy + c2);
      const double s = (cov + c3) / (dx * dy + c3);
      total += spow(l, cfg.alpha) * spow(con, cfg.beta) * spow(s, cfg.gamma);
    }
  }
  const double result = total / double(sx.size());
  require(std::isfinite(result), ErrorCode::NonFiniteResult, "ssim produced a non-finite value");
  return result;
}

double ssim(const ImageRgb8& x, const ImageRgb8& y, const SsimConfig& cfg) {
  require(!x.empty() && !y.empty(), ErrorCode::EmptyImage, "ssim on empty image");
  const PlaneD lx =
      resize_bilinear<double>(to_luminance(x), cfg.working_height, cfg.working_width);
  const PlaneD ly =
      resize_bilinear<double>(to_luminance(y), cfg.working_height, cfg.working_width);
  return ssim_luminance(lx, ly, cfg);
}

SsimMatrix ssim_matrix(const std::vector<std::string>& ids,
                       const std::vector<ImageRgb8>& images, const SsimConfig& cfg) {
  require(ids.size() == images.size(), ErrorCode::ShapeMismatch, "ids/images length mismatch");
  require(images.size() >= 2, ErrorCode::EmptyInput, "ssim_matrix needs at least 2 images");
  cfg.validate();

  // normalize once, compare pairwise; symmetry is exploited
  std::vector<PlaneD> lum;
  lum.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    require(!images[i].empty(), ErrorCode::EmptyImage, "empty image '" + ids[i] + "'");
    lum.push_back(
        resize_bilinear<double>(to_luminance(images[i]), cfg.working_height, cfg.working_width));
  }

  const int n = int(images.size());
  SsimMatrix m;
  m.ids = ids;
  m.values = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double v;
      try {
        v = ssim_luminance(lum[std::size_t(i)], lum[std::size_t(j)], cfg);
      } catch (const Error& e) {
        throw Error(e.code(), "pair (" + ids[std::size_t(i)] + ", " + ids[std::size_t(j)] +
                                  "): " + e.what());
      }
      m.values(i, j) = v;
      m.values(j, i) = v;
    }
  }
  return m;
}

SsimStats dataset_stats(const SsimMatrix& matrix, SsimSelection selection) {
  std::vector<double> entries;
  const int n = matrix.size();
  if (selection == SsimSelection::kVsFirst) {
    for (int j = 1; j < n; ++j) entries.push_back(matrix.values(0, j));
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) entries.push_back(matrix.values(i, j));
  }
  require(!entries.empty(), ErrorCode::EmptySelection, "selection has no entries");

  SsimStats stats;
  stats.selection = selection;
  stats.n = int(entries.size());
  for (double v : entries) stats.mu += v;
  stats.mu /= double(entries.size());
  for (double v : entries) stats.sigma += (v - stats.mu) * (v - stats.mu);
  stats.sigma = std::sqrt(stats.sigma / double(entries.size()));
  return stats;
}

BoxSummary box_summary(std::vector<double> values) {
  require(!values.empty(), ErrorCode::EmptyInput, "box_summary on empty data");
  std::sort(values.begin(), values.end());
  auto quantile = [&](double p) {
    const double pos = p * double(values.size() - 1);
    const std::size_t lo = std::size_t(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - double(lo);
    return values[lo] * (1 - frac) + values[hi] * frac;
  };
  BoxSummary b;
  b.min = values.front();
  b.q1 = quantile(0.25);
  b.median = quantile(0.5);
  b.q3 = quantile(0.75);
  b.max = values.back();
  return b;
}

SsimQualityReport ssim_quality_report(const SsimMatrix& matrix,
                                      const std::map<std::string, double>& per_image_miou) {
  require(matrix.size() >= 2, ErrorCode::EmptyInput, "quality report needs >= 2 images");
  SsimQualityReport report;
  std::vector<double> ssims, mious;
  for (int j = 1; j < matrix.size(); ++j) {
    const std::string& id = matrix.ids[std::size_t(j)];
    auto it = per_image_miou.find(id);
    require(it != per_image_miou.end(), ErrorCode::MissingScore, "no mIoU score for '" + id + "'");
    QualityPoint p{id, matrix.values(0, j), it->second};
    ssims.push_back(p.ssim);
    mious.push_back(p.miou);
    report.points.push_back(std::move(p));
  }
  report.ssim_box = box_summary(ssims);
  report.miou_box = box_summary(mious);
  report.miou_spread_smaller = report.miou_box.iqr() < report.ssim_box.iqr();
  return report;
}

void save_matrix_csv(const SsimMatrix& matrix, const std::string& path) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoFailure, "cannot write " + path);
  out << "id";
  for (const auto& id : matrix.ids) out << "," << id;
  out << "\n";
  out.precision(9);
  for (int i = 0; i < matrix.size(); ++i) {
    out << matrix.ids[std::size_t(i)];
    for (int j = 0; j < matrix.size(); ++j) out << "," << matrix.values(i, j);
    out << "\n";
  }
}

void save_stats_json(const SsimStats& stats, const std::string& path) {
  nlohmann::json doc;
  doc["mu"] = stats.mu;
  doc["sigma"] = stats.sigma;
  doc["selection"] = stats.selection == SsimSelection::kVsFirst ? "vs-first" : "all-pairs";
  doc["n"] = stats.n;
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoFailure, "cannot write " + path);
  out << doc.dump(2) << "\n";
}

}  // namespace fractoseg
