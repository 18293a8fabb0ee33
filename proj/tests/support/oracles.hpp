#pragma once

// Independent reference implementations used as test oracles. These must stay
// structurally independent of the library code paths they check: plain loops,
// double precision, no shared helpers.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "fractoseg/image.hpp"
#include "fractoseg/rng.hpp"
#include "fractoseg/taxonomy.hpp"
#include "fractoseg/tensor.hpp"

namespace oracle {

struct ClassSets {
  std::set<long> pred, truth;
};

/// Brute-force set-based IoU: explicit pixel-index sets and std::set_intersection.
inline std::optional<double> iou_bruteforce(const fractoseg::Mask& pred,
                                            const fractoseg::Mask& truth, int cls) {
  ClassSets s;
  long idx = 0;
  for (Eigen::Index y = 0; y < pred.height(); ++y) {
    for (Eigen::Index x = 0; x < pred.width(); ++x, ++idx) {
      if (pred.labels(y, x) == cls) s.pred.insert(idx);
      if (truth.labels(y, x) == cls) s.truth.insert(idx);
    }
  }
  std::vector<long> inter, uni;
  std::set_intersection(s.pred.begin(), s.pred.end(), s.truth.begin(), s.truth.end(),
                        std::back_inserter(inter));
  std::set_union(s.pred.begin(), s.pred.end(), s.truth.begin(), s.truth.end(),
                 std::back_inserter(uni));
  if (uni.empty()) return std::nullopt;
  return double(inter.size()) / double(uni.size());
}

inline std::optional<double> dice_bruteforce(const fractoseg::Mask& pred,
                                             const fractoseg::Mask& truth, int cls) {
  ClassSets s;
  long idx = 0;
  for (Eigen::Index y = 0; y < pred.height(); ++y) {
    for (Eigen::Index x = 0; x < pred.width(); ++x, ++idx) {
      if (pred.labels(y, x) == cls) s.pred.insert(idx);
      if (truth.labels(y, x) == cls) s.truth.insert(idx);
    }
  }
  if (s.pred.empty() && s.truth.empty()) return std::nullopt;
  std::vector<long> inter;
  std::set_intersection(s.pred.begin(), s.pred.end(), s.truth.begin(), s.truth.end(),
                        std::back_inserter(inter));
  return 2.0 * double(inter.size()) / double(s.pred.size() + s.truth.size());
}

/// mIoU with the same inclusion rule stated by the contract: absent-in-both
/// classes excluded, phantom predictions contribute zero.
inline double miou_bruteforce(const fractoseg::Mask& pred, const fractoseg::Mask& truth) {
  double sum = 0;
  int considered = 0;
  for (int c = 0; c < fractoseg::kNumClasses; ++c) {
    const auto v = iou_bruteforce(pred, truth, c);
    if (!v) continue;
    sum += *v;
    ++considered;
  }
  return sum / double(considered);
}

inline fractoseg::Mask random_mask(int h, int w, fractoseg::Rng& rng, int max_class = 6) {
  fractoseg::Mask m(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      m.labels(y, x) = std::uint8_t(rng.uniform_int(0, max_class));
  return m;
}

inline fractoseg::ImageRgb8 random_image(int h, int w, fractoseg::Rng& rng) {
  fractoseg::ImageRgb8 img(h, w);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        img.ch[std::size_t(c)](y, x) = std::uint8_t(rng.uniform_int(0, 255));
  return img;
}

/// Windowed SSIM reference: every interior window recomputed from scratch.
inline double ssim_reference(const fractoseg::PlaneD& x, const fractoseg::PlaneD& y, int window,
                             double alpha, double beta, double gamma, double c1, double c2) {
  const int h = int(x.rows()), w = int(x.cols());
  const double n = double(window) * double(window);
  const double c3 = c2 / 2.0;
  double total = 0;
  long count = 0;
  for (int oy = 0; oy + window <= h; ++oy) {
    for (int ox = 0; ox + window <= w; ++ox) {
      double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      for (int dy = 0; dy < window; ++dy) {
        for (int dx = 0; dx < window; ++dx) {
          const double a = x(oy + dy, ox + dx);
          const double b = y(oy + dy, ox + dx);
          sx += a;
          sy += b;
          sxx += a * a;
          syy += b * b;
          sxy += a * b;
        }
      }
      const double mx = sx / n, my = sy / n;
      const double vx = std::max(0.0, sxx / n - mx * mx);
      const double vy = std::max(0.0, syy / n - my * my);
      const double cov = sxy / n - mx * my;
      const double l = (2 * mx * my + c1) / (mx * mx + my * my + c1);
      const double c = (2 * std::sqrt(vx) * std::sqrt(vy) + c2) / (vx + vy + c2);
      const double s = (cov + c3) / (std::sqrt(vx) * std::sqrt(vy) + c3);
      auto spow = [](double base, double e) {
        if (e == 1.0) return base;
        return base < 0 ? -std::pow(-base, e) : std::pow(base, e);
      };
      total += spow(l, alpha) * spow(c, beta) * spow(s, gamma);
      ++count;
    }
  }
  return total / double(count);
}

/// Central finite differences of a scalar function of a double tensor.
inline fractoseg::TensorD finite_difference(
    const std::function<double(const fractoseg::TensorD&)>& f, fractoseg::TensorD at,
    double step = 1e-4) {
  fractoseg::TensorD grad = fractoseg::zeros_like(at);
  for (Eigen::Index j = 0; j < at.m.cols(); ++j) {
    for (Eigen::Index i = 0; i < at.m.rows(); ++i) {
      const double orig = at.m(i, j);
      at.m(i, j) = orig + step;
      const double hi = f(at);
      at.m(i, j) = orig - step;
      const double lo = f(at);
      at.m(i, j) = orig;
      grad.m(i, j) = (hi - lo) / (2 * step);
    }
  }
  return grad;
}

inline double max_rel_error(const fractoseg::TensorD& a, const fractoseg::TensorD& b,
                            double floor = 1e-6) {
  double worst = 0;
  for (Eigen::Index j = 0; j < a.m.cols(); ++j)
    for (Eigen::Index i = 0; i < a.m.rows(); ++i) {
      const double denom = std::max({std::abs(a.m(i, j)), std::abs(b.m(i, j)), floor});
      worst = std::max(worst, std::abs(a.m(i, j) - b.m(i, j)) / denom);
    }
  return worst;
}

}  // namespace oracle
