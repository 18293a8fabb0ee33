#pragma once

#include <Eigen/Core>
#include <vector>

#include "fractoseg/common.hpp"
#include "fractoseg/image.hpp"

namespace fractoseg {

/// Batched activation tensor. Storage is one (H*W) x (N*C) matrix: column
/// n*C + c holds channel c of sample n, flattened row-major over (y, x).
/// This puts a sample's (HW x C) block directly in GEMM-friendly layout.
template <typename S>
struct Tensor {
  using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

  int n = 0, c = 0, h = 0, w = 0;
  Matrix m;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_), m(Matrix::Zero(Eigen::Index(h_) * w_, Eigen::Index(n_) * c_)) {}

  Eigen::Index pixels() const { return Eigen::Index(h) * w; }
  bool same_shape(const Tensor& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }

  S& at(int ni, int ci, int y, int x) { return m(Eigen::Index(y) * w + x, Eigen::Index(ni) * c + ci); }
  S at(int ni, int ci, int y, int x) const {
    return m(Eigen::Index(y) * w + x, Eigen::Index(ni) * c + ci);
  }

  auto sample(int ni) { return m.middleCols(Eigen::Index(ni) * c, c); }
  auto sample(int ni) const { return m.middleCols(Eigen::Index(ni) * c, c); }

  bool all_finite() const { return m.allFinite(); }
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

template <typename S>
Tensor<S> zeros_like(const Tensor<S>& t) {
  return Tensor<S>(t.n, t.c, t.h, t.w);
}

/// Numerically stabilized per-pixel softmax over channels.
template <typename S>
Tensor<S> softmax(const Tensor<S>& z) {
  require(z.all_finite(), ErrorCode::NonFinite, "softmax on non-finite logits");
  Tensor<S> p(z.n, z.c, z.h, z.w);
  for (int i = 0; i < z.n; ++i) {
    auto zb = z.sample(i);
    auto pb = p.sample(i);
    for (Eigen::Index r = 0; r < zb.rows(); ++r) {
      const S zmax = zb.row(r).maxCoeff();
      Eigen::Array<S, 1, Eigen::Dynamic> e = (zb.row(r).array() - zmax).exp();
      pb.row(r) = e / e.sum();
    }
  }
  return p;
}

/// Converts 8-bit RGB to a normalized float sample: (v/255 - mean_c) / std_c.
TensorF images_to_tensor(const std::vector<ImageRgb8>& images, const std::array<float, 3>& mean,
                         const std::array<float, 3>& stddev);

/// Per-sample flattened ground-truth labels (row-major pixel order).
Eigen::VectorXi mask_to_labels(const Mask& mask);

/// Per-class score planes of one sample, for patch stitching.
std::vector<PlaneF> tensor_to_planes(const TensorF& t, int sample);

}  // namespace fractoseg
