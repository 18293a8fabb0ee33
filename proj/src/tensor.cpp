#include "fractoseg/tensor.hpp"

namespace fractoseg {

TensorF images_to_tensor(const std::vector<ImageRgb8>& images, const std::array<float, 3>& mean,
                         const std::array<float, 3>& stddev) {
  require(!images.empty(), ErrorCode::EmptyInput, "images_to_tensor on empty batch");
  const Eigen::Index h = images[0].height(), w = images[0].width();
  TensorF t(int(images.size()), 3, int(h), int(w));
  for (int ni = 0; ni < t.n; ++ni) {
    const ImageRgb8& img = images[std::size_t(ni)];
    require(img.height() == h && img.width() == w, ErrorCode::ShapeMismatch,
            "batch images must share one size");
    for (int c = 0; c < 3; ++c) {
      const float inv = 1.0f / (255.0f * stddev[std::size_t(c)]);
      const float off = mean[std::size_t(c)] / stddev[std::size_t(c)];
      auto col = t.m.col(Eigen::Index(ni) * 3 + c);
      for (Eigen::Index y = 0; y < h; ++y)
        for (Eigen::Index x = 0; x < w; ++x)
          col(y * w + x) = float(img.ch[std::size_t(c)](y, x)) * inv - off;
    }
  }
  return t;
}

Eigen::VectorXi mask_to_labels(const Mask& mask) {
  const Eigen::Index h = mask.height(), w = mask.width();
  Eigen::VectorXi labels(h * w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) labels(y * w + x) = mask.labels(y, x);
  return labels;
}

std::vector<PlaneF> tensor_to_planes(const TensorF& t, int sample) {
  require(sample >= 0 && sample < t.n, ErrorCode::ShapeMismatch, "sample index out of range");
  std::vector<PlaneF> planes(std::size_t(t.c));
  for (int c = 0; c < t.c; ++c) {
    PlaneF plane(t.h, t.w);
    const auto col = t.m.col(Eigen::Index(sample) * t.c + c);
    for (int y = 0; y < t.h; ++y)
      for (int x = 0; x < t.w; ++x) plane(y, x) = col(Eigen::Index(y) * t.w + x);
    planes[std::size_t(c)] = std::move(plane);
  }
  return planes;
}

}  // namespace fractoseg
