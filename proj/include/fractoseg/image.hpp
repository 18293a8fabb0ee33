#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "fractoseg/common.hpp"

namespace fractoseg {

using PlaneU8 = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
using PlaneF = Eigen::ArrayXXf;
using PlaneD = Eigen::ArrayXXd;

/// 8-bit RGB image stored as three H x W planes, indexed (row, col).
struct ImageRgb8 {
  std::array<PlaneU8, 3> ch;

  ImageRgb8() = default;
  ImageRgb8(Eigen::Index h, Eigen::Index w) {
    for (auto& p : ch) p = PlaneU8::Zero(h, w);
  }

  Eigen::Index height() const { return ch[0].rows(); }
  Eigen::Index width() const { return ch[0].cols(); }
  bool empty() const { return ch[0].size() == 0; }

  bool operator==(const ImageRgb8& o) const {
    for (int c = 0; c < 3; ++c)
      if (height() != o.height() || width() != o.width() || !(ch[c] == o.ch[c]).all())
        return false;
    return true;
  }
};

/// Per-pixel class-id raster; values must stay inside the taxonomy (0..6).
struct Mask {
  PlaneU8 labels;

  Mask() = default;
  explicit Mask(PlaneU8 l) : labels(std::move(l)) {}
  Mask(Eigen::Index h, Eigen::Index w) : labels(PlaneU8::Zero(h, w)) {}

  Eigen::Index height() const { return labels.rows(); }
  Eigen::Index width() const { return labels.cols(); }
  bool empty() const { return labels.size() == 0; }

  bool operator==(const Mask& o) const {
    return height() == o.height() && width() == o.width() && (labels == o.labels).all();
  }
};

/// ITU-R BT.601 luma, double precision in [0, 255].
inline PlaneD to_luminance(const ImageRgb8& img) {
  return 0.299 * img.ch[0].cast<double>() + 0.587 * img.ch[1].cast<double>() +
         0.114 * img.ch[2].cast<double>();
}

inline std::uint8_t clamp_u8(double v) {
  return std::uint8_t(std::min(255.0, std::max(0.0, std::round(v))));
}

// --- resampling --------------------------------------------------------------

/// Bilinear resize with pixel-center alignment: src = (dst + 0.5) * scale - 0.5.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> resize_bilinear(
    const Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>& src, Eigen::Index oh,
    Eigen::Index ow) {
  require(src.size() > 0, ErrorCode::EmptyImage, "resize_bilinear on empty plane");
  const Eigen::Index ih = src.rows(), iw = src.cols();
  Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> dst(oh, ow);
  const double sy = double(ih) / double(oh);
  const double sx = double(iw) / double(ow);
  for (Eigen::Index y = 0; y < oh; ++y) {
    double fy = (double(y) + 0.5) * sy - 0.5;
    fy = std::min(std::max(fy, 0.0), double(ih - 1));
    const Eigen::Index y0 = Eigen::Index(std::floor(fy));
    const Eigen::Index y1 = std::min(y0 + 1, ih - 1);
    const double wy = fy - double(y0);
    for (Eigen::Index x = 0; x < ow; ++x) {
      double fx = (double(x) + 0.5) * sx - 0.5;
      fx = std::min(std::max(fx, 0.0), double(iw - 1));
      const Eigen::Index x0 = Eigen::Index(std::floor(fx));
      const Eigen::Index x1 = std::min(x0 + 1, iw - 1);
      const double wx = fx - double(x0);
      const double v = (1 - wy) * ((1 - wx) * double(src(y0, x0)) + wx * double(src(y0, x1))) +
                       wy * ((1 - wx) * double(src(y1, x0)) + wx * double(src(y1, x1)));
      if constexpr (std::is_integral_v<Scalar>)
        dst(y, x) = Scalar(std::min(255.0, std::max(0.0, std::round(v))));
      else
        dst(y, x) = Scalar(v);
    }
  }
  return dst;
}

template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> resize_nearest(
    const Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>& src, Eigen::Index oh,
    Eigen::Index ow) {
  require(src.size() > 0, ErrorCode::EmptyImage, "resize_nearest on empty plane");
  const Eigen::Index ih = src.rows(), iw = src.cols();
  Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> dst(oh, ow);
  const double sy = double(ih) / double(oh);
  const double sx = double(iw) / double(ow);
  for (Eigen::Index y = 0; y < oh; ++y) {
    Eigen::Index yi = std::min(Eigen::Index((double(y) + 0.5) * sy), ih - 1);
    for (Eigen::Index x = 0; x < ow; ++x) {
      Eigen::Index xi = std::min(Eigen::Index((double(x) + 0.5) * sx), iw - 1);
      dst(y, x) = src(yi, xi);
    }
  }
  return dst;
}

inline ImageRgb8 resize_bilinear(const ImageRgb8& img, Eigen::Index oh, Eigen::Index ow) {
  ImageRgb8 out;
  for (int c = 0; c < 3; ++c) out.ch[c] = resize_bilinear<std::uint8_t>(img.ch[c], oh, ow);
  return out;
}

inline Mask resize_nearest(const Mask& m, Eigen::Index oh, Eigen::Index ow) {
  return Mask(resize_nearest<std::uint8_t>(m.labels, oh, ow));
}

}  // namespace fractoseg
