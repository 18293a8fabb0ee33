#include "fractoseg/augment.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace fractoseg {

bool is_spatial(AugKind kind) {
  switch (kind) {
    case AugKind::kAffine:
    case AugKind::kRot90Flip:
    case AugKind::kGridDistortion:
      return true;
    default:
      return false;
  }
}

const char* aug_kind_name(AugKind kind) {
  switch (kind) {
    case AugKind::kAffine: return "affine";
    case AugKind::kRot90Flip: return "rot90_flip";
    case AugKind::kGridDistortion: return "grid_distortion";
    case AugKind::kSharpen: return "sharpen";
    case AugKind::kBlur: return "blur";
    case AugKind::kChannelShuffle: return "channel_shuffle";
    case AugKind::kGaussianNoise: return "gaussian_noise";
    case AugKind::kBrightnessContrast: return "brightness_contrast";
  }
  return "?";
}

AugKind aug_kind_from_name(const std::string& name) {
  for (AugKind k : {AugKind::kAffine, AugKind::kRot90Flip, AugKind::kGridDistortion,
                    AugKind::kSharpen, AugKind::kBlur, AugKind::kChannelShuffle,
                    AugKind::kGaussianNoise, AugKind::kBrightnessContrast})
    if (name == aug_kind_name(k)) return k;
  throw Error(ErrorCode::ConfigInvalid, "unknown augmentation kind '" + name + "'");
}

double AugmentationSpec::param(const std::string& name) const {
  auto it = params.find(name);
  require(it != params.end(), ErrorCode::ConfigInvalid,
          std::string(aug_kind_name(kind)) + " spec is missing parameter '" + name + "'");
  return it->second;
}

AugmentationSpec default_spec(AugKind kind) {
  AugmentationSpec s;
  s.kind = kind;
  switch (kind) {
    case AugKind::kAffine:
      s.params = {{"shift_limit", 0.0625}, {"scale_limit", 0.1}, {"rotate_limit", 45.0}};
      s.p = 0.25;
      break;
    case AugKind::kRot90Flip:
      s.p = 1.0;
      break;
    case AugKind::kGridDistortion:
      s.params = {{"num_steps", 5.0}, {"distort_limit", 0.3}};
      s.p = 0.5;
      break;
    case AugKind::kSharpen:
      s.params = {{"alpha_min", 0.2}, {"alpha_max", 0.5}, {"lightness_min", 0.5},
                  {"lightness_max", 1.0}};
      s.p = 0.25;
      break;
    case AugKind::kBlur:
      s.params = {{"blur_limit", 7.0}};
      s.p = 0.2;
      break;
    case AugKind::kChannelShuffle:
      s.p = 1.0;
      break;
    case AugKind::kGaussianNoise:
      // the loc value is read as a variance limit on the [0,1] scale
      s.params = {{"var_limit", 0.05}};
      s.p = 0.1;
      break;
    case AugKind::kBrightnessContrast:
      s.params = {{"brightness_limit", 0.2}, {"contrast_limit", 0.2}};
      s.p = 1.0;
      break;
  }
  return s;
}

void StrategyConfig::validate() const {
  for (const auto& spec : strong)
    require(!spec.spatial(), ErrorCode::SpatialSpecInStrong,
            "strategy '" + name + "' puts spatial transform '" + aug_kind_name(spec.kind) +
                "' in the strong pipeline");
  for (const auto& spec : weak)
    require(spec.p >= 0 && spec.p <= 1, ErrorCode::ConfigInvalid, "p outside [0,1]");
  for (const auto& spec : strong)
    require(spec.p >= 0 && spec.p <= 1, ErrorCode::ConfigInvalid, "p outside [0,1]");
}

namespace {

StrategyConfig make_strategy(const std::string& name, bool affine, bool rot90, bool grid,
                             bool bc, bool noise, bool shuffle, bool sharpen_blur) {
  StrategyConfig cfg;
  cfg.name = name;
  if (affine) cfg.weak.push_back(default_spec(AugKind::kAffine));
  if (rot90) cfg.weak.push_back(default_spec(AugKind::kRot90Flip));
  if (grid) cfg.weak.push_back(default_spec(AugKind::kGridDistortion));
  if (bc) cfg.strong.push_back(default_spec(AugKind::kBrightnessContrast));
  if (noise) cfg.strong.push_back(default_spec(AugKind::kGaussianNoise));
  if (shuffle) cfg.strong.push_back(default_spec(AugKind::kChannelShuffle));
  if (sharpen_blur) {
    cfg.strong.push_back(default_spec(AugKind::kSharpen));
    cfg.strong.push_back(default_spec(AugKind::kBlur));
  }
  return cfg;
}

}  // namespace

StrategyConfig builtin_strategy(const std::string& name) {
  //                                 affine rot90 grid   bc   noise shuffle sharp+blur
  if (name == "REF") return make_strategy(name, false, true, false, true, false, false, false);
  if (name == "HET0") return make_strategy(name, false, true, false, true, false, false, false);
  if (name == "HET1") return make_strategy(name, true, true, true, true, false, false, false);
  if (name == "HET2") return make_strategy(name, true, true, true, true, true, false, false);
  if (name == "HET3") return make_strategy(name, true, true, true, true, true, true, false);
  if (name == "HET4") return make_strategy(name, true, true, true, true, true, true, true);
  if (name == "HET5") return make_strategy(name, true, true, true, true, false, true, true);
  if (name == "HET6") return make_strategy(name, true, true, true, true, false, false, true);
  if (name == "HET7") return make_strategy(name, true, true, true, true, true, false, true);
  if (name == "HET8") return make_strategy(name, true, true, true, true, false, true, false);
  throw Error(ErrorCode::UnknownStrategy, "no builtin strategy named '" + name + "'");
}

std::vector<std::string> builtin_strategy_names() {
  return {"REF", "HET0", "HET1", "HET2", "HET3", "HET4", "HET5", "HET6", "HET7", "HET8"};
}

std::string strategy_to_json(const StrategyConfig& config) {
  auto specs_to_json = [](const std::vector<AugmentationSpec>& specs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : specs) {
      nlohmann::json item;
      item["kind"] = aug_kind_name(s.kind);
      item["p"] = s.p;
      item["params"] = s.params;
      arr.push_back(std::move(item));
    }
    return arr;
  };
  nlohmann::json doc;
  doc["name"] = config.name;
  doc["weak"] = specs_to_json(config.weak);
  doc["strong"] = specs_to_json(config.strong);
  return doc.dump(2);
}

StrategyConfig strategy_from_json(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("strategy JSON: ") + e.what());
  }
  auto specs_from_json = [](const nlohmann::json& arr) {
    std::vector<AugmentationSpec> specs;
    for (const auto& item : arr) {
      AugmentationSpec s;
      s.kind = aug_kind_from_name(item.at("kind").get<std::string>());
      s.p = item.value("p", 1.0);
      if (item.contains("params"))
        s.params = item["params"].get<std::map<std::string, double>>();
      specs.push_back(std::move(s));
    }
    return specs;
  };
  StrategyConfig cfg;
  cfg.name = doc.value("name", "custom");
  cfg.weak = specs_from_json(doc.value("weak", nlohmann::json::array()));
  cfg.strong = specs_from_json(doc.value("strong", nlohmann::json::array()));
  cfg.validate();
  return cfg;
}

// --- individual transforms -----------------------------------------------------

namespace {

/// Inverse-maps output pixels through the affine about the image center.
/// shift in pixels, rotation CCW in degrees; out-of-frame samples fill with 0.
struct AffineInverse {
  double cx, cy, cos_t, sin_t, inv_scale, tx, ty;

  AffineInverse(Eigen::Index h, Eigen::Index w, const AffineParams& p) {
    cx = double(w - 1) / 2.0;
    cy = double(h - 1) / 2.0;
    const double rad = p.angle_deg * M_PI / 180.0;
    cos_t = std::cos(-rad);
    sin_t = std::sin(-rad);
    inv_scale = 1.0 / p.scale;
    tx = p.shift_x_px;
    ty = p.shift_y_px;
  }

  void map(double x, double y, double& sx, double& sy) const {
    const double dx = x - cx - tx;
    const double dy = y - cy - ty;
    sx = (cos_t * dx - sin_t * dy) * inv_scale + cx;
    sy = (sin_t * dx + cos_t * dy) * inv_scale + cy;
  }
};

PlaneU8 warp_bilinear(const PlaneU8& src, const AffineInverse& inv) {
  const Eigen::Index h = src.rows(), w = src.cols();
  PlaneU8 dst(h, w);
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      double sx, sy;
      inv.map(double(x), double(y), sx, sy);
      if (sx < 0 || sy < 0 || sx > double(w - 1) || sy > double(h - 1)) {
        dst(y, x) = 0;
        continue;
      }
      const Eigen::Index x0 = Eigen::Index(sx), y0 = Eigen::Index(sy);
      const Eigen::Index x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
      const double fx = sx - double(x0), fy = sy - double(y0);
      const double v = (1 - fy) * ((1 - fx) * src(y0, x0) + fx * src(y0, x1)) +
                       fy * ((1 - fx) * src(y1, x0) + fx * src(y1, x1));
      dst(y, x) = clamp_u8(v);
    }
  }
  return dst;
}

PlaneU8 warp_nearest(const PlaneU8& src, const AffineInverse& inv) {
  const Eigen::Index h = src.rows(), w = src.cols();
  PlaneU8 dst(h, w);
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      double sx, sy;
      inv.map(double(x), double(y), sx, sy);
      const Eigen::Index xi = Eigen::Index(std::lround(sx));
      const Eigen::Index yi = Eigen::Index(std::lround(sy));
      dst(y, x) = (xi < 0 || yi < 0 || xi >= w || yi >= h) ? std::uint8_t(0) : src(yi, xi);
    }
  }
  return dst;
}

}  // namespace

ImageRgb8 apply_affine(const ImageRgb8& image, const AffineParams& p) {
  const AffineInverse inv(image.height(), image.width(), p);
  ImageRgb8 out;
  for (int c = 0; c < 3; ++c) out.ch[std::size_t(c)] = warp_bilinear(image.ch[std::size_t(c)], inv);
  return out;
}

Mask apply_affine(const Mask& mask, const AffineParams& p) {
  const AffineInverse inv(mask.height(), mask.width(), p);
  return Mask(warp_nearest(mask.labels, inv));
}

namespace {

PlaneU8 rot90_flip_plane(const PlaneU8& src, const Rot90FlipParams& p) {
  PlaneU8 out = src;
  for (int i = 0; i < (p.k % 4 + 4) % 4; ++i) {
    // one CCW quarter turn: out(r, c) = in(c, W-1-r)
    PlaneU8 rot(out.cols(), out.rows());
    for (Eigen::Index r = 0; r < rot.rows(); ++r)
      for (Eigen::Index c = 0; c < rot.cols(); ++c) rot(r, c) = out(c, out.cols() - 1 - r);
    out = std::move(rot);
  }
  if (p.flip_h) out = out.rowwise().reverse().eval();
  if (p.flip_v) out = out.colwise().reverse().eval();
  return out;
}

}  // namespace

ImageRgb8 apply_rot90_flip(const ImageRgb8& image, const Rot90FlipParams& p) {
  ImageRgb8 out;
  for (int c = 0; c < 3; ++c) out.ch[std::size_t(c)] = rot90_flip_plane(image.ch[std::size_t(c)], p);
  return out;
}

Mask apply_rot90_flip(const Mask& mask, const Rot90FlipParams& p) {
  return Mask(rot90_flip_plane(mask.labels, p));
}

namespace {

/// Piecewise-linear axis map for grid distortion. Node targets are the
/// cumulative perturbed steps rescaled to span the full axis, so the frame is
/// never left (identity when all multipliers are 1).
std::vector<double> axis_map(Eigen::Index extent, const std::vector<double>& mult) {
  const int n = int(mult.size());
  std::vector<double> src_nodes(static_cast<std::size_t>(n) + 1), dst_nodes(static_cast<std::size_t>(n) + 1);
  dst_nodes[0] = 0;
  for (int i = 0; i <= n; ++i) src_nodes[std::size_t(i)] = double(extent) * i / n;
  for (int i = 0; i < n; ++i)
    dst_nodes[std::size_t(i) + 1] =
        dst_nodes[std::size_t(i)] + (double(extent) / n) * mult[std::size_t(i)];
  const double norm = double(extent) / dst_nodes[std::size_t(n)];
  for (auto& d : dst_nodes) d *= norm;

  // invert: for each output coordinate find the source coordinate
  std::vector<double> src_of_dst(static_cast<std::size_t>(extent));
  int seg = 0;
  for (Eigen::Index x = 0; x < extent; ++x) {
    const double dx = double(x);
    while (seg + 1 < n && dx >= dst_nodes[std::size_t(seg) + 1]) ++seg;
    const double d0 = dst_nodes[std::size_t(seg)], d1 = dst_nodes[std::size_t(seg) + 1];
    const double s0 = src_nodes[std::size_t(seg)], s1 = src_nodes[std::size_t(seg) + 1];
    const double t = d1 > d0 ? (dx - d0) / (d1 - d0) : 0.0;
    src_of_dst[std::size_t(x)] = std::min(std::max(s0 + t * (s1 - s0), 0.0), double(extent - 1));
  }
  return src_of_dst;
}

void check_grid_params(const GridDistortionParams& p) {
  require(p.num_steps >= 1, ErrorCode::ConfigInvalid, "grid distortion needs num_steps >= 1");
  require(int(p.x_mult.size()) == p.num_steps && int(p.y_mult.size()) == p.num_steps,
          ErrorCode::ConfigInvalid, "grid distortion multiplier count != num_steps");
  for (double m : p.x_mult) require(m > 0, ErrorCode::ConfigInvalid, "grid multiplier <= 0");
  for (double m : p.y_mult) require(m > 0, ErrorCode::ConfigInvalid, "grid multiplier <= 0");
}

}  // namespace

ImageRgb8 apply_grid_distortion(const ImageRgb8& image, const GridDistortionParams& p) {
  check_grid_params(p);
  const auto sx = axis_map(image.width(), p.x_mult);
  const auto sy = axis_map(image.height(), p.y_mult);
  ImageRgb8 out(image.height(), image.width());
  for (int c = 0; c < 3; ++c) {
    const PlaneU8& src = image.ch[std::size_t(c)];
    for (Eigen::Index y = 0; y < image.height(); ++y) {
      const double fy = sy[std::size_t(y)];
      const Eigen::Index y0 = Eigen::Index(fy);
      const Eigen::Index y1 = std::min(y0 + 1, image.height() - 1);
      const double wy = fy - double(y0);
      for (Eigen::Index x = 0; x < image.width(); ++x) {
        const double fx = sx[std::size_t(x)];
        const Eigen::Index x0 = Eigen::Index(fx);
        const Eigen::Index x1 = std::min(x0 + 1, image.width() - 1);
        const double wx = fx - double(x0);
        const double v = (1 - wy) * ((1 - wx) * src(y0, x0) + wx * src(y0, x1)) +
                         wy * ((1 - wx) * src(y1, x0) + wx * src(y1, x1));
        out.ch[std::size_t(c)](y, x) = clamp_u8(v);
      }
    }
  }
  return out;
}

Mask apply_grid_distortion(const Mask& mask, const GridDistortionParams& p) {
  check_grid_params(p);
  const auto sx = axis_map(mask.width(), p.x_mult);
  const auto sy = axis_map(mask.height(), p.y_mult);
  Mask out(mask.height(), mask.width());
  for (Eigen::Index y = 0; y < mask.height(); ++y) {
    const Eigen::Index yi = Eigen::Index(std::lround(sy[std::size_t(y)]));
    for (Eigen::Index x = 0; x < mask.width(); ++x) {
      const Eigen::Index xi = Eigen::Index(std::lround(sx[std::size_t(x)]));
      out.labels(y, x) = mask.labels(yi, xi);
    }
  }
  return out;
}

ImageRgb8 apply_sharpen(const ImageRgb8& image, const SharpenParams& p) {
  const Eigen::Index h = image.height(), w = image.width();
  ImageRgb8 out(h, w);
  const double center = 8.0 + p.lightness;
  for (int c = 0; c < 3; ++c) {
    const PlaneU8& src = image.ch[std::size_t(c)];
    for (Eigen::Index y = 0; y < h; ++y) {
      for (Eigen::Index x = 0; x < w; ++x) {
        double acc = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const Eigen::Index yy = std::clamp<Eigen::Index>(y + dy, 0, h - 1);
            const Eigen::Index xx = std::clamp<Eigen::Index>(x + dx, 0, w - 1);
            acc += (dy == 0 && dx == 0 ? center : -1.0) * double(src(yy, xx));
          }
        }
        out.ch[std::size_t(c)](y, x) =
            clamp_u8((1.0 - p.alpha) * double(src(y, x)) + p.alpha * acc);
      }
    }
  }
  return out;
}

ImageRgb8 apply_blur(const ImageRgb8& image, const BlurParams& p) {
  require(p.ksize >= 1 && p.ksize % 2 == 1, ErrorCode::ConfigInvalid, "blur kernel must be odd");
  const Eigen::Index h = image.height(), w = image.width();
  const int r = p.ksize / 2;
  const double norm = 1.0 / (double(p.ksize) * double(p.ksize));
  ImageRgb8 out(h, w);
  for (int c = 0; c < 3; ++c) {
    const PlaneU8& src = image.ch[std::size_t(c)];
    // separable box blur with replicated borders
    PlaneD tmp(h, w);
    for (Eigen::Index y = 0; y < h; ++y)
      for (Eigen::Index x = 0; x < w; ++x) {
        double acc = 0;
        for (int d = -r; d <= r; ++d)
          acc += double(src(y, std::clamp<Eigen::Index>(x + d, 0, w - 1)));
        tmp(y, x) = acc;
      }
    for (Eigen::Index y = 0; y < h; ++y)
      for (Eigen::Index x = 0; x < w; ++x) {
        double acc = 0;
        for (int d = -r; d <= r; ++d) acc += tmp(std::clamp<Eigen::Index>(y + d, 0, h - 1), x);
        out.ch[std::size_t(c)](y, x) = clamp_u8(acc * norm);
      }
  }
  return out;
}

ImageRgb8 apply_channel_shuffle(const ImageRgb8& image, const ChannelShuffleParams& p) {
  ImageRgb8 out;
  for (int c = 0; c < 3; ++c) {
    require(p.perm[std::size_t(c)] >= 0 && p.perm[std::size_t(c)] < 3, ErrorCode::ConfigInvalid,
            "channel permutation out of range");
    out.ch[std::size_t(c)] = image.ch[std::size_t(p.perm[std::size_t(c)])];
  }
  return out;
}

ImageRgb8 apply_gaussian_noise(const ImageRgb8& image, const GaussianNoiseParams& p) {
  require(p.variance >= 0, ErrorCode::ConfigInvalid, "noise variance must be >= 0");
  Rng rng(p.noise_seed);
  const double sigma = std::sqrt(p.variance) * 255.0;
  ImageRgb8 out(image.height(), image.width());
  for (Eigen::Index y = 0; y < image.height(); ++y)
    for (Eigen::Index x = 0; x < image.width(); ++x)
      for (int c = 0; c < 3; ++c)
        out.ch[std::size_t(c)](y, x) =
            clamp_u8(double(image.ch[std::size_t(c)](y, x)) + sigma * rng.normal());
  return out;
}

ImageRgb8 apply_brightness_contrast(const ImageRgb8& image, const BrightnessContrastParams& p) {
  ImageRgb8 out;
  for (int c = 0; c < 3; ++c)
    out.ch[std::size_t(c)] = image.ch[std::size_t(c)].unaryExpr([&](std::uint8_t v) {
      return clamp_u8(p.alpha * double(v) + p.beta * 255.0);
    });
  return out;
}

// --- pipelines -------------------------------------------------------------------

namespace {

/// Samples parameters and applies one spec; returns the applied record.
/// The sampling order per kind is fixed and documented by the code below.
AppliedTransform apply_spec(AugmentationSpec const& spec, ImageRgb8& image, Mask* mask, Rng& rng) {
  AppliedTransform rec{spec.kind, {}};
  switch (spec.kind) {
    case AugKind::kAffine: {
      AffineParams p;
      const double shift = spec.param("shift_limit");
      p.shift_x_px = rng.uniform(-shift, shift) * double(image.width());
      p.shift_y_px = rng.uniform(-shift, shift) * double(image.height());
      const double sl = spec.param("scale_limit");
      p.scale = 1.0 + rng.uniform(-sl, sl);
      const double rl = spec.param("rotate_limit");
      p.angle_deg = rng.uniform(-rl, rl);
      image = apply_affine(image, p);
      if (mask) *mask = apply_affine(*mask, p);
      rec.values = {p.shift_x_px, p.shift_y_px, p.scale, p.angle_deg};
      break;
    }
    case AugKind::kRot90Flip: {
      Rot90FlipParams p;
      p.k = rng.uniform_int(0, 3);
      p.flip_h = rng.bernoulli(0.5);
      p.flip_v = rng.bernoulli(0.5);
      image = apply_rot90_flip(image, p);
      if (mask) *mask = apply_rot90_flip(*mask, p);
      rec.values = {double(p.k), double(p.flip_h), double(p.flip_v)};
      break;
    }
    case AugKind::kGridDistortion: {
      GridDistortionParams p;
      p.num_steps = int(spec.param("num_steps"));
      const double lim = spec.param("distort_limit");
      for (int i = 0; i < p.num_steps; ++i) p.x_mult.push_back(1.0 + rng.uniform(-lim, lim));
      for (int i = 0; i < p.num_steps; ++i) p.y_mult.push_back(1.0 + rng.uniform(-lim, lim));
      image = apply_grid_distortion(image, p);
      if (mask) *mask = apply_grid_distortion(*mask, p);
      rec.values.push_back(double(p.num_steps));
      rec.values.insert(rec.values.end(), p.x_mult.begin(), p.x_mult.end());
      rec.values.insert(rec.values.end(), p.y_mult.begin(), p.y_mult.end());
      break;
    }
    case AugKind::kSharpen: {
      SharpenParams p;
      p.alpha = rng.uniform(spec.param("alpha_min"), spec.param("alpha_max"));
      p.lightness = rng.uniform(spec.param("lightness_min"), spec.param("lightness_max"));
      image = apply_sharpen(image, p);
      rec.values = {p.alpha, p.lightness};
      break;
    }
    case AugKind::kBlur: {
      BlurParams p;
      const int limit = int(spec.param("blur_limit"));
      require(limit >= 3, ErrorCode::ConfigInvalid, "blur_limit must be >= 3");
      p.ksize = 3 + 2 * rng.uniform_int(0, (limit - 3) / 2);
      image = apply_blur(image, p);
      rec.values = {double(p.ksize)};
      break;
    }
    case AugKind::kChannelShuffle: {
      static const std::array<std::array<int, 3>, 6> perms = {
          {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
      ChannelShuffleParams p;
      p.perm = perms[std::size_t(rng.uniform_int(0, 5))];
      image = apply_channel_shuffle(image, p);
      rec.values = {double(p.perm[0]), double(p.perm[1]), double(p.perm[2])};
      break;
    }
    case AugKind::kGaussianNoise: {
      GaussianNoiseParams p;
      p.variance = rng.uniform(0.0, spec.param("var_limit"));
      p.noise_seed = rng.next_u64();
      image = apply_gaussian_noise(image, p);
      rec.values = {p.variance, double(p.noise_seed)};
      break;
    }
    case AugKind::kBrightnessContrast: {
      BrightnessContrastParams p;
      const double cl = spec.param("contrast_limit");
      const double bl = spec.param("brightness_limit");
      p.alpha = 1.0 + rng.uniform(-cl, cl);
      p.beta = rng.uniform(-bl, bl);
      image = apply_brightness_contrast(image, p);
      rec.values = {p.alpha, p.beta};
      break;
    }
  }
  return rec;
}

}  // namespace

AugmentedSample apply_weak(const ImageRgb8& image, const Mask* mask,
                           const StrategyConfig& strategy, Rng& rng) {
  strategy.validate();
  if (mask)
    require(mask->height() == image.height() && mask->width() == image.width(),
            ErrorCode::ShapeMismatch, "image/mask shapes differ");
  AugmentedSample out;
  out.image = image;
  if (mask) out.mask = *mask;
  for (const auto& spec : strategy.weak) {
    const bool fire = rng.bernoulli(spec.p);
    if (!fire) continue;
    Mask* m = out.mask ? &*out.mask : nullptr;
    out.applied.push_back(apply_spec(spec, out.image, spec.spatial() ? m : nullptr, rng));
  }
  return out;
}

AugmentedSample apply_weak(const ImageRgb8& image, const Mask* mask,
                           const StrategyConfig& strategy, std::uint64_t seed) {
  Rng rng(seed);
  return apply_weak(image, mask, strategy, rng);
}

AugmentedSample apply_strong(const AugmentedSample& weak_sample, const StrategyConfig& strategy,
                             Rng& rng) {
  strategy.validate();
  AugmentedSample out;
  out.image = weak_sample.image;
  out.mask = weak_sample.mask;  // never touched below
  out.applied = weak_sample.applied;
  for (const auto& spec : strategy.strong) {
    const bool fire = rng.bernoulli(spec.p);
    if (!fire) continue;
    out.applied.push_back(apply_spec(spec, out.image, nullptr, rng));
  }
  return out;
}

AugmentedSample apply_strong(const AugmentedSample& weak_sample, const StrategyConfig& strategy,
                             std::uint64_t seed) {
  Rng rng(seed);
  return apply_strong(weak_sample, strategy, rng);
}

}  // namespace fractoseg
