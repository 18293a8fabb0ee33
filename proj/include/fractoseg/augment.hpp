#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fractoseg/image.hpp"
#include "fractoseg/rng.hpp"

namespace fractoseg {

enum class AugKind {
  kAffine,
  kRot90Flip,
  kGridDistortion,
  kSharpen,
  kBlur,
  kChannelShuffle,
  kGaussianNoise,
  kBrightnessContrast,
};

/// Spatial transforms move information and therefore apply to image and mask;
/// the rest alter only the representation and never touch the mask.
bool is_spatial(AugKind kind);

const char* aug_kind_name(AugKind kind);
AugKind aug_kind_from_name(const std::string& name);

struct AugmentationSpec {
  AugKind kind = AugKind::kRot90Flip;
  std::map<std::string, double> params;  // limit values, keyed by name
  double p = 1.0;

  bool spatial() const { return is_spatial(kind); }
  double param(const std::string& name) const;

  bool operator==(const AugmentationSpec&) const = default;
};

/// Table-2 defaults for one transform kind.
AugmentationSpec default_spec(AugKind kind);

struct StrategyConfig {
  std::string name;
  std::vector<AugmentationSpec> weak;
  std::vector<AugmentationSpec> strong;

  /// Throws SpatialSpecInStrong when a spatial transform sits in `strong`.
  void validate() const;

  bool operator==(const StrategyConfig&) const = default;
};

/// Built-in strategies REF and HET0..HET8 (the +/- grid of the augmentation
/// study). Throws UnknownStrategy otherwise.
StrategyConfig builtin_strategy(const std::string& name);
std::vector<std::string> builtin_strategy_names();

std::string strategy_to_json(const StrategyConfig& config);
StrategyConfig strategy_from_json(const std::string& json_text);

// --- sampled parameters (exposed so tests can force exact values) ------------

struct AffineParams {
  double shift_x_px = 0, shift_y_px = 0;
  double scale = 1.0;
  double angle_deg = 0;
};

struct Rot90FlipParams {
  int k = 0;  // number of 90-degree CCW rotations
  bool flip_h = false;
  bool flip_v = false;
};

struct GridDistortionParams {
  int num_steps = 5;
  std::vector<double> x_mult;  // per-cell step multipliers, renormalized to span the frame
  std::vector<double> y_mult;
};

struct SharpenParams {
  double alpha = 0.3;
  double lightness = 0.75;
};

struct BlurParams {
  int ksize = 3;  // odd box kernel side
};

struct ChannelShuffleParams {
  std::array<int, 3> perm = {0, 1, 2};
};

struct GaussianNoiseParams {
  double variance = 0.0;  // on the [0,1] intensity scale
  std::uint64_t noise_seed = 0;
};

struct BrightnessContrastParams {
  double alpha = 1.0;  // contrast multiplier
  double beta = 0.0;   // brightness shift on the [0,1] scale
};

ImageRgb8 apply_affine(const ImageRgb8& image, const AffineParams& p);
Mask apply_affine(const Mask& mask, const AffineParams& p);
ImageRgb8 apply_rot90_flip(const ImageRgb8& image, const Rot90FlipParams& p);
Mask apply_rot90_flip(const Mask& mask, const Rot90FlipParams& p);
ImageRgb8 apply_grid_distortion(const ImageRgb8& image, const GridDistortionParams& p);
Mask apply_grid_distortion(const Mask& mask, const GridDistortionParams& p);
ImageRgb8 apply_sharpen(const ImageRgb8& image, const SharpenParams& p);
ImageRgb8 apply_blur(const ImageRgb8& image, const BlurParams& p);
ImageRgb8 apply_channel_shuffle(const ImageRgb8& image, const ChannelShuffleParams& p);
ImageRgb8 apply_gaussian_noise(const ImageRgb8& image, const GaussianNoiseParams& p);
ImageRgb8 apply_brightness_contrast(const ImageRgb8& image, const BrightnessContrastParams& p);

// --- pipelines ----------------------------------------------------------------

struct AppliedTransform {
  AugKind kind;
  std::vector<double> values;  // sampled parameters, in documented order
};

struct AugmentedSample {
  ImageRgb8 image;
  std::optional<Mask> mask;
  std::vector<AppliedTransform> applied;
};

/// Runs the weak pipeline. Each spec fires independently with its own p;
/// spatial transforms apply identical geometry to image and mask.
AugmentedSample apply_weak(const ImageRgb8& image, const Mask* mask,
                           const StrategyConfig& strategy, Rng& rng);
AugmentedSample apply_weak(const ImageRgb8& image, const Mask* mask,
                           const StrategyConfig& strategy, std::uint64_t seed);

/// Runs the strong pipeline on top of a weak sample. Only non-spatial specs
/// are legal; the mask is carried over bit-identical.
AugmentedSample apply_strong(const AugmentedSample& weak_sample, const StrategyConfig& strategy,
                             Rng& rng);
AugmentedSample apply_strong(const AugmentedSample& weak_sample, const StrategyConfig& strategy,
                             std::uint64_t seed);

}  // namespace fractoseg
