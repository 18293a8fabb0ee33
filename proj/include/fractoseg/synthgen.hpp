#pragma once

#include <string>
#include <vector>

#include "fractoseg/manifest.hpp"
#include "fractoseg/measure.hpp"

namespace fractoseg {

enum class SpecimenKind { kSEB, kCT, kMiniCT, kChevron };
enum class BackgroundStyle { kFlat, kGradient, kCluttered };

const char* specimen_kind_name(SpecimenKind kind);
const char* background_style_name(BackgroundStyle style);

/// Recipe for one synthetic fracture-surface image with an exact mask. The
/// crack propagates along rows (top edge down).
struct SynthSpec {
  SpecimenKind kind = SpecimenKind::kSEB;
  int height = 128;
  int width = 128;
  int notch_depth_px = 16;
  int precrack_depth_px = 20;
  double front_amplitude_px = 0;  // sinusoidal crack-front curvature
  int front_waves = 1;
  int ductile_depth_px = 12;
  int side_groove_px = 5;  // forced to 0 for chevron specimens
  BackgroundStyle background = BackgroundStyle::kFlat;
  double texture_noise = 0.05;   // on the [0,1] intensity scale
  double lighting_scale = 1.0;   // global brightness multiplier
  double hue_shift = 0.0;        // per-channel tint in [-1, 1]
  bool stain = false;
  bool engraving = false;
  bool scratch = false;
  double scale_mm_per_px = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GeneratedSample {
  std::string id;
  ImageRgb8 image;
  Mask mask;
  SpecimenGeometry geometry;
  std::string domain_tag;
  double scale_mm_per_px = 0;
  double true_a0_px = 0;  // notch depth + mean precrack depth, exact
  double true_a0_mm = 0;
};

GeneratedSample generate(const SynthSpec& spec);

// --- dataset profiles ------------------------------------------------------------

enum class SynthProfile { kHomLike, kHetLike, kHarLike };

SynthProfile profile_from_name(const std::string& name);
const char* profile_name(SynthProfile profile);

struct GenerateDatasetOptions {
  SynthProfile profile = SynthProfile::kHetLike;
  int n = 20;
  double mu_target = 5.0;  // ratio of unlabeled to labeled records
  std::uint64_t seed = 0;
  int height = 128;
  int width = 128;
  bool all_labeled = false;  // e.g. held-out test sets
  std::string name;          // defaults to the profile name
};

struct GeneratedDataset {
  DatasetManifest manifest;  // record paths filled by save_dataset
  std::vector<GeneratedSample> samples;
};

/// HOM-like: one specimen kind, one background; HET-like: everything varies;
/// HAR-like: a curated subset. Labeled count follows round(n / (1 + mu)).
GeneratedDataset generate_dataset(const GenerateDatasetOptions& options);

/// Writes images/, masks/, meta/ and manifest.json under `dir` and fills the
/// record paths in the returned manifest.
void save_dataset(GeneratedDataset& dataset, const std::string& dir);

}  // namespace fractoseg
