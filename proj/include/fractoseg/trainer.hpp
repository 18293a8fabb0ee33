#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fractoseg/augment.hpp"
#include "fractoseg/losses.hpp"
#include "fractoseg/manifest.hpp"
#include "fractoseg/metrics.hpp"
#include "fractoseg/network.hpp"
#include "fractoseg/patch.hpp"

namespace fractoseg {

enum class TrainMode { kSupervised, kSemiSupervised };

struct TrainerConfig {
  TrainMode mode = TrainMode::kSupervised;
  StrategyConfig strategy;  // resolved weak/strong pipelines
  double lr = 1e-3;
  int epochs = 10;
  int batch_labeled = 4;
  int batch_unlabeled = 4;
  double tau = 0.8;
  RampSchedule ramp;
  ConsistencyWeights consistency_weights;
  std::uint64_t seed = 0;
  ModelConfig model;
  /// Whether the labeled branch also passes the strong photometric pipeline.
  /// Fully supervised reference training uses it; the SSL labeled branch
  /// faces only weak augmentations.
  bool labeled_strong = true;
  // adaptive-moment optimizer parameters
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
  std::string to_json() const;
  static TrainerConfig from_json(const std::string& text);
};

/// One image patch prepared for training. `uid` seeds the per-sample
/// augmentation streams and stays stable across runs and training modes.
struct PatchSample {
  std::string id;  // "<image-id>#<patch>"
  std::uint64_t uid = 0;
  ImageRgb8 image;
  Mask mask;  // empty for unlabeled samples
  bool has_mask = false;
};

struct TrainData {
  std::vector<PatchSample> labeled_train;
  std::vector<PatchSample> val;       // labeled, evaluated clean
  std::vector<PatchSample> unlabeled; // SSL pool
};

/// Slices one image (and optionally its mask) into the 4 training patches.
std::vector<PatchSample> slice_to_patch_samples(const std::string& image_id,
                                                const ImageRgb8& image, const Mask* mask,
                                                int patch_size);

/// Slices manifest records of the given split into model-input patches.
std::vector<PatchSample> load_patch_samples(const DatasetManifest& manifest,
                                            const std::vector<std::string>& ids, bool with_masks,
                                            int patch_size);

struct EpochRecord {
  int epoch = 0;
  double total = 0;
  double supervised = 0;
  double unsupervised = 0;
  double lambda = 0;
  double val_dice_loss = 0;
  double valid_pixel_fraction = 0;
  double wall_seconds = 0;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;

  void save_csv(const std::string& path) const;
  void save_json_summary(const std::string& path, int best_epoch, double best_val) const;
};

struct TrainResult {
  std::unique_ptr<Network> model;  // best-validation weights
  TrainingLog log;
  int best_epoch = 0;
  double best_val_loss = 0;
};

class Adam {
 public:
  Adam(std::vector<Param*> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);
  void step();

 private:
  std::vector<Param*> params_;
  std::vector<Eigen::MatrixXf> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

/// One optimizer step on a labeled batch; gradients of L_s = CE + Dice.
LossBundle supervised_step(Network& net, Adam& opt, const TrainerConfig& cfg,
                           const std::vector<const PatchSample*>& labeled, int epoch);

/// One FixMatch-style step: L = L_s + lambda(epoch) * L_u with pseudo-label
/// gating at tau. Weak pseudo-labels are constant targets; when no pixel
/// passes the gate the unlabeled branch contributes nothing at all.
LossBundle ssl_step(Network& net, Adam& opt, const TrainerConfig& cfg,
                    const std::vector<const PatchSample*>& labeled,
                    const std::vector<const PatchSample*>& unlabeled, int epoch);

TrainResult train_supervised(const TrainerConfig& cfg, const TrainData& data);
TrainResult train_semi_supervised(const TrainerConfig& cfg, const TrainData& data);

/// Dispatches on cfg.mode.
TrainResult train(const TrainerConfig& cfg, const TrainData& data);

// --- inference & evaluation ----------------------------------------------------

/// Patch-sliced inference: slice -> forward -> stitch logits -> argmax.
Mask predict_mask(Network& net, const ImageRgb8& image);

struct EvalResult {
  std::vector<ClassIoUReport> reports;
  double mean_miou = 0;
  std::array<std::optional<double>, kNumClasses> mean_class_iou;  // over images where defined
};

EvalResult evaluate(Network& net, const std::vector<ImageRgb8>& images,
                    const std::vector<Mask>& truths, const std::vector<std::string>& ids);

// --- strategy sweep ---------------------------------------------------------------

struct SweepRow {
  std::string strategy;
  bool ok = false;
  std::string error;
  EvalResult eval;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  void save_csv(const std::string& path) const;
};

/// Trains one model per strategy under a shared seed and evaluates each on the
/// test images. Failures mark their row and the sweep continues.
SweepReport sweep(const std::vector<std::string>& strategies, const TrainerConfig& cfg_template,
                  const TrainData& data, const std::vector<ImageRgb8>& test_images,
                  const std::vector<Mask>& test_truths, const std::vector<std::string>& test_ids);

}  // namespace fractoseg
