#pragma once

#include <memory>
#include <string>

#include "fractoseg/layers.hpp"
#include "fractoseg/taxonomy.hpp"

namespace fractoseg {

enum class Architecture { kDeepLabV3Plus, kSmallUnet };
enum class EncoderKind { kResNet50, kTiny };

struct ModelConfig {
  Architecture architecture = Architecture::kSmallUnet;
  EncoderKind encoder = EncoderKind::kTiny;
  int n_classes = kNumClasses;
  bool pretrained_encoder = false;
  int input_height = 512;
  int input_width = 512;
  int base_channels = 12;  // small U-Net width
  std::array<float, 3> norm_mean = {0.5f, 0.5f, 0.5f};
  std::array<float, 3> norm_std = {0.5f, 0.5f, 0.5f};

  void validate() const;
  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);

  bool operator==(const ModelConfig&) const = default;
};

/// A trainable segmentation network: logits come back at input resolution.
class Network {
 public:
  explicit Network(ModelConfig config) : config_(std::move(config)) {}
  virtual ~Network() = default;

  virtual TensorF forward(const TensorF& x, bool training) = 0;
  virtual TensorF backward(const TensorF& grad_logits) = 0;
  virtual void collect_params(std::vector<Param*>& out) = 0;

  std::vector<Param*> params() {
    std::vector<Param*> out;
    collect_params(out);
    return out;
  }
  void zero_grad() {
    for (Param* p : params()) p->zero_grad();
  }
  std::size_t param_count() {
    std::size_t n = 0;
    for (Param* p : params()) n += std::size_t(p->value.size());
    return n;
  }
  const ModelConfig& config() const { return config_; }

 protected:
  void check_input(const TensorF& x) const;
  ModelConfig config_;
};

/// `seed` drives weight initialization; identical (config, seed) pairs build
/// bit-identical models.
std::unique_ptr<Network> make_model(const ModelConfig& config, std::uint64_t seed);

// --- pseudo-labels ------------------------------------------------------------

struct PseudoLabel {
  Mask labels;                               // argmax classes
  PlaneF confidence;                         // max softmax per pixel
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> valid;  // confidence >= tau
  double valid_fraction = 0;
};

/// Thresholds one sample of a logits batch at confidence tau.
PseudoLabel pseudo_label(const TensorF& logits, int sample, double tau);

// --- checkpoints ----------------------------------------------------------------

struct CheckpointMeta {
  int epoch = 0;
  std::uint64_t seed = 0;
  double best_val_loss = 0;
  std::string note;
};

void save_checkpoint(const std::string& path, Network& net, const CheckpointMeta& meta);

struct Checkpoint {
  ModelConfig config;
  CheckpointMeta meta;
  std::unique_ptr<Network> network;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace fractoseg
