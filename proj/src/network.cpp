#include "fractoseg/network.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace fractoseg {

void ModelConfig::validate() const {
  require(n_classes == kNumClasses, ErrorCode::ConfigInvalid,
          "n_classes must equal the taxonomy size (7)");
  require(input_height >= 16 && input_width >= 16, ErrorCode::ConfigInvalid,
          "model input size too small");
  require(input_height % 4 == 0 && input_width % 4 == 0, ErrorCode::ConfigInvalid,
          "model input size must be a multiple of 4");
  require(base_channels >= 2, ErrorCode::ConfigInvalid, "base_channels must be >= 2");
  for (float s : norm_std)
    require(s > 0, ErrorCode::ConfigInvalid, "normalization std must be positive");
}

namespace {

const char* architecture_name(Architecture a) {
  return a == Architecture::kDeepLabV3Plus ? "deeplabv3plus" : "small_unet";
}

Architecture architecture_from_name(const std::string& s) {
  if (s == "deeplabv3plus") return Architecture::kDeepLabV3Plus;
  if (s == "small_unet") return Architecture::kSmallUnet;
  throw Error(ErrorCode::ConfigInvalid, "unknown architecture '" + s + "'");
}

const char* encoder_name(EncoderKind e) { return e == EncoderKind::kResNet50 ? "resnet50" : "tiny"; }

EncoderKind encoder_from_name(const std::string& s) {
  if (s == "resnet50") return EncoderKind::kResNet50;
  if (s == "tiny") return EncoderKind::kTiny;
  throw Error(ErrorCode::ConfigInvalid, "unknown encoder '" + s + "'");
}

}  // namespace

std::string ModelConfig::to_json() const {
  nlohmann::json doc;
  doc["architecture"] = architecture_name(architecture);
  doc["encoder"] = encoder_name(encoder);
  doc["n_classes"] = n_classes;
  doc["pretrained_encoder"] = pretrained_encoder;
  doc["input_height"] = input_height;
  doc["input_width"] = input_width;
  doc["base_channels"] = base_channels;
  doc["norm_mean"] = norm_mean;
  doc["norm_std"] = norm_std;
  return doc.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text);
  ModelConfig c;
  c.architecture = architecture_from_name(doc.value("architecture", "small_unet"));
  c.encoder = encoder_from_name(doc.value("encoder", "tiny"));
  c.n_classes = doc.value("n_classes", kNumClasses);
  c.pretrained_encoder = doc.value("pretrained_encoder", false);
  c.input_height = doc.value("input_height", 512);
  c.input_width = doc.value("input_width", 512);
  c.base_channels = doc.value("base_channels", 12);
  if (doc.contains("norm_mean")) c.norm_mean = doc["norm_mean"].get<std::array<float, 3>>();
  if (doc.contains("norm_std")) c.norm_std = doc["norm_std"].get<std::array<float, 3>>();
  c.validate();
  return c;
}

void Network::check_input(const TensorF& x) const {
  require(x.c == 3, ErrorCode::ShapeMismatch, "network input must have 3 channels");
  require(x.h == config_.input_height && x.w == config_.input_width, ErrorCode::ShapeMismatch,
          "network input is " + std::to_string(x.h) + "x" + std::to_string(x.w) +
              ", configured for " + std::to_string(config_.input_height) + "x" +
              std::to_string(config_.input_width));
  require(x.all_finite(), ErrorCode::NonFinite, "network input contains non-finite values");
}

// --- small U-Net -----------------------------------------------------------------

namespace {

std::unique_ptr<Sequential> conv_relu_pair(int in_ch, int out_ch, Rng& rng,
                                           const std::string& name) {
  auto seq = std::make_unique<Sequential>();
  auto c1 = std::make_unique<Conv2d>(in_ch, out_ch, 3, 1, 1, 1, true, name + "a");
  c1->init(rng);
  seq->add(std::move(c1));
  seq->add(std::make_unique<ReLU>());
  auto c2 = std::make_unique<Conv2d>(out_ch, out_ch, 3, 1, 1, 1, true, name + "b");
  c2->init(rng);
  seq->add(std::move(c2));
  seq->add(std::make_unique<ReLU>());
  return seq;
}

/// Encoder-decoder without normalization layers: training is then independent
/// of batch composition, which keeps supervised and gated-SSL steps exactly
/// comparable.
class SmallUNet : public Network {
 public:
  SmallUNet(ModelConfig config, std::uint64_t seed) : Network(std::move(config)) {
    Rng rng(seed);
    const int c = config_.base_channels;
    enc1_ = conv_relu_pair(3, c, rng, "enc1");
    pool1_ = std::make_unique<MaxPool2d>(2, 2);
    enc2_ = conv_relu_pair(c, 2 * c, rng, "enc2");
    pool2_ = std::make_unique<MaxPool2d>(2, 2);
    bott_ = conv_relu_pair(2 * c, 4 * c, rng, "bott");
    up2_ = std::make_unique<UpsampleNearest2x>();
    dec2_ = conv_relu_pair(4 * c + 2 * c, 2 * c, rng, "dec2");
    up1_ = std::make_unique<UpsampleNearest2x>();
    dec1_ = conv_relu_pair(2 * c + c, c, rng, "dec1");
    head_ = std::make_unique<Conv2d>(c, config_.n_classes, 1, 1, 0, 1, true, "head");
    head_->init(rng);
    // near-zero head keeps the untrained output close to uniform
    head_->weight.value *= 0.1f;
  }

  TensorF forward(const TensorF& x, bool training) override {
    check_input(x);
    e1_ = enc1_->forward(x, training);
    TensorF p1 = pool1_->forward(e1_, training);
    e2_ = enc2_->forward(p1, training);
    TensorF p2 = pool2_->forward(e2_, training);
    TensorF b = bott_->forward(p2, training);
    TensorF u2 = up2_->forward(b, training);
    TensorF d2 = dec2_->forward(concat_channels(u2, e2_), training);
    TensorF u1 = up1_->forward(d2, training);
    TensorF d1 = dec1_->forward(concat_channels(u1, e1_), training);
    return head_->forward(d1, training);
  }

  TensorF backward(const TensorF& grad_logits) override {
    TensorF g = head_->backward(grad_logits);
    g = dec1_->backward(g);
    TensorF g_u1, g_e1_skip;
    split_channels(g, 2 * config_.base_channels, g_u1, g_e1_skip);
    g = up1_->backward(g_u1);
    g = dec2_->backward(g);
    TensorF g_u2, g_e2_skip;
    split_channels(g, 4 * config_.base_channels, g_u2, g_e2_skip);
    g = up2_->backward(g_u2);
    g = bott_->backward(g);
    g = pool2_->backward(g);
    g = enc2_->backward(add(g, g_e2_skip));
    g = pool1_->backward(g);
    return enc1_->backward(add(g, g_e1_skip));
  }

  void collect_params(std::vector<Param*>& out) override {
    enc1_->collect_params(out);
    enc2_->collect_params(out);
    bott_->collect_params(out);
    dec2_->collect_params(out);
    dec1_->collect_params(out);
    head_->collect_params(out);
  }

 private:
  std::unique_ptr<Sequential> enc1_, enc2_, bott_, dec2_, dec1_;
  std::unique_ptr<MaxPool2d> pool1_, pool2_;
  std::unique_ptr<UpsampleNearest2x> up1_, up2_;
  std::unique_ptr<Conv2d> head_;
  TensorF e1_, e2_;
};

// --- encoders for DeepLabv3+ -----------------------------------------------------

struct EncoderOut {
  TensorF low;   // stride 4
  TensorF high;  // stride 16
};

class Encoder {
 public:
  virtual ~Encoder() = default;
  virtual EncoderOut forward(const TensorF& x, bool training) = 0;
  /// grad_low feeds the decoder skip, grad_high the ASPP path.
  virtual TensorF backward(const TensorF& grad_low, const TensorF& grad_high) = 0;
  virtual void collect_params(std::vector<Param*>& out) = 0;
  virtual int low_channels() const = 0;
  virtual int high_channels() const = 0;
};

class Bottleneck : public Module {
 public:
  Bottleneck(int in_ch, int mid_ch, int out_ch, int stride, int dilation, Rng& rng,
             const std::string& name)
      : project_(in_ch != out_ch || stride != 1) {
    reduce_ = conv_bn_relu(in_ch, mid_ch, 1, 1, 0, 1, rng, name + ".reduce");
    spatial_ = conv_bn_relu(mid_ch, mid_ch, 3, stride, dilation, dilation, rng, name + ".spatial");
    auto expand_conv =
        std::make_unique<Conv2d>(mid_ch, out_ch, 1, 1, 0, 1, false, name + ".expand");
    expand_conv->init(rng);
    expand_ = std::make_unique<Sequential>();
    expand_->add(std::move(expand_conv));
    expand_->add(std::make_unique<BatchNorm2d>(out_ch, 0.1f, 1e-5f, name + ".expand"));
    if (project_) {
      auto proj_conv =
          std::make_unique<Conv2d>(in_ch, out_ch, 1, stride, 0, 1, false, name + ".proj");
      proj_conv->init(rng);
      proj_ = std::make_unique<Sequential>();
      proj_->add(std::move(proj_conv));
      proj_->add(std::make_unique<BatchNorm2d>(out_ch, 0.1f, 1e-5f, name + ".proj"));
    }
  }

  TensorF forward(const TensorF& x, bool training) override {
    TensorF main = expand_->forward(spatial_->forward(reduce_->forward(x, training), training),
                                    training);
    TensorF skip = project_ ? proj_->forward(x, training) : x;
    return relu_.forward(add(main, skip), training);
  }

  TensorF backward(const TensorF& grad_out) override {
    TensorF g = relu_.backward(grad_out);
    TensorF g_main = expand_->backward(g);
    g_main = spatial_->backward(g_main);
    g_main = reduce_->backward(g_main);
    TensorF g_skip = project_ ? proj_->backward(g) : g;
    return add(g_main, g_skip);
  }

  void collect_params(std::vector<Param*>& out) override {
    reduce_->collect_params(out);
    spatial_->collect_params(out);
    expand_->collect_params(out);
    if (project_) proj_->collect_params(out);
  }

 private:
  bool project_;
  std::unique_ptr<Sequential> reduce_, spatial_, expand_, proj_;
  ReLU relu_;
};

/// ResNet50 with output stride 16: layer4 trades its stride for dilation 2.
class ResNet50Encoder : public Encoder {
 public:
  explicit ResNet50Encoder(Rng& rng) {
    stem_conv_ = std::make_unique<Conv2d>(3, 64, 7, 2, 3, 1, false, "stem");
    stem_conv_->init(rng);
    stem_bn_ = std::make_unique<BatchNorm2d>(64, 0.1f, 1e-5f, "stem");
    stem_pool_ = std::make_unique<MaxPool2d>(3, 2, 1);
    add_layer(layer1_, 64, 64, 256, 3, 1, 1, rng, "layer1");
    add_layer(layer2_, 256, 128, 512, 4, 2, 1, rng, "layer2");
    add_layer(layer3_, 512, 256, 1024, 6, 2, 1, rng, "layer3");
    add_layer(layer4_, 1024, 512, 2048, 3, 1, 2, rng, "layer4");
  }

  EncoderOut forward(const TensorF& x, bool training) override {
    TensorF t = stem_relu_.forward(stem_bn_->forward(stem_conv_->forward(x, training), training),
                                   training);
    t = stem_pool_->forward(t, training);
    for (auto& b : layer1_) t = b->forward(t, training);
    EncoderOut out;
    out.low = t;
    for (auto& b : layer2_) t = b->forward(t, training);
    for (auto& b : layer3_) t = b->forward(t, training);
    for (auto& b : layer4_) t = b->forward(t, training);
    out.high = t;
    return out;
  }

  TensorF backward(const TensorF& grad_low, const TensorF& grad_high) override {
    TensorF g = grad_high;
    for (auto it = layer4_.rbegin(); it != layer4_.rend(); ++it) g = (*it)->backward(g);
    for (auto it = layer3_.rbegin(); it != layer3_.rend(); ++it) g = (*it)->backward(g);
    for (auto it = layer2_.rbegin(); it != layer2_.rend(); ++it) g = (*it)->backward(g);
    g = add(g, grad_low);
    for (auto it = layer1_.rbegin(); it != layer1_.rend(); ++it) g = (*it)->backward(g);
    g = stem_pool_->backward(g);
    g = stem_relu_.backward(g);
    g = stem_bn_->backward(g);
    return stem_conv_->backward(g);
  }

  void collect_params(std::vector<Param*>& out) override {
    stem_conv_->collect_params(out);
    stem_bn_->collect_params(out);
    for (auto* layer : {&layer1_, &layer2_, &layer3_, &layer4_})
      for (auto& b : *layer) b->collect_params(out);
  }

  int low_channels() const override { return 256; }
  int high_channels() const override { return 2048; }

 private:
  static void add_layer(std::vector<std::unique_ptr<Bottleneck>>& layer, int in_ch, int mid_ch,
                        int out_ch, int blocks, int stride, int dilation, Rng& rng,
                        const std::string& name) {
    layer.push_back(std::make_unique<Bottleneck>(in_ch, mid_ch, out_ch, stride, dilation, rng,
                                                 name + ".0"));
    for (int i = 1; i < blocks; ++i)
      layer.push_back(std::make_unique<Bottleneck>(out_ch, mid_ch, out_ch, 1, dilation, rng,
                                                   name + "." + std::to_string(i)));
  }

  std::unique_ptr<Conv2d> stem_conv_;
  std::unique_ptr<BatchNorm2d> stem_bn_;
  ReLU stem_relu_;
  std::unique_ptr<MaxPool2d> stem_pool_;
  std::vector<std::unique_ptr<Bottleneck>> layer1_, layer2_, layer3_, layer4_;
};

/// Four stride-2 conv stages; enough to exercise the DeepLab graph quickly.
class TinyEncoder : public Encoder {
 public:
  explicit TinyEncoder(Rng& rng) {
    stem_ = conv_bn_relu(3, 32, 3, 2, 1, 1, rng, "tiny.stem");
    stage1_ = conv_bn_relu(32, 64, 3, 2, 1, 1, rng, "tiny.stage1");
    stage2_ = conv_bn_relu(64, 128, 3, 2, 1, 1, rng, "tiny.stage2");
    stage3_ = conv_bn_relu(128, 256, 3, 2, 1, 1, rng, "tiny.stage3");
  }

  EncoderOut forward(const TensorF& x, bool training) override {
    EncoderOut out;
    TensorF t = stage1_->forward(stem_->forward(x, training), training);
    out.low = t;
    out.high = stage3_->forward(stage2_->forward(t, training), training);
    return out;
  }

  TensorF backward(const TensorF& grad_low, const TensorF& grad_high) override {
    TensorF g = stage2_->backward(stage3_->backward(grad_high));
    g = add(g, grad_low);
    return stem_->backward(stage1_->backward(g));
  }

  void collect_params(std::vector<Param*>& out) override {
    stem_->collect_params(out);
    stage1_->collect_params(out);
    stage2_->collect_params(out);
    stage3_->collect_params(out);
  }

  int low_channels() const override { return 64; }
  int high_channels() const override { return 256; }

 private:
  std::unique_ptr<Sequential> stem_, stage1_, stage2_, stage3_;
};

// --- DeepLabv3+ -------------------------------------------------------------------

class DeepLabV3Plus : public Network {
 public:
  DeepLabV3Plus(ModelConfig config, std::uint64_t seed) : Network(std::move(config)) {
    Rng rng(seed);
    if (config_.encoder == EncoderKind::kResNet50)
      encoder_ = std::make_unique<ResNet50Encoder>(rng);
    else
      encoder_ = std::make_unique<TinyEncoder>(rng);

    const int hc = encoder_->high_channels();
    aspp_conv1_ = conv_bn_relu(hc, 256, 1, 1, 0, 1, rng, "aspp.b0");
    aspp_r6_ = conv_bn_relu(hc, 256, 3, 1, 6, 6, rng, "aspp.b1");
    aspp_r12_ = conv_bn_relu(hc, 256, 3, 1, 12, 12, rng, "aspp.b2");
    aspp_r18_ = conv_bn_relu(hc, 256, 3, 1, 18, 18, rng, "aspp.b3");
    aspp_pool_ = std::make_unique<GlobalAvgPool>();
    aspp_pool_conv_ = conv_bn_relu(hc, 256, 1, 1, 0, 1, rng, "aspp.pool");
    aspp_pool_up_ = std::make_unique<BilinearResize>(1, 1);
    aspp_project_ = conv_bn_relu(5 * 256, 256, 1, 1, 0, 1, rng, "aspp.project");

    decoder_up_ = std::make_unique<BilinearResize>(1, 1);
    low_project_ = conv_bn_relu(encoder_->low_channels(), 48, 1, 1, 0, 1, rng, "decoder.low");
    refine1_ = conv_bn_relu(256 + 48, 256, 3, 1, 1, 1, rng, "decoder.refine1");
    refine2_ = conv_bn_relu(256, 256, 3, 1, 1, 1, rng, "decoder.refine2");
    head_ = std::make_unique<Conv2d>(256, config_.n_classes, 1, 1, 0, 1, true, "head");
    head_->init(rng);
    head_->weight.value *= 0.1f;
    final_up_ = std::make_unique<BilinearResize>(config_.input_height, config_.input_width);
  }

  TensorF forward(const TensorF& x, bool training) override {
    check_input(x);
    EncoderOut enc = encoder_->forward(x, training);
    low_shape_ = {enc.low.h, enc.low.w};
    high_shape_ = {enc.high.h, enc.high.w};

    TensorF b0 = aspp_conv1_->forward(enc.high, training);
    TensorF b1 = aspp_r6_->forward(enc.high, training);
    TensorF b2 = aspp_r12_->forward(enc.high, training);
    TensorF b3 = aspp_r18_->forward(enc.high, training);
    TensorF bp = aspp_pool_conv_->forward(aspp_pool_->forward(enc.high, training), training);
    aspp_pool_up_->set_output_size(enc.high.h, enc.high.w);
    bp = aspp_pool_up_->forward(bp, training);
    TensorF cat = concat_channels(concat_channels(concat_channels(b0, b1), concat_channels(b2, b3)), bp);
    TensorF aspp = aspp_project_->forward(cat, training);

    decoder_up_->set_output_size(enc.low.h, enc.low.w);
    TensorF up = decoder_up_->forward(aspp, training);
    TensorF low = low_project_->forward(enc.low, training);
    TensorF dec = refine2_->forward(refine1_->forward(concat_channels(up, low), training), training);
    return final_up_->forward(head_->forward(dec, training), training);
  }

  TensorF backward(const TensorF& grad_logits) override {
    TensorF g = head_->backward(final_up_->backward(grad_logits));
    g = refine1_->backward(refine2_->backward(g));
    TensorF g_up, g_low;
    split_channels(g, 256, g_up, g_low);
    g_low = low_project_->backward(g_low);
    TensorF g_aspp = decoder_up_->backward(g_up);
    g_aspp = aspp_project_->backward(g_aspp);

    TensorF g01_23, g_bp, g01, g23, g0, g1, g2, g3;
    split_channels(g_aspp, 4 * 256, g01_23, g_bp);
    split_channels(g01_23, 2 * 256, g01, g23);
    split_channels(g01, 256, g0, g1);
    split_channels(g23, 256, g2, g3);

    TensorF g_high = aspp_conv1_->backward(g0);
    g_high = add(g_high, aspp_r6_->backward(g1));
    g_high = add(g_high, aspp_r12_->backward(g2));
    g_high = add(g_high, aspp_r18_->backward(g3));
    TensorF g_pool = aspp_pool_conv_->backward(aspp_pool_up_->backward(g_bp));
    g_high = add(g_high, aspp_pool_->backward(g_pool));

    return encoder_->backward(g_low, g_high);
  }

  void collect_params(std::vector<Param*>& out) override {
    encoder_->collect_params(out);
    aspp_conv1_->collect_params(out);
    aspp_r6_->collect_params(out);
    aspp_r12_->collect_params(out);
    aspp_r18_->collect_params(out);
    aspp_pool_conv_->collect_params(out);
    aspp_project_->collect_params(out);
    low_project_->collect_params(out);
    refine1_->collect_params(out);
    refine2_->collect_params(out);
    head_->collect_params(out);
  }

 private:
  std::unique_ptr<Encoder> encoder_;
  std::unique_ptr<Sequential> aspp_conv1_, aspp_r6_, aspp_r12_, aspp_r18_, aspp_pool_conv_,
      aspp_project_, low_project_, refine1_, refine2_;
  std::unique_ptr<GlobalAvgPool> aspp_pool_;
  std::unique_ptr<BilinearResize> aspp_pool_up_, decoder_up_, final_up_;
  std::unique_ptr<Conv2d> head_;
  std::pair<int, int> low_shape_, high_shape_;
};

}  // namespace

std::unique_ptr<Network> make_model(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  std::unique_ptr<Network> net;
  if (config.architecture == Architecture::kSmallUnet)
    net = std::make_unique<SmallUNet>(config, seed);
  else
    net = std::make_unique<DeepLabV3Plus>(config, seed);
  if (config.pretrained_encoder) {
    const char* cache = std::getenv("FRACTOSEG_CACHE");
    require(cache != nullptr, ErrorCode::PathMissing,
            "pretrained_encoder requires FRACTOSEG_CACHE to point at a weights directory");
    const std::string path = std::string(cache) + "/" +
                             (config.encoder == EncoderKind::kResNet50 ? "resnet50" : "tiny") +
                             "_encoder.ckpt";
    require(std::filesystem::exists(path), ErrorCode::PathMissing,
            "no cached encoder weights at " + path);
    Checkpoint donor = load_checkpoint(path);
    auto dst = net->params();
    auto src = donor.network->params();
    for (Param* d : dst)
      for (Param* s : src)
        if (s->name == d->name && s->value.rows() == d->value.rows() &&
            s->value.cols() == d->value.cols())
          d->value = s->value;
  }
  return net;
}

// --- pseudo labels ------------------------------------------------------------------

PseudoLabel pseudo_label(const TensorF& logits, int sample, double tau) {
  require(tau >= 0 && tau <= 1, ErrorCode::ConfigInvalid, "tau must lie in [0, 1]");
  require(sample >= 0 && sample < logits.n, ErrorCode::ShapeMismatch, "sample out of range");
  TensorF probs = softmax(logits);
  auto pb = probs.sample(sample);

  PseudoLabel out;
  out.labels = Mask(logits.h, logits.w);
  out.confidence = PlaneF(logits.h, logits.w);
  out.valid.resize(logits.h, logits.w);
  long long n_valid = 0;
  for (int y = 0; y < logits.h; ++y) {
    for (int x = 0; x < logits.w; ++x) {
      const Eigen::Index row = Eigen::Index(y) * logits.w + x;
      Eigen::Index best;
      const float conf = pb.row(row).maxCoeff(&best);
      out.labels.labels(y, x) = std::uint8_t(best);
      out.confidence(y, x) = conf;
      const bool ok = double(conf) >= tau;
      out.valid(y, x) = ok;
      n_valid += ok;
    }
  }
  out.valid_fraction = double(n_valid) / double(logits.pixels());
  return out;
}

// --- checkpoints -----------------------------------------------------------------------

namespace {
constexpr char kMagic[8] = {'F', 'S', 'E', 'G', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::ifstream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
}  // namespace

void save_checkpoint(const std::string& path, Network& net, const CheckpointMeta& meta) {
  namespace fs = std::filesystem;
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::IoFailure, "cannot write checkpoint: " + path);

  nlohmann::json header;
  header["config"] = nlohmann::json::parse(net.config().to_json());
  header["epoch"] = meta.epoch;
  header["seed"] = meta.seed;
  header["best_val_loss"] = meta.best_val_loss;
  header["note"] = meta.note;
  const std::string htext = header.dump();

  out.write(kMagic, sizeof(kMagic));
  const std::uint32_t version = kVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  write_u64(out, htext.size());
  out.write(htext.data(), std::streamsize(htext.size()));

  auto params = net.params();
  write_u64(out, params.size());
  for (Param* p : params) {
    write_u64(out, p->name.size());
    out.write(p->name.data(), std::streamsize(p->name.size()));
    write_u64(out, std::uint64_t(p->value.rows()));
    write_u64(out, std::uint64_t(p->value.cols()));
    out.write(reinterpret_cast<const char*>(p->value.data()),
              std::streamsize(sizeof(float) * std::size_t(p->value.size())));
  }
  require(out.good(), ErrorCode::IoFailure, "short write on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::PathMissing, "cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  require(std::memcmp(magic, kMagic, sizeof(kMagic)) == 0, ErrorCode::ConfigInvalid,
          "not a checkpoint file: " + path);
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  require(version == kVersion, ErrorCode::ConfigInvalid,
          "unsupported checkpoint version " + std::to_string(version));

  std::string htext(read_u64(in), '\0');
  in.read(htext.data(), std::streamsize(htext.size()));
  nlohmann::json header = nlohmann::json::parse(htext);

  Checkpoint ckpt;
  ckpt.config = ModelConfig::from_json(header.at("config").dump());
  ckpt.meta.epoch = header.value("epoch", 0);
  ckpt.meta.seed = header.value("seed", std::uint64_t(0));
  ckpt.meta.best_val_loss = header.value("best_val_loss", 0.0);
  ckpt.meta.note = header.value("note", "");
  ckpt.network = make_model(ckpt.config, ckpt.meta.seed);

  auto params = ckpt.network->params();
  const std::uint64_t count = read_u64(in);
  require(count == params.size(), ErrorCode::ConfigInvalid,
          "checkpoint parameter count mismatch in " + path);
  for (Param* p : params) {
    std::string name(read_u64(in), '\0');
    in.read(name.data(), std::streamsize(name.size()));
    require(name == p->name, ErrorCode::ConfigInvalid,
            "checkpoint parameter order mismatch: expected " + p->name + ", found " + name);
    const std::uint64_t rows = read_u64(in), cols = read_u64(in);
    require(rows == std::uint64_t(p->value.rows()) && cols == std::uint64_t(p->value.cols()),
            ErrorCode::ConfigInvalid, "checkpoint parameter shape mismatch for " + name);
    in.read(reinterpret_cast<char*>(p->value.data()),
            std::streamsize(sizeof(float) * std::size_t(p->value.size())));
  }
  require(in.good(), ErrorCode::IoFailure, "short read on checkpoint: " + path);
  return ckpt;
}

}  // namespace fractoseg
