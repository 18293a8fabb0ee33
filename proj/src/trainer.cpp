#include "fractoseg/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "json.hpp"

namespace fractoseg {

void TrainerConfig::validate() const {
  require(lr > 0, ErrorCode::ConfigInvalid, "learning rate must be positive");
  require(epochs >= 1, ErrorCode::ConfigInvalid, "epochs must be >= 1");
  require(batch_labeled >= 1 && batch_unlabeled >= 1, ErrorCode::ConfigInvalid,
          "batch sizes must be >= 1");
  require(tau > 0 && tau <= 1, ErrorCode::ConfigInvalid, "tau must lie in (0, 1]");
  require(ramp.lambda_max >= 0 && ramp.ramp_epochs > 0, ErrorCode::ConfigInvalid, "bad ramp");
  strategy.validate();
  model.validate();
}

std::string TrainerConfig::to_json() const {
  nlohmann::json doc;
  doc["mode"] = mode == TrainMode::kSupervised ? "supervised" : "semi_supervised";
  doc["strategy"] = nlohmann::json::parse(strategy_to_json(strategy));
  doc["lr"] = lr;
  doc["epochs"] = epochs;
  doc["batch_labeled"] = batch_labeled;
  doc["batch_unlabeled"] = batch_unlabeled;
  doc["tau"] = tau;
  doc["lambda_max"] = ramp.lambda_max;
  doc["ramp_epochs"] = ramp.ramp_epochs;
  doc["consistency_weights"] = {{"ce", consistency_weights.ce},
                                {"dice", consistency_weights.dice},
                                {"negative", consistency_weights.negative}};
  doc["seed"] = seed;
  doc["model"] = nlohmann::json::parse(model.to_json());
  doc["labeled_strong"] = labeled_strong;
  doc["adam"] = {{"beta1", adam_beta1}, {"beta2", adam_beta2}, {"eps", adam_eps}};
  return doc.dump(2);
}

TrainerConfig TrainerConfig::from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("trainer config JSON: ") + e.what());
  }
  TrainerConfig cfg;
  const std::string mode = doc.value("mode", "supervised");
  if (mode == "supervised")
    cfg.mode = TrainMode::kSupervised;
  else if (mode == "semi_supervised")
    cfg.mode = TrainMode::kSemiSupervised;
  else
    throw Error(ErrorCode::ConfigInvalid, "unknown mode '" + mode + "'");
  if (doc.contains("strategy") && doc["strategy"].is_string())
    cfg.strategy = builtin_strategy(doc["strategy"].get<std::string>());
  else if (doc.contains("strategy"))
    cfg.strategy = strategy_from_json(doc["strategy"].dump());
  cfg.lr = doc.value("lr", 1e-3);
  cfg.epochs = doc.value("epochs", 10);
  cfg.batch_labeled = doc.value("batch_labeled", 4);
  cfg.batch_unlabeled = doc.value("batch_unlabeled", 4);
  cfg.tau = doc.value("tau", 0.8);
  cfg.ramp.lambda_max = doc.value("lambda_max", 1.0);
  cfg.ramp.ramp_epochs = doc.value("ramp_epochs", 200);
  if (doc.contains("consistency_weights")) {
    cfg.consistency_weights.ce = doc["consistency_weights"].value("ce", 1.0);
    cfg.consistency_weights.dice = doc["consistency_weights"].value("dice", 1.0);
    cfg.consistency_weights.negative = doc["consistency_weights"].value("negative", 1.0);
  }
  cfg.seed = doc.value("seed", std::uint64_t(0));
  if (doc.contains("model")) cfg.model = ModelConfig::from_json(doc["model"].dump());
  cfg.labeled_strong = doc.value("labeled_strong", cfg.mode == TrainMode::kSupervised);
  if (doc.contains("adam")) {
    cfg.adam_beta1 = doc["adam"].value("beta1", 0.9);
    cfg.adam_beta2 = doc["adam"].value("beta2", 0.999);
    cfg.adam_eps = doc["adam"].value("eps", 1e-8);
  }
  cfg.validate();
  return cfg;
}

// --- data loading -----------------------------------------------------------------

std::vector<PatchSample> slice_to_patch_samples(const std::string& image_id,
                                                const ImageRgb8& image, const Mask* mask,
                                                int patch_size) {
  std::vector<PatchSample> out;
  ImagePatches ip = slice(image, patch_size, patch_size);
  MaskPatches mp;
  if (mask) mp = slice(*mask, patch_size, patch_size);
  for (int p = 0; p < 4; ++p) {
    PatchSample s;
    s.id = image_id + "#" + std::to_string(p);
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a over the patch id
    for (char c : s.id) h = (h ^ std::uint64_t(std::uint8_t(c))) * 1099511628211ull;
    s.uid = h;
    s.image = std::move(ip.patches[std::size_t(p)]);
    if (mask) {
      s.mask = std::move(mp.patches[std::size_t(p)]);
      s.has_mask = true;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<PatchSample> load_patch_samples(const DatasetManifest& manifest,
                                            const std::vector<std::string>& ids, bool with_masks,
                                            int patch_size) {
  std::vector<PatchSample> out;
  for (const auto& id : ids) {
    const ImageRecord& rec = manifest.record(id);
    const ImageRgb8 image = load_record_image(manifest, rec);
    Mask mask;
    if (with_masks) mask = load_record_mask(manifest, rec);
    auto patches = slice_to_patch_samples(id, image, with_masks ? &mask : nullptr, patch_size);
    for (auto& p : patches) out.push_back(std::move(p));
  }
  return out;
}

// --- optimizer ------------------------------------------------------------------------

Adam::Adam(std::vector<Param*> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (Param* p : params_) {
    m_.push_back(Eigen::MatrixXf::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Eigen::MatrixXf::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step() {
  ++t_;
  const float c1 = float(1.0 - std::pow(beta1_, double(t_)));
  const float c2 = float(1.0 - std::pow(beta2_, double(t_)));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Param* p = params_[i];
    m_[i] = float(beta1_) * m_[i] + float(1.0 - beta1_) * p->grad;
    v_[i] = float(beta2_) * v_[i] + float(1.0 - beta2_) * p->grad.cwiseProduct(p->grad);
    p->value.array() -=
        float(lr_) * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + float(eps_));
  }
}

// --- steps --------------------------------------------------------------------------

namespace {

struct AugmentedBatch {
  std::vector<ImageRgb8> images;
  std::vector<Eigen::VectorXi> labels;
};

/// Weak (and optionally strong photometric) views of a labeled batch. The
/// per-sample streams depend only on (seed, epoch, uid), never on mode.
AugmentedBatch augment_labeled(const TrainerConfig& cfg,
                               const std::vector<const PatchSample*>& batch, int epoch) {
  AugmentedBatch out;
  for (const PatchSample* s : batch) {
    require(s->has_mask, ErrorCode::EmptyDataset, "labeled sample without mask: " + s->id);
    Rng weak_rng = derive_rng(cfg.seed, std::uint64_t(epoch), s->uid, 0);
    AugmentedSample a = apply_weak(s->image, &s->mask, cfg.strategy, weak_rng);
    if (cfg.labeled_strong) {
      Rng strong_rng = derive_rng(cfg.seed, std::uint64_t(epoch), s->uid, 1);
      a = apply_strong(a, cfg.strategy, strong_rng);
    }
    out.images.push_back(std::move(a.image));
    out.labels.push_back(mask_to_labels(*a.mask));
  }
  return out;
}

double supervised_pass(Network& net, const TrainerConfig& cfg,
                       const std::vector<const PatchSample*>& labeled, int epoch) {
  AugmentedBatch batch = augment_labeled(cfg, labeled, epoch);
  const TensorF x = images_to_tensor(batch.images, cfg.model.norm_mean, cfg.model.norm_std);
  TensorF logits = net.forward(x, true);
  TensorF grad;
  const SupervisedLoss<float> loss = supervised_loss<float>(logits, batch.labels, &grad);
  require(std::isfinite(double(loss.total)), ErrorCode::DivergedLoss,
          "supervised loss is not finite");
  net.backward(grad);
  return double(loss.total);
}

}  // namespace

LossBundle supervised_step(Network& net, Adam& opt, const TrainerConfig& cfg,
                           const std::vector<const PatchSample*>& labeled, int epoch) {
  net.zero_grad();
  LossBundle bundle;
  bundle.supervised = supervised_pass(net, cfg, labeled, epoch);
  bundle.lambda = 0;
  bundle.unsupervised = 0;
  bundle.finalize();
  opt.step();
  return bundle;
}

LossBundle ssl_step(Network& net, Adam& opt, const TrainerConfig& cfg,
                    const std::vector<const PatchSample*>& labeled,
                    const std::vector<const PatchSample*>& unlabeled, int epoch) {
  net.zero_grad();
  LossBundle bundle;
  bundle.supervised = supervised_pass(net, cfg, labeled, epoch);
  bundle.lambda = lambda_at(epoch, cfg.ramp);

  // unlabeled branch: weak view is a constant target (never backpropagated)
  std::vector<ImageRgb8> weak_images, strong_images;
  for (const PatchSample* s : unlabeled) {
    Rng weak_rng = derive_rng(cfg.seed, std::uint64_t(epoch), s->uid, 0);
    AugmentedSample weak = apply_weak(s->image, nullptr, cfg.strategy, weak_rng);
    Rng strong_rng = derive_rng(cfg.seed, std::uint64_t(epoch), s->uid, 1);
    AugmentedSample strong = apply_strong(weak, cfg.strategy, strong_rng);
    weak_images.push_back(std::move(weak.image));
    strong_images.push_back(std::move(strong.image));
  }
  const TensorF xw = images_to_tensor(weak_images, cfg.model.norm_mean, cfg.model.norm_std);
  const TensorF z_weak = net.forward(xw, false);

  // confidence census over the weak view
  double valid_fraction = 0;
  {
    const TensorF p_weak = softmax(z_weak);
    long long n_valid = 0;
    for (int i = 0; i < p_weak.n; ++i) {
      auto pb = p_weak.sample(i);
      for (Eigen::Index r = 0; r < pb.rows(); ++r)
        if (double(pb.row(r).maxCoeff()) >= cfg.tau) ++n_valid;
    }
    valid_fraction = double(n_valid) / (double(p_weak.n) * double(p_weak.pixels()));
  }
  bundle.valid_pixel_fraction = valid_fraction;

  if (bundle.lambda > 0 && valid_fraction > 0) {
    const TensorF xs = images_to_tensor(strong_images, cfg.model.norm_mean, cfg.model.norm_std);
    TensorF z_strong = net.forward(xs, true);
    TensorF grad_u;
    const ConsistencyLoss<float> lu =
        consistency_loss<float>(z_weak, z_strong, cfg.tau, cfg.consistency_weights, &grad_u);
    require(std::isfinite(double(lu.total)), ErrorCode::DivergedLoss,
            "consistency loss is not finite");
    bundle.unsupervised = double(lu.total);
    if (lu.valid_pixels > 0) {
      grad_u.m *= float(bundle.lambda);
      net.backward(grad_u);
    }
  }
  bundle.finalize();
  opt.step();
  return bundle;
}

// --- training loops --------------------------------------------------------------------

namespace {

std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, int epoch,
                                           std::uint64_t tag) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t(0));
  Rng rng = derive_rng(seed, std::uint64_t(epoch), 0, tag);
  rng.shuffle(perm);
  return perm;
}

double validation_dice_loss(Network& net, const TrainerConfig& cfg,
                            const std::vector<PatchSample>& val) {
  require(!val.empty(), ErrorCode::EmptyDataset, "validation set is empty");
  double total = 0;
  int count = 0;
  for (std::size_t i = 0; i < val.size(); i += std::size_t(cfg.batch_labeled)) {
    std::vector<ImageRgb8> images;
    std::vector<Eigen::VectorXi> labels;
    for (std::size_t j = i; j < std::min(val.size(), i + std::size_t(cfg.batch_labeled)); ++j) {
      images.push_back(val[j].image);
      labels.push_back(mask_to_labels(val[j].mask));
    }
    const TensorF x = images_to_tensor(images, cfg.model.norm_mean, cfg.model.norm_std);
    const TensorF logits = net.forward(x, false);
    const TensorF probs = softmax(logits);
    total += double(dice_loss<float>(probs, labels)) * double(images.size());
    count += int(images.size());
  }
  return total / double(count);
}

struct BestState {
  std::vector<Eigen::MatrixXf> weights;
  int epoch = -1;
  double val = std::numeric_limits<double>::infinity();

  void consider(Network& net, int e, double v) {
    if (v < val) {
      val = v;
      epoch = e;
      weights.clear();
      for (Param* p : net.params()) weights.push_back(p->value);
    }
  }

  void restore(Network& net) const {
    auto params = net.params();
    require(weights.size() == params.size(), ErrorCode::InvalidSpec, "best state mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = weights[i];
  }
};

TrainResult run_training(const TrainerConfig& cfg, const TrainData& data) {
  cfg.validate();
  require(!data.labeled_train.empty(), ErrorCode::EmptyDataset, "no labeled training data");
  require(!data.val.empty(), ErrorCode::EmptyDataset, "no validation data");
  const bool ssl = cfg.mode == TrainMode::kSemiSupervised;
  if (ssl)
    require(!data.unlabeled.empty(), ErrorCode::EmptyDataset,
            "semi-supervised mode needs an unlabeled pool");

  TrainResult result;
  auto net = make_model(cfg.model, cfg.seed);
  Adam opt(net->params(), cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
  BestState best;

  // labeled sampling cursor for the SSL mode (the unlabeled pool drives epochs)
  std::vector<std::size_t> labeled_perm;
  std::size_t labeled_cursor = 0;
  int labeled_wraps = 0;

  const auto t_start = std::chrono::steady_clock::now();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lambda = ssl ? lambda_at(epoch, cfg.ramp) : 0.0;
    int steps = 0;

    auto next_labeled_batch = [&](int size) {
      std::vector<const PatchSample*> batch;
      for (int k = 0; k < size; ++k) {
        if (labeled_cursor >= data.labeled_train.size()) {
          labeled_cursor = 0;
          ++labeled_wraps;
        }
        if (labeled_cursor == 0)
          labeled_perm = epoch_permutation(data.labeled_train.size(), cfg.seed,
                                           epoch * 10007 + labeled_wraps, 2);
        batch.push_back(&data.labeled_train[labeled_perm[labeled_cursor++]]);
      }
      return batch;
    };

    if (!ssl) {
      const auto perm = epoch_permutation(data.labeled_train.size(), cfg.seed, epoch, 2);
      for (std::size_t i = 0; i < perm.size(); i += std::size_t(cfg.batch_labeled)) {
        std::vector<const PatchSample*> batch;
        for (std::size_t j = i; j < std::min(perm.size(), i + std::size_t(cfg.batch_labeled)); ++j)
          batch.push_back(&data.labeled_train[perm[j]]);
        const LossBundle b = supervised_step(*net, opt, cfg, batch, epoch);
        rec.total += b.total;
        rec.supervised += b.supervised;
        ++steps;
      }
    } else {
      labeled_cursor = data.labeled_train.size();  // force reshuffle at epoch start
      const auto uperm = epoch_permutation(data.unlabeled.size(), cfg.seed, epoch, 3);
      for (std::size_t i = 0; i < uperm.size(); i += std::size_t(cfg.batch_unlabeled)) {
        std::vector<const PatchSample*> ubatch;
        for (std::size_t j = i; j < std::min(uperm.size(), i + std::size_t(cfg.batch_unlabeled));
             ++j)
          ubatch.push_back(&data.unlabeled[uperm[j]]);
        const auto lbatch = next_labeled_batch(cfg.batch_labeled);
        const LossBundle b = ssl_step(*net, opt, cfg, lbatch, ubatch, epoch);
        rec.total += b.total;
        rec.supervised += b.supervised;
        rec.unsupervised += b.unsupervised;
        rec.valid_pixel_fraction += b.valid_pixel_fraction;
        ++steps;
      }
    }

    rec.total /= double(steps);
    rec.supervised /= double(steps);
    rec.unsupervised /= double(steps);
    rec.valid_pixel_fraction /= double(steps);
    require(std::isfinite(rec.total), ErrorCode::DivergedLoss, "epoch loss diverged");

    rec.val_dice_loss = validation_dice_loss(*net, cfg, data.val);
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    best.consider(*net, epoch, rec.val_dice_loss);
    result.log.epochs.push_back(rec);
  }

  best.restore(*net);
  result.model = std::move(net);
  result.best_epoch = best.epoch;
  result.best_val_loss = best.val;
  return result;
}

}  // namespace

TrainResult train_supervised(const TrainerConfig& cfg, const TrainData& data) {
  TrainerConfig c = cfg;
  c.mode = TrainMode::kSupervised;
  return run_training(c, data);
}

TrainResult train_semi_supervised(const TrainerConfig& cfg, const TrainData& data) {
  TrainerConfig c = cfg;
  c.mode = TrainMode::kSemiSupervised;
  return run_training(c, data);
}

TrainResult train(const TrainerConfig& cfg, const TrainData& data) {
  return run_training(cfg, data);
}

// --- logs ----------------------------------------------------------------------------

void TrainingLog::save_csv(const std::string& path) const {
  namespace fs = std::filesystem;
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoFailure, "cannot write " + path);
  out << "epoch,loss,loss_supervised,loss_unsupervised,lambda,val_dice_loss,valid_pixel_fraction,"
         "wall_seconds\n";
  out.precision(9);
  for (const auto& r : epochs)
    out << r.epoch << "," << r.total << "," << r.supervised << "," << r.unsupervised << ","
        << r.lambda << "," << r.val_dice_loss << "," << r.valid_pixel_fraction << ","
        << r.wall_seconds << "\n";
}

void TrainingLog::save_json_summary(const std::string& path, int best_epoch,
                                    double best_val) const {
  nlohmann::json doc;
  doc["epochs"] = epochs.size();
  doc["best_epoch"] = best_epoch;
  doc["best_val_dice_loss"] = best_val;
  if (!epochs.empty()) {
    doc["final_loss"] = epochs.back().total;
    doc["final_val_dice_loss"] = epochs.back().val_dice_loss;
    doc["epoch0_loss"] = epochs.front().total;
    doc["wall_seconds"] = epochs.back().wall_seconds;
  }
  namespace fs = std::filesystem;
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoFailure, "cannot write " + path);
  out << doc.dump(2) << "\n";
}

// --- inference & evaluation ---------------------------------------------------------------

Mask predict_mask(Network& net, const ImageRgb8& image) {
  const int ph = net.config().input_height, pw = net.config().input_width;
  ImagePatches patches = slice(image, ph, pw);
  const TensorF x = images_to_tensor(
      {patches.patches[0], patches.patches[1], patches.patches[2], patches.patches[3]},
      net.config().norm_mean, net.config().norm_std);
  const TensorF logits = net.forward(x, false);
  std::array<LogitPlanes, 4> planes;
  for (int p = 0; p < 4; ++p) planes[std::size_t(p)] = tensor_to_planes(logits, p);
  return argmax_mask(stitch(patches.grid, planes));
}

EvalResult evaluate(Network& net, const std::vector<ImageRgb8>& images,
                    const std::vector<Mask>& truths, const std::vector<std::string>& ids) {
  require(images.size() == truths.size() && images.size() == ids.size(),
          ErrorCode::ShapeMismatch, "evaluate: input lists differ in length");
  require(!images.empty(), ErrorCode::EmptyDataset, "evaluate: no images");
  EvalResult out;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Mask pred = predict_mask(net, images[i]);
    ClassIoUReport rep = miou(pred, truths[i]);
    rep.id = ids[i];
    out.mean_miou += rep.miou;
    out.reports.push_back(std::move(rep));
  }
  out.mean_miou /= double(out.reports.size());
  for (int c = 0; c < kNumClasses; ++c) {
    double sum = 0;
    int n = 0;
    for (const auto& rep : out.reports) {
      if (rep.iou[std::size_t(c)]) {
        sum += *rep.iou[std::size_t(c)];
        ++n;
      }
    }
    if (n > 0) out.mean_class_iou[std::size_t(c)] = sum / double(n);
  }
  return out;
}

// --- sweep -------------------------------------------------------------------------------

SweepReport sweep(const std::vector<std::string>& strategies, const TrainerConfig& cfg_template,
                  const TrainData& data, const std::vector<ImageRgb8>& test_images,
                  const std::vector<Mask>& test_truths, const std::vector<std::string>& test_ids) {
  require(!strategies.empty(), ErrorCode::EmptyInput, "sweep needs at least one strategy");
  SweepReport report;
  for (const auto& name : strategies) {
    SweepRow row;
    row.strategy = name;
    try {
      TrainerConfig cfg = cfg_template;
      cfg.strategy = builtin_strategy(name);
      TrainResult r = train(cfg, data);
      row.eval = evaluate(*r.model, test_images, test_truths, test_ids);
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

void SweepReport::save_csv(const std::string& path) const {
  namespace fs = std::filesystem;
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoFailure, "cannot write " + path);
  out << "strategy,status";
  for (int c = 0; c < kNumClasses; ++c)
    out << ",iou_" << canonical_taxonomy().name(c);
  out << ",miou\n";
  out.precision(6);
  for (const auto& row : rows) {
    out << row.strategy << "," << (row.ok ? "ok" : ("failed: " + row.error));
    for (int c = 0; c < kNumClasses; ++c) {
      out << ",";
      if (row.ok && row.eval.mean_class_iou[std::size_t(c)])
        out << *row.eval.mean_class_iou[std::size_t(c)];
    }
    out << ",";
    if (row.ok) out << row.eval.mean_miou;
    out << "\n";
  }
}

}  // namespace fractoseg
