#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fractoseg/synthgen.hpp"
#include "fractoseg/trainer.hpp"

using namespace fractoseg;

namespace {

std::vector<PatchSample> to_patches(const std::vector<GeneratedSample>& samples, int patch,
                                    bool with_masks) {
  std::vector<PatchSample> out;
  for (const auto& g : samples) {
    auto patches = slice_to_patch_samples(g.id, g.image, with_masks ? &g.mask : nullptr, patch);
    for (auto& p : patches) out.push_back(std::move(p));
  }
  return out;
}

struct TinySetup {
  TrainerConfig cfg;
  TrainData data;
};

TinySetup tiny_setup(int n_labeled = 4, int n_unlabeled = 6, std::uint64_t seed = 1) {
  GenerateDatasetOptions opt;
  opt.profile = SynthProfile::kHetLike;
  opt.n = n_labeled + n_unlabeled + 2;
  opt.mu_target = 0;  // flags unused below, we partition manually
  opt.all_labeled = true;
  opt.seed = seed;
  opt.height = 64;
  opt.width = 64;
  const GeneratedDataset d = generate_dataset(opt);

  TinySetup s;
  s.cfg.mode = TrainMode::kSupervised;
  s.cfg.strategy = builtin_strategy("HET0");
  s.cfg.epochs = 1;
  s.cfg.batch_labeled = 2;
  s.cfg.batch_unlabeled = 2;
  s.cfg.seed = seed;
  s.cfg.model.architecture = Architecture::kSmallUnet;
  s.cfg.model.base_channels = 4;
  s.cfg.model.input_height = 32;
  s.cfg.model.input_width = 32;
  s.cfg.labeled_strong = false;

  std::vector<GeneratedSample> train(d.samples.begin(), d.samples.begin() + n_labeled);
  std::vector<GeneratedSample> val(d.samples.begin() + n_labeled, d.samples.begin() + n_labeled + 2);
  std::vector<GeneratedSample> unlab(d.samples.begin() + n_labeled + 2,
                                     d.samples.begin() + n_labeled + 2 + n_unlabeled);
  s.data.labeled_train = to_patches(train, 32, true);
  s.data.val = to_patches(val, 32, true);
  s.data.unlabeled = to_patches(unlab, 32, false);
  return s;
}

std::vector<Eigen::MatrixXf> snapshot(Network& net) {
  std::vector<Eigen::MatrixXf> out;
  for (Param* p : net.params()) out.push_back(p->value);
  return out;
}

bool bitwise_equal(const std::vector<Eigen::MatrixXf>& a, const std::vector<Eigen::MatrixXf>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a[i].array() == b[i].array()).all()) return false;
  return true;
}

}  // namespace

TEST_CASE("one supervised epoch on two tiny images completes and logs") {
  TinySetup s = tiny_setup(2, 0);
  const TrainResult r = train_supervised(s.cfg, s.data);
  REQUIRE(r.log.epochs.size() == 1);
  const EpochRecord& rec = r.log.epochs[0];
  CHECK(std::isfinite(rec.total));
  CHECK(std::isfinite(rec.val_dice_loss));
  CHECK(rec.lambda == 0.0);
  CHECK(r.best_epoch == 0);
}

TEST_CASE("training is deterministic under a fixed seed") {
  TinySetup s = tiny_setup();
  const TrainResult a = train_supervised(s.cfg, s.data);
  const TrainResult b = train_supervised(s.cfg, s.data);
  CHECK(a.log.epochs[0].total == b.log.epochs[0].total);
  CHECK(a.log.epochs[0].val_dice_loss == b.log.epochs[0].val_dice_loss);
  CHECK(bitwise_equal(snapshot(*a.model), snapshot(*b.model)));
}

TEST_CASE("loss decreases over repeated steps on a fixed batch") {
  TinySetup s = tiny_setup();
  auto net = make_model(s.cfg.model, 1);
  Adam opt(net->params(), 1e-3);
  std::vector<const PatchSample*> batch;
  for (int i = 0; i < 4; ++i) batch.push_back(&s.data.labeled_train[std::size_t(i)]);

  std::vector<double> losses;
  for (int step = 0; step < 50; ++step)
    losses.push_back(supervised_step(*net, opt, s.cfg, batch, 0).supervised);

  int increases = 0;
  for (std::size_t i = 1; i < losses.size(); ++i) increases += losses[i] > losses[i - 1];
  CHECK(increases <= 5);  // allow 10% non-monotone steps
  CHECK(losses.back() < losses.front() * 0.8);
}

TEST_CASE("tau = 1 makes the SSL step equal the supervised step bit-for-bit") {
  TinySetup s = tiny_setup();
  auto net_a = make_model(s.cfg.model, 3);
  auto net_b = make_model(s.cfg.model, 3);
  REQUIRE(bitwise_equal(snapshot(*net_a), snapshot(*net_b)));
  Adam opt_a(net_a->params(), s.cfg.lr);
  Adam opt_b(net_b->params(), s.cfg.lr);

  std::vector<const PatchSample*> labeled = {&s.data.labeled_train[0], &s.data.labeled_train[1]};
  std::vector<const PatchSample*> unlabeled = {&s.data.unlabeled[0], &s.data.unlabeled[1]};

  TrainerConfig ssl_cfg = s.cfg;
  ssl_cfg.mode = TrainMode::kSemiSupervised;
  ssl_cfg.tau = 1.0;
  ssl_cfg.ramp.lambda_max = 1.0;

  for (int step = 0; step < 3; ++step) {
    const LossBundle sup = supervised_step(*net_a, opt_a, s.cfg, labeled, step);
    const LossBundle ssl = ssl_step(*net_b, opt_b, ssl_cfg, labeled, unlabeled, step);
    CHECK(ssl.unsupervised == 0.0);
    CHECK(ssl.supervised == sup.supervised);
    CHECK(bitwise_equal(snapshot(*net_a), snapshot(*net_b)));
  }
}

TEST_CASE("lambda_max = 0 reduces SSL to supervised on the labeled stream") {
  TinySetup s = tiny_setup();
  auto net_a = make_model(s.cfg.model, 4);
  auto net_b = make_model(s.cfg.model, 4);
  Adam opt_a(net_a->params(), s.cfg.lr);
  Adam opt_b(net_b->params(), s.cfg.lr);

  TrainerConfig ssl_cfg = s.cfg;
  ssl_cfg.mode = TrainMode::kSemiSupervised;
  ssl_cfg.tau = 0.5;
  ssl_cfg.ramp.lambda_max = 0.0;

  std::vector<const PatchSample*> labeled = {&s.data.labeled_train[0], &s.data.labeled_train[2]};
  std::vector<const PatchSample*> unlabeled = {&s.data.unlabeled[1], &s.data.unlabeled[3]};
  for (int step = 0; step < 2; ++step) {
    supervised_step(*net_a, opt_a, s.cfg, labeled, step);
    const LossBundle ssl = ssl_step(*net_b, opt_b, ssl_cfg, labeled, unlabeled, step);
    CHECK(ssl.lambda == 0.0);
    CHECK(bitwise_equal(snapshot(*net_a), snapshot(*net_b)));
  }
}

TEST_CASE("semi-supervised runs log lambda from the schedule and track the gate") {
  TinySetup s = tiny_setup();
  TrainerConfig cfg = s.cfg;
  cfg.mode = TrainMode::kSemiSupervised;
  cfg.epochs = 3;
  cfg.ramp.lambda_max = 2.0;
  cfg.ramp.ramp_epochs = 4;
  const TrainResult r = train_semi_supervised(cfg, s.data);
  REQUIRE(r.log.epochs.size() == 3);
  for (int e = 0; e < 3; ++e) {
    CHECK(r.log.epochs[std::size_t(e)].lambda == lambda_at(e, cfg.ramp));
    CHECK(r.log.epochs[std::size_t(e)].valid_pixel_fraction >= 0.0);
    CHECK(r.log.epochs[std::size_t(e)].valid_pixel_fraction <= 1.0);
  }
}

TEST_CASE("best checkpoint has the minimal validation dice loss in the log") {
  TinySetup s = tiny_setup();
  s.cfg.epochs = 4;
  const TrainResult r = train_supervised(s.cfg, s.data);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& rec : r.log.epochs) best = std::min(best, rec.val_dice_loss);
  CHECK(r.best_val_loss == best);
  CHECK(r.log.epochs[std::size_t(r.best_epoch)].val_dice_loss == best);
}

TEST_CASE("evaluate produces per-image reports and class means") {
  TinySetup s = tiny_setup();
  const TrainResult r = train_supervised(s.cfg, s.data);

  GenerateDatasetOptions opt;
  opt.profile = SynthProfile::kHetLike;
  opt.n = 4;
  opt.all_labeled = true;
  opt.seed = 77;
  opt.height = 64;
  opt.width = 64;
  const GeneratedDataset d = generate_dataset(opt);
  std::vector<ImageRgb8> images;
  std::vector<Mask> truths;
  std::vector<std::string> ids;
  for (const auto& g : d.samples) {
    images.push_back(g.image);
    truths.push_back(g.mask);
    ids.push_back(g.id);
  }
  const EvalResult ev = evaluate(*r.model, images, truths, ids);
  CHECK(ev.reports.size() == 4);
  CHECK(ev.mean_miou >= 0.0);
  CHECK(ev.mean_miou <= 1.0);

  // prediction shape equals the input image, with one class id per pixel
  const Mask pred = predict_mask(*r.model, images[0]);
  CHECK(pred.height() == 64);
  CHECK(pred.width() == 64);
  CHECK((pred.labels < std::uint8_t(kNumClasses)).all());
}

TEST_CASE("empty datasets are rejected") {
  TinySetup s = tiny_setup();
  TrainData empty;
  CHECK_THROWS_AS((void)train_supervised(s.cfg, empty), Error);
  TrainerConfig ssl = s.cfg;
  ssl.mode = TrainMode::kSemiSupervised;
  TrainData no_unlabeled = s.data;
  no_unlabeled.unlabeled.clear();
  CHECK_THROWS_AS((void)train_semi_supervised(ssl, no_unlabeled), Error);
}

TEST_CASE("trainer config json round trip") {
  TrainerConfig cfg;
  cfg.mode = TrainMode::kSemiSupervised;
  cfg.strategy = builtin_strategy("HET1");
  cfg.lr = 5e-4;
  cfg.epochs = 12;
  cfg.tau = 0.75;
  cfg.ramp.lambda_max = 0.5;
  cfg.ramp.ramp_epochs = 100;
  cfg.seed = 9;
  cfg.model.base_channels = 8;
  cfg.model.input_height = 64;
  cfg.model.input_width = 64;
  cfg.labeled_strong = false;
  const TrainerConfig back = TrainerConfig::from_json(cfg.to_json());
  CHECK(back.mode == cfg.mode);
  CHECK(back.strategy == cfg.strategy);
  CHECK(back.lr == cfg.lr);
  CHECK(back.epochs == cfg.epochs);
  CHECK(back.tau == cfg.tau);
  CHECK(back.ramp.lambda_max == cfg.ramp.lambda_max);
  CHECK(back.seed == cfg.seed);
  CHECK(back.model == cfg.model);
  CHECK(back.labeled_strong == cfg.labeled_strong);
}
