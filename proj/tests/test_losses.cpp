#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fractoseg/losses.hpp"
#include "support/oracles.hpp"

using namespace fractoseg;

namespace {

TensorD random_logits(int n, int h, int w, std::uint64_t seed, double scale = 2.0) {
  TensorD z(n, kNumClasses, h, w);
  Rng rng(seed);
  for (Eigen::Index j = 0; j < z.m.cols(); ++j)
    for (Eigen::Index i = 0; i < z.m.rows(); ++i) z.m(i, j) = rng.normal() * scale;
  return z;
}

std::vector<Eigen::VectorXi> random_labels(int n, int pixels, std::uint64_t seed) {
  std::vector<Eigen::VectorXi> labels;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXi l(pixels);
    for (int r = 0; r < pixels; ++r) l(r) = rng.uniform_int(0, kNumClasses - 1);
    labels.push_back(std::move(l));
  }
  return labels;
}

}  // namespace

TEST_CASE("uniform logits give cross entropy ln 7 for any labels") {
  TensorD z(1, kNumClasses, 4, 4);
  const auto labels = random_labels(1, 16, 1);
  CHECK(cross_entropy(z, labels) == doctest::Approx(std::log(7.0)).epsilon(1e-6));
}

TEST_CASE("cross entropy vanishes as the true-class gap grows") {
  double prev = std::log(7.0);
  for (double gap : {5.0, 10.0, 20.0}) {
    TensorD z(1, kNumClasses, 2, 2);
    std::vector<Eigen::VectorXi> labels = {Eigen::VectorXi::Constant(4, 2)};
    for (Eigen::Index r = 0; r < 4; ++r) z.sample(0)(r, 2) = gap;
    const double loss = cross_entropy(z, labels);
    CHECK(loss < prev);
    prev = loss;
  }
  CHECK(prev < 1e-7);  // 6 e^-20
}

TEST_CASE("cross entropy on a 2x2 image matches a scalar oracle") {
  TensorD z(1, kNumClasses, 2, 2);
  const double raw[4][7] = {{0.5, -1, 2, 0, 1, -2, 0.3},
                            {3, 0, 0, 0, -1, 1, 0.2},
                            {-0.5, 0.5, 1.5, -1.5, 2.5, 0, 1},
                            {0, 0, 0, 7, 0, 0, 0}};
  const int truth[4] = {2, 0, 4, 3};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 7; ++c) z.sample(0)(r, c) = raw[r][c];
  std::vector<Eigen::VectorXi> labels = {Eigen::VectorXi(4)};
  for (int r = 0; r < 4; ++r) labels[0](r) = truth[r];

  double expected = 0;
  for (int r = 0; r < 4; ++r) {
    double denom = 0;
    for (int c = 0; c < 7; ++c) denom += std::exp(raw[r][c]);
    expected -= std::log(std::exp(raw[r][truth[r]]) / denom);
  }
  expected /= 4;
  CHECK(cross_entropy(z, labels) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("dice loss reference values") {
  // perfect one-hot prediction: loss 0
  TensorD p(1, kNumClasses, 2, 2);
  std::vector<Eigen::VectorXi> labels = {Eigen::VectorXi(4)};
  for (int r = 0; r < 4; ++r) {
    labels[0](r) = r % kNumClasses;
    p.sample(0)(r, r % kNumClasses) = 1.0;
  }
  CHECK(dice_loss(p, labels) == doctest::Approx(0.0).epsilon(1e-5));

  // fully disjoint hard predictions with every class present in both masks
  TensorD q(1, kNumClasses, 1, kNumClasses);
  std::vector<Eigen::VectorXi> all = {Eigen::VectorXi(kNumClasses)};
  for (int r = 0; r < kNumClasses; ++r) {
    all[0](r) = r;
    q.sample(0)(r, (r + 1) % kNumClasses) = 1.0;
  }
  CHECK(dice_loss(q, all) == doctest::Approx(1.0).epsilon(1e-4));

  // the 4-pixel single-class example with epsilon = 0: Dice = 2/3
  TensorD s(1, kNumClasses, 2, 2);
  std::vector<Eigen::VectorXi> t = {Eigen::VectorXi::Zero(4)};
  t[0](0) = 5;                // truth: one pixel of class 5
  s.sample(0)(0, 5) = 1.0;    // predicted on the true pixel
  s.sample(0)(1, 5) = 1.0;    // plus one extra pixel
  s.sample(0)(2, 0) = 1.0;
  s.sample(0)(3, 0) = 1.0;
  const auto per_class = dice_per_class(s, t, 0, 0.0);
  CHECK(per_class[5] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  // and the loss aggregates 1 - mean(per-class dice)
  double mean = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    // absent-in-both classes carry dice 1 under smoothing
    const double d = (c == 5)   ? 2.0 / 3.0
                     : (c == 0) ? dice_per_class(s, t, 0, 1e-6)[0]
                                : 1.0;
    mean += d;
  }
  CHECK(dice_loss(s, t) == doctest::Approx(1.0 - mean / 7).epsilon(1e-6));
}

TEST_CASE("analytic gradients match central finite differences") {
  const TensorD z = random_logits(1, 4, 4, 3);
  const auto labels = random_labels(1, 16, 4);

  TensorD grad_ce;
  cross_entropy(z, labels, &grad_ce);
  const TensorD fd_ce = oracle::finite_difference(
      [&](const TensorD& t) { return cross_entropy(t, labels); }, z);
  CHECK(oracle::max_rel_error(grad_ce, fd_ce) < 1e-3);

  // dice gradient is taken w.r.t. probabilities
  TensorD probs = softmax(z);
  TensorD grad_dice;
  dice_loss(probs, labels, &grad_dice);
  const TensorD fd_dice = oracle::finite_difference(
      [&](const TensorD& t) { return dice_loss(t, labels); }, probs);
  CHECK(oracle::max_rel_error(grad_dice, fd_dice) < 1e-3);

  // combined supervised loss w.r.t. logits
  TensorD grad_sup;
  supervised_loss(z, labels, &grad_sup);
  const TensorD fd_sup = oracle::finite_difference(
      [&](const TensorD& t) { return double(supervised_loss(t, labels).total); }, z);
  CHECK(oracle::max_rel_error(grad_sup, fd_sup) < 1e-3);
}

TEST_CASE("supervised loss is exactly cross entropy plus dice") {
  const TensorD z = random_logits(2, 4, 4, 5);
  const auto labels = random_labels(2, 16, 6);
  const auto sup = supervised_loss(z, labels);
  const double ce = cross_entropy(z, labels);
  const TensorD probs = softmax(z);
  const double dice = dice_loss(probs, labels);
  CHECK(sup.total == doctest::Approx(ce + dice).epsilon(1e-12));
}

TEST_CASE("consistency loss: self-consistency and gating") {
  // confident weak predictions, strong equal to weak: CE and Dice terms ~ 0
  TensorD z(1, kNumClasses, 2, 2);
  for (int r = 0; r < 4; ++r) z.sample(0)(r, r % 3) = 30.0;
  const auto self = consistency_loss(z, z, 0.8);
  CHECK(self.valid_fraction == 1.0);
  CHECK(self.ce == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(self.dice == doctest::Approx(0.0).epsilon(1e-4));

  // tau = 1 with a non-degenerate softmax: empty valid set, zero loss, zero grad
  const TensorD zr = random_logits(1, 4, 4, 7);
  const TensorD zs = random_logits(1, 4, 4, 8);
  TensorD grad;
  const auto gated = consistency_loss(zr, zs, 1.0, {}, &grad);
  CHECK(gated.valid_pixels == 0);
  CHECK(gated.total == 0.0);
  CHECK((grad.m.array() == 0.0).all());

  // tau = 0: every pixel participates
  const auto open = consistency_loss(zr, zs, 0.0);
  CHECK(open.valid_fraction == 1.0);
}

TEST_CASE("negative-learning term equals -log(1 - p_strong at weak argmin)") {
  TensorD zw(1, kNumClasses, 1, 1), zs(1, kNumClasses, 1, 1);
  // weak: confident class 0, least likely class 6
  for (int c = 0; c < kNumClasses; ++c) zw.m(0, c) = 5.0 - c;
  // strong: arbitrary distribution
  const double raw[7] = {1.2, 0.4, -0.3, 0.9, -1.5, 0.2, 0.7};
  for (int c = 0; c < kNumClasses; ++c) zs.m(0, c) = raw[c];
  double denom = 0;
  for (double v : raw) denom += std::exp(v);
  const double p6 = std::exp(raw[6]) / denom;

  const auto loss = consistency_loss(zw, zs, 0.5);
  CHECK(loss.negative == doctest::Approx(-std::log(1.0 - p6)).epsilon(1e-9));
  const double p0 = std::exp(raw[0]) / denom;
  CHECK(loss.ce == doctest::Approx(-std::log(p0)).epsilon(1e-9));
}

TEST_CASE("consistency gradient matches finite differences on the strong branch") {
  const TensorD zw = random_logits(1, 4, 4, 9, 1.5);
  const TensorD zs = random_logits(1, 4, 4, 10);
  const double tau = 0.55;  // keeps a mixed valid set
  TensorD grad;
  const auto loss = consistency_loss(zw, zs, tau, {}, &grad);
  REQUIRE(loss.valid_pixels > 0);
  REQUIRE(loss.valid_pixels < 16);
  const TensorD fd = oracle::finite_difference(
      [&](const TensorD& t) { return double(consistency_loss(zw, t, tau).total); }, zs);
  CHECK(oracle::max_rel_error(grad, fd) < 1e-3);
}

TEST_CASE("consistency loss is invariant to pixel permutation") {
  const TensorD zw = random_logits(1, 2, 4, 11, 3.0);
  const TensorD zs = random_logits(1, 2, 4, 12);
  const auto base = consistency_loss(zw, zs, 0.5);

  // permute the 8 pixels the same way in both tensors
  std::vector<int> perm = {5, 2, 7, 0, 3, 6, 1, 4};
  TensorD pw = zw, ps = zs;
  for (int r = 0; r < 8; ++r) {
    pw.sample(0).row(r) = zw.sample(0).row(perm[std::size_t(r)]);
    ps.sample(0).row(r) = zs.sample(0).row(perm[std::size_t(r)]);
  }
  const auto permuted = consistency_loss(pw, ps, 0.5);
  CHECK(permuted.total == doctest::Approx(base.total).epsilon(1e-12));
}

TEST_CASE("lambda ramp hits its endpoints exactly") {
  RampSchedule sched;
  sched.lambda_max = 2.5;
  sched.ramp_epochs = 200;
  CHECK(lambda_at(0, sched) == doctest::Approx(2.5 * std::exp(-5.0)).epsilon(1e-12));
  CHECK(lambda_at(200, sched) == 2.5);
  CHECK(lambda_at(500, sched) == 2.5);
  double prev = -1;
  for (int e = 0; e <= 200; ++e) {
    const double v = lambda_at(e, sched);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK_THROWS_AS((void)lambda_at(-1, sched), Error);
}

TEST_CASE("loss bundle reconstitutes L = L_s + lambda L_u") {
  LossBundle b;
  b.supervised = 1.25;
  b.unsupervised = 0.5;
  b.lambda = 0.3;
  b.finalize();
  CHECK(b.total == doctest::Approx(1.25 + 0.3 * 0.5).epsilon(1e-12));
}
