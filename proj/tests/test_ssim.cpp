#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fractoseg/ssim.hpp"
#include "support/oracles.hpp"

using namespace fractoseg;

namespace {

SsimConfig small_cfg() {
  SsimConfig cfg;
  cfg.working_height = 32;
  cfg.working_width = 32;
  return cfg;
}

}  // namespace

TEST_CASE("self-similarity is exactly one") {
  Rng rng(1);
  const ImageRgb8 img = oracle::random_image(40, 56, rng);
  CHECK(ssim(img, img, small_cfg()) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("ssim is symmetric") {
  Rng rng(2);
  const ImageRgb8 a = oracle::random_image(40, 40, rng);
  const ImageRgb8 b = oracle::random_image(64, 48, rng);
  const SsimConfig cfg = small_cfg();
  CHECK(std::abs(ssim(a, b, cfg) - ssim(b, a, cfg)) < 1e-6);
}

TEST_CASE("constant images reduce to the luminance term") {
  // two 16x16 constants: variances vanish, so contrast and structure are 1
  PlaneD x = PlaneD::Constant(16, 16, 50.0);
  PlaneD y = PlaneD::Constant(16, 16, 200.0);
  SsimConfig cfg;
  cfg.working_height = 16;
  cfg.working_width = 16;
  const double c1 = cfg.c1();
  const double expected = (2.0 * 50 * 200 + c1) / (50.0 * 50 + 200.0 * 200 + c1);
  CHECK(ssim_luminance(x, y, cfg) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("agreement with the windowed reference implementation") {
  Rng rng(3);
  const SsimConfig cfg = small_cfg();
  for (int trial = 0; trial < 10; ++trial) {
    const ImageRgb8 a = oracle::random_image(48, 48, rng);
    const ImageRgb8 b = oracle::random_image(48, 48, rng);
    const PlaneD la = resize_bilinear<double>(to_luminance(a), 32, 32);
    const PlaneD lb = resize_bilinear<double>(to_luminance(b), 32, 32);
    const double ref = oracle::ssim_reference(la, lb, cfg.window, cfg.alpha, cfg.beta, cfg.gamma,
                                              cfg.c1(), cfg.c2());
    CHECK(ssim_luminance(la, lb, cfg) == doctest::Approx(ref).epsilon(1e-4));
  }
}

TEST_CASE("structure term is invariant to a shared constant shift") {
  // alpha = beta = 0 isolates the structure term through the public surface
  Rng rng(4);
  const PlaneD x = resize_bilinear<double>(to_luminance(oracle::random_image(32, 32, rng)), 32, 32);
  const PlaneD y = resize_bilinear<double>(to_luminance(oracle::random_image(32, 32, rng)), 32, 32);
  SsimConfig cfg = small_cfg();
  cfg.alpha = 0;
  cfg.beta = 0;
  const double base = ssim_luminance(x, y, cfg);
  const double shifted = ssim_luminance(PlaneD(x + 17.0), PlaneD(y + 17.0), cfg);
  CHECK(base == doctest::Approx(shifted).epsilon(1e-9));
}

TEST_CASE("ssim_matrix equals the naive pairwise loop exactly") {
  Rng rng(5);
  std::vector<ImageRgb8> images;
  std::vector<std::string> ids;
  for (int i = 0; i < 4; ++i) {
    images.push_back(oracle::random_image(40 + 8 * i, 40, rng));
    ids.push_back("img" + std::to_string(i));
  }
  const SsimConfig cfg = small_cfg();
  const SsimMatrix m = ssim_matrix(ids, images, cfg);
  for (int i = 0; i < 4; ++i) {
    CHECK(m.values(i, i) == 1.0);
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      CHECK(m.values(i, j) == ssim(images[std::size_t(i)], images[std::size_t(j)], cfg));
      CHECK(m.values(i, j) == m.values(j, i));
    }
  }
}

TEST_CASE("two identical images give the all-ones matrix") {
  Rng rng(6);
  const ImageRgb8 img = oracle::random_image(32, 32, rng);
  const SsimMatrix m = ssim_matrix({"a", "b"}, {img, img}, small_cfg());
  CHECK(m.values.isApproxToConstant(1.0, 1e-9));
}

TEST_CASE("dataset statistics over selections") {
  SsimMatrix m;
  m.ids = {"a", "b", "c"};
  m.values = Eigen::MatrixXd::Identity(3, 3);
  m.values(0, 1) = m.values(1, 0) = 0.2;
  m.values(0, 2) = m.values(2, 0) = 0.4;
  m.values(1, 2) = m.values(2, 1) = 0.6;

  const SsimStats all = dataset_stats(m, SsimSelection::kAllPairs);
  CHECK(all.n == 3);
  CHECK(all.mu == doctest::Approx(0.4).epsilon(1e-12));

  const SsimStats first = dataset_stats(m, SsimSelection::kVsFirst);
  CHECK(first.n == 2);
  CHECK(first.mu == doctest::Approx(0.3).epsilon(1e-12));

  m.values.setConstant(0.5);
  const SsimStats flat = dataset_stats(m, SsimSelection::kAllPairs);
  CHECK(flat.mu == doctest::Approx(0.5));
  CHECK(flat.sigma == doctest::Approx(0.0));

  SsimMatrix lone;
  lone.ids = {"only"};
  lone.values = Eigen::MatrixXd::Identity(1, 1);
  CHECK_THROWS_AS((void)dataset_stats(lone, SsimSelection::kAllPairs), Error);
}

TEST_CASE("quality report pairs SSIM with scores and flags the spread") {
  SsimMatrix m;
  m.ids = {"ref", "a", "b", "c"};
  m.values = Eigen::MatrixXd::Identity(4, 4);
  m.values(0, 1) = 0.1;
  m.values(0, 2) = 0.5;
  m.values(0, 3) = 0.9;

  CHECK_THROWS_AS((void)ssim_quality_report(m, {}), Error);

  std::map<std::string, double> scores = {{"a", 0.80}, {"b", 0.82}, {"c", 0.84}};
  const SsimQualityReport rep = ssim_quality_report(m, scores);
  REQUIRE(rep.points.size() == 3);
  CHECK(rep.points[0].ssim == doctest::Approx(0.1));
  CHECK(rep.points[0].miou == doctest::Approx(0.80));
  // mIoU scatter is far tighter than the SSIM scatter here
  CHECK(rep.miou_spread_smaller);

  std::map<std::string, double> flat = {{"a", 0.8}, {"b", 0.8}, {"c", 0.8}};
  const SsimQualityReport rep2 = ssim_quality_report(m, flat);
  CHECK(rep2.miou_box.iqr() == doctest::Approx(0.0));
}

TEST_CASE("degenerate inputs raise typed errors") {
  CHECK_THROWS_AS((void)ssim(ImageRgb8(), ImageRgb8(), small_cfg()), Error);
  SsimConfig bad = small_cfg();
  bad.window = 4;
  Rng rng(7);
  const ImageRgb8 img = oracle::random_image(32, 32, rng);
  CHECK_THROWS_AS((void)ssim(img, img, bad), Error);
}
