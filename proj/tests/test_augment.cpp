#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "fractoseg/augment.hpp"
#include "support/oracles.hpp"

using namespace fractoseg;

namespace {

Mask banded_mask(int h, int w) {
  Mask m(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.labels(y, x) = std::uint8_t((y * kNumClasses) / h);
  return m;
}

std::set<int> classes_of(const Mask& m) {
  std::set<int> out;
  for (Eigen::Index y = 0; y < m.height(); ++y)
    for (Eigen::Index x = 0; x < m.width(); ++x) out.insert(m.labels(y, x));
  return out;
}

}  // namespace

TEST_CASE("all probabilities zero leaves the sample untouched") {
  Rng rng(1);
  const ImageRgb8 img = oracle::random_image(32, 32, rng);
  const Mask mask = banded_mask(32, 32);
  StrategyConfig s = builtin_strategy("HET4");
  for (auto& spec : s.weak) spec.p = 0;
  for (auto& spec : s.strong) spec.p = 0;
  const AugmentedSample weak = apply_weak(img, &mask, s, 7);
  CHECK(weak.image == img);
  CHECK(*weak.mask == mask);
  const AugmentedSample strong = apply_strong(weak, s, 8);
  CHECK(strong.image == img);
  CHECK(strong.applied.empty());
}

TEST_CASE("four quarter turns compose to the identity") {
  Rng rng(2);
  const ImageRgb8 img = oracle::random_image(24, 24, rng);
  Rot90FlipParams p;
  p.k = 1;
  ImageRgb8 cur = img;
  for (int i = 0; i < 4; ++i) cur = apply_rot90_flip(cur, p);
  CHECK(cur == img);

  const Mask mask = banded_mask(24, 24);
  Mask mcur = mask;
  for (int i = 0; i < 4; ++i) mcur = apply_rot90_flip(mcur, p);
  CHECK(mcur == mask);
}

TEST_CASE("brightness shift example: +0.2 on a mid-gray image") {
  ImageRgb8 img(4, 4);
  for (int c = 0; c < 3; ++c) img.ch[std::size_t(c)].setConstant(128);
  BrightnessContrastParams p;
  p.alpha = 1.0;
  p.beta = 0.2;
  const ImageRgb8 out = apply_brightness_contrast(img, p);
  CHECK(int(out.ch[0](0, 0)) == 179);  // 128 + 0.2 * 255 rounded

  // clamping at the top of the byte range
  p.beta = 1.0;
  CHECK(int(apply_brightness_contrast(img, p).ch[0](0, 0)) == 255);
}

TEST_CASE("channel shuffle with inverse permutations restores the image") {
  Rng rng(3);
  const ImageRgb8 img = oracle::random_image(16, 16, rng);
  ChannelShuffleParams fwd{{1, 2, 0}};
  ChannelShuffleParams inv{{2, 0, 1}};
  CHECK(apply_channel_shuffle(apply_channel_shuffle(img, fwd), inv) == img);
}

TEST_CASE("strong pipeline never touches the mask") {
  Rng rng(4);
  const ImageRgb8 img = oracle::random_image(32, 32, rng);
  const Mask mask = banded_mask(32, 32);
  const StrategyConfig s = builtin_strategy("HET4");
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const AugmentedSample weak = apply_weak(img, &mask, s, seed);
    const AugmentedSample strong = apply_strong(weak, s, seed + 1000);
    REQUIRE(strong.mask.has_value());
    CHECK(*strong.mask == *weak.mask);  // bit-identical
  }
}

TEST_CASE("spatial transforms never invent classes") {
  Rng rng(5);
  const ImageRgb8 img = oracle::random_image(48, 48, rng);
  const Mask mask = banded_mask(48, 48);
  const std::set<int> input_classes = classes_of(mask);
  const StrategyConfig s = builtin_strategy("HET1");
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const AugmentedSample weak = apply_weak(img, &mask, s, seed);
    for (int c : classes_of(*weak.mask)) CHECK(input_classes.count(c));
    CHECK(weak.image.height() == weak.mask->height());
    CHECK(weak.image.width() == weak.mask->width());
  }
}

TEST_CASE("determinism: identical seeds give bit-identical outputs") {
  Rng rng(6);
  const ImageRgb8 img = oracle::random_image(40, 40, rng);
  const Mask mask = banded_mask(40, 40);
  const StrategyConfig s = builtin_strategy("HET4");
  const AugmentedSample a1 = apply_weak(img, &mask, s, 99);
  const AugmentedSample a2 = apply_weak(img, &mask, s, 99);
  CHECK(a1.image == a2.image);
  CHECK(*a1.mask == *a2.mask);
  const AugmentedSample s1 = apply_strong(a1, s, 123);
  const AugmentedSample s2 = apply_strong(a2, s, 123);
  CHECK(s1.image == s2.image);
}

TEST_CASE("affine geometry matches independently transformed corners") {
  // one labeled rectangle; pixel membership must agree with the analytically
  // mapped rectangle up to a 1 px boundary band
  const int h = 64, w = 64;
  Mask mask(h, w);
  for (int y = 20; y < 40; ++y)
    for (int x = 12; x < 44; ++x) mask.labels(y, x) = 5;

  AffineParams p;
  p.shift_x_px = 3.0;
  p.shift_y_px = -2.0;
  p.scale = 1.1;
  p.angle_deg = 20.0;
  const Mask out = apply_affine(mask, p);

  const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
  const double rad = p.angle_deg * M_PI / 180.0;
  auto inverse_inside = [&](double x, double y) {
    // invert the forward map used by the implementation contract
    const double dx = x - cx - p.shift_x_px;
    const double dy = y - cy - p.shift_y_px;
    const double sx = (std::cos(-rad) * dx - std::sin(-rad) * dy) / p.scale + cx;
    const double sy = (std::sin(-rad) * dx + std::cos(-rad) * dy) / p.scale + cy;
    return sx >= 12 && sx < 44 && sy >= 20 && sy < 40;
  };
  auto near_boundary = [&](double x, double y) {
    for (double ddx : {-1.5, 0.0, 1.5})
      for (double ddy : {-1.5, 0.0, 1.5})
        if (inverse_inside(x + ddx, y + ddy) != inverse_inside(x, y)) return true;
    return false;
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (near_boundary(x, y)) continue;
      CHECK(int(out.labels(y, x) == 5) == int(inverse_inside(x, y)));
    }
}

TEST_CASE("grid distortion with unit multipliers is the identity") {
  Rng rng(7);
  const ImageRgb8 img = oracle::random_image(30, 30, rng);
  GridDistortionParams p;
  p.num_steps = 5;
  p.x_mult.assign(5, 1.0);
  p.y_mult.assign(5, 1.0);
  CHECK(apply_grid_distortion(img, p) == img);
  const Mask mask = banded_mask(30, 30);
  CHECK(apply_grid_distortion(mask, p) == mask);
}

TEST_CASE("byte range survives every photometric transform") {
  Rng rng(8);
  const ImageRgb8 img = oracle::random_image(24, 24, rng);
  const StrategyConfig s = builtin_strategy("HET4");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const AugmentedSample weak = apply_weak(img, nullptr, s, seed);
    const AugmentedSample strong = apply_strong(weak, s, seed);
    CHECK(strong.image.height() == img.height());
    // uint8 storage enforces [0,255]; spot-check the pipeline ran
    CHECK(!strong.applied.empty());
  }
}

TEST_CASE("builtin strategies reproduce the configuration grid") {
  const StrategyConfig het0 = builtin_strategy("HET0");
  REQUIRE(het0.weak.size() == 1);
  CHECK(het0.weak[0].kind == AugKind::kRot90Flip);
  REQUIRE(het0.strong.size() == 1);
  CHECK(het0.strong[0].kind == AugKind::kBrightnessContrast);

  const StrategyConfig het1 = builtin_strategy("HET1");
  REQUIRE(het1.weak.size() == 3);
  CHECK(het1.weak[0].kind == AugKind::kAffine);
  CHECK(het1.weak[1].kind == AugKind::kRot90Flip);
  CHECK(het1.weak[2].kind == AugKind::kGridDistortion);
  REQUIRE(het1.strong.size() == 1);

  const StrategyConfig het4 = builtin_strategy("HET4");
  REQUIRE(het4.strong.size() == 5);
  CHECK(het4.strong[0].kind == AugKind::kBrightnessContrast);
  CHECK(het4.strong[1].kind == AugKind::kGaussianNoise);
  CHECK(het4.strong[2].kind == AugKind::kChannelShuffle);
  CHECK(het4.strong[3].kind == AugKind::kSharpen);
  CHECK(het4.strong[4].kind == AugKind::kBlur);

  const StrategyConfig het8 = builtin_strategy("HET8");
  REQUIRE(het8.strong.size() == 2);
  CHECK(het8.strong[0].kind == AugKind::kBrightnessContrast);
  CHECK(het8.strong[1].kind == AugKind::kChannelShuffle);

  const StrategyConfig ref = builtin_strategy("REF");
  CHECK(ref.weak.size() == 1);
  CHECK(ref.strong.size() == 1);

  CHECK_THROWS_AS((void)builtin_strategy("HET9"), Error);
}

TEST_CASE("table-2 defaults sit on the specs") {
  const AugmentationSpec affine = default_spec(AugKind::kAffine);
  CHECK(affine.param("shift_limit") == 0.0625);
  CHECK(affine.param("scale_limit") == 0.1);
  CHECK(affine.param("rotate_limit") == 45.0);
  CHECK(affine.p == 0.25);
  CHECK(default_spec(AugKind::kRot90Flip).p == 1.0);
  CHECK(default_spec(AugKind::kGridDistortion).param("num_steps") == 5.0);
  CHECK(default_spec(AugKind::kGridDistortion).param("distort_limit") == 0.3);
  CHECK(default_spec(AugKind::kGridDistortion).p == 0.5);
  CHECK(default_spec(AugKind::kBlur).param("blur_limit") == 7.0);
  CHECK(default_spec(AugKind::kBlur).p == 0.2);
  CHECK(default_spec(AugKind::kGaussianNoise).param("var_limit") == 0.05);
  CHECK(default_spec(AugKind::kGaussianNoise).p == 0.1);
  CHECK(default_spec(AugKind::kBrightnessContrast).p == 1.0);
  CHECK(default_spec(AugKind::kSharpen).p == 0.25);
}

TEST_CASE("strategies round-trip through config serialization") {
  for (const auto& name : builtin_strategy_names()) {
    const StrategyConfig original = builtin_strategy(name);
    const StrategyConfig back = strategy_from_json(strategy_to_json(original));
    CHECK(back == original);
  }
}

TEST_CASE("a spatial spec in the strong pipeline is a config violation") {
  StrategyConfig bad = builtin_strategy("HET0");
  bad.strong.push_back(default_spec(AugKind::kAffine));
  CHECK_THROWS_AS(bad.validate(), Error);
  Rng rng(9);
  const ImageRgb8 img = oracle::random_image(16, 16, rng);
  const AugmentedSample weak = apply_weak(img, nullptr, builtin_strategy("HET0"), 1);
  CHECK_THROWS_AS((void)apply_strong(weak, bad, 2), Error);
}
