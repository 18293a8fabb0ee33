#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fractoseg/metrics.hpp"
#include "fractoseg/patch.hpp"
#include "support/oracles.hpp"

using namespace fractoseg;

TEST_CASE("grid rectangles tile the frame exactly") {
  for (auto [h, w] : std::vector<std::pair<int, int>>{{421, 169}, {1024, 1024}, {7, 3}, {64, 100}}) {
    const PatchGrid g = make_patch_grid(h, w, 64, 64);
    // ceil/floor split
    CHECK(g.rects[0].height == (h + 1) / 2);
    CHECK(g.rects[3].height == h / 2);
    CHECK(g.rects[0].width == (w + 1) / 2);
    CHECK(g.rects[3].width == w / 2);
    // union is the full frame, intersections empty
    long long area = 0;
    for (const auto& r : g.rects) area += r.height * r.width;
    CHECK(area == (long long)(h) * w);
    CHECK(g.rects[0].row + g.rects[0].height == g.rects[2].row);
    CHECK(g.rects[0].col + g.rects[0].width == g.rects[1].col);
  }
  const PatchGrid g = make_patch_grid(421, 169, 512, 512);
  CHECK(g.rects[0].height == 211);
  CHECK(g.rects[2].height == 210);
  CHECK(g.rects[0].width == 85);
  CHECK(g.rects[1].width == 84);
}

TEST_CASE("slice then stitch is the identity on exactly divisible class maps") {
  Rng rng(1);
  const Mask m = oracle::random_mask(128, 128, rng);
  const MaskPatches p = slice(m, 64, 64);
  for (const auto& patch : p.patches) {
    CHECK(patch.height() == 64);
    CHECK(patch.width() == 64);
  }
  const Mask back = stitch(p.grid, p.patches);
  CHECK(back == m);
}

TEST_CASE("arbitrary-size mask round trip keeps per-class IoU high") {
  Rng rng(2);
  for (auto [h, w] : std::vector<std::pair<int, int>>{{97, 130}, {211, 85}, {150, 150}}) {
    // blocky masks, as segmentation masks are in practice
    Mask m(h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        m.labels(y, x) = std::uint8_t(((y / 24) * 3 + (x / 24)) % kNumClasses);
    const MaskPatches p = slice(m, 64, 64);
    const Mask back = stitch(p.grid, p.patches);
    const ClassIoUReport rep = miou(back, m);
    for (int c = 0; c < kNumClasses; ++c)
      if (rep.iou[std::size_t(c)]) CHECK(*rep.iou[std::size_t(c)] >= 0.90);
  }
}

TEST_CASE("logit round trip preserves the argmax on interior pixels") {
  const int h = 100, w = 90;
  std::array<LogitPlanes, 4> patch_logits;
  // smooth per-class logit fields on the full frame
  LogitPlanes full(kNumClasses);
  for (int c = 0; c < kNumClasses; ++c) {
    full[std::size_t(c)] = PlaneF(h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        full[std::size_t(c)](y, x) =
            std::sin(0.05f * float(x) + 0.8f * float(c)) + std::cos(0.04f * float(y) - 0.3f * float(c));
  }
  const Mask direct = argmax_mask(full);

  const PatchGrid grid = make_patch_grid(h, w, 64, 64);
  for (int p = 0; p < 4; ++p) {
    patch_logits[std::size_t(p)].resize(kNumClasses);
    const SourceRect& r = grid.rects[std::size_t(p)];
    for (int c = 0; c < kNumClasses; ++c) {
      PlaneF crop = full[std::size_t(c)].block(r.row, r.col, r.height, r.width);
      patch_logits[std::size_t(p)][std::size_t(c)] = resize_bilinear<float>(crop, 64, 64);
    }
  }
  const LogitPlanes stitched = stitch(grid, patch_logits);
  const Mask round = argmax_mask(stitched);

  long long same = 0, interior = 0;
  for (int y = 1; y + 1 < h; ++y)
    for (int x = 1; x + 1 < w; ++x) {
      ++interior;
      same += round.labels(y, x) == direct.labels(y, x);
    }
  CHECK(double(same) / double(interior) >= 0.99);
}

TEST_CASE("error paths: too small and grid mismatch") {
  CHECK_THROWS_AS((void)make_patch_grid(1, 50, 64, 64), Error);
  Rng rng(3);
  const Mask m = oracle::random_mask(64, 64, rng);
  const MaskPatches p = slice(m, 32, 32);
  std::array<Mask, 4> wrong = p.patches;
  wrong[2] = Mask(16, 32);
  CHECK_THROWS_AS((void)stitch(p.grid, wrong), Error);
}
