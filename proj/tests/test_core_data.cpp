#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <set>

#include "fractoseg/annotation.hpp"
#include "fractoseg/manifest.hpp"
#include "support/oracles.hpp"

using namespace fractoseg;

namespace {

PolygonShape rect_shape(const std::string& label, double x0, double y0, double x1, double y1) {
  return PolygonShape{label, {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
}

DatasetManifest make_manifest(int n_labeled, int n_unlabeled,
                              const std::vector<std::string>& tags = {}) {
  DatasetManifest m;
  m.name = "test";
  for (int i = 0; i < n_labeled + n_unlabeled; ++i) {
    ImageRecord r;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "img-%03d", i);
    r.id = buf;
    r.width = 128;
    r.height = 128;
    r.labeled = i < n_labeled;
    r.domain_tag = tags.empty() ? "lab-a" : tags[std::size_t(i) % tags.size()];
    m.records.push_back(r);
  }
  return m;
}

}  // namespace

TEST_CASE("taxonomy has the canonical 7-class layout") {
  const ClassTaxonomy& t = canonical_taxonomy();
  CHECK(t.size() == 7);
  CHECK(t.name(0) == "background");
  CHECK(t.name(5) == "brittle fracture");
  CHECK(t.id_of("fatigue precrack") == 3);
  CHECK_THROWS_AS((void)t.id_of("rust"), Error);
  CHECK_THROWS_AS(ClassTaxonomy({{0, "background"}, {1, "x"}}), Error);
}

TEST_CASE("rasterize: empty annotation gives all background") {
  PolygonAnnotation ann;
  ann.image_height = 8;
  ann.image_width = 8;
  const Mask m = rasterize(ann, canonical_taxonomy());
  CHECK((m.labels == 0).all());
}

TEST_CASE("rasterize: axis-aligned rectangle covers exactly its pixels") {
  PolygonAnnotation ann;
  ann.image_height = 8;
  ann.image_width = 8;
  ann.shapes.push_back(rect_shape("brittle fracture", 2, 1, 6, 4));
  const Mask m = rasterize(ann, canonical_taxonomy());

  // brute-force point-in-rectangle over all 64 pixel centers
  int count = 0;
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      const double cx = x + 0.5, cy = y + 0.5;
      const bool inside = cx >= 2 && cx <= 6 && cy >= 1 && cy <= 4;
      CHECK(m.labels(y, x) == (inside ? 5 : 0));
      count += inside;
    }
  }
  CHECK(count == 12);
  CHECK((m.labels == 5).count() == 12);
}

TEST_CASE("rasterize: later shapes overwrite earlier ones") {
  PolygonAnnotation ann;
  ann.image_height = 8;
  ann.image_width = 8;
  ann.shapes.push_back(rect_shape("brittle fracture", 1, 1, 5, 5));
  ann.shapes.push_back(rect_shape("other", 3, 3, 7, 7));
  const Mask m = rasterize(ann, canonical_taxonomy());
  CHECK(m.labels(3, 3) == 6);  // overlap region belongs to the later shape
  CHECK(m.labels(2, 2) == 5);
  CHECK(m.labels(6, 6) == 6);
}

TEST_CASE("rasterize: error paths and determinism") {
  PolygonAnnotation ann;
  ann.image_height = 8;
  ann.image_width = 8;
  ann.shapes.push_back(rect_shape("no such class", 1, 1, 3, 3));
  CHECK_THROWS_AS((void)rasterize(ann, canonical_taxonomy()), Error);

  ann.shapes[0] = PolygonShape{"other", {{1, 1}, {3, 3}}};
  CHECK_THROWS_AS((void)rasterize(ann, canonical_taxonomy()), Error);

  ann.shapes[0] = PolygonShape{"other", {{0.3, 0.2}, {6.7, 1.1}, {4.2, 7.9}}};
  const Mask a = rasterize(ann, canonical_taxonomy());
  const Mask b = rasterize(ann, canonical_taxonomy());
  CHECK(a == b);

  // histogram always sums to H*W
  long long total = 0;
  for (int c = 0; c < kNumClasses; ++c) total += (a.labels == std::uint8_t(c)).count();
  CHECK(total == 64);
}

TEST_CASE("annotation JSON parsing matches the documented layout") {
  const std::string doc = R"({
    "imageHeight": 8, "imageWidth": 10,
    "shapes": [{"label": "erosion notch", "points": [[1,1],[4,1],[4,3],[1,3]]}]
  })";
  const PolygonAnnotation ann = parse_annotation_json(doc);
  CHECK(ann.image_height == 8);
  CHECK(ann.image_width == 10);
  REQUIRE(ann.shapes.size() == 1);
  CHECK(ann.shapes[0].label == "erosion notch");
  CHECK(ann.shapes[0].points.size() == 4);
  CHECK_THROWS_AS((void)parse_annotation_json("{"), Error);
}

TEST_CASE("split_dataset: randomized 32 labeled at (0.75, 0.25) gives 24/8") {
  const auto m = make_manifest(32, 168);
  const SplitReport r = split_dataset(m, SplitMethod::kRandomized, 7, 0.75, 0.25);
  CHECK(r.splits.at("train").size() == 24);
  CHECK(r.splits.at("val").size() == 8);
  CHECK(r.splits.at("test").empty());
  CHECK(r.unlabeled_pool.size() == 168);
  CHECK(r.mu_ul.str() == "5.25");
}

TEST_CASE("split_dataset: exact partition, reproducible under seed") {
  const auto m = make_manifest(13, 5);
  for (std::uint64_t seed : {0ull, 1ull, 42ull}) {
    const SplitReport a = split_dataset(m, SplitMethod::kRandomized, seed, 0.6, 0.2);
    const SplitReport b = split_dataset(m, SplitMethod::kRandomized, seed, 0.6, 0.2);
    CHECK(a.splits == b.splits);
    std::set<std::string> seen;
    for (const auto& [name, ids] : a.splits)
      for (const auto& id : ids) CHECK(seen.insert(id).second);
    CHECK(seen.size() == 13);
  }
}

TEST_CASE("split_dataset: stratified allocates proportionally per domain tag") {
  // 96 labeled in 4 equal strata -> each stratum contributes 18 train / 6 val
  const auto m = make_manifest(96, 0, {"a", "b", "c", "d"});
  const SplitReport r = split_dataset(m, SplitMethod::kStratified, 0, 0.75, 0.25);
  CHECK(r.splits.at("train").size() == 72);
  CHECK(r.splits.at("val").size() == 24);
  for (const auto& tag : {"a", "b", "c", "d"}) {
    CHECK(r.per_tag_counts.at(tag).at("train") == 18);
    CHECK(r.per_tag_counts.at(tag).at("val") == 6);
  }
}

TEST_CASE("split_dataset: single stratum degenerates to randomized sizes") {
  const auto m = make_manifest(20, 0);
  const SplitReport s = split_dataset(m, SplitMethod::kStratified, 3, 0.75, 0.25);
  const SplitReport r = split_dataset(m, SplitMethod::kRandomized, 3, 0.75, 0.25);
  CHECK(s.splits.at("train").size() == r.splits.at("train").size());
  CHECK(s.splits.at("val").size() == r.splits.at("val").size());
}

TEST_CASE("split_dataset: multi-member strata always reach train and val") {
  const auto m = make_manifest(11, 0, {"a", "a", "a", "b", "b", "b", "b", "c", "c", "c", "c"});
  const SplitReport r = split_dataset(m, SplitMethod::kStratified, 0, 0.8, 0.2);
  for (const auto& [tag, counts] : r.per_tag_counts) {
    CHECK(counts.count("train"));
    CHECK(counts.count("val"));
  }
}

TEST_CASE("split_dataset: error paths") {
  const auto m = make_manifest(8, 0);
  CHECK_THROWS_AS((void)split_dataset(m, SplitMethod::kRandomized, 0, 0.9, 0.3), Error);
  CHECK_THROWS_AS((void)split_dataset(make_manifest(3, 9), SplitMethod::kRandomized, 0, 0.75, 0.25),
                  Error);
  // a stratum with a single labeled record is rejected under stratified
  auto tagged = make_manifest(5, 0, {"a", "a", "a", "a", "solo"});
  CHECK_THROWS_AS((void)split_dataset(tagged, SplitMethod::kStratified, 0, 0.75, 0.25), Error);
}

TEST_CASE("compute_ratio renders exact rationals") {
  CHECK(compute_ratio(make_manifest(32, 168)).str() == "5.25");
  CHECK(compute_ratio(make_manifest(46, 268)).str() == "5.83");
  CHECK(compute_ratio(make_manifest(10, 0)).str() == "0.00");
  CHECK(compute_ratio(make_manifest(32, 168)).value() == doctest::Approx(5.25));
  CHECK_THROWS_AS((void)compute_ratio(make_manifest(0, 7)), Error);
}

TEST_CASE("manifest json round trip and split validation") {
  auto m = make_manifest(6, 3);
  for (auto& r : m.records) r.image_path = "images/" + r.id + ".png";
  m.splits["train"] = {"img-000", "img-001"};
  m.splits["val"] = {"img-002"};
  m.splits["test"] = {"img-003"};

  const auto dir = std::filesystem::temp_directory_path() / "fractoseg-test-manifest";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "manifest.json").string();
  save_manifest(m, path);
  const DatasetManifest loaded = load_manifest(path);
  CHECK(loaded.name == m.name);
  CHECK(loaded.total() == 9);
  CHECK(loaded.n_labeled() == 6);
  CHECK(loaded.splits.at("train") == m.splits.at("train"));

  // unlabeled ids must never appear in val or test
  m.splits["val"].push_back("img-007");
  CHECK_THROWS_AS(m.validate(), Error);
}
