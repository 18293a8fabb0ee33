#include "fractoseg/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "fractoseg/png_io.hpp"
#include "fractoseg/rng.hpp"
#include "fractoseg/taxonomy.hpp"
#include "json.hpp"

namespace fractoseg {

namespace fs = std::filesystem;

std::string Ratio::str(int decimals) const {
  decimals = std::max(decimals, 2);
  long long pow10 = 1;
  for (int i = 0; i < decimals; ++i) pow10 *= 10;
  // round half up on the exact rational
  const long long scaled = (num * pow10 * 2 + den) / (2 * den);
  std::string digits = std::to_string(scaled % pow10);
  digits.insert(0, std::size_t(decimals) - digits.size(), '0');
  return std::to_string(scaled / pow10) + "." + digits;
}

int DatasetManifest::n_labeled() const {
  return int(std::count_if(records.begin(), records.end(),
                           [](const ImageRecord& r) { return r.labeled; }));
}

int DatasetManifest::n_unlabeled() const { return total() - n_labeled(); }

bool DatasetManifest::has_record(const std::string& id) const {
  return std::any_of(records.begin(), records.end(),
                     [&](const ImageRecord& r) { return r.id == id; });
}

const ImageRecord& DatasetManifest::record(const std::string& id) const {
  for (const auto& r : records)
    if (r.id == id) return r;
  throw Error(ErrorCode::PathMissing, "manifest '" + name + "' has no record '" + id + "'");
}

std::vector<std::string> DatasetManifest::labeled_ids() const {
  std::vector<std::string> ids;
  for (const auto& r : records)
    if (r.labeled) ids.push_back(r.id);
  return ids;
}

std::vector<std::string> DatasetManifest::unlabeled_ids() const {
  std::vector<std::string> ids;
  for (const auto& r : records)
    if (!r.labeled) ids.push_back(r.id);
  return ids;
}

void DatasetManifest::validate() const {
  std::set<std::string> seen;
  for (const auto& [split_name, ids] : splits) {
    for (const auto& id : ids) {
      require(seen.insert(id).second, ErrorCode::InvalidSpec,
              "id '" + id + "' appears in more than one split");
      const ImageRecord& rec = record(id);
      if (split_name == "val" || split_name == "test")
        require(rec.labeled, ErrorCode::InvalidSpec,
                "unlabeled id '" + id + "' assigned to " + split_name);
    }
  }
}

// --- splitting ----------------------------------------------------------------

namespace {

int round_count(double fraction, int n) { return int(std::floor(fraction * n + 0.5)); }

struct Alloc {
  int train = 0, val = 0;
};

Alloc allocate(double train_fraction, double val_fraction, int n) {
  Alloc a;
  a.val = std::clamp(round_count(val_fraction, n), val_fraction > 0 ? 1 : 0, n - 1);
  a.train = std::clamp(round_count(train_fraction, n), 1, n - a.val);
  return a;
}

}  // namespace

SplitReport split_dataset(const DatasetManifest& manifest, SplitMethod method, std::uint64_t seed,
                          double train_fraction, double val_fraction) {
  require(train_fraction >= 0 && val_fraction >= 0 && train_fraction + val_fraction <= 1.0 + 1e-12,
          ErrorCode::BadFractions,
          "train/val fractions must be nonnegative and sum to at most 1");
  require(train_fraction > 0, ErrorCode::BadFractions, "train fraction must be positive");

  std::vector<std::string> labeled = manifest.labeled_ids();
  std::sort(labeled.begin(), labeled.end());
  require(int(labeled.size()) >= 4, ErrorCode::InsufficientLabeled,
          "need at least 4 labeled records, have " + std::to_string(labeled.size()));

  SplitReport report;
  report.method = method;
  report.mu_ul = compute_ratio(manifest);
  report.unlabeled_pool = manifest.unlabeled_ids();
  std::sort(report.unlabeled_pool.begin(), report.unlabeled_pool.end());

  auto& train = report.splits["train"];
  auto& val = report.splits["val"];
  auto& test = report.splits["test"];

  if (method == SplitMethod::kRandomized) {
    Rng rng(seed);
    rng.shuffle(labeled);
    const Alloc a = allocate(train_fraction, val_fraction, int(labeled.size()));
    train.assign(labeled.begin(), labeled.begin() + a.train);
    val.assign(labeled.begin() + a.train, labeled.begin() + a.train + a.val);
    test.assign(labeled.begin() + a.train + a.val, labeled.end());
  } else {
    // group by domain_tag; allocation is proportional per stratum and fully
    // deterministic (ids ascending within each stratum)
    std::map<std::string, std::vector<std::string>> strata;
    for (const auto& id : labeled) strata[manifest.record(id).domain_tag].push_back(id);
    for (const auto& [tag, ids] : strata)
      require(ids.size() >= 2, ErrorCode::InsufficientLabeled,
              "stratum '" + tag + "' has fewer than 2 labeled records");
    for (auto& [tag, ids] : strata) {
      const Alloc a = allocate(train_fraction, val_fraction, int(ids.size()));
      for (int i = 0; i < int(ids.size()); ++i) {
        if (i < a.train)
          train.push_back(ids[std::size_t(i)]);
        else if (i < a.train + a.val)
          val.push_back(ids[std::size_t(i)]);
        else
          test.push_back(ids[std::size_t(i)]);
      }
    }
  }

  for (const auto& [split_name, ids] : report.splits)
    for (const auto& id : ids) report.per_tag_counts[manifest.record(id).domain_tag][split_name]++;
  return report;
}

Ratio compute_ratio(const DatasetManifest& manifest) {
  const int labeled = manifest.n_labeled();
  require(labeled > 0, ErrorCode::DivisionByZero, "manifest has no labeled records");
  return Ratio{manifest.n_unlabeled(), labeled};
}

// --- disk format ---------------------------------------------------------------

std::string split_method_name(SplitMethod method) {
  return method == SplitMethod::kRandomized ? "randomized" : "stratified";
}

SplitMethod split_method_from_name(const std::string& name) {
  if (name == "randomized") return SplitMethod::kRandomized;
  if (name == "stratified") return SplitMethod::kStratified;
  throw Error(ErrorCode::ConfigInvalid, "unknown split method '" + name + "'");
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::PathMissing, "cannot open manifest: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("manifest JSON: ") + e.what());
  }
  DatasetManifest m;
  m.name = doc.value("name", "");
  m.root_dir = fs::path(path).parent_path().string();
  for (const auto& r : doc.at("records")) {
    ImageRecord rec;
    rec.id = r.at("id").get<std::string>();
    rec.width = r.at("width").get<int>();
    rec.height = r.at("height").get<int>();
    if (r.contains("scale") && !r["scale"].is_null()) rec.scale_mm_per_px = r["scale"].get<double>();
    rec.domain_tag = r.value("domain_tag", "");
    rec.labeled = r.value("labeled", false);
    rec.image_path = r.value("image", "");
    rec.mask_path = r.value("mask", "");
    rec.validate();
    m.records.push_back(std::move(rec));
  }
  if (doc.contains("splits"))
    for (const auto& [split_name, ids] : doc["splits"].items())
      m.splits[split_name] = ids.get<std::vector<std::string>>();
  m.validate();
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  nlohmann::json doc;
  doc["name"] = manifest.name;
  doc["records"] = nlohmann::json::array();
  for (const auto& rec : manifest.records) {
    nlohmann::json r;
    r["id"] = rec.id;
    r["width"] = rec.width;
    r["height"] = rec.height;
    if (rec.scale_mm_per_px) r["scale"] = *rec.scale_mm_per_px;
    r["domain_tag"] = rec.domain_tag;
    r["labeled"] = rec.labeled;
    r["image"] = rec.image_path;
    if (!rec.mask_path.empty()) r["mask"] = rec.mask_path;
    doc["records"].push_back(std::move(r));
  }
  for (const auto& [split_name, ids] : manifest.splits) doc["splits"][split_name] = ids;
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoFailure, "cannot write manifest: " + path);
  out << doc.dump(2) << "\n";
}

ImageRgb8 load_record_image(const DatasetManifest& manifest, const ImageRecord& rec) {
  const auto img = read_png_rgb8((fs::path(manifest.root_dir) / rec.image_path).string());
  require(int(img.height()) == rec.height && int(img.width()) == rec.width,
          ErrorCode::ShapeMismatch, "pixels of '" + rec.id + "' do not match recorded size");
  return img;
}

Mask load_record_mask(const DatasetManifest& manifest, const ImageRecord& rec) {
  require(!rec.mask_path.empty(), ErrorCode::PathMissing, "record '" + rec.id + "' has no mask");
  Mask mask(read_png_gray8((fs::path(manifest.root_dir) / rec.mask_path).string()));
  require(int(mask.height()) == rec.height && int(mask.width()) == rec.width,
          ErrorCode::ShapeMismatch, "mask of '" + rec.id + "' does not match recorded size");
  require((mask.labels < std::uint8_t(kNumClasses)).all(), ErrorCode::InvalidSpec,
          "mask of '" + rec.id + "' contains ids outside the taxonomy");
  return mask;
}

}  // namespace fractoseg
