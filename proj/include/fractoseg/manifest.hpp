#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fractoseg/common.hpp"
#include "fractoseg/image.hpp"

namespace fractoseg {

/// Metadata for one dataset image. Pixels live on disk and are loaded on
/// demand; `mask_path` is present only for labeled records.
struct ImageRecord {
  std::string id;
  int width = 0;
  int height = 0;
  std::optional<double> scale_mm_per_px;
  std::string domain_tag;  // laboratory + specimen-type descriptor
  bool labeled = false;
  std::string image_path;
  std::string mask_path;

  void validate() const {
    require(height >= 64 && width >= 64, ErrorCode::InvalidSpec,
            "image '" + id + "' smaller than 64x64");
    if (scale_mm_per_px)
      require(*scale_mm_per_px > 0 && std::isfinite(*scale_mm_per_px), ErrorCode::InvalidSpec,
              "image '" + id + "' has non-positive scale");
  }
};

enum class SplitMethod { kRandomized, kStratified };

struct Ratio {
  long long num = 0;
  long long den = 1;

  double value() const { return double(num) / double(den); }
  /// Decimal rendering rounded half-up, at least two places.
  std::string str(int decimals = 2) const;
};

struct DatasetManifest {
  std::string name;
  std::string root_dir;  // paths inside records are relative to this
  std::vector<ImageRecord> records;
  std::map<std::string, std::vector<std::string>> splits;  // train / val / test id lists

  int total() const { return int(records.size()); }
  int n_labeled() const;
  int n_unlabeled() const;
  const ImageRecord& record(const std::string& id) const;
  bool has_record(const std::string& id) const;
  std::vector<std::string> labeled_ids() const;
  std::vector<std::string> unlabeled_ids() const;

  /// Split lists disjoint, unlabeled ids never in val/test, ids resolvable.
  void validate() const;
};

struct SplitReport {
  SplitMethod method = SplitMethod::kRandomized;
  Ratio mu_ul;  // N_unlabeled / N_labeled
  // per-domain_tag counts per split name
  std::map<std::string, std::map<std::string, int>> per_tag_counts;
  std::map<std::string, std::vector<std::string>> splits;
  std::vector<std::string> unlabeled_pool;
};

/// Partitions labeled ids into train/val(/test remainder).
/// randomized: uniform shuffle under `seed`. stratified: per-domain_tag
/// proportional allocation with ties broken by ascending id. Unlabeled ids all
/// go to the unsupervised pool.
SplitReport split_dataset(const DatasetManifest& manifest, SplitMethod method, std::uint64_t seed,
                          double train_fraction, double val_fraction);

/// mu_u/l = N_unlabeled / N_labeled as an exact rational.
Ratio compute_ratio(const DatasetManifest& manifest);

// --- disk format -------------------------------------------------------------

DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& manifest, const std::string& path);

ImageRgb8 load_record_image(const DatasetManifest& manifest, const ImageRecord& rec);
Mask load_record_mask(const DatasetManifest& manifest, const ImageRecord& rec);

std::string split_method_name(SplitMethod method);
SplitMethod split_method_from_name(const std::string& name);

}  // namespace fractoseg
