#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fractoseg/image.hpp"
#include "fractoseg/taxonomy.hpp"

namespace fractoseg {

/// Per-image intersection-over-union report. A class absent from both masks
/// carries no IoU (nullopt) and is excluded from the mean; a class absent from
/// the ground truth but predicted anyway scores 0 and drags the mean down.
struct ClassIoUReport {
  std::string id;
  std::array<std::optional<double>, kNumClasses> iou;
  std::array<long long, kNumClasses> n_pixels_truth{};  // per-class ground-truth pixel counts
  int n_classes_truth = 0;
  double miou = 0;
};

/// IoU of class c via exact integer counts; nullopt when absent in both masks.
std::optional<double> iou(const Mask& pred, const Mask& truth, int class_id);

ClassIoUReport miou(const Mask& pred, const Mask& truth);

struct DiceReport {
  std::array<std::optional<double>, kNumClasses> dice;
  double mean = 0;
};

/// Hard-mask Dice = 2|A∩B| / (|A|+|B|) with the same absence rules as IoU.
DiceReport dice_coefficient(const Mask& pred, const Mask& truth);

// --- diagnostics over a set of per-image reports -----------------------------

struct PixelsIouPoint {
  std::string id;
  long long n_pixels = 0;  // 1 encodes "class not present in truth" (log-scale placeholder)
  double iou = 0;
};

struct MiouBucket {
  int n_classes = 0;
  int count = 0;
  double mean = 0, stddev = 0, min = 0, max = 0;
};

struct DiagnosticsReport {
  std::array<std::vector<PixelsIouPoint>, kNumClasses> per_class_points;
  std::vector<MiouBucket> buckets;  // keyed by n_classes present in truth
};

DiagnosticsReport diagnostics(const std::vector<ClassIoUReport>& reports);

void save_diagnostics_csv(const DiagnosticsReport& report, const std::string& points_path,
                          const std::string& buckets_path);

}  // namespace fractoseg
