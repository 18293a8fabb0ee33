#include "fractoseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

namespace fractoseg {

namespace {

struct Counts {
  long long pred = 0, truth = 0, both = 0;
};

std::array<Counts, kNumClasses> count_classes(const Mask& pred, const Mask& truth) {
  require(pred.height() == truth.height() && pred.width() == truth.width(),
          ErrorCode::ShapeMismatch, "pred/truth mask shapes differ");
  std::array<Counts, kNumClasses> counts{};
  const auto* p = pred.labels.data();
  const auto* t = truth.labels.data();
  for (Eigen::Index i = 0; i < pred.labels.size(); ++i) {
    counts[p[i]].pred++;
    counts[t[i]].truth++;
    if (p[i] == t[i]) counts[p[i]].both++;
  }
  return counts;
}

std::optional<double> iou_from_counts(const Counts& c) {
  const long long uni = c.pred + c.truth - c.both;
  if (uni == 0) return std::nullopt;  // absent in both
  return double(c.both) / double(uni);
}

}  // namespace

std::optional<double> iou(const Mask& pred, const Mask& truth, int class_id) {
  require(class_id >= 0 && class_id < kNumClasses, ErrorCode::InvalidSpec, "class id out of range");
  return iou_from_counts(count_classes(pred, truth)[std::size_t(class_id)]);
}

ClassIoUReport miou(const Mask& pred, const Mask& truth) {
  const auto counts = count_classes(pred, truth);
  ClassIoUReport report;
  double sum = 0;
  int considered = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    const Counts& k = counts[std::size_t(c)];
    report.n_pixels_truth[std::size_t(c)] = k.truth;
    if (k.truth > 0) report.n_classes_truth++;
    report.iou[std::size_t(c)] = iou_from_counts(k);
    if (report.iou[std::size_t(c)]) {
      sum += *report.iou[std::size_t(c)];
      considered++;
    }
  }
  require(considered > 0, ErrorCode::EmptyInput, "masks are empty");
  report.miou = sum / double(considered);
  return report;
}

DiceReport dice_coefficient(const Mask& pred, const Mask& truth) {
  const auto counts = count_classes(pred, truth);
  DiceReport report;
  double sum = 0;
  int considered = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    const Counts& k = counts[std::size_t(c)];
    if (k.pred + k.truth == 0) continue;  // absent in both
    report.dice[std::size_t(c)] = 2.0 * double(k.both) / double(k.pred + k.truth);
    sum += *report.dice[std::size_t(c)];
    considered++;
  }
  require(considered > 0, ErrorCode::EmptyInput, "masks are empty");
  report.mean = sum / double(considered);
  return report;
}

DiagnosticsReport diagnostics(const std::vector<ClassIoUReport>& reports) {
  require(!reports.empty(), ErrorCode::EmptyInput, "no per-image reports");
  DiagnosticsReport out;
  std::map<int, std::vector<double>> by_n_classes;
  for (const auto& r : reports) {
    for (int c = 0; c < kNumClasses; ++c) {
      if (!r.iou[std::size_t(c)]) continue;  // absent in both: no point
      PixelsIouPoint p;
      p.id = r.id;
      // absent-in-truth classes sit at abscissa 1 (10^0 on the log scale)
      p.n_pixels = std::max(1LL, r.n_pixels_truth[std::size_t(c)]);
      p.iou = *r.iou[std::size_t(c)];
      out.per_class_points[std::size_t(c)].push_back(std::move(p));
    }
    by_n_classes[r.n_classes_truth].push_back(r.miou);
  }
  for (const auto& [n_classes, values] : by_n_classes) {
    MiouBucket b;
    b.n_classes = n_classes;
    b.count = int(values.size());
    b.min = *std::min_element(values.begin(), values.end());
    b.max = *std::max_element(values.begin(), values.end());
    for (double v : values) b.mean += v;
    b.mean /= double(values.size());
    for (double v : values) b.stddev += (v - b.mean) * (v - b.mean);
    b.stddev = std::sqrt(b.stddev / double(values.size()));
    out.buckets.push_back(b);
  }
  return out;
}

void save_diagnostics_csv(const DiagnosticsReport& report, const std::string& points_path,
                          const std::string& buckets_path) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(points_path).parent_path());
  std::ofstream pts(points_path);
  require(pts.good(), ErrorCode::IoFailure, "cannot write " + points_path);
  pts << "class_id,class_name,image_id,n_pixels,iou\n";
  for (int c = 0; c < kNumClasses; ++c)
    for (const auto& p : report.per_class_points[std::size_t(c)])
      pts << c << "," << canonical_taxonomy().name(c) << "," << p.id << "," << p.n_pixels << ","
          << p.iou << "\n";

  fs::create_directories(fs::path(buckets_path).parent_path());
  std::ofstream bks(buckets_path);
  require(bks.good(), ErrorCode::IoFailure, "cannot write " + buckets_path);
  bks << "n_classes,count,mean,stddev,min,max\n";
  for (const auto& b : report.buckets)
    bks << b.n_classes << "," << b.count << "," << b.mean << "," << b.stddev << "," << b.min << ","
        << b.max << "\n";
}

}  // namespace fractoseg
