// fractoseg: dataset generation, SSIM analysis, split selection, training,
// strategy sweeps, inference, evaluation, and crack-size measurement from one
// binary. Every command writes its outputs plus a resolved_config.json into
// the --out directory; re-running from that copy reproduces the run.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "fractoseg/annotation.hpp"
#include "fractoseg/manifest.hpp"
#include "fractoseg/measure.hpp"
#include "fractoseg/metrics.hpp"
#include "fractoseg/patch.hpp"
#include "fractoseg/plot.hpp"
#include "fractoseg/png_io.hpp"
#include "fractoseg/ssim.hpp"
#include "fractoseg/synthgen.hpp"
#include "fractoseg/trainer.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace fractoseg;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitPath = 3;
constexpr int kExitRuntime = 4;

void write_resolved_config(const std::string& out_dir, const json& doc) {
  fs::create_directories(out_dir);
  std::ofstream f(fs::path(out_dir) / "resolved_config.json");
  f << doc.dump(2) << "\n";
}

void check_device(const std::string& device) {
  if (device == "cpu") return;
  throw Error(ErrorCode::ConfigInvalid,
              "device '" + device + "' is not available in this build (cpu only)");
}

std::vector<std::string> split_ids(const DatasetManifest& m, const std::string& name) {
  auto it = m.splits.find(name);
  require(it != m.splits.end() && !it->second.empty(), ErrorCode::EmptyDataset,
          "manifest '" + m.name + "' has no '" + name + "' split; run the split command first");
  return it->second;
}

struct RunConfig {
  std::string dataset;
  std::string eval_dataset;
  TrainerConfig trainer;
  json raw;

  static RunConfig load(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::PathMissing, "cannot open config: " + path);
    json doc;
    try {
      in >> doc;
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::ConfigInvalid, std::string("run config JSON: ") + e.what());
    }
    const std::set<std::string> known = {"dataset", "eval_dataset", "trainer"};
    for (const auto& [key, value] : doc.items()) {
      (void)value;
      require(known.count(key) > 0, ErrorCode::ConfigInvalid, "unknown config key '" + key + "'");
    }
    RunConfig cfg;
    cfg.dataset = doc.value("dataset", "");
    require(!cfg.dataset.empty(), ErrorCode::ConfigInvalid, "config needs a 'dataset' path");
    cfg.eval_dataset = doc.value("eval_dataset", "");
    cfg.trainer = TrainerConfig::from_json(doc.value("trainer", json::object()).dump());
    cfg.raw = doc;
    // paths resolve relative to the config file location
    const fs::path base = fs::path(path).parent_path();
    if (!fs::path(cfg.dataset).is_absolute()) cfg.dataset = (base / cfg.dataset).string();
    if (!cfg.eval_dataset.empty() && !fs::path(cfg.eval_dataset).is_absolute())
      cfg.eval_dataset = (base / cfg.eval_dataset).string();
    require(fs::exists(cfg.dataset), ErrorCode::PathMissing,
            "dataset manifest not found: " + cfg.dataset);
    return cfg;
  }

  json resolved() const {
    json doc = raw;
    doc["dataset"] = dataset;
    if (!eval_dataset.empty()) doc["eval_dataset"] = eval_dataset;
    doc["trainer"] = json::parse(trainer.to_json());
    return doc;
  }
};

TrainData assemble_train_data(const DatasetManifest& manifest, const TrainerConfig& cfg) {
  TrainData data;
  require(cfg.model.input_height == cfg.model.input_width, ErrorCode::ConfigInvalid,
          "model input must be square to match the patch grid");
  const int patch = cfg.model.input_height;
  data.labeled_train = load_patch_samples(manifest, split_ids(manifest, "train"), true, patch);
  data.val = load_patch_samples(manifest, split_ids(manifest, "val"), true, patch);
  if (cfg.mode == TrainMode::kSemiSupervised)
    data.unlabeled = load_patch_samples(manifest, manifest.unlabeled_ids(), false, patch);
  return data;
}

struct EvalInputs {
  std::vector<ImageRgb8> images;
  std::vector<Mask> truths;
  std::vector<std::string> ids;
};

EvalInputs load_eval_split(const DatasetManifest& manifest, const std::string& split) {
  EvalInputs e;
  for (const auto& id : split_ids(manifest, split)) {
    const ImageRecord& rec = manifest.record(id);
    e.images.push_back(load_record_image(manifest, rec));
    e.truths.push_back(load_record_mask(manifest, rec));
    e.ids.push_back(id);
  }
  return e;
}

void save_eval_outputs(const std::vector<ClassIoUReport>& reports, const std::string& out_dir) {
  std::ofstream csv(fs::path(out_dir) / "per_image_metrics.csv");
  csv << "id";
  for (int c = 0; c < kNumClasses; ++c) csv << ",iou_" << canonical_taxonomy().name(c);
  csv << ",miou,n_classes\n";
  csv.precision(6);
  double mean = 0;
  for (const auto& r : reports) {
    csv << r.id;
    for (int c = 0; c < kNumClasses; ++c) {
      csv << ",";
      if (r.iou[std::size_t(c)]) csv << *r.iou[std::size_t(c)];
    }
    csv << "," << r.miou << "," << r.n_classes_truth << "\n";
    mean += r.miou;
  }
  mean /= double(reports.size());

  json summary;
  summary["n_images"] = reports.size();
  summary["mean_miou"] = mean;
  std::ofstream js(fs::path(out_dir) / "metrics_summary.json");
  js << summary.dump(2) << "\n";

  const DiagnosticsReport diag = diagnostics(reports);
  save_diagnostics_csv(diag, (fs::path(out_dir) / "diagnostics_points.csv").string(),
                       (fs::path(out_dir) / "diagnostics_buckets.csv").string());

  // n_pixels vs IoU per class (log abscissa), one series per class
  std::vector<ScatterSeries> series;
  const auto& palette = class_palette();
  for (int c = 0; c < kNumClasses; ++c) {
    ScatterSeries s;
    s.color = palette[std::size_t(c)];
    for (const auto& p : diag.per_class_points[std::size_t(c)]) {
      s.x.push_back(double(p.n_pixels));
      s.y.push_back(p.iou);
    }
    if (!s.x.empty()) series.push_back(std::move(s));
  }
  ScatterOptions opt;
  opt.log_x = true;
  save_scatter_png(series, (fs::path(out_dir) / "n_pixels_vs_iou.png").string(), opt);

  std::vector<std::vector<double>> buckets;
  std::vector<std::string> labels;
  for (const auto& r : reports) {
    const std::string key = std::to_string(r.n_classes_truth);
    auto it = std::find(labels.begin(), labels.end(), key);
    if (it == labels.end()) {
      labels.push_back(key);
      buckets.emplace_back();
      it = labels.end() - 1;
    }
    buckets[std::size_t(it - labels.begin())].push_back(r.miou);
  }
  save_boxplot_png(buckets, labels, (fs::path(out_dir) / "n_classes_vs_miou.png").string());
}

// --- commands -------------------------------------------------------------------

int cmd_gen(const std::string& profile, int n, double mu, std::uint64_t seed, int size,
            bool all_labeled, const std::string& name, const std::string& out) {
  GenerateDatasetOptions opt;
  opt.profile = profile_from_name(profile);
  opt.n = n;
  opt.mu_target = mu;
  opt.seed = seed;
  opt.height = size;
  opt.width = size;
  opt.all_labeled = all_labeled;
  opt.name = name;
  GeneratedDataset dataset = generate_dataset(opt);
  save_dataset(dataset, out);
  write_resolved_config(out, json{{"command", "gen"},
                                  {"profile", profile_name(opt.profile)},
                                  {"n", n},
                                  {"mu_target", mu},
                                  {"seed", seed},
                                  {"size", size},
                                  {"all_labeled", all_labeled}});
  std::cout << "generated " << dataset.manifest.total() << " images ("
            << dataset.manifest.n_labeled() << " labeled / " << dataset.manifest.n_unlabeled()
            << " unlabeled) under " << out << "\n";
  return 0;
}

int cmd_ssim(const std::string& dataset, const std::string& split, int working_size,
             const std::string& out) {
  const DatasetManifest manifest = load_manifest(dataset);
  std::vector<std::string> ids;
  if (split.empty()) {
    for (const auto& r : manifest.records) ids.push_back(r.id);
  } else {
    ids = split_ids(manifest, split);
  }
  require(ids.size() >= 2, ErrorCode::EmptyDataset, "need at least 2 images for SSIM");

  std::vector<ImageRgb8> images;
  for (const auto& id : ids) images.push_back(load_record_image(manifest, manifest.record(id)));

  SsimConfig cfg;
  cfg.working_height = working_size;
  cfg.working_width = working_size;
  const SsimMatrix matrix = ssim_matrix(ids, images, cfg);

  fs::create_directories(out);
  save_matrix_csv(matrix, (fs::path(out) / "ssim_matrix.csv").string());
  save_heatmap_png(matrix.values, (fs::path(out) / "ssim_heatmap.png").string(), 0.0, 1.0);
  save_stats_json(dataset_stats(matrix, SsimSelection::kAllPairs),
                  (fs::path(out) / "ssim_stats_all_pairs.json").string());
  save_stats_json(dataset_stats(matrix, SsimSelection::kVsFirst),
                  (fs::path(out) / "ssim_stats_vs_first.json").string());
  write_resolved_config(out, json{{"command", "ssim"},
                                  {"dataset", fs::absolute(dataset).string()},
                                  {"split", split},
                                  {"working_size", working_size}});
  const SsimStats stats = dataset_stats(matrix, SsimSelection::kAllPairs);
  std::cout << "ssim over " << ids.size() << " images: mu=" << stats.mu
            << " sigma=" << stats.sigma << "\n";
  return 0;
}

int cmd_split(const std::string& dataset, const std::string& method, std::uint64_t seed,
              double train_frac, double val_frac, const std::string& out) {
  DatasetManifest manifest = load_manifest(dataset);
  const SplitReport report =
      split_dataset(manifest, split_method_from_name(method), seed, train_frac, val_frac);
  manifest.splits = report.splits;
  manifest.validate();
  save_manifest(manifest, dataset);  // applied in place

  fs::create_directories(out);
  json doc;
  doc["method"] = method;
  doc["mu_ul"] = report.mu_ul.str();
  doc["splits"] = report.splits;
  doc["unlabeled_pool_size"] = report.unlabeled_pool.size();
  for (const auto& [tag, counts] : report.per_tag_counts) doc["per_tag_counts"][tag] = counts;
  std::ofstream f(fs::path(out) / "split_report.json");
  f << doc.dump(2) << "\n";
  write_resolved_config(out, json{{"command", "split"},
                                  {"dataset", fs::absolute(dataset).string()},
                                  {"method", method},
                                  {"seed", seed},
                                  {"train", train_frac},
                                  {"val", val_frac}});
  std::cout << "split applied: train=" << report.splits.at("train").size()
            << " val=" << report.splits.at("val").size()
            << " test=" << report.splits.at("test").size() << " mu_u/l=" << report.mu_ul.str()
            << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& out,
              std::optional<std::uint64_t> seed_override) {
  RunConfig cfg = RunConfig::load(config_path);
  if (seed_override) cfg.trainer.seed = *seed_override;
  const DatasetManifest manifest = load_manifest(cfg.dataset);
  const TrainData data = assemble_train_data(manifest, cfg.trainer);

  write_resolved_config(out, cfg.resolved());
  const TrainResult result = train(cfg.trainer, data);

  result.log.save_csv((fs::path(out) / "training_log.csv").string());
  result.log.save_json_summary((fs::path(out) / "summary.json").string(), result.best_epoch,
                               result.best_val_loss);
  CheckpointMeta meta;
  meta.epoch = result.best_epoch;
  meta.seed = cfg.trainer.seed;
  meta.best_val_loss = result.best_val_loss;
  save_checkpoint((fs::path(out) / "best.ckpt").string(), *result.model, meta);

  if (!cfg.eval_dataset.empty()) {
    const DatasetManifest eval_manifest = load_manifest(cfg.eval_dataset);
    const EvalInputs e = load_eval_split(eval_manifest, "test");
    const EvalResult ev = evaluate(*result.model, e.images, e.truths, e.ids);
    fs::create_directories(fs::path(out) / "eval");
    save_eval_outputs(ev.reports, (fs::path(out) / "eval").string());
    std::cout << "test mean mIoU: " << ev.mean_miou << "\n";
  }
  std::cout << "best epoch " << result.best_epoch << " (val dice loss " << result.best_val_loss
            << "); checkpoint at " << (fs::path(out) / "best.ckpt").string() << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& strategies,
              const std::string& out) {
  RunConfig cfg = RunConfig::load(config_path);
  const DatasetManifest manifest = load_manifest(cfg.dataset);
  const TrainData data = assemble_train_data(manifest, cfg.trainer);
  const DatasetManifest eval_manifest =
      cfg.eval_dataset.empty() ? manifest : load_manifest(cfg.eval_dataset);
  const EvalInputs e = load_eval_split(eval_manifest, "test");

  write_resolved_config(out, cfg.resolved());
  const SweepReport report = sweep(strategies, cfg.trainer, data, e.images, e.truths, e.ids);
  report.save_csv((fs::path(out) / "sweep_report.csv").string());
  for (const auto& row : report.rows)
    std::cout << row.strategy << ": "
              << (row.ok ? "mIoU " + std::to_string(row.eval.mean_miou) : row.error) << "\n";
  return 0;
}

int cmd_predict(const std::string& checkpoint, const std::string& images, const std::string& out) {
  Checkpoint ckpt = load_checkpoint(checkpoint);
  fs::create_directories(out);

  std::vector<std::pair<std::string, ImageRgb8>> inputs;
  if (fs::is_directory(images)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(images))
      if (entry.path().extension() == ".png") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) inputs.emplace_back(f.stem().string(), read_png_rgb8(f.string()));
  } else {
    const DatasetManifest manifest = load_manifest(images);
    for (const auto& rec : manifest.records)
      inputs.emplace_back(rec.id, load_record_image(manifest, rec));
  }
  require(!inputs.empty(), ErrorCode::EmptyDataset, "no input images found in " + images);

  for (const auto& [id, image] : inputs) {
    const Mask pred = predict_mask(*ckpt.network, image);
    write_png_gray8((fs::path(out) / (id + ".png")).string(), pred.labels);
    write_png_rgb8((fs::path(out) / (id + "_color.png")).string(), colorize_mask(pred));
  }
  write_resolved_config(out, json{{"command", "predict"},
                                  {"checkpoint", fs::absolute(checkpoint).string()},
                                  {"images", fs::absolute(images).string()}});
  std::cout << "wrote " << inputs.size() << " prediction masks to " << out << "\n";
  return 0;
}

int cmd_eval(const std::string& pred_dir, const std::string& truth_dir, const std::string& out) {
  require(fs::is_directory(pred_dir), ErrorCode::PathMissing, "not a directory: " + pred_dir);
  require(fs::is_directory(truth_dir), ErrorCode::PathMissing, "not a directory: " + truth_dir);

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(pred_dir)) {
    const std::string stem = entry.path().stem().string();
    if (entry.path().extension() != ".png" || stem.ends_with("_color")) continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<ClassIoUReport> reports;
  for (const auto& f : files) {
    const fs::path truth_path = fs::path(truth_dir) / f.filename();
    require(fs::exists(truth_path), ErrorCode::PathMissing,
            "no ground truth for " + f.filename().string());
    const Mask pred{read_png_gray8(f.string())};
    const Mask truth{read_png_gray8(truth_path.string())};
    ClassIoUReport rep = miou(pred, truth);
    rep.id = f.stem().string();
    reports.push_back(std::move(rep));
  }
  require(!reports.empty(), ErrorCode::EmptyDataset, "no prediction masks in " + pred_dir);

  fs::create_directories(out);
  save_eval_outputs(reports, out);
  write_resolved_config(out, json{{"command", "eval"},
                                  {"pred", fs::absolute(pred_dir).string()},
                                  {"truth", fs::absolute(truth_dir).string()}});
  double mean = 0;
  for (const auto& r : reports) mean += r.miou;
  std::cout << "evaluated " << reports.size() << " images, mean mIoU " << mean / reports.size()
            << "\n";
  return 0;
}

int cmd_measure(const std::string& pred_dir, const std::string& meta_dir, const std::string& out,
                double band_pct) {
  require(fs::is_directory(pred_dir), ErrorCode::PathMissing, "not a directory: " + pred_dir);
  require(fs::is_directory(meta_dir), ErrorCode::PathMissing, "not a directory: " + meta_dir);
  fs::create_directories(out);

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(pred_dir)) {
    if (entry.path().extension() != ".png" || entry.path().stem().string().ends_with("_color"))
      continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  require(!files.empty(), ErrorCode::EmptyDataset, "no prediction masks in " + pred_dir);

  std::vector<MeasurementPair> aa_pairs;
  std::vector<double> aa_series, fpa_series;
  std::ofstream csv(fs::path(out) / "measurements.csv");
  csv << "id,a0_area_avg_mm,a0_five_point_mm,reference_a0_mm,b_n_px,deviation_mm,deviation_pct\n";
  csv.precision(6);

  for (const auto& f : files) {
    const std::string id = f.stem().string();
    const fs::path meta_path = fs::path(meta_dir) / (id + ".json");
    require(fs::exists(meta_path), ErrorCode::PathMissing,
            "no specimen metadata for " + id + " at " + meta_path.string());
    std::ifstream meta_in(meta_path);
    json meta;
    meta_in >> meta;

    SpecimenGeometry geom;
    const json g = meta.value("geometry", json::object());
    geom.width_mm = g.value("W_mm", 1.0);
    geom.thickness_mm = g.value("B_mm", 0.0);
    if (g.contains("B_N_mm")) geom.net_thickness_mm = g["B_N_mm"].get<double>();
    if (g.contains("a_k_mm")) geom.starter_notch_mm = g["a_k_mm"].get<double>();
    geom.orientation = g.value("orientation", "rows") == "cols" ? CrackOrientation::kCols
                                                                : CrackOrientation::kRows;
    const double scale = meta.value("scale_mm_per_px", 0.0);
    require(scale > 0, ErrorCode::ConfigInvalid, "metadata for " + id + " lacks a scale");

    const Mask pred{read_png_gray8(f.string())};
    const MeasurementResult aa = area_average_a0(pred, geom, scale);

    std::optional<double> fpa_mm;
    try {
      fpa_mm = five_point_a0(pred, geom, scale).a0_mm;
    } catch (const Error&) {
      // no measurable front in this prediction; AA still stands
    }

    csv << id << "," << *aa.a0_mm << ",";
    if (fpa_mm) csv << *fpa_mm;
    csv << ",";
    if (meta.contains("reference_a0_mm")) {
      const double ref = meta["reference_a0_mm"].get<double>();
      aa_pairs.push_back({id, ref, *aa.a0_mm});
      csv << ref << "," << aa.b_n_px << "," << (*aa.a0_mm - ref) << ","
          << 100.0 * (*aa.a0_mm - ref) / ref << "\n";
    } else {
      csv << "," << aa.b_n_px << ",,\n";
    }
    if (fpa_mm) {
      aa_series.push_back(*aa.a0_mm);
      fpa_series.push_back(*fpa_mm);
    }
  }

  json stats_doc;
  if (!aa_pairs.empty()) {
    const MeasurementStats stats = measurement_stats(aa_pairs, band_pct);
    stats_doc["n"] = stats.n;
    stats_doc["delta_mm"] = stats.delta_mm;
    stats_doc["delta_pct"] = stats.delta_pct;
    stats_doc["sigma_mm"] = stats.sigma_mm;
    stats_doc["sigma_pct"] = stats.sigma_pct;
    stats_doc["outliers"] = stats.outliers;

    ScatterSeries s;
    for (const auto& p : aa_pairs) {
      s.x.push_back(p.reference_mm);
      s.y.push_back(p.measured_mm);
    }
    ScatterOptions opt;
    opt.diagonal = true;
    opt.band_pct = band_pct;
    save_scatter_png({s}, (fs::path(out) / "a0_scatter.png").string(), opt);
  }
  if (!aa_series.empty())
    stats_doc["mu_d_aa_vs_5pa_mm"] = mean_pairwise_difference(aa_series, fpa_series);
  std::ofstream js(fs::path(out) / "measurement_stats.json");
  js << stats_doc.dump(2) << "\n";

  write_resolved_config(out, json{{"command", "measure"},
                                  {"pred", fs::absolute(pred_dir).string()},
                                  {"meta", fs::absolute(meta_dir).string()},
                                  {"band_pct", band_pct}});
  std::cout << "measured " << files.size() << " specimens";
  if (stats_doc.contains("delta_pct"))
    std::cout << "; mean deviation " << stats_doc["delta_pct"].get<double>() << " %";
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fracture-surface segmentation toolkit"};
  app.require_subcommand(1);

  std::string device = "cpu";
  app.add_option("--device", device, "compute device (cpu)")->capture_default_str();

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  std::string gen_profile = "het", gen_out, gen_name;
  int gen_n = 20, gen_size = 128;
  double gen_mu = 5.0;
  std::uint64_t gen_seed = 0;
  bool gen_all_labeled = false;
  gen->add_option("--profile", gen_profile, "hom | het | har")->capture_default_str();
  gen->add_option("--n", gen_n, "number of images")->capture_default_str();
  gen->add_option("--mu", gen_mu, "target unlabeled-to-labeled ratio")->capture_default_str();
  gen->add_option("--seed", gen_seed, "rng seed")->capture_default_str();
  gen->add_option("--size", gen_size, "image side length in px")->capture_default_str();
  gen->add_flag("--all-labeled", gen_all_labeled, "label every record (e.g. test sets)");
  gen->add_option("--name", gen_name, "dataset name override");
  gen->add_option("--out", gen_out, "output directory")->required();

  // ssim
  auto* ssim_cmd = app.add_subcommand("ssim", "pairwise SSIM matrix, stats, heatmap");
  std::string ssim_dataset, ssim_split, ssim_out;
  int ssim_working = 256;
  ssim_cmd->add_option("--dataset", ssim_dataset, "manifest.json path")->required();
  ssim_cmd->add_option("--split", ssim_split, "restrict to one split (train/val/test)");
  ssim_cmd->add_option("--working-size", ssim_working, "comparison size")->capture_default_str();
  ssim_cmd->add_option("--out", ssim_out, "output directory")->required();

  // split
  auto* split_cmd = app.add_subcommand("split", "partition labeled records into train/val/test");
  std::string split_dataset_path, split_method = "stratified", split_out;
  std::uint64_t split_seed = 0;
  double split_train = 0.75, split_val = 0.25;
  split_cmd->add_option("--dataset", split_dataset_path, "manifest.json path")->required();
  split_cmd->add_option("--method", split_method, "randomized | stratified")
      ->capture_default_str();
  split_cmd->add_option("--seed", split_seed, "rng seed")->capture_default_str();
  split_cmd->add_option("--train", split_train, "train fraction")->capture_default_str();
  split_cmd->add_option("--val", split_val, "val fraction")->capture_default_str();
  split_cmd->add_option("--out", split_out, "report directory")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "supervised or semi-supervised training");
  std::string train_config, train_out;
  std::uint64_t train_seed = 0;
  bool train_seed_set = false;
  train_cmd->add_option("--config", train_config, "run config JSON")->required();
  train_cmd->add_option("--out", train_out, "output directory")->required();
  train_cmd->add_option("--seed", train_seed, "override the config seed")
      ->each([&train_seed_set](const std::string&) { train_seed_set = true; });

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "train one model per strategy");
  std::string sweep_config, sweep_out;
  std::vector<std::string> sweep_strategies;
  sweep_cmd->add_option("--config", sweep_config, "run config JSON")->required();
  sweep_cmd->add_option("--strategy", sweep_strategies, "strategy names (repeatable)")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--out", sweep_out, "output directory")->required();

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "patch-sliced inference to mask PNGs");
  std::string predict_ckpt, predict_images, predict_out;
  predict_cmd->add_option("--checkpoint", predict_ckpt, "checkpoint path")->required();
  predict_cmd->add_option("--images", predict_images, "manifest.json or a directory of PNGs")
      ->required();
  predict_cmd->add_option("--out", predict_out, "output directory")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "metrics and diagnostics for prediction masks");
  std::string eval_pred, eval_truth, eval_out;
  eval_cmd->add_option("--pred", eval_pred, "directory of predicted masks")->required();
  eval_cmd->add_option("--truth", eval_truth, "directory of ground-truth masks")->required();
  eval_cmd->add_option("--out", eval_out, "output directory")->required();

  // measure
  auto* measure_cmd = app.add_subcommand("measure", "initial crack size from prediction masks");
  std::string measure_pred, measure_meta, measure_out;
  double measure_band = 1.0;
  measure_cmd->add_option("--pred", measure_pred, "directory of predicted masks")->required();
  measure_cmd->add_option("--meta", measure_meta, "directory of specimen metadata JSON")
      ->required();
  measure_cmd->add_option("--band", measure_band, "outlier band in percent")
      ->capture_default_str();
  measure_cmd->add_option("--out", measure_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    check_device(device);
    if (gen->parsed())
      return cmd_gen(gen_profile, gen_n, gen_mu, gen_seed, gen_size, gen_all_labeled, gen_name,
                     gen_out);
    if (ssim_cmd->parsed()) return cmd_ssim(ssim_dataset, ssim_split, ssim_working, ssim_out);
    if (split_cmd->parsed())
      return cmd_split(split_dataset_path, split_method, split_seed, split_train, split_val,
                       split_out);
    if (train_cmd->parsed())
      return cmd_train(train_config, train_out,
                       train_seed_set ? std::optional<std::uint64_t>(train_seed) : std::nullopt);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_config, sweep_strategies, sweep_out);
    if (predict_cmd->parsed()) return cmd_predict(predict_ckpt, predict_images, predict_out);
    if (eval_cmd->parsed()) return cmd_eval(eval_pred, eval_truth, eval_out);
    if (measure_cmd->parsed())
      return cmd_measure(measure_pred, measure_meta, measure_out, measure_band);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::ConfigInvalid:
      case ErrorCode::InvalidProfile:
      case ErrorCode::UnknownStrategy:
      case ErrorCode::BadFractions:
        return kExitConfig;
      case ErrorCode::PathMissing:
        return kExitPath;
      default:
        return kExitRuntime;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
