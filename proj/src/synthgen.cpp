#include "fractoseg/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "fractoseg/png_io.hpp"
#include "fractoseg/rng.hpp"
#include "json.hpp"

namespace fractoseg {

const char* specimen_kind_name(SpecimenKind kind) {
  switch (kind) {
    case SpecimenKind::kSEB: return "SEB";
    case SpecimenKind::kCT: return "CT";
    case SpecimenKind::kMiniCT: return "miniCT";
    case SpecimenKind::kChevron: return "chevron";
  }
  return "?";
}

const char* background_style_name(BackgroundStyle style) {
  switch (style) {
    case BackgroundStyle::kFlat: return "flat";
    case BackgroundStyle::kGradient: return "gradient";
    case BackgroundStyle::kCluttered: return "cluttered";
  }
  return "?";
}

void SynthSpec::validate() const {
  require(height >= 64 && width >= 64, ErrorCode::InvalidSpec, "synthetic image below 64x64");
  require(notch_depth_px >= 2 && precrack_depth_px >= 2, ErrorCode::InvalidSpec,
          "bands must be at least 2 px deep");
  require(notch_depth_px + precrack_depth_px + ductile_depth_px + 2 * int(front_amplitude_px) +
                  24 <=
              height,
          ErrorCode::InvalidSpec, "band depths exceed the image height");
  require(side_groove_px >= 0 && scale_mm_per_px > 0, ErrorCode::InvalidSpec,
          "bad groove width or scale");
  require(texture_noise >= 0 && texture_noise <= 0.5, ErrorCode::InvalidSpec,
          "texture_noise outside [0, 0.5]");
}

namespace {

struct ClassColor {
  double r, g, b;
};

ClassColor base_color(int class_id) {
  switch (class_id) {
    case kSideGroove: return {72, 72, 78};
    case kErosionNotch: return {98, 93, 88};
    case kFatiguePrecrack: return {152, 150, 146};
    case kDuctileFracture: return {108, 88, 72};
    case kBrittleFracture: return {186, 186, 192};
    case kOther: return {132, 122, 100};
    default: return {40, 70, 160};  // flat background
  }
}

/// Low-frequency value noise: a coarse Gaussian grid upsampled bilinearly.
PlaneD blob_noise(int h, int w, int cell, double amplitude, Rng& rng) {
  const int gh = std::max(2, h / cell), gw = std::max(2, w / cell);
  PlaneD grid(gh, gw);
  for (int y = 0; y < gh; ++y)
    for (int x = 0; x < gw; ++x) grid(y, x) = amplitude * rng.normal();
  return resize_bilinear<double>(grid, h, w);
}

}  // namespace

GeneratedSample generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int h = spec.height, w = spec.width;
  const bool chevron = spec.kind == SpecimenKind::kChevron;
  const int groove = chevron ? 0 : spec.side_groove_px;

  // specimen placement; mini-CT sits smaller in the frame. Margins shrink
  // when the configured bands would not otherwise fit above a brittle rest.
  const double shrink = spec.kind == SpecimenKind::kMiniCT ? 0.16 : 0.09;
  const int worst_bands = int(1.35 * spec.notch_depth_px) + spec.precrack_depth_px +
                          int(spec.front_amplitude_px) + spec.ductile_depth_px + 14;
  int mr = int(h * (shrink + 0.02 * rng.uniform()));
  mr = std::max(2, std::min(mr, (h - worst_bands) / 2));
  const int mc = int(w * (shrink + 0.02 * rng.uniform()));
  const int r0 = mr, r1 = h - mr;
  const int c0 = mc, c1 = w - mc;
  const int band_c0 = c0 + groove, band_c1 = c1 - groove;
  require(band_c1 - band_c0 >= 8, ErrorCode::InvalidSpec, "fracture band too narrow");

  const bool has_other = spec.kind == SpecimenKind::kCT || spec.kind == SpecimenKind::kMiniCT ||
                         chevron;
  const int other_depth = has_other ? 6 + int(4 * rng.uniform()) : 0;

  Mask mask(h, w);
  const int notch_r0 = r0 + other_depth;
  const double band_mid = 0.5 * double(band_c0 + band_c1 - 1);
  const double band_half = 0.5 * double(band_c1 - band_c0);
  const double phase = rng.uniform(0, 2 * M_PI);

  // per-column band depths; the chevron notch deepens toward the center
  std::vector<int> notch_depth(std::size_t(w), 0), crack_end(std::size_t(w), 0);
  for (int x = band_c0; x < band_c1; ++x) {
    int nd = spec.notch_depth_px;
    if (chevron)
      nd += int(std::lround(0.35 * spec.notch_depth_px *
                            (1.0 - std::abs(double(x) - band_mid) / band_half)));
    int pd = spec.precrack_depth_px;
    if (spec.front_amplitude_px > 0)
      pd += int(std::lround(spec.front_amplitude_px *
                            std::sin(phase + 2.0 * M_PI * spec.front_waves *
                                              (double(x) - band_c0) / (2.0 * band_half))));
    pd = std::max(2, pd);
    notch_depth[std::size_t(x)] = nd;
    crack_end[std::size_t(x)] = notch_r0 + nd + pd;
  }

  for (int y = r0; y < r1; ++y) {
    for (int x = c0; x < c1; ++x) {
      std::uint8_t cls;
      if (x < band_c0 || x >= band_c1) {
        cls = kSideGroove;
      } else if (y < notch_r0) {
        cls = kOther;
      } else if (y < notch_r0 + notch_depth[std::size_t(x)]) {
        cls = kErosionNotch;
      } else if (y < crack_end[std::size_t(x)]) {
        cls = kFatiguePrecrack;
      } else if (y < crack_end[std::size_t(x)] + spec.ductile_depth_px) {
        cls = kDuctileFracture;
      } else {
        cls = kBrittleFracture;
      }
      mask.labels(y, x) = cls;
    }
  }

  // exact ground truth: crack area over the fracture-band width
  long long crack_area = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (mask.labels(y, x) == kErosionNotch || mask.labels(y, x) == kFatiguePrecrack)
        ++crack_area;
  const double b_n_px = double(band_c1 - band_c0);

  GeneratedSample out;
  out.mask = mask;
  out.true_a0_px = double(crack_area) / b_n_px;
  out.true_a0_mm = out.true_a0_px * spec.scale_mm_per_px;
  out.scale_mm_per_px = spec.scale_mm_per_px;
  out.geometry.width_mm = double(r1 - r0) * spec.scale_mm_per_px;
  out.geometry.thickness_mm = double(c1 - c0) * spec.scale_mm_per_px;
  out.geometry.net_thickness_mm = b_n_px * spec.scale_mm_per_px;
  out.geometry.starter_notch_mm = double(spec.notch_depth_px) * spec.scale_mm_per_px;
  out.geometry.orientation = CrackOrientation::kRows;
  out.domain_tag = specimen_kind_name(spec.kind);

  // --- render ----------------------------------------------------------------
  ImageRgb8 img(h, w);
  const PlaneD blobs = blob_noise(h, w, 8, 18.0, rng);
  Rng bg_rng(rng.next_u64());

  double bg_r = 40, bg_g = 70, bg_b = 160;
  if (spec.background != BackgroundStyle::kFlat) {
    bg_r = bg_g = bg_b = 90 + 60 * bg_rng.uniform();
  }
  std::vector<std::array<double, 7>> clutter;  // x0,y0,x1,y1,r,g,b
  if (spec.background == BackgroundStyle::kCluttered) {
    const int boxes = 3 + bg_rng.uniform_int(0, 4);
    for (int i = 0; i < boxes; ++i) {
      const double x0 = bg_rng.uniform(0, w), y0 = bg_rng.uniform(0, h);
      clutter.push_back({x0, y0, x0 + bg_rng.uniform(8, w * 0.5), y0 + bg_rng.uniform(8, h * 0.5),
                         bg_rng.uniform(30, 220), bg_rng.uniform(30, 220),
                         bg_rng.uniform(30, 220)});
    }
  }

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint8_t cls = mask.labels(y, x);
      ClassColor col;
      if (cls == kBackground) {
        col = {bg_r, bg_g, bg_b};
        if (spec.background == BackgroundStyle::kGradient)
          col = {col.r + 60.0 * y / h, col.g + 60.0 * y / h, col.b + 60.0 * y / h};
        for (const auto& box : clutter)
          if (x >= box[0] && x < box[2] && y >= box[1] && y < box[3])
            col = {box[4], box[5], box[6]};
      } else {
        col = base_color(cls);
        // machining stripes on the erosion notch, speckle on the fracture
        if (cls == kErosionNotch && (y % 3 == 0)) {
          col.r -= 18;
          col.g -= 18;
          col.b -= 18;
        }
        if (cls == kBrittleFracture || cls == kDuctileFracture) {
          col.r += blobs(y, x);
          col.g += blobs(y, x);
          col.b += blobs(y, x);
        }
      }
      const double n = spec.texture_noise * 255.0 * rng.normal();
      const double tint_r = 1.0 + spec.hue_shift, tint_b = 1.0 - spec.hue_shift;
      img.ch[0](y, x) = clamp_u8(spec.lighting_scale * tint_r * (col.r + n));
      img.ch[1](y, x) = clamp_u8(spec.lighting_scale * (col.g + n));
      img.ch[2](y, x) = clamp_u8(spec.lighting_scale * tint_b * (col.b + n));
    }
  }

  // artifacts perturb the image only; labels stay exact
  if (spec.stain) {
    const double cx = rng.uniform(c0, c1), cy = rng.uniform(r0, r1);
    const double rx = rng.uniform(5, 14), ry = rng.uniform(4, 10);
    const double fr = rng.uniform(0.6, 1.3), fg = rng.uniform(0.6, 1.3), fb = rng.uniform(0.6, 1.3);
    for (int y = std::max(0, int(cy - ry)); y < std::min(h, int(cy + ry) + 1); ++y)
      for (int x = std::max(0, int(cx - rx)); x < std::min(w, int(cx + rx) + 1); ++x) {
        const double dx = (x - cx) / rx, dy = (y - cy) / ry;
        if (dx * dx + dy * dy > 1.0) continue;
        img.ch[0](y, x) = clamp_u8(img.ch[0](y, x) * fr);
        img.ch[1](y, x) = clamp_u8(img.ch[1](y, x) * fg);
        img.ch[2](y, x) = clamp_u8(img.ch[2](y, x) * fb);
      }
  }
  if (spec.engraving) {
    const int n_marks = 1 + rng.uniform_int(0, 2);
    for (int m = 0; m < n_marks; ++m) {
      const int len = 4 + rng.uniform_int(0, 8);
      const int yy = rng.uniform_int(0, h - 2);
      const int xx = rng.uniform_int(0, std::max(1, w - len - 1));
      for (int k = 0; k < len; ++k)
        for (int c = 0; c < 3; ++c)
          img.ch[std::size_t(c)](yy, xx + k) =
              clamp_u8(img.ch[std::size_t(c)](yy, xx + k) * 0.45);
    }
  }
  if (spec.scratch) {
    const double x0 = rng.uniform(0, w), y0 = rng.uniform(0, h);
    const double angle = rng.uniform(0, M_PI);
    const double len = rng.uniform(w * 0.3, w * 0.9);
    for (double t = 0; t < len; t += 0.5) {
      const int x = int(x0 + t * std::cos(angle)), y = int(y0 + t * std::sin(angle));
      if (x < 0 || y < 0 || x >= w || y >= h) continue;
      for (int c = 0; c < 3; ++c)
        img.ch[std::size_t(c)](y, x) = clamp_u8(img.ch[std::size_t(c)](y, x) + 70.0);
    }
  }

  out.image = std::move(img);
  return out;
}

// --- dataset profiles ----------------------------------------------------------------

SynthProfile profile_from_name(const std::string& name) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
  if (n == "hom" || n == "hom-like") return SynthProfile::kHomLike;
  if (n == "het" || n == "het-like") return SynthProfile::kHetLike;
  if (n == "har" || n == "har-like") return SynthProfile::kHarLike;
  throw Error(ErrorCode::InvalidProfile, "unknown profile '" + name + "'");
}

const char* profile_name(SynthProfile profile) {
  switch (profile) {
    case SynthProfile::kHomLike: return "HOM";
    case SynthProfile::kHetLike: return "HET";
    case SynthProfile::kHarLike: return "HAR";
  }
  return "?";
}

namespace {

SynthSpec sample_spec(SynthProfile profile, int height, int width, Rng& rng) {
  SynthSpec s;
  s.height = height;
  s.width = width;
  // band depths scale with the frame so every profile works from 64 px up
  const double hh = double(height);
  auto depth = [&](double lo, double hi) { return std::max(2, int(hh * rng.uniform(lo, hi))); };
  switch (profile) {
    case SynthProfile::kHomLike: {
      s.kind = SpecimenKind::kSEB;
      s.background = BackgroundStyle::kFlat;
      s.lighting_scale = rng.uniform(0.95, 1.05);
      s.hue_shift = 0.0;
      s.texture_noise = rng.uniform(0.03, 0.05);
      s.notch_depth_px = depth(0.11, 0.14);
      s.precrack_depth_px = depth(0.14, 0.19);
      s.front_amplitude_px = hh * rng.uniform(0.0, 0.016);
      s.side_groove_px = std::max(2, int(hh * rng.uniform(0.03, 0.05)));
      break;
    }
    case SynthProfile::kHetLike: {
      const SpecimenKind kinds[4] = {SpecimenKind::kSEB, SpecimenKind::kCT, SpecimenKind::kMiniCT,
                                     SpecimenKind::kChevron};
      const BackgroundStyle styles[3] = {BackgroundStyle::kFlat, BackgroundStyle::kGradient,
                                         BackgroundStyle::kCluttered};
      s.kind = kinds[rng.uniform_int(0, 3)];
      s.background = styles[rng.uniform_int(0, 2)];
      s.lighting_scale = rng.uniform(0.55, 1.45);
      s.hue_shift = rng.uniform(-0.35, 0.35);
      s.texture_noise = rng.uniform(0.03, 0.09);
      s.notch_depth_px = depth(0.08, 0.16);
      s.precrack_depth_px = depth(0.11, 0.20);
      s.front_amplitude_px = hh * rng.uniform(0.0, 0.035);
      s.front_waves = rng.uniform_int(1, 2);
      s.side_groove_px = int(hh * rng.uniform(0.0, 0.06));
      s.stain = rng.bernoulli(0.4);
      s.engraving = rng.bernoulli(0.4);
      s.scratch = rng.bernoulli(0.3);
      break;
    }
    case SynthProfile::kHarLike: {
      s.kind = rng.bernoulli(0.5) ? SpecimenKind::kSEB : SpecimenKind::kCT;
      s.background =
          rng.bernoulli(0.5) ? BackgroundStyle::kFlat : BackgroundStyle::kGradient;
      s.lighting_scale = rng.uniform(0.8, 1.2);
      s.hue_shift = rng.uniform(-0.12, 0.12);
      s.texture_noise = rng.uniform(0.03, 0.06);
      s.notch_depth_px = depth(0.09, 0.14);
      s.precrack_depth_px = depth(0.12, 0.19);
      s.front_amplitude_px = hh * rng.uniform(0.0, 0.023);
      s.side_groove_px = std::max(2, int(hh * rng.uniform(0.02, 0.05)));
      s.stain = rng.bernoulli(0.15);
      break;
    }
  }
  s.ductile_depth_px = depth(0.08, 0.11);
  return s;
}

}  // namespace

GeneratedDataset generate_dataset(const GenerateDatasetOptions& options) {
  require(options.n >= 4, ErrorCode::InvalidSpec, "need at least 4 images");
  require(options.mu_target >= 0, ErrorCode::InvalidSpec, "mu target must be >= 0");

  GeneratedDataset out;
  out.manifest.name =
      options.name.empty() ? profile_name(options.profile) : options.name;

  const int n_labeled =
      options.all_labeled
          ? options.n
          : std::max(1, int(std::lround(double(options.n) / (1.0 + options.mu_target))));

  // labeled records rotate through the profile's specimen kinds in pairs, so
  // every labeled stratum is usable for stratified validation selection
  std::vector<SpecimenKind> kinds;
  switch (options.profile) {
    case SynthProfile::kHomLike: kinds = {SpecimenKind::kSEB}; break;
    case SynthProfile::kHetLike:
      kinds = {SpecimenKind::kSEB, SpecimenKind::kCT, SpecimenKind::kMiniCT,
               SpecimenKind::kChevron};
      break;
    case SynthProfile::kHarLike: kinds = {SpecimenKind::kSEB, SpecimenKind::kCT}; break;
  }

  for (int i = 0; i < options.n; ++i) {
    Rng sampler = derive_rng(options.seed, 0, std::uint64_t(i), 100);
    SynthSpec spec = sample_spec(options.profile, options.height, options.width, sampler);
    if (i < n_labeled) spec.kind = kinds[std::size_t(i / 2) % kinds.size()];
    spec.seed = derive_rng(options.seed, 1, std::uint64_t(i), 101).next_u64();
    GeneratedSample sample = generate(spec);

    char idbuf[64];
    std::snprintf(idbuf, sizeof(idbuf), "%s-%04llu-%03d", out.manifest.name.c_str(),
                  (unsigned long long)(options.seed % 10000), i);
    sample.id = idbuf;

    ImageRecord rec;
    rec.id = sample.id;
    rec.width = options.width;
    rec.height = options.height;
    rec.scale_mm_per_px = sample.scale_mm_per_px;
    rec.domain_tag = sample.domain_tag;
    rec.labeled = i < n_labeled;
    out.manifest.records.push_back(rec);
    out.samples.push_back(std::move(sample));
  }
  return out;
}

void save_dataset(GeneratedDataset& dataset, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "images");
  fs::create_directories(fs::path(dir) / "masks");
  fs::create_directories(fs::path(dir) / "meta");

  dataset.manifest.root_dir = dir;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    GeneratedSample& s = dataset.samples[i];
    ImageRecord& rec = dataset.manifest.records[i];
    rec.image_path = "images/" + s.id + ".png";
    rec.mask_path = "masks/" + s.id + ".png";
    write_png_rgb8((fs::path(dir) / rec.image_path).string(), s.image);
    write_png_gray8((fs::path(dir) / rec.mask_path).string(), s.mask.labels);

    nlohmann::json meta;
    meta["id"] = s.id;
    meta["scale_mm_per_px"] = s.scale_mm_per_px;
    meta["domain_tag"] = s.domain_tag;
    meta["reference_a0_mm"] = s.true_a0_mm;
    meta["geometry"] = {{"W_mm", s.geometry.width_mm},
                        {"B_mm", s.geometry.thickness_mm},
                        {"B_N_mm", *s.geometry.net_thickness_mm},
                        {"a_k_mm", *s.geometry.starter_notch_mm},
                        {"orientation", "rows"}};
    std::ofstream metaf((fs::path(dir) / "meta" / (s.id + ".json")).string());
    require(metaf.good(), ErrorCode::IoFailure, "cannot write metadata for " + s.id);
    metaf << meta.dump(2) << "\n";
  }
  save_manifest(dataset.manifest, (fs::path(dir) / "manifest.json").string());
}

}  // namespace fractoseg
