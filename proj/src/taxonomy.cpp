#include "fractoseg/taxonomy.hpp"

#include <set>

namespace fractoseg {

ClassTaxonomy::ClassTaxonomy(std::vector<std::pair<int, std::string>> classes)
    : classes_(std::move(classes)) {
  require(classes_.size() == kNumClasses, ErrorCode::InvalidSpec,
          "taxonomy must have exactly 7 classes");
  std::set<std::string> names;
  for (int i = 0; i < int(classes_.size()); ++i) {
    require(classes_[std::size_t(i)].first == i, ErrorCode::InvalidSpec,
            "class ids must be contiguous 0..6");
    names.insert(classes_[std::size_t(i)].second);
  }
  require(int(names.size()) == size(), ErrorCode::InvalidSpec, "class names must be unique");
  require(classes_[0].second == "background", ErrorCode::InvalidSpec,
          "class 0 must be background");
}

int ClassTaxonomy::id_of(const std::string& name) const {
  for (const auto& [id, n] : classes_)
    if (n == name) return id;
  throw Error(ErrorCode::UnknownLabel, "no class named '" + name + "'");
}

bool ClassTaxonomy::has_name(const std::string& name) const {
  for (const auto& [id, n] : classes_)
    if (n == name) return true;
  return false;
}

const ClassTaxonomy& canonical_taxonomy() {
  static const ClassTaxonomy taxonomy({
      {0, "background"},
      {1, "side groove"},
      {2, "erosion notch"},
      {3, "fatigue precrack"},
      {4, "ductile fracture"},
      {5, "brittle fracture"},
      {6, "other"},
  });
  return taxonomy;
}

const std::array<Rgb, kNumClasses>& class_palette() {
  static const std::array<Rgb, kNumClasses> palette = {{
      {0, 0, 0},        // background
      {230, 25, 75},    // side groove
      {255, 225, 25},   // erosion notch
      {60, 180, 75},    // fatigue precrack
      {0, 130, 200},    // ductile fracture
      {245, 130, 48},   // brittle fracture
      {145, 30, 180},   // other
  }};
  return palette;
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::DegeneratePolygon: return "DegeneratePolygon";
    case ErrorCode::InsufficientLabeled: return "InsufficientLabeled";
    case ErrorCode::BadFractions: return "BadFractions";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::EmptyImage: return "EmptyImage";
    case ErrorCode::NonFiniteResult: return "NonFiniteResult";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::MissingScore: return "MissingScore";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SpatialSpecInStrong: return "SpatialSpecInStrong";
    case ErrorCode::UnknownStrategy: return "UnknownStrategy";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::NoCrackPixels: return "NoCrackPixels";
    case ErrorCode::DegenerateWidth: return "DegenerateWidth";
    case ErrorCode::FrontNotFound: return "FrontNotFound";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::PathMissing: return "PathMissing";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Error";
}

}  // namespace fractoseg
