#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fractoseg/common.hpp"

namespace fractoseg {

constexpr int kNumClasses = 7;

enum ClassId : std::uint8_t {
  kBackground = 0,
  kSideGroove = 1,
  kErosionNotch = 2,
  kFatiguePrecrack = 3,
  kDuctileFracture = 4,
  kBrittleFracture = 5,
  kOther = 6,
};

/// The fixed 7-class label space. Ids are contiguous 0..6 with background at 0.
class ClassTaxonomy {
 public:
  ClassTaxonomy(std::vector<std::pair<int, std::string>> classes);

  int size() const { return int(classes_.size()); }
  const std::string& name(int id) const { return classes_.at(std::size_t(id)).second; }

  /// Resolves a class name to its id; throws UnknownLabel otherwise.
  int id_of(const std::string& name) const;
  bool has_name(const std::string& name) const;

  const std::vector<std::pair<int, std::string>>& classes() const { return classes_; }

 private:
  std::vector<std::pair<int, std::string>> classes_;
};

/// Canonical order: background, side groove, erosion notch, fatigue precrack,
/// ductile fracture, brittle fracture, other.
const ClassTaxonomy& canonical_taxonomy();

struct Rgb {
  std::uint8_t r, g, b;
};

/// Fixed export palette for class-id masks; see docs/file_formats.md.
const std::array<Rgb, kNumClasses>& class_palette();

}  // namespace fractoseg
