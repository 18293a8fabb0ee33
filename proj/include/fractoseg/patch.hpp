#pragma once

#include <array>
#include <vector>

#include "fractoseg/image.hpp"

namespace fractoseg {

struct SourceRect {
  Eigen::Index row = 0, col = 0, height = 0, width = 0;
};

/// 2x2 tiling of one image. The source rectangles tile the frame exactly with
/// a ceil/floor split at H/2 and W/2; every patch is resized to `patch_size`.
struct PatchGrid {
  Eigen::Index original_height = 0;
  Eigen::Index original_width = 0;
  Eigen::Index patch_height = 512;
  Eigen::Index patch_width = 512;
  std::array<SourceRect, 4> rects;  // row-major: TL, TR, BL, BR
};

PatchGrid make_patch_grid(Eigen::Index height, Eigen::Index width,
                          Eigen::Index patch_height = 512, Eigen::Index patch_width = 512);

struct ImagePatches {
  PatchGrid grid;
  std::array<ImageRgb8, 4> patches;
};

struct MaskPatches {
  PatchGrid grid;
  std::array<Mask, 4> patches;
};

/// Per-patch, per-class score planes (C planes of patch_size each).
using LogitPlanes = std::vector<PlaneF>;

ImagePatches slice(const ImageRgb8& image, Eigen::Index patch_height = 512,
                   Eigen::Index patch_width = 512);
MaskPatches slice(const Mask& mask, Eigen::Index patch_height = 512,
                  Eigen::Index patch_width = 512);

/// Places each patch back into its source rectangle at original resolution.
/// Class maps travel nearest-neighbor; logits bilinear (then argmax outside).
Mask stitch(const PatchGrid& grid, const std::array<Mask, 4>& patches);
LogitPlanes stitch(const PatchGrid& grid, const std::array<LogitPlanes, 4>& patches);

Mask argmax_mask(const LogitPlanes& planes);

}  // namespace fractoseg
