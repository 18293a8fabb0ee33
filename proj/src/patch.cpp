#include "fractoseg/patch.hpp"

namespace fractoseg {

PatchGrid make_patch_grid(Eigen::Index height, Eigen::Index width, Eigen::Index patch_height,
                          Eigen::Index patch_width) {
  require(height >= 2 && width >= 2, ErrorCode::TooSmall, "patching needs at least 2x2 input");
  require(patch_height >= 1 && patch_width >= 1, ErrorCode::ConfigInvalid,
          "patch size must be positive");
  PatchGrid grid;
  grid.original_height = height;
  grid.original_width = width;
  grid.patch_height = patch_height;
  grid.patch_width = patch_width;
  const Eigen::Index top = (height + 1) / 2;  // ceil goes first
  const Eigen::Index left = (width + 1) / 2;
  const Eigen::Index row_off[2] = {0, top};
  const Eigen::Index row_len[2] = {top, height - top};
  const Eigen::Index col_off[2] = {0, left};
  const Eigen::Index col_len[2] = {left, width - left};
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      grid.rects[std::size_t(r * 2 + c)] = {row_off[r], col_off[c], row_len[r], col_len[c]};
  return grid;
}

ImagePatches slice(const ImageRgb8& image, Eigen::Index patch_height, Eigen::Index patch_width) {
  ImagePatches out;
  out.grid = make_patch_grid(image.height(), image.width(), patch_height, patch_width);
  for (int i = 0; i < 4; ++i) {
    const SourceRect& r = out.grid.rects[std::size_t(i)];
    for (int c = 0; c < 3; ++c) {
      PlaneU8 crop = image.ch[std::size_t(c)].block(r.row, r.col, r.height, r.width);
      out.patches[std::size_t(i)].ch[std::size_t(c)] =
          resize_bilinear<std::uint8_t>(crop, patch_height, patch_width);
    }
  }
  return out;
}

MaskPatches slice(const Mask& mask, Eigen::Index patch_height, Eigen::Index patch_width) {
  MaskPatches out;
  out.grid = make_patch_grid(mask.height(), mask.width(), patch_height, patch_width);
  for (int i = 0; i < 4; ++i) {
    const SourceRect& r = out.grid.rects[std::size_t(i)];
    PlaneU8 crop = mask.labels.block(r.row, r.col, r.height, r.width);
    out.patches[std::size_t(i)] = Mask(resize_nearest<std::uint8_t>(crop, patch_height, patch_width));
  }
  return out;
}

Mask stitch(const PatchGrid& grid, const std::array<Mask, 4>& patches) {
  Mask full(grid.original_height, grid.original_width);
  for (int i = 0; i < 4; ++i) {
    const Mask& p = patches[std::size_t(i)];
    require(p.height() == grid.patch_height && p.width() == grid.patch_width,
            ErrorCode::GridMismatch, "patch " + std::to_string(i) + " does not match the grid");
    const SourceRect& r = grid.rects[std::size_t(i)];
    full.labels.block(r.row, r.col, r.height, r.width) =
        resize_nearest<std::uint8_t>(p.labels, r.height, r.width);
  }
  return full;
}

LogitPlanes stitch(const PatchGrid& grid, const std::array<LogitPlanes, 4>& patches) {
  const std::size_t n_classes = patches[0].size();
  require(n_classes > 0, ErrorCode::GridMismatch, "no logit planes to stitch");
  LogitPlanes full(n_classes);
  for (auto& plane : full) plane = PlaneF::Zero(grid.original_height, grid.original_width);
  for (int i = 0; i < 4; ++i) {
    require(patches[std::size_t(i)].size() == n_classes, ErrorCode::GridMismatch,
            "patch " + std::to_string(i) + " has a different class count");
    const SourceRect& r = grid.rects[std::size_t(i)];
    for (std::size_t c = 0; c < n_classes; ++c) {
      const PlaneF& p = patches[std::size_t(i)][c];
      require(p.rows() == grid.patch_height && p.cols() == grid.patch_width,
              ErrorCode::GridMismatch, "patch " + std::to_string(i) + " does not match the grid");
      full[c].block(r.row, r.col, r.height, r.width) = resize_bilinear<float>(p, r.height, r.width);
    }
  }
  return full;
}

Mask argmax_mask(const LogitPlanes& planes) {
  require(!planes.empty(), ErrorCode::EmptyInput, "argmax over zero planes");
  Mask m(planes[0].rows(), planes[0].cols());
  for (Eigen::Index y = 0; y < m.height(); ++y) {
    for (Eigen::Index x = 0; x < m.width(); ++x) {
      int best = 0;
      float best_v = planes[0](y, x);
      for (std::size_t c = 1; c < planes.size(); ++c) {
        if (planes[c](y, x) > best_v) {
          best_v = planes[c](y, x);
          best = int(c);
        }
      }
      m.labels(y, x) = std::uint8_t(best);
    }
  }
  return m;
}

}  // namespace fractoseg
