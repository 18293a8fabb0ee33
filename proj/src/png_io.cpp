#include "fractoseg/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <vector>

namespace fractoseg {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_png(const std::string& path, int height, int width, int color_type,
               const std::vector<png_bytep>& rows) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw Error(ErrorCode::IoFailure, "cannot open for writing: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::IoFailure, "libpng write failure: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, png_uint_32(width), png_uint_32(height), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, const_cast<png_bytep*>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReader() {
    if (png) png_destroy_read_struct(&png, &info, nullptr);
  }
};

}  // namespace

void write_png_rgb8(const std::string& path, const ImageRgb8& img) {
  require(!img.empty(), ErrorCode::EmptyImage, "write_png_rgb8: empty image");
  const int h = int(img.height()), w = int(img.width());
  std::vector<std::uint8_t> buf(std::size_t(h) * std::size_t(w) * 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        buf[(std::size_t(y) * std::size_t(w) + std::size_t(x)) * 3 + std::size_t(c)] =
            img.ch[std::size_t(c)](y, x);
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) rows[std::size_t(y)] = buf.data() + std::size_t(y) * std::size_t(w) * 3;
  write_png(path, h, w, PNG_COLOR_TYPE_RGB, rows);
}

void write_png_gray8(const std::string& path, const PlaneU8& plane) {
  require(plane.size() > 0, ErrorCode::EmptyImage, "write_png_gray8: empty plane");
  const int h = int(plane.rows()), w = int(plane.cols());
  std::vector<std::uint8_t> buf(std::size_t(h) * std::size_t(w));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) buf[std::size_t(y) * std::size_t(w) + std::size_t(x)] = plane(y, x);
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) rows[std::size_t(y)] = buf.data() + std::size_t(y) * std::size_t(w);
  write_png(path, h, w, PNG_COLOR_TYPE_GRAY, rows);
}

namespace {

/// Reads any PNG as 8-bit with the requested channel count (1 or 3).
std::vector<std::uint8_t> read_png(const std::string& path, int want_channels, int& h, int& w) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw Error(ErrorCode::PathMissing, "cannot open: " + path);
  PngReader r;
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  r.info = png_create_info_struct(r.png);
  if (setjmp(png_jmpbuf(r.png))) throw Error(ErrorCode::IoFailure, "libpng read failure: " + path);
  png_init_io(r.png, fp.get());
  png_read_info(r.png, r.info);

  png_set_strip_16(r.png);
  png_set_packing(r.png);
  png_set_strip_alpha(r.png);
  const int color_type = png_get_color_type(r.png, r.info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
  if (want_channels == 3) {
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
      png_set_gray_to_rgb(r.png);
  } else {
    if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_GRAY_ALPHA)
      png_set_rgb_to_gray_fixed(r.png, 1, -1, -1);
  }
  png_read_update_info(r.png, r.info);

  h = int(png_get_image_height(r.png, r.info));
  w = int(png_get_image_width(r.png, r.info));
  const std::size_t stride = png_get_rowbytes(r.png, r.info);
  require(stride == std::size_t(w) * std::size_t(want_channels), ErrorCode::IoFailure,
          "unexpected PNG row stride in " + path);
  std::vector<std::uint8_t> buf(std::size_t(h) * stride);
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) rows[std::size_t(y)] = buf.data() + std::size_t(y) * stride;
  png_read_image(r.png, rows.data());
  return buf;
}

}  // namespace

ImageRgb8 read_png_rgb8(const std::string& path) {
  int h = 0, w = 0;
  const auto buf = read_png(path, 3, h, w);
  ImageRgb8 img(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        img.ch[std::size_t(c)](y, x) =
            buf[(std::size_t(y) * std::size_t(w) + std::size_t(x)) * 3 + std::size_t(c)];
  return img;
}

PlaneU8 read_png_gray8(const std::string& path) {
  int h = 0, w = 0;
  const auto buf = read_png(path, 1, h, w);
  PlaneU8 plane(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) plane(y, x) = buf[std::size_t(y) * std::size_t(w) + std::size_t(x)];
  return plane;
}

}  // namespace fractoseg
