#pragma once

#include <string>

#include "fractoseg/image.hpp"

namespace fractoseg {

void write_png_rgb8(const std::string& path, const ImageRgb8& img);
ImageRgb8 read_png_rgb8(const std::string& path);

/// Masks are stored as single-channel 8-bit PNGs of raw class ids.
void write_png_gray8(const std::string& path, const PlaneU8& plane);
PlaneU8 read_png_gray8(const std::string& path);

}  // namespace fractoseg
