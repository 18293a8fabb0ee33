#pragma once

#include <string>
#include <vector>

#include "fractoseg/image.hpp"
#include "fractoseg/taxonomy.hpp"

namespace fractoseg {

struct PolygonShape {
  std::string label;
  std::vector<std::array<double, 2>> points;  // (x, y) in pixels
};

/// One polygonal annotation document for one image. Mirrors the JSON layout of
/// common polygon labeling tools: top-level "shapes" plus image dimensions.
struct PolygonAnnotation {
  std::vector<PolygonShape> shapes;
  int image_height = 0;
  int image_width = 0;
};

PolygonAnnotation parse_annotation_json(const std::string& json_text);
PolygonAnnotation load_annotation(const std::string& path);

/// Rasterizes polygons to a class-id mask. Pixel centers at (x+0.5, y+0.5) are
/// tested with the even-odd rule; centers exactly on an edge count as inside.
/// Later shapes overwrite earlier ones; uncovered pixels stay background.
Mask rasterize(const PolygonAnnotation& annotation, const ClassTaxonomy& taxonomy);

}  // namespace fractoseg
