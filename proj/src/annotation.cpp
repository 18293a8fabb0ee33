#include "fractoseg/annotation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fractoseg {

PolygonAnnotation parse_annotation_json(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("annotation JSON: ") + e.what());
  }
  PolygonAnnotation ann;
  require(doc.contains("imageHeight") && doc.contains("imageWidth"), ErrorCode::ConfigInvalid,
          "annotation JSON missing imageHeight/imageWidth");
  ann.image_height = doc["imageHeight"].get<int>();
  ann.image_width = doc["imageWidth"].get<int>();
  for (const auto& shape : doc.value("shapes", nlohmann::json::array())) {
    PolygonShape s;
    s.label = shape.at("label").get<std::string>();
    for (const auto& pt : shape.at("points"))
      s.points.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
    ann.shapes.push_back(std::move(s));
  }
  return ann;
}

PolygonAnnotation load_annotation(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::PathMissing, "cannot open annotation: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_annotation_json(ss.str());
}

namespace {

/// Paints one polygon onto the mask by scanline even-odd filling at pixel
/// centers (x+0.5, y+0.5); centers exactly on an edge are filled.
void fill_polygon(PlaneU8& mask, const std::vector<std::array<double, 2>>& pts,
                  std::uint8_t class_id) {
  const Eigen::Index h = mask.rows(), w = mask.cols();
  const std::size_t n = pts.size();

  double min_y = pts[0][1], max_y = pts[0][1];
  for (const auto& p : pts) {
    min_y = std::min(min_y, p[1]);
    max_y = std::max(max_y, p[1]);
  }
  const Eigen::Index row_lo = std::max<Eigen::Index>(0, Eigen::Index(std::floor(min_y - 0.5)));
  const Eigen::Index row_hi = std::min(h - 1, Eigen::Index(std::ceil(max_y)));

  std::vector<double> xs;
  for (Eigen::Index row = row_lo; row <= row_hi; ++row) {
    const double yc = double(row) + 0.5;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = pts[i];
      const auto& q = pts[(i + 1) % n];
      if (p[1] == q[1]) {
        // horizontal edge: centers lying exactly on it count as inside
        if (yc == p[1]) {
          const double x1 = std::min(p[0], q[0]), x2 = std::max(p[0], q[0]);
          const Eigen::Index a = std::max<Eigen::Index>(0, Eigen::Index(std::ceil(x1 - 0.5)));
          const Eigen::Index b = std::min(w - 1, Eigen::Index(std::floor(x2 - 0.5)));
          for (Eigen::Index x = a; x <= b; ++x) mask(row, x) = class_id;
        }
        continue;
      }
      const double y_lo = std::min(p[1], q[1]);
      const double y_hi = std::max(p[1], q[1]);
      if (yc < y_lo || yc >= y_hi) continue;  // half-open, vertices counted once
      xs.push_back(p[0] + (yc - p[1]) * (q[0] - p[0]) / (q[1] - p[1]));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
      // inclusive interval so boundary centers are inside
      const Eigen::Index a = std::max<Eigen::Index>(0, Eigen::Index(std::ceil(xs[i] - 0.5)));
      const Eigen::Index b = std::min(w - 1, Eigen::Index(std::floor(xs[i + 1] - 0.5)));
      for (Eigen::Index x = a; x <= b; ++x) mask(row, x) = class_id;
    }
  }
}

}  // namespace

Mask rasterize(const PolygonAnnotation& annotation, const ClassTaxonomy& taxonomy) {
  require(annotation.image_height > 0 && annotation.image_width > 0, ErrorCode::InvalidSpec,
          "annotation has no image dimensions");
  Mask mask(annotation.image_height, annotation.image_width);
  for (const auto& shape : annotation.shapes) {
    const int class_id = taxonomy.id_of(shape.label);  // throws UnknownLabel
    require(shape.points.size() >= 3, ErrorCode::DegeneratePolygon,
            "polygon '" + shape.label + "' has " + std::to_string(shape.points.size()) +
                " points");
    auto pts = shape.points;
    for (auto& p : pts) {
      p[0] = std::clamp(p[0], 0.0, double(annotation.image_width));
      p[1] = std::clamp(p[1], 0.0, double(annotation.image_height));
    }
    fill_polygon(mask.labels, pts, std::uint8_t(class_id));
  }
  return mask;
}

}  // namespace fractoseg
