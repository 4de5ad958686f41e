#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ufpmp/io/atomic_file.hpp"
#include "ufpmp/io/json_util.hpp"
#include "ufpmp/remap.hpp"

namespace ufpmp::io {

using DetectionsByImage = std::map<std::int64_t, std::vector<Detection>>;

/// Parses COCO-results JSON: [{image_id, bbox: [x, y, w, h], score, category_id}, ...].
/// Records failing validation are collected and reported together by index.
inline DetectionsByImage parse_detections(std::string_view text, std::string_view what = "detections") {
  const json doc = parse_json(text, what);
  if (!doc.is_array()) throw Error(ErrorKind::Parse, std::string(what) + ": top level must be an array of records");

  DetectionsByImage out;
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& r = doc[i];
    const std::string tag = "record " + std::to_string(i);
    if (!r.is_object() || !r.contains("image_id") || !r["image_id"].is_number_integer() || !r.contains("bbox") ||
        !r["bbox"].is_array() || r["bbox"].size() != 4) {
      problems.push_back(tag + " (missing image_id or 4-element bbox)");
      continue;
    }
    bool numeric = true;
    for (const auto& v : r["bbox"]) numeric = numeric && v.is_number();
    if (!numeric) {
      problems.push_back(tag + " (non-numeric bbox)");
      continue;
    }
    const double x = r["bbox"][0].get<double>(), y = r["bbox"][1].get<double>();
    const double w = r["bbox"][2].get<double>(), h = r["bbox"][3].get<double>();
    if (w < 0 || h < 0) {
      problems.push_back(tag + " (negative width or height)");
      continue;
    }
    const double score = r.contains("score") && r["score"].is_number() ? r["score"].get<double>() : 1.0;
    if (score < 0 || score > 1) {
      problems.push_back(tag + " (score outside [0,1])");
      continue;
    }
    const int cat = r.contains("category_id") && r["category_id"].is_number_integer() ? r["category_id"].get<int>() : 0;
    if (cat < 0) {
      problems.push_back(tag + " (negative category_id)");
      continue;
    }
    out[r["image_id"].get<std::int64_t>()].push_back({BBox::from_xywh(x, y, w, h), score, cat});
  }
  if (!problems.empty()) {
    std::string msg = std::string(what) + ": invalid records:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw Error(ErrorKind::Validation, msg);
  }
  return out;
}

inline DetectionsByImage load_detections(const std::filesystem::path& path) {
  return parse_detections(read_file(path), path.string());
}

inline json detections_to_json(const DetectionsByImage& dets) {
  json arr = json::array();
  for (const auto& [image, list] : dets) {
    for (const auto& d : list) {
      arr.push_back({{"image_id", image},
                     {"bbox", {d.box.x1, d.box.y1, d.box.width(), d.box.height()}},
                     {"score", d.score},
                     {"category_id", d.category}});
    }
  }
  return arr;
}

inline void save_detections(const std::filesystem::path& path, const DetectionsByImage& dets) {
  write_file_atomic(path, detections_to_json(dets).dump(1) + "\n");
}

}  // namespace ufpmp::io
