#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ufpmp/io/atomic_file.hpp"
#include "ufpmp/io/json_util.hpp"
#include "ufpmp/mosaic.hpp"

namespace ufpmp::io {

// {"mosaic": {"width", "height"}, "placements": [{"src": [x1,y1,x2,y2], "scale", "dest": [x,y]}]}
inline json layout_to_json(const MosaicLayout& layout) {
  json placements = json::array();
  for (const auto& p : layout.placements) {
    placements.push_back({{"src", {p.source.x1, p.source.y1, p.source.x2, p.source.y2}},
                          {"scale", p.scale},
                          {"dest", {p.dest_x, p.dest_y}}});
  }
  return {{"mosaic", {{"width", layout.width}, {"height", layout.height}}}, {"placements", placements}};
}

inline MosaicLayout layout_from_json(const json& j, std::string_view what = "layout") {
  if (!j.is_object() || !j.contains("mosaic") || !j.contains("placements") || !j["placements"].is_array()) {
    throw Error(ErrorKind::Parse, std::string(what) + ": expected {\"mosaic\", \"placements\"}");
  }
  MosaicLayout layout;
  layout.width = number_at(j["mosaic"], "width", what);
  layout.height = number_at(j["mosaic"], "height", what);
  if (!(layout.width > 0) || !(layout.height >= 0)) throw Error(ErrorKind::Parse, std::string(what) + ": bad mosaic size");
  for (const auto& p : j["placements"]) {
    const auto& src = array_at(p, "src", 4, what);
    const auto& dest = array_at(p, "dest", 2, what);
    Placement pl;
    pl.source = {src[0].get<double>(), src[1].get<double>(), src[2].get<double>(), src[3].get<double>()};
    pl.scale = number_at(p, "scale", what);
    pl.dest_x = dest[0].get<double>();
    pl.dest_y = dest[1].get<double>();
    if (!pl.source.valid() || !(pl.scale > 0)) {
      throw Error(ErrorKind::Parse, std::string(what) + ": placement with degenerate source or non-positive scale");
    }
    layout.placements.push_back(pl);
  }
  return layout;
}

inline void save_layout(const std::filesystem::path& path, const MosaicLayout& layout) {
  write_file_atomic(path, layout_to_json(layout).dump(1) + "\n");
}

inline MosaicLayout load_layout(const std::filesystem::path& path) {
  return layout_from_json(parse_json(read_file(path), path.string()), path.string());
}

}  // namespace ufpmp::io
