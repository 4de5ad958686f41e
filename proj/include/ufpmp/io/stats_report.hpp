#pragma once

#include <filesystem>
#include <optional>
#include <string_view>

#include "ufpmp/io/atomic_file.hpp"
#include "ufpmp/io/json_util.hpp"
#include "ufpmp/metrics.hpp"

namespace ufpmp::io {

/// Size statistics of one side of the pipeline, with the sum-of-areas FR next to the union FR.
struct StatsEntry {
  SizeStats stats;
  double fr_sum = 0;

  friend bool operator==(const StatsEntry& a, const StatsEntry& b) {
    return a.fr_sum == b.fr_sum && a.stats.fr == b.stats.fr && a.stats.small == b.stats.small &&
           a.stats.medium == b.stats.medium && a.stats.large == b.stats.large && a.stats.count == b.stats.count &&
           a.stats.empty == b.stats.empty;
  }
};

struct StatsReport {
  StatsEntry source;
  std::optional<StatsEntry> mosaic;
  std::size_t uncovered = 0;

  friend bool operator==(const StatsReport&, const StatsReport&) = default;
};

inline json stats_entry_to_json(const StatsEntry& e) {
  return {{"fr", e.stats.fr},       {"fr_sum", e.fr_sum},       {"small", e.stats.small}, {"medium", e.stats.medium},
          {"large", e.stats.large}, {"count", e.stats.count}, {"empty", e.stats.empty}};
}

inline StatsEntry stats_entry_from_json(const json& j, std::string_view what) {
  StatsEntry e;
  e.stats.fr = number_at(j, "fr", what);
  e.fr_sum = number_at(j, "fr_sum", what);
  e.stats.small = number_at(j, "small", what);
  e.stats.medium = number_at(j, "medium", what);
  e.stats.large = number_at(j, "large", what);
  e.stats.count = static_cast<std::size_t>(number_at(j, "count", what));
  if (!j.contains("empty") || !j["empty"].is_boolean()) throw Error(ErrorKind::Parse, std::string(what) + ": missing 'empty'");
  e.stats.empty = j["empty"].get<bool>();
  return e;
}

inline json stats_report_to_json(const StatsReport& r) {
  json j = {{"source", stats_entry_to_json(r.source)}};
  if (r.mosaic) {
    j["mosaic"] = stats_entry_to_json(*r.mosaic);
    j["uncovered"] = r.uncovered;
  }
  return j;
}

inline StatsReport stats_report_from_json(const json& j, std::string_view what = "stats report") {
  if (!j.is_object() || !j.contains("source")) throw Error(ErrorKind::Parse, std::string(what) + ": missing 'source'");
  StatsReport r;
  r.source = stats_entry_from_json(j["source"], what);
  if (j.contains("mosaic")) {
    r.mosaic = stats_entry_from_json(j["mosaic"], what);
    r.uncovered = static_cast<std::size_t>(number_at(j, "uncovered", what));
  }
  return r;
}

/// Source-side statistics and, when a layout is given, the mosaic-side ones.
inline StatsReport compute_stats(std::span<const BBox> boxes, const ImageExtent& extent,
                                 const MosaicLayout* layout = nullptr) {
  StatsReport r;
  r.source = {source_stats(boxes, extent), foreground_ratio_sum(boxes, extent)};
  if (layout != nullptr) {
    const auto proj = project_to_mosaic(boxes, *layout);
    StatsEntry m{mosaic_stats(boxes, *layout), 0.0};
    if (layout->width > 0 && layout->height > 0) {
      m.fr_sum = foreground_ratio_sum(proj.mosaic_boxes, {layout->width, layout->height});
    }
    r.mosaic = m;
    r.uncovered = proj.uncovered;
  }
  return r;
}

inline void save_stats_report(const std::filesystem::path& path, const StatsReport& r) {
  write_file_atomic(path, stats_report_to_json(r).dump(1) + "\n");
}

inline StatsReport load_stats_report(const std::filesystem::path& path) {
  return stats_report_from_json(parse_json(read_file(path), path.string()), path.string());
}

}  // namespace ufpmp::io
