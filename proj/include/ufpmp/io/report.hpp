#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <string_view>

#include "ufpmp/io/atomic_file.hpp"
#include "ufpmp/io/json_util.hpp"
#include "ufpmp/train_sim.hpp"

namespace ufpmp::io {

inline json record_to_json(const TrainRecord& r) {
  return {{"step", r.step},
          {"l_det", r.l_det},
          {"l_ot", r.l_ot},
          {"l_cl", r.l_cl},
          {"min_proxy_distance", r.min_proxy_distance},
          {"max_proxy_similarity", r.max_proxy_similarity}};
}

inline TrainRecord record_from_json(const json& j, std::string_view what) {
  TrainRecord r;
  r.step = static_cast<int>(number_at(j, "step", what));
  r.l_det = number_at(j, "l_det", what);
  r.l_ot = number_at(j, "l_ot", what);
  r.l_cl = number_at(j, "l_cl", what);
  r.min_proxy_distance = number_at(j, "min_proxy_distance", what);
  r.max_proxy_similarity = number_at(j, "max_proxy_similarity", what);
  return r;
}

/// JSON lines: one record per step, no trailing summary.
inline std::string report_to_jsonl(const TrainReport& report) {
  std::string out;
  for (const auto& r : report.records) out += record_to_json(r).dump() + "\n";
  return out;
}

inline std::vector<TrainRecord> records_from_jsonl(std::string_view text, std::string_view what = "report") {
  std::vector<TrainRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const std::string tag = std::string(what) + " line " + std::to_string(n);
    out.push_back(record_from_json(parse_json(line, tag), tag));
  }
  return out;
}

inline void save_report(const std::filesystem::path& path, const TrainReport& report) {
  write_file_atomic(path, report_to_jsonl(report));
}

inline std::vector<TrainRecord> load_report(const std::filesystem::path& path) {
  return records_from_jsonl(read_file(path), path.string());
}

}  // namespace ufpmp::io
