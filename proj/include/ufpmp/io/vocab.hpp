#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "ufpmp/boiw.hpp"
#include "ufpmp/io/atomic_file.hpp"
#include "ufpmp/io/json_util.hpp"

namespace ufpmp::io {

// Feature bank snapshot: [{"class_id", "capacity", "entries": [[...], ...]}, ...], oldest entry first.
inline json vocab_to_json(std::span<const VocabQueue> vocab) {
  json arr = json::array();
  for (const auto& q : vocab) {
    json entries = json::array();
    for (const auto& v : q.entries()) entries.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    arr.push_back({{"class_id", q.class_id()}, {"capacity", q.capacity()}, {"entries", entries}});
  }
  return arr;
}

inline std::vector<VocabQueue> vocab_from_json(const json& j, std::string_view what = "vocabulary") {
  if (!j.is_array()) throw Error(ErrorKind::Parse, std::string(what) + ": expected an array of queues");
  std::vector<VocabQueue> out;
  for (const auto& q : j) {
    const double cap = number_at(q, "capacity", what);
    if (!(cap >= 1)) throw Error(ErrorKind::Parse, std::string(what) + ": capacity must be positive");
    VocabQueue queue(static_cast<int>(number_at(q, "class_id", what)), static_cast<std::size_t>(cap));
    for (const auto& e : array_at(q, "entries", 0, what)) {
      if (!e.is_array()) throw Error(ErrorKind::Parse, std::string(what) + ": entries must be arrays of numbers");
      Vector v(static_cast<Eigen::Index>(e.size()));
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (!e[i].is_number()) throw Error(ErrorKind::Parse, std::string(what) + ": non-numeric feature value");
        v[static_cast<Eigen::Index>(i)] = e[i].get<double>();
      }
      queue.push(std::move(v));
    }
    out.push_back(std::move(queue));
  }
  return out;
}

inline void save_vocab(const std::filesystem::path& path, std::span<const VocabQueue> vocab) {
  write_file_atomic(path, vocab_to_json(vocab).dump() + "\n");
}

inline std::vector<VocabQueue> load_vocab(const std::filesystem::path& path) {
  return vocab_from_json(parse_json(read_file(path), path.string()), path.string());
}

}  // namespace ufpmp::io
