#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>

#include "json.hpp"
#include "ufpmp/error.hpp"

namespace ufpmp::io {

using json = nlohmann::json;

/// Parses JSON text, reporting failures as Parse errors with line and column.
inline json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorKind::Parse, std::string(what) + ": malformed JSON at line " + std::to_string(line) +
                                      ", column " + std::to_string(col) + " (offset " + std::to_string(e.byte) + ")");
  }
}

inline double number_at(const json& j, const char* key, std::string_view what) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_number()) {
    throw Error(ErrorKind::Parse, std::string(what) + ": missing numeric field '" + key + "'");
  }
  return j.at(key).get<double>();
}

inline const json& array_at(const json& j, const char* key, std::size_t len, std::string_view what) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_array() || (len > 0 && j.at(key).size() != len)) {
    throw Error(ErrorKind::Parse, std::string(what) + ": field '" + key + "' must be an array" +
                                      (len > 0 ? " of " + std::to_string(len) + " numbers" : std::string()));
  }
  for (const auto& v : j.at(key)) {
    if (!v.is_number() && len > 0) throw Error(ErrorKind::Parse, std::string(what) + ": non-numeric entry in '" + key + "'");
  }
  return j.at(key);
}

}  // namespace ufpmp::io
