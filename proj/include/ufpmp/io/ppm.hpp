#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ufpmp/io/atomic_file.hpp"
#include "ufpmp/mosaic.hpp"

namespace ufpmp::io {

/// 8-bit RGB raster, row-major, 3 bytes per pixel.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Raster() = default;
  Raster(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 0) {}

  std::uint8_t* at(int x, int y) { return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  const std::uint8_t* at(int x, int y) const { return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3; }

  bool operator==(const Raster&) const = default;
};

inline std::string encode_ppm(const Raster& r) {
  std::string out = "P6\n" + std::to_string(r.width) + " " + std::to_string(r.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(r.rgb.data()), r.rgb.size());
  return out;
}

inline Raster decode_ppm(std::string_view bytes, std::string_view what = "ppm") {
  std::size_t pos = 0;
  auto fail = [&](const std::string& m) -> Error {
    return Error(ErrorKind::Parse, std::string(what) + ": " + m + " (offset " + std::to_string(pos) + ")");
  };
  auto skip_ws = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&]() -> long {
    skip_ws();
    const std::size_t start = pos;
    long v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1'000'000) throw fail("header value too large");
      ++pos;
    }
    if (pos == start) throw fail("expected a number in header");
    return v;
  };
  if (bytes.substr(0, 2) != "P6") throw fail("not a binary PPM (P6)");
  pos = 2;
  const long w = number(), h = number(), maxval = number();
  if (maxval != 255) throw fail("only 8-bit PPM is supported");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) throw fail("malformed header");
  ++pos;
  const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3;
  if (bytes.size() - pos < need) throw fail("truncated pixel data");
  Raster r(static_cast<int>(w), static_cast<int>(h));
  std::copy_n(reinterpret_cast<const std::uint8_t*>(bytes.data() + pos), need, r.rgb.begin());
  return r;
}

inline void write_ppm(const std::filesystem::path& path, const Raster& r) { write_file_atomic(path, encode_ppm(r)); }

inline Raster read_ppm(const std::filesystem::path& path) { return decode_ppm(read_file(path), path.string()); }

/// Bilinear sample at continuous pixel coordinates (pixel centers at integers),
/// clamped to the pixel window [x0, x1] x [y0, y1].
inline std::array<double, 3> sample_bilinear(const Raster& r, double sx, double sy, int x0, int y0, int x1, int y1) {
  sx = std::clamp(sx, static_cast<double>(x0), static_cast<double>(x1));
  sy = std::clamp(sy, static_cast<double>(y0), static_cast<double>(y1));
  const int ix = std::min(static_cast<int>(std::floor(sx)), x1);
  const int iy = std::min(static_cast<int>(std::floor(sy)), y1);
  const int jx = std::min(ix + 1, x1), jy = std::min(iy + 1, y1);
  const double fx = sx - ix, fy = sy - iy;
  std::array<double, 3> out{};
  for (int c = 0; c < 3; ++c) {
    const double top = (1 - fx) * r.at(ix, iy)[c] + fx * r.at(jx, iy)[c];
    const double bot = (1 - fx) * r.at(ix, jy)[c] + fx * r.at(jx, jy)[c];
    out[c] = (1 - fy) * top + fy * bot;
  }
  return out;
}

/// Renders the mosaic: each placement's source crop is resampled by its scale
/// and written at its destination. Uncovered pixels stay black.
inline Raster compose_mosaic(const MosaicLayout& layout, const Raster& source) {
  const int mw = static_cast<int>(std::ceil(layout.width));
  const int mh = static_cast<int>(std::ceil(layout.height));
  Raster out(mw, mh);
  for (std::size_t i = 0; i < layout.placements.size(); ++i) {
    const Placement& p = layout.placements[i];
    const BBox& s = p.source;
    if (s.x1 < 0 || s.y1 < 0 || s.x2 > source.width || s.y2 > source.height || !s.valid()) {
      throw Error(ErrorKind::Composition, "placement " + std::to_string(i) + " source " + to_string(s) +
                                              " lies outside the " + std::to_string(source.width) + "x" +
                                              std::to_string(source.height) + " raster");
    }
    const BBox d = p.dest();
    if (d.x1 < 0 || d.y1 < 0 || d.x2 > mw + 1e-9 || d.y2 > mh + 1e-9) {
      throw Error(ErrorKind::Composition, "placement " + std::to_string(i) + " destination falls outside the mosaic");
    }
    const int x0 = static_cast<int>(std::floor(s.x1)), y0 = static_cast<int>(std::floor(s.y1));
    const int x1 = std::max(x0, static_cast<int>(std::ceil(s.x2)) - 1);
    const int y1 = std::max(y0, static_cast<int>(std::ceil(s.y2)) - 1);
    const int u0 = static_cast<int>(std::lround(d.x1)), u1 = std::min(mw, static_cast<int>(std::lround(d.x2)));
    const int v0 = static_cast<int>(std::lround(d.y1)), v1 = std::min(mh, static_cast<int>(std::lround(d.y2)));
    for (int v = v0; v < v1; ++v) {
      const double sy = s.y1 + (v + 0.5 - p.dest_y) / p.scale - 0.5;
      for (int u = u0; u < u1; ++u) {
        const double sx = s.x1 + (u + 0.5 - p.dest_x) / p.scale - 0.5;
        const auto px = sample_bilinear(source, sx, sy, x0, y0, x1, y1);
        for (int c = 0; c < 3; ++c) {
          out.at(u, v)[c] = static_cast<std::uint8_t>(std::clamp(std::lround(px[c]), 0L, 255L));
        }
      }
    }
  }
  return out;
}

inline void compose_mosaic(const MosaicLayout& layout, const Raster& source, const std::filesystem::path& path) {
  write_ppm(path, compose_mosaic(layout, source));
}

}  // namespace ufpmp::io
