#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ufpmp/frg.hpp"
#include "ufpmp/geometry.hpp"

namespace ufpmp {

/// A source region together with the uniform enlargement applied to it.
struct ScaledRegion {
  BBox source;
  double scale = 1.0;

  double width() const noexcept { return scale * source.width(); }
  double height() const noexcept { return scale * source.height(); }
};

struct Placement {
  BBox source;
  double scale = 1.0;
  double dest_x = 0, dest_y = 0;

  /// The scaled rectangle occupied inside the mosaic.
  BBox dest() const noexcept {
    return {dest_x, dest_y, dest_x + scale * source.width(), dest_y + scale * source.height()};
  }

  friend bool operator==(const Placement&, const Placement&) = default;
};

struct MosaicLayout {
  double width = 0, height = 0;
  std::vector<Placement> placements;  // same order as the packed regions

  bool empty() const noexcept { return placements.empty(); }
  friend bool operator==(const MosaicLayout&, const MosaicLayout&) = default;
};

/// Geometric side length used as the scale of a region.
inline double region_scale(const BBox& b) { return std::sqrt(area(b)); }

enum class EqualizeMode {
  GlobalMean,  // one factor lifting the mean region scale to the fixed size
  PerRegion,   // each qualifying region lifted to the fixed size on its own
};

/// Enlarges regions whose scale is below `fixed_size`. Regions are never shrunk.
/// GlobalMean applies fixed_size / mean(scale) to every small region when the mean
/// is below fixed_size; PerRegion applies fixed_size / scale(r) to each one.
inline std::vector<ScaledRegion> equalize(std::span<const BBox> regions, double fixed_size,
                                          EqualizeMode mode = EqualizeMode::GlobalMean) {
  if (!(fixed_size > 0)) throw Error(ErrorKind::InvalidParameter, "fixed size must be positive");
  std::vector<ScaledRegion> out;
  out.reserve(regions.size());
  if (regions.empty()) return out;

  double mean = 0;
  for (const auto& r : regions) mean += region_scale(r);
  mean /= static_cast<double>(regions.size());
  const double global = (mean > 0 && mean < fixed_size) ? fixed_size / mean : 1.0;

  for (const auto& r : regions) {
    const double s = region_scale(r);
    double factor = 1.0;
    if (s < fixed_size && s > 0) factor = mode == EqualizeMode::GlobalMean ? global : fixed_size / s;
    out.push_back({r, factor});
  }
  return out;
}

inline std::vector<ScaledRegion> equalize(const RegionSet& regions, double fixed_size,
                                          EqualizeMode mode = EqualizeMode::GlobalMean) {
  return equalize(std::span<const BBox>(regions.regions), fixed_size, mode);
}

/// Strategy interface so alternative strip packers can replace the shelf heuristic.
class Packer {
 public:
  virtual ~Packer() = default;
  virtual MosaicLayout pack(std::span<const ScaledRegion> scaled, double target_width, double padding) const = 0;
};

/// Next-fit shelf packing with rectangles sorted by decreasing height (ties keep input order).
/// A gutter of `padding` separates placements from each other and from the mosaic border.
class ShelfPacker final : public Packer {
 public:
  MosaicLayout pack(std::span<const ScaledRegion> scaled, double target_width, double padding) const override {
    if (!(target_width > 0)) throw Error(ErrorKind::InvalidParameter, "target width must be positive");
    if (!(padding >= 0)) throw Error(ErrorKind::InvalidParameter, "padding must be non-negative");

    const double usable = target_width - 2 * padding;
    for (std::size_t i = 0; i < scaled.size(); ++i) {
      if (!(scaled[i].scale >= 1.0)) {
        throw Error(ErrorKind::InvalidInput, "region " + std::to_string(i) + " has scale below 1");
      }
      if (scaled[i].width() > usable) {
        throw Error(ErrorKind::UnpackableRegion,
                    "region " + std::to_string(i) + " " + to_string(scaled[i].source) + " is " +
                        std::to_string(scaled[i].width()) + " px wide, strip allows " + std::to_string(usable));
      }
    }

    MosaicLayout layout;
    layout.width = target_width;
    layout.placements.resize(scaled.size());
    if (scaled.empty()) return layout;

    std::vector<std::size_t> order(scaled.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scaled[a].height() > scaled[b].height(); });

    double shelf_y = padding;
    double shelf_h = 0;
    double cursor_x = padding;
    bool shelf_open = false;
    for (std::size_t idx : order) {
      const auto& r = scaled[idx];
      if (shelf_open && cursor_x + r.width() + padding > target_width) {
        shelf_y += shelf_h + padding;
        shelf_h = 0;
        cursor_x = padding;
      }
      shelf_open = true;
      layout.placements[idx] = {r.source, r.scale, cursor_x, shelf_y};
      cursor_x += r.width() + padding;
      shelf_h = std::max(shelf_h, r.height());
    }
    layout.height = shelf_y + shelf_h + padding;
    return layout;
  }
};

inline MosaicLayout pack(std::span<const ScaledRegion> scaled, double target_width, double padding) {
  return ShelfPacker{}.pack(scaled, target_width, padding);
}

/// Mosaic area divided by the area actually covered by placements.
inline double waste_ratio(const MosaicLayout& layout) {
  if (layout.empty()) throw Error(ErrorKind::InvalidInput, "waste ratio of an empty layout");
  double used = 0;
  for (const auto& p : layout.placements) used += area(p.dest());
  if (!(used > 0)) throw Error(ErrorKind::InvalidInput, "layout has zero placed area");
  return layout.width * layout.height / used;
}

}  // namespace ufpmp
