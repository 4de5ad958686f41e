#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "ufpmp/geometry.hpp"
#include "ufpmp/mosaic.hpp"

namespace ufpmp {

struct Detection {
  BBox box;
  double score = 0;
  int category = 0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Maps a source-image box into mosaic coordinates through one placement.
inline BBox to_mosaic(const BBox& src, const Placement& p) noexcept {
  return {(src.x1 - p.source.x1) * p.scale + p.dest_x, (src.y1 - p.source.y1) * p.scale + p.dest_y,
          (src.x2 - p.source.x1) * p.scale + p.dest_x, (src.y2 - p.source.y1) * p.scale + p.dest_y};
}

/// Inverse of `to_mosaic`, clipped to the placement's source region.
inline BBox to_source(const BBox& m, const Placement& p) noexcept {
  const BBox raw{(m.x1 - p.dest_x) / p.scale + p.source.x1, (m.y1 - p.dest_y) / p.scale + p.source.y1,
                 (m.x2 - p.dest_x) / p.scale + p.source.x1, (m.y2 - p.dest_y) / p.scale + p.source.y1};
  return clamp(raw, p.source);
}

/// Index of the placement whose mosaic rectangle holds the point, lowest index first.
inline std::optional<std::size_t> owning_placement(const MosaicLayout& layout, double x, double y) noexcept {
  for (std::size_t i = 0; i < layout.placements.size(); ++i) {
    if (layout.placements[i].dest().contains_point(x, y)) return i;
  }
  return std::nullopt;
}

/// Maps a mosaic detection back to the source image. Ownership goes to the
/// placement containing the box center; detections centered in a gutter are
/// dropped (nullopt).
inline std::optional<Detection> to_source(const Detection& det, const MosaicLayout& layout) {
  const auto owner = owning_placement(layout, det.box.cx(), det.box.cy());
  if (!owner) return std::nullopt;
  return Detection{to_source(det.box, layout.placements[*owner]), det.score, det.category};
}

/// Per-category greedy NMS over the concatenation of coarse and fine detections.
/// A box is suppressed when its IoU with a kept same-category box exceeds the
/// threshold. Output is ordered by descending score, then category, then input index.
inline std::vector<Detection> fuse(std::span<const Detection> coarse, std::span<const Detection> fine,
                                   double iou_threshold) {
  std::vector<Detection> all(coarse.begin(), coarse.end());
  all.insert(all.end(), fine.begin(), fine.end());

  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (all[a].score != all[b].score) return all[a].score > all[b].score;
    if (all[a].category != all[b].category) return all[a].category < all[b].category;
    return a < b;
  });

  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return all[k].category == all[i].category && iou(all[k].box, all[i].box) > iou_threshold;
    });
    if (!suppressed) kept.push_back(i);
  }

  std::vector<Detection> out;
  out.reserve(kept.size());
  for (std::size_t k : kept) out.push_back(all[k]);
  return out;
}

}  // namespace ufpmp
