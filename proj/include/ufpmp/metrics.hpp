#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "ufpmp/geometry.hpp"
#include "ufpmp/mosaic.hpp"
#include "ufpmp/remap.hpp"

namespace ufpmp {

/// Exact area of a union of boxes: x-slab sweep with merged y-intervals.
inline double union_area(std::span<const BBox> boxes) {
  std::vector<double> xs;
  xs.reserve(boxes.size() * 2);
  for (const auto& b : boxes) {
    if (area(b) <= 0) continue;
    xs.push_back(b.x1);
    xs.push_back(b.x2);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  double total = 0;
  std::vector<std::pair<double, double>> spans;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double xa = xs[i], xb = xs[i + 1];
    spans.clear();
    for (const auto& b : boxes) {
      if (area(b) > 0 && b.x1 <= xa && b.x2 >= xb) spans.emplace_back(b.y1, b.y2);
    }
    if (spans.empty()) continue;
    std::sort(spans.begin(), spans.end());
    double covered = 0, lo = spans[0].first, hi = spans[0].second;
    for (std::size_t s = 1; s < spans.size(); ++s) {
      if (spans[s].first > hi) {
        covered += hi - lo;
        lo = spans[s].first;
        hi = spans[s].second;
      } else {
        hi = std::max(hi, spans[s].second);
      }
    }
    covered += hi - lo;
    total += covered * (xb - xa);
  }
  return total;
}

/// Fraction of the image covered by the union of the boxes (clipped to the image).
inline double foreground_ratio(std::span<const BBox> boxes, const ImageExtent& extent) {
  if (!extent.valid()) throw Error(ErrorKind::InvalidParameter, "image extent must be positive");
  std::vector<BBox> clipped;
  clipped.reserve(boxes.size());
  for (const auto& b : boxes) clipped.push_back(clamp(b, extent.bounds()));
  return std::min(1.0, union_area(clipped) / extent.area());
}

/// Sum of box areas over image area; exceeds the union ratio when boxes overlap.
inline double foreground_ratio_sum(std::span<const BBox> boxes, const ImageExtent& extent) {
  double s = 0;
  for (const auto& b : boxes) s += area(clamp(b, extent.bounds()));
  return s / extent.area();
}

inline constexpr double kSmallAreaLimit = 32.0 * 32.0;
inline constexpr double kMediumAreaLimit = 96.0 * 96.0;

enum class SizeBucket { Small, Medium, Large };

constexpr SizeBucket size_bucket(double effective_area) noexcept {
  if (effective_area < kSmallAreaLimit) return SizeBucket::Small;
  if (effective_area < kMediumAreaLimit) return SizeBucket::Medium;
  return SizeBucket::Large;
}

/// A box with the uniform scale it is rendered at; effective area is area * scale^2.
struct SizedBox {
  BBox box;
  double scale = 1.0;

  double effective_area() const noexcept { return area(box) * scale * scale; }
};

struct SizeStats {
  double fr = 0;
  double small = 0, medium = 0, large = 0;
  std::size_t count = 0;
  bool empty = true;
};

inline SizeStats size_buckets(std::span<const SizedBox> boxes) {
  SizeStats st;
  st.count = boxes.size();
  st.empty = boxes.empty();
  if (st.empty) return st;
  std::size_t n[3] = {0, 0, 0};
  for (const auto& b : boxes) ++n[static_cast<int>(size_bucket(b.effective_area()))];
  const double total = static_cast<double>(boxes.size());
  st.small = static_cast<double>(n[0]) / total;
  st.medium = static_cast<double>(n[1]) / total;
  st.large = static_cast<double>(n[2]) / total;
  return st;
}

inline SizeStats source_stats(std::span<const BBox> boxes, const ImageExtent& extent) {
  std::vector<SizedBox> sized;
  sized.reserve(boxes.size());
  for (const auto& b : boxes) sized.push_back({b, 1.0});
  SizeStats st = size_buckets(sized);
  st.fr = foreground_ratio(boxes, extent);
  return st;
}

/// Source boxes carried into the mosaic. A box follows the placement whose
/// source region contains its center, preferring the largest overlap, and is
/// clipped to that region. Boxes no region covers are left out.
struct MosaicProjection {
  std::vector<BBox> mosaic_boxes;  // mosaic coordinates
  std::vector<SizedBox> sized;     // clipped source box with its placement scale
  std::size_t uncovered = 0;
};

inline MosaicProjection project_to_mosaic(std::span<const BBox> boxes, const MosaicLayout& layout) {
  MosaicProjection out;
  for (const auto& b : boxes) {
    const Placement* owner = nullptr;
    double best = -1;
    for (const auto& p : layout.placements) {
      if (!p.source.contains_point(b.cx(), b.cy())) continue;
      const double ov = intersection_area(p.source, b);
      if (ov > best) {
        best = ov;
        owner = &p;
      }
    }
    if (owner == nullptr) {
      ++out.uncovered;
      continue;
    }
    const BBox clipped = clamp(b, owner->source);
    out.mosaic_boxes.push_back(to_mosaic(clipped, *owner));
    out.sized.push_back({clipped, owner->scale});
  }
  return out;
}

inline SizeStats mosaic_stats(std::span<const BBox> boxes, const MosaicLayout& layout) {
  const auto proj = project_to_mosaic(boxes, layout);
  SizeStats st = size_buckets(proj.sized);
  if (layout.width > 0 && layout.height > 0) {
    st.fr = foreground_ratio(proj.mosaic_boxes, ImageExtent{layout.width, layout.height});
  }
  return st;
}

}  // namespace ufpmp
