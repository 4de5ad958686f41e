#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "ufpmp/geometry.hpp"

namespace ufpmp {

/// Merged foreground regions plus, per region, the input indices it absorbed.
/// Each provenance list starts with the seed box and then follows absorption order,
/// so replaying it with `enclosing` reproduces the region.
struct RegionSet {
  std::vector<BBox> regions;
  std::vector<std::vector<std::size_t>> provenance;

  std::size_t size() const noexcept { return regions.size(); }
  bool empty() const noexcept { return regions.empty(); }
};

enum class AbsorptionScan {
  FixedPoint,  // rescan remaining boxes until none qualifies
  SinglePass,  // one literal sweep over the remaining boxes
};

/// The merge test: absorbing B into A is allowed when |A| + |B| >= |enclosing(A, B)|.
constexpr bool should_merge(const BBox& a, const BBox& b) noexcept {
  return area(a) + area(b) >= area(enclosing(a, b));
}

/// Greedy foreground region generation. Repeatedly seeds with the smallest
/// remaining box (lowest index on ties) and absorbs every remaining box that
/// passes `should_merge`.
inline RegionSet merge(std::span<const BBox> candidates,
                       AbsorptionScan scan = AbsorptionScan::FixedPoint) {
  for (const auto& b : candidates) {
    if (!b.valid()) throw Error(ErrorKind::InvalidInput, "degenerate candidate box " + to_string(b));
  }

  RegionSet out;
  std::vector<bool> alive(candidates.size(), true);
  std::size_t remaining = candidates.size();

  while (remaining > 0) {
    std::size_t seed = candidates.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (alive[i] && area(candidates[i]) < best) {
        best = area(candidates[i]);
        seed = i;
      }
    }
    alive[seed] = false;
    --remaining;

    BBox region = candidates[seed];
    std::vector<std::size_t> absorbed{seed};

    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!alive[i] || !should_merge(region, candidates[i])) continue;
        region = enclosing(region, candidates[i]);
        alive[i] = false;
        --remaining;
        absorbed.push_back(i);
        changed = true;
      }
      if (scan == AbsorptionScan::SinglePass) break;
    }

    out.regions.push_back(region);
    out.provenance.push_back(std::move(absorbed));
  }
  return out;
}

inline RegionSet expand_and_merge(std::span<const BBox> detections, double beta, const ImageExtent& extent,
                                  AbsorptionScan scan = AbsorptionScan::FixedPoint) {
  std::vector<BBox> expanded;
  expanded.reserve(detections.size());
  for (const auto& d : detections) expanded.push_back(expand(d, beta, extent));
  return merge(expanded, scan);
}

}  // namespace ufpmp
