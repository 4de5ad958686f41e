#pragma once

#include <span>
#include <vector>

#include "ufpmp/frg.hpp"
#include "ufpmp/geometry.hpp"
#include "ufpmp/mosaic.hpp"
#include "ufpmp/remap.hpp"

namespace ufpmp {

struct UfpOptions {
  double beta = 1.5;
  double fixed_size = 96;
  double mosaic_width = 1333;
  double padding = 2;
  EqualizeMode equalize_mode = EqualizeMode::PerRegion;
};

struct UfpResult {
  RegionSet regions;
  std::vector<ScaledRegion> scaled;
  MosaicLayout layout;
};

/// Expand, merge, equalize and pack the coarse detections of one image.
inline UfpResult run_ufp(std::span<const BBox> coarse, const ImageExtent& extent, const UfpOptions& opt,
                         const Packer& packer = ShelfPacker{}) {
  UfpResult r;
  r.regions = expand_and_merge(coarse, opt.beta, extent);
  r.scaled = equalize(r.regions, opt.fixed_size, opt.equalize_mode);
  r.layout = packer.pack(r.scaled, opt.mosaic_width, opt.padding);
  return r;
}

inline UfpResult run_ufp(std::span<const Detection> coarse, const ImageExtent& extent, const UfpOptions& opt,
                         const Packer& packer = ShelfPacker{}) {
  std::vector<BBox> boxes;
  boxes.reserve(coarse.size());
  for (const auto& d : coarse) boxes.push_back(d.box);
  return run_ufp(std::span<const BBox>(boxes), extent, opt, packer);
}

/// Maps fine mosaic detections back to the source and fuses them with the coarse ones.
inline std::vector<Detection> unpack_and_fuse(std::span<const Detection> fine, const MosaicLayout& layout,
                                              std::span<const Detection> coarse, double nms_iou,
                                              std::size_t* dropped = nullptr) {
  std::vector<Detection> mapped;
  std::size_t lost = 0;
  for (const auto& d : fine) {
    if (auto m = to_source(d, layout)) mapped.push_back(*m); else ++lost;
  }
  if (dropped != nullptr) *dropped = lost;
  return fuse(coarse, mapped, nms_iou);
}

}  // namespace ufpmp
