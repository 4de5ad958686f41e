#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "ufpmp/error.hpp"

namespace ufpmp {

/// Axis-aligned box in continuous pixel coordinates, stored as corners.
struct BBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  constexpr double width() const noexcept { return x2 - x1; }
  constexpr double height() const noexcept { return y2 - y1; }
  constexpr double cx() const noexcept { return 0.5 * (x1 + x2); }
  constexpr double cy() const noexcept { return 0.5 * (y1 + y2); }

  constexpr bool valid() const noexcept { return x2 >= x1 && y2 >= y1; }

  constexpr bool contains(const BBox& o) const noexcept {
    return o.x1 >= x1 && o.y1 >= y1 && o.x2 <= x2 && o.y2 <= y2;
  }
  constexpr bool contains_point(double x, double y) const noexcept {
    return x >= x1 && x <= x2 && y >= y1 && y <= y2;
  }

  friend constexpr bool operator==(const BBox&, const BBox&) = default;

  static BBox from_xywh(double x, double y, double w, double h) { return {x, y, x + w, y + h}; }
};

inline std::string to_string(const BBox& b) {
  std::ostringstream os;
  os << '(' << b.x1 << ',' << b.y1 << ',' << b.x2 << ',' << b.y2 << ')';
  return os.str();
}

struct ImageExtent {
  double width = 0, height = 0;

  constexpr bool valid() const noexcept { return width > 0 && height > 0; }
  constexpr BBox bounds() const noexcept { return {0, 0, width, height}; }
  constexpr double area() const noexcept { return width * height; }
};

constexpr double area(const BBox& b) noexcept { return b.width() * b.height(); }

constexpr BBox enclosing(const BBox& a, const BBox& b) noexcept {
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2), std::max(a.y2, b.y2)};
}

constexpr double intersection_area(const BBox& a, const BBox& b) noexcept {
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  return (w > 0 && h > 0) ? w * h : 0.0;
}

/// Intersection over union; 0 when the union is empty.
constexpr double iou(const BBox& a, const BBox& b) noexcept {
  const double inter = intersection_area(a, b);
  const double uni = area(a) + area(b) - inter;
  return uni > 0 ? inter / uni : 0.0;
}

constexpr BBox clamp(const BBox& b, const BBox& to) noexcept {
  return {std::clamp(b.x1, to.x1, to.x2), std::clamp(b.y1, to.y1, to.y2),
          std::clamp(b.x2, to.x1, to.x2), std::clamp(b.y2, to.y1, to.y2)};
}

/// Scales width and height by `beta` about the box center, then clamps to the image.
inline BBox expand(const BBox& box, double beta, const ImageExtent& extent) {
  if (!(beta >= 1.0) || !std::isfinite(beta)) {
    throw Error(ErrorKind::InvalidParameter, "expansion ratio must be >= 1, got " + std::to_string(beta));
  }
  if (!extent.valid()) throw Error(ErrorKind::InvalidParameter, "image extent must be positive");
  if (beta == 1.0) return clamp(box, extent.bounds());
  const double hw = 0.5 * beta * box.width();
  const double hh = 0.5 * beta * box.height();
  const double cx = box.cx(), cy = box.cy();
  return clamp(BBox{cx - hw, cy - hh, cx + hw, cy + hh}, extent.bounds());
}

}  // namespace ufpmp
