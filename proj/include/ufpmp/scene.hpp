#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "ufpmp/geometry.hpp"
#include "ufpmp/metrics.hpp"
#include "ufpmp/remap.hpp"

namespace ufpmp {

/// Parameters of a synthetic drone-like scene. Defaults follow the VisDrone
/// statistics: about 10% foreground, two thirds of the objects small.
struct SceneSpec {
  ImageExtent extent{2000, 1500};
  int object_count = 150;
  std::array<double, 3> proportions{0.6856, 0.2868, 0.0276};  // small, medium, large
  double target_fr = 0.10;

  // Placement density: a fraction of the objects is dropped around a few
  // cluster centers with Gaussian spread, the rest uniformly.
  int clusters = 6;
  double cluster_fraction = 0.5;
  double cluster_spread = 80;

  // Coarse detector model.
  double center_noise = 0.1;  // std of the center shift, relative to object side
  double scale_noise = 0.1;   // std of the log side-scale
  double drop_rate = 0.05;
  int categories = 1;

  std::uint64_t seed = 0;
};

struct Scene {
  std::vector<BBox> ground_truth;
  std::vector<int> categories;
  std::vector<Detection> coarse;
};

namespace detail {

// Side-length range per COCO bucket; upper bounds exclusive.
inline constexpr std::array<std::array<double, 2>, 3> kBucketSides{{{6, 32}, {32, 96}, {96, 256}}};

inline std::array<int, 3> apportion(int n, const std::array<double, 3>& p) {
  std::array<int, 3> counts{};
  std::array<double, 3> rem{};
  int used = 0;
  for (int b = 0; b < 3; ++b) {
    const double exact = p[b] * n;
    counts[b] = static_cast<int>(std::floor(exact));
    rem[b] = exact - counts[b];
    used += counts[b];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (int i = 0; used < n; ++i, ++used) ++counts[order[i % 3]];
  return counts;
}

inline double side_at(int bucket, double u, double shape) {
  const auto [lo, hi] = kBucketSides[static_cast<std::size_t>(bucket)];
  const double side = lo + (hi - lo) * std::pow(u, shape);
  return std::min(side, std::nextafter(hi, lo));
}

}  // namespace detail

/// Seeded synthetic scene: non-overlapping ground-truth boxes whose total area
/// matches the target foreground ratio, plus jittered coarse detections.
inline Scene generate_scene(const SceneSpec& spec) {
  if (!spec.extent.valid()) throw Error(ErrorKind::InvalidParameter, "scene extent must be positive");
  if (spec.object_count < 0) throw Error(ErrorKind::InvalidParameter, "object count must be >= 0");
  double psum = 0;
  for (double p : spec.proportions) {
    if (!(p >= 0)) throw Error(ErrorKind::InvalidParameter, "size proportions must be non-negative");
    psum += p;
  }
  if (std::abs(psum - 1.0) > 1e-6) throw Error(ErrorKind::InvalidParameter, "size proportions must sum to 1");
  if (!(spec.target_fr >= 0 && spec.target_fr < 1)) throw Error(ErrorKind::InvalidParameter, "target FR must be in [0,1)");
  if (!(spec.cluster_fraction >= 0 && spec.cluster_fraction <= 1) || spec.clusters < 0 || !(spec.cluster_spread >= 0)) {
    throw Error(ErrorKind::InvalidParameter, "invalid placement density");
  }
  if (!(spec.drop_rate >= 0 && spec.drop_rate < 1) || !(spec.center_noise >= 0) || !(spec.scale_noise >= 0) ||
      spec.categories < 1) {
    throw Error(ErrorKind::InvalidParameter, "invalid detector noise model");
  }

  Scene scene;
  if (spec.object_count == 0) return scene;

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto counts = detail::apportion(spec.object_count, spec.proportions);
  std::vector<int> bucket;
  for (int b = 0; b < 3; ++b) bucket.insert(bucket.end(), static_cast<std::size_t>(counts[b]), b);
  std::shuffle(bucket.begin(), bucket.end(), rng);

  const std::size_t n = bucket.size();
  std::vector<double> u(n), aspect(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = unit(rng);
    aspect[i] = std::exp(std::uniform_real_distribution<double>(-0.3, 0.3)(rng));
  }

  // Solve for the within-bucket size skew that hits the target total area.
  auto total_area = [&](double shape) {
    double a = 0;
    for (std::size_t i = 0; i < n; ++i) a += std::pow(detail::side_at(bucket[i], u[i], shape), 2);
    return a;
  };
  const double target = spec.target_fr * spec.extent.area();
  double lo = -8, hi = 8;  // log(shape); larger shape means smaller objects
  if (target > total_area(std::exp(lo)) || target < total_area(std::exp(hi))) {
    throw Error(ErrorKind::InfeasibleSpec, "target FR " + std::to_string(spec.target_fr) + " is unreachable with " +
                                               std::to_string(n) + " objects");
  }
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (total_area(std::exp(mid)) > target) lo = mid; else hi = mid;
  }
  const double shape = std::exp(0.5 * (lo + hi));

  std::vector<std::array<double, 2>> centers;
  for (int c = 0; c < spec.clusters; ++c) {
    centers.push_back({unit(rng) * spec.extent.width, unit(rng) * spec.extent.height});
  }

  // Place the largest objects first; rejection sampling keeps boxes disjoint.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> sides(n);
  for (std::size_t i = 0; i < n; ++i) sides[i] = detail::side_at(bucket[i], u[i], shape);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sides[a] > sides[b]; });

  std::vector<BBox> placed(n);
  std::vector<BBox> taken;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i : order) {
    const double w = sides[i] * aspect[i], h = sides[i] / aspect[i];
    if (w > spec.extent.width || h > spec.extent.height) {
      throw Error(ErrorKind::InfeasibleSpec, "object larger than the image");
    }
    const bool clustered = !centers.empty() && unit(rng) < spec.cluster_fraction;
    const std::size_t home = centers.empty() ? 0 : static_cast<std::size_t>(unit(rng) * centers.size());
    bool ok = false;
    for (int attempt = 0; attempt < 500 && !ok; ++attempt) {
      double cx, cy;
      if (clustered && attempt < 250) {
        cx = centers[home][0] + gauss(rng) * spec.cluster_spread;
        cy = centers[home][1] + gauss(rng) * spec.cluster_spread;
      } else {
        cx = unit(rng) * spec.extent.width;
        cy = unit(rng) * spec.extent.height;
      }
      cx = std::clamp(cx, 0.5 * w, spec.extent.width - 0.5 * w);
      cy = std::clamp(cy, 0.5 * h, spec.extent.height - 0.5 * h);
      const BBox cand{cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
      ok = std::none_of(taken.begin(), taken.end(), [&](const BBox& t) { return intersection_area(t, cand) > 0; });
      if (ok) {
        placed[i] = cand;
        taken.push_back(cand);
      }
    }
    if (!ok) throw Error(ErrorKind::InfeasibleSpec, "could not place object without overlap; lower the density");
  }

  scene.ground_truth = std::move(placed);
  std::uniform_int_distribution<int> cat(0, spec.categories - 1);
  std::uniform_real_distribution<double> score(0.3, 1.0);
  for (const auto& g : scene.ground_truth) {
    const int c = cat(rng);
    scene.categories.push_back(c);
    const bool dropped = unit(rng) < spec.drop_rate;
    const double side = std::sqrt(area(g));
    const double dx = gauss(rng) * spec.center_noise * side;
    const double dy = gauss(rng) * spec.center_noise * side;
    const double s = std::exp(gauss(rng) * spec.scale_noise);
    const double sc = score(rng);
    if (dropped) continue;
    const double hw = 0.5 * g.width() * s, hh = 0.5 * g.height() * s;
    const BBox det = clamp(BBox{g.cx() + dx - hw, g.cy() + dy - hh, g.cx() + dx + hw, g.cy() + dy + hh},
                           spec.extent.bounds());
    if (area(det) > 0) scene.coarse.push_back({det, sc, c});
  }
  return scene;
}

}  // namespace ufpmp
