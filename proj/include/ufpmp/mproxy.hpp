#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ufpmp/otcore.hpp"

namespace ufpmp {

inline double sigmoid(double z) noexcept {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

/// Per-class proxy matrices (one proxy per row) and the logit scale gamma.
class ProxyBank {
 public:
  ProxyBank(std::vector<Matrix> proxies, double gamma) : proxies_(std::move(proxies)), gamma_(gamma) {
    if (!(gamma_ > 0)) throw Error(ErrorKind::InvalidParameter, "gamma must be positive");
    if (proxies_.empty()) throw Error(ErrorKind::InvalidParameter, "proxy bank needs at least one class");
    const auto dim = proxies_.front().cols();
    for (std::size_t i = 0; i < proxies_.size(); ++i) {
      const auto& w = proxies_[i];
      if (w.rows() < 1) throw Error(ErrorKind::InvalidParameter, "class " + std::to_string(i) + " has no proxies");
      if (w.cols() != dim) throw Error(ErrorKind::InvalidParameter, "proxy dimensions differ across classes");
      for (Eigen::Index k = 0; k < w.rows(); ++k) {
        if (!(w.row(k).norm() > 0)) {
          throw Error(ErrorKind::InvalidParameter,
                      "class " + std::to_string(i) + " proxy " + std::to_string(k) + " has zero norm");
        }
      }
    }
  }

  std::size_t num_classes() const noexcept { return proxies_.size(); }
  Eigen::Index dim() const noexcept { return proxies_.front().cols(); }
  double gamma() const noexcept { return gamma_; }
  const Matrix& proxies(std::size_t class_id) const { return proxies_.at(class_id); }
  Matrix& proxies(std::size_t class_id) { return proxies_.at(class_id); }
  const std::vector<Matrix>& all() const noexcept { return proxies_; }

 private:
  std::vector<Matrix> proxies_;
  double gamma_;
};

/// Sigmoid(w . x): the conventional single-center classifier.
inline double single_proxy_prob(const Vector& w, const Vector& x) {
  if (!(w.norm() > 0) || !(x.norm() > 0)) throw Error(ErrorKind::InvalidInput, "zero vector in single_proxy_prob");
  if (w.size() != x.size()) throw Error(ErrorKind::InvalidInput, "dimension mismatch");
  return sigmoid(w.dot(x));
}

/// Cosine similarities between x and each proxy of one class.
inline Vector similarity_profile(const ProxyBank& bank, std::size_t class_id, const Vector& x) {
  if (class_id >= bank.num_classes()) throw Error(ErrorKind::InvalidInput, "unknown class " + std::to_string(class_id));
  if (x.size() != bank.dim()) throw Error(ErrorKind::InvalidInput, "feature dimension mismatch");
  const double xn = x.norm();
  if (!(xn > 0)) throw Error(ErrorKind::InvalidInput, "zero feature vector");
  const Matrix& w = bank.proxies(class_id);
  Vector s = (w * x) / xn;
  for (Eigen::Index k = 0; k < w.rows(); ++k) s[k] = std::clamp(s[k] / w.row(k).norm(), -1.0, 1.0);
  return s;
}

inline Vector softmax(const Vector& s) {
  const Vector e = (s.array() - s.maxCoeff()).exp();
  return e / e.sum();
}

/// Softmax-weighted mean of the similarities.
inline double aggregate_similarity(const Vector& s) { return softmax(s).dot(s); }

inline double multi_proxy_prob(const ProxyBank& bank, std::size_t class_id, const Vector& x) {
  return sigmoid(bank.gamma() * aggregate_similarity(similarity_profile(bank, class_id, x)));
}

struct MultiProxyGrad {
  double prob = 0;
  Vector d_x;                // d prob / d x
  Matrix d_proxies;          // row k: d prob / d w_k
};

/// Analytic gradient of the multi-proxy probability.
inline MultiProxyGrad multi_proxy_grad(const ProxyBank& bank, std::size_t class_id, const Vector& x) {
  const Vector s = similarity_profile(bank, class_id, x);
  const Vector pi = softmax(s);
  const double agg = pi.dot(s);
  const double prob = sigmoid(bank.gamma() * agg);
  const double d_agg = bank.gamma() * prob * (1.0 - prob);

  const Matrix& w = bank.proxies(class_id);
  const double xn = x.norm();
  const Vector xh = x / xn;

  MultiProxyGrad g;
  g.prob = prob;
  g.d_x = Vector::Zero(x.size());
  g.d_proxies = Matrix::Zero(w.rows(), w.cols());
  for (Eigen::Index k = 0; k < w.rows(); ++k) {
    const double wn = w.row(k).norm();
    const Vector wh = w.row(k).transpose() / wn;
    // d agg / d s_k = pi_k (1 + s_k - agg)
    const double d_sk = d_agg * pi[k] * (1.0 + s[k] - agg);
    g.d_x += d_sk * (wh - s[k] * xh) / xn;
    g.d_proxies.row(k) = d_sk * ((xh - s[k] * wh) / wn).transpose();
  }
  return g;
}

/// Proxy count from a DBSCAN pass over L2-normalized features: number of
/// clusters found, noise ignored, clamped to [1, k_max].
inline int adaptive_k(std::span<const Vector> features, double eps, int min_pts, int k_max = 20) {
  if (features.empty()) throw Error(ErrorKind::InvalidInput, "adaptive_k needs at least one feature");
  if (!(eps > 0)) throw Error(ErrorKind::InvalidParameter, "DBSCAN eps must be positive");
  if (min_pts < 1) throw Error(ErrorKind::InvalidParameter, "DBSCAN min_pts must be >= 1");
  if (k_max < 1) throw Error(ErrorKind::InvalidParameter, "k_max must be >= 1");

  const std::size_t n = features.size();
  std::vector<Vector> unit;
  unit.reserve(n);
  for (const auto& f : features) {
    const double nrm = f.norm();
    if (!(nrm > 0)) throw Error(ErrorKind::InvalidInput, "zero feature vector");
    unit.push_back(f / nrm);
  }

  const double eps2 = eps * eps;
  auto neighbours = [&](std::size_t i) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < n; ++j) {
      if ((unit[i] - unit[j]).squaredNorm() <= eps2) out.push_back(j);
    }
    return out;
  };

  constexpr int kUnvisited = -2, kNoise = -1;
  std::vector<int> label(n, kUnvisited);
  int clusters = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] != kUnvisited) continue;
    auto seeds = neighbours(i);
    if (seeds.size() < static_cast<std::size_t>(min_pts)) {
      label[i] = kNoise;
      continue;
    }
    const int c = clusters++;
    label[i] = c;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const std::size_t j = seeds[s];
      if (label[j] == kNoise) label[j] = c;
      if (label[j] != kUnvisited) continue;
      label[j] = c;
      auto more = neighbours(j);
      if (more.size() >= static_cast<std::size_t>(min_pts)) seeds.insert(seeds.end(), more.begin(), more.end());
    }
  }
  return std::clamp(clusters, 1, k_max);
}

}  // namespace ufpmp
