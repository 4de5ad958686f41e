#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ufpmp/otcore.hpp"

namespace ufpmp {

/// Fixed-capacity FIFO of instance features for one class.
class VocabQueue {
 public:
  VocabQueue(int class_id, std::size_t capacity) : class_id_(class_id), capacity_(capacity) {
    if (capacity == 0) throw Error(ErrorKind::InvalidParameter, "vocabulary capacity must be positive");
  }

  int class_id() const noexcept { return class_id_; }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  bool warm() const noexcept { return entries_.size() == capacity_; }
  const std::deque<Vector>& entries() const noexcept { return entries_; }

  /// Appends one word, evicting the oldest when full.
  void push(Vector v) {
    if (!entries_.empty() && v.size() != entries_.front().size()) {
      throw Error(ErrorKind::InvalidInput, "feature dimension mismatch in vocabulary");
    }
    entries_.push_back(std::move(v));
    if (entries_.size() > capacity_) entries_.pop_front();
  }

 private:
  int class_id_;
  std::size_t capacity_;
  std::deque<Vector> entries_;
};

/// Inserts `m` positives drawn uniformly without replacement from the batch.
/// The chosen words keep their batch order; an empty batch leaves the queue alone.
template <class Rng>
void update(VocabQueue& queue, std::span<const Vector> batch_positives, int m, Rng& rng) {
  if (m < 0) throw Error(ErrorKind::InvalidParameter, "m must be non-negative");
  if (batch_positives.empty()) return;
  const auto n = batch_positives.size();
  if (static_cast<std::size_t>(m) > n) {
    throw Error(ErrorKind::InvalidParameter,
                "m = " + std::to_string(m) + " exceeds the " + std::to_string(n) + " batch positives");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < static_cast<std::size_t>(m); ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(static_cast<std::size_t>(m));
  std::sort(idx.begin(), idx.end());
  for (std::size_t i : idx) queue.push(batch_positives[i]);
}

struct KMeansResult {
  std::vector<Vector> centers;
  std::vector<int> labels;
  std::vector<std::size_t> sizes;
};

/// Lloyd's k-means with k-means++ seeding. Empty clusters are left empty.
/// Distance ties go to the lowest cluster index.
inline KMeansResult kmeans(std::span<const Vector> points, int k, std::uint64_t seed, int max_iters = 100) {
  if (k < 1) throw Error(ErrorKind::InvalidParameter, "k must be >= 1");
  if (points.size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorKind::InsufficientVocabulary,
                std::to_string(points.size()) + " points cannot form " + std::to_string(k) + " clusters");
  }
  std::mt19937_64 rng(seed);
  const std::size_t n = points.size();
  const auto kk = static_cast<std::size_t>(k);

  KMeansResult res;
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  res.centers.push_back(points[first(rng)]);
  std::vector<double> d2(n);
  while (res.centers.size() < kk) {
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : res.centers) best = std::min(best, (points[i] - c).squaredNorm());
      d2[i] = best;
      total += best;
    }
    std::size_t chosen = 0;
    if (total > 0) {
      double u = std::uniform_real_distribution<double>(0, total)(rng);
      for (chosen = 0; chosen + 1 < n; ++chosen) {
        if (u < d2[chosen]) break;
        u -= d2[chosen];
      }
    }
    res.centers.push_back(points[chosen]);
  }

  res.labels.assign(n, -1);
  for (int it = 0; it < max_iters; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best_c = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < kk; ++c) {
        const double d = (points[i] - res.centers[c]).squaredNorm();
        if (d < best) {
          best = d;
          best_c = static_cast<int>(c);
        }
      }
      if (res.labels[i] != best_c) {
        res.labels[i] = best_c;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<Vector> sums(kk, Vector::Zero(points[0].size()));
    std::vector<std::size_t> counts(kk, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[static_cast<std::size_t>(res.labels[i])] += points[i];
      ++counts[static_cast<std::size_t>(res.labels[i])];
    }
    for (std::size_t c = 0; c < kk; ++c) {
      if (counts[c] > 0) res.centers[c] = sums[c] / static_cast<double>(counts[c]);
    }
  }
  res.sizes.assign(kk, 0);
  for (int l : res.labels) ++res.sizes[static_cast<std::size_t>(l)];
  return res;
}

/// Cluster-size distribution of a vocabulary, sorted by decreasing probability.
struct MarginalEstimate {
  Vector p;
  std::vector<std::size_t> cluster_sizes;
  std::vector<Vector> centers;  // unit-sphere k-means centers in the same order as p
};

inline MarginalEstimate estimate_marginals(const VocabQueue& queue, int k, std::uint64_t seed) {
  if (k < 1) throw Error(ErrorKind::InvalidParameter, "K must be >= 1");
  if (queue.size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorKind::InsufficientVocabulary, "class " + std::to_string(queue.class_id()) + " vocabulary holds " +
                                                       std::to_string(queue.size()) + " words, K = " +
                                                       std::to_string(k));
  }
  std::vector<Vector> unit;
  unit.reserve(queue.size());
  for (const auto& v : queue.entries()) {
    const double n = v.norm();
    unit.push_back(n > 0 ? Vector(v / n) : v);
  }
  const auto km = kmeans(unit, k, seed);

  std::vector<std::size_t> order(km.sizes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return km.sizes[a] > km.sizes[b]; });

  MarginalEstimate est;
  est.p.resize(k);
  const double total = static_cast<double>(unit.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    est.cluster_sizes.push_back(km.sizes[order[r]]);
    est.centers.push_back(km.centers[order[r]]);
    est.p[static_cast<Eigen::Index>(r)] = static_cast<double>(km.sizes[order[r]]) / total;
  }
  return est;
}

struct LabeledFeature {
  Vector feature;
  int class_id = 0;
};

namespace detail {

inline const VocabQueue* find_vocab(std::span<const VocabQueue> vocab, int class_id) {
  for (const auto& q : vocab) if (q.class_id() == class_id) return &q;
  return nullptr;
}

inline double log_sum_exp(const std::vector<double>& xs) {
  const double mx = *std::max_element(xs.begin(), xs.end());
  double s = 0;
  for (double x : xs) s += std::exp(x - mx);
  return mx + std::log(s);
}

struct ContrastiveTerms {
  std::vector<double> own_logits, all_logits;
  std::vector<const Vector*> own_words, all_words;
};

inline ContrastiveTerms contrastive_terms(const LabeledFeature& inst, std::span<const VocabQueue> vocab) {
  const VocabQueue* own = find_vocab(vocab, inst.class_id);
  if (own == nullptr || own->empty()) {
    throw Error(ErrorKind::InvalidState, "class " + std::to_string(inst.class_id) + " has an empty vocabulary");
  }
  ContrastiveTerms t;
  for (const auto& q : vocab) {
    for (const auto& v : q.entries()) {
      if (v.size() != inst.feature.size()) throw Error(ErrorKind::InvalidInput, "vocabulary dimension mismatch");
      const double logit = v.dot(inst.feature);
      t.all_logits.push_back(logit);
      t.all_words.push_back(&v);
      if (&q == own) {
        t.own_logits.push_back(logit);
        t.own_words.push_back(&v);
      }
    }
  }
  return t;
}

}  // namespace detail

/// Mean over the batch of -log(sum_own exp(v.x) / sum_all exp(u.x)).
inline double contrastive_loss(std::span<const LabeledFeature> instances, std::span<const VocabQueue> vocab) {
  const bool any = std::any_of(vocab.begin(), vocab.end(), [](const VocabQueue& q) { return !q.empty(); });
  if (!any) throw Error(ErrorKind::InvalidState, "vocabulary is empty");
  if (instances.empty()) return 0.0;
  double total = 0;
  for (const auto& inst : instances) {
    const auto t = detail::contrastive_terms(inst, vocab);
    total += detail::log_sum_exp(t.all_logits) - detail::log_sum_exp(t.own_logits);
  }
  return std::max(0.0, total / static_cast<double>(instances.size()));
}

/// Gradient of one instance's contrastive term with respect to its feature.
inline Vector contrastive_grad(const LabeledFeature& inst, std::span<const VocabQueue> vocab) {
  const auto t = detail::contrastive_terms(inst, vocab);
  const double lse_all = detail::log_sum_exp(t.all_logits);
  const double lse_own = detail::log_sum_exp(t.own_logits);
  Vector g = Vector::Zero(inst.feature.size());
  for (std::size_t i = 0; i < t.all_words.size(); ++i) g += std::exp(t.all_logits[i] - lse_all) * *t.all_words[i];
  for (std::size_t i = 0; i < t.own_words.size(); ++i) g -= std::exp(t.own_logits[i] - lse_own) * *t.own_words[i];
  return g;
}

}  // namespace ufpmp
