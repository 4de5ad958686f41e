#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "ufpmp/boiw.hpp"
#include "ufpmp/mproxy.hpp"
#include "ufpmp/otcore.hpp"

namespace ufpmp {

enum class ProxyInit { KMeans, RandomNormal };

/// Desk-scale stand-in for multi-proxy detector training. Each class draws its
/// features from several unit-sphere modes with unequal weights; a learnable
/// linear embedding maps them to the feature space the proxies live in.
struct TrainSimConfig {
  int classes = 2;
  int proxies_per_class = 3;    // 0 selects K per class with adaptive_k
  int dim = 16;
  int modes_per_class = 3;
  double mode_spread = 2.0;     // offset of each mode from its class center, relative to the unit center
  double mode_decay = 0.6;      // mode weights proportional to decay^m
  double mode_noise = 0.1;
  int batch_per_class = 32;
  int steps = 2000;
  double lr = 0.05;
  double feature_lr = 0.0;
  double gamma = 5.0;
  bool use_ot = true;
  bool use_contrastive = true;
  int warmup_steps = 0;         // BoIW-only steps before OT and contrastive terms switch on
  SinkhornOptions sinkhorn{};
  std::size_t boiw_size = 200;
  int boiw_m = 8;
  int boiw_cadence = 2000;
  ProxyInit init = ProxyInit::KMeans;
  int init_samples = 64;
  int init_restarts = 5;
  double dbscan_eps = 0.3;
  int dbscan_min_pts = 5;
  int k_max = 20;
  std::uint64_t seed = 7;

  void validate() const {
    auto bad = [](const std::string& m) { throw Error(ErrorKind::InvalidParameter, "train-sim: " + m); };
    if (classes < 2) bad("need at least two classes");
    if (proxies_per_class < 0) bad("proxies_per_class must be >= 0");
    if (dim < 2) bad("dim must be >= 2");
    if (modes_per_class < 1 || modes_per_class >= dim) bad("modes_per_class must be in [1, dim)");
    if (!(mode_spread >= 0)) bad("mode_spread must be >= 0");
    if (!(mode_decay > 0 && mode_decay <= 1)) bad("mode_decay must be in (0,1]");
    if (!(mode_noise >= 0)) bad("mode_noise must be >= 0");
    if (batch_per_class < 1) bad("batch_per_class must be >= 1");
    if (steps < 0) bad("steps must be >= 0");
    if (!(lr > 0) || !(feature_lr >= 0)) bad("learning rates must be positive");
    if (!(gamma > 0)) bad("gamma must be positive");
    if (warmup_steps < 0) bad("warmup_steps must be >= 0");
    if (boiw_size < 1 || boiw_m < 0 || boiw_m > batch_per_class) bad("invalid BoIW queue settings");
    if (boiw_cadence < 1) bad("boiw_cadence must be >= 1");
    if (init_samples < 1 || init_restarts < 1) bad("init_samples and init_restarts must be >= 1");
    if (!(sinkhorn.epsilon > 0) || sinkhorn.max_iters < 1 || !(sinkhorn.tol > 0)) bad("invalid Sinkhorn settings");
    if (!(dbscan_eps > 0) || dbscan_min_pts < 1 || k_max < 1) bad("invalid DBSCAN settings");
  }
};

struct TrainRecord {
  int step = 0;
  double l_det = 0, l_ot = 0, l_cl = 0;
  double min_proxy_distance = 0;    // min over classes of the min pairwise (1 - cos) among its proxies
  double max_proxy_similarity = 0;  // max over classes of the max pairwise cos among its proxies
};

struct TrainReport {
  std::vector<TrainRecord> records;
  std::vector<Matrix> initial_proxies;
  std::vector<Matrix> final_proxies;
  std::vector<Vector> marginals;         // column marginals used at the last step, per class
  std::vector<Vector> plan_column_mass;  // column sums of the last transport plan, per class
  double initial_min_distance = 0;
  double final_min_distance = 0;
  double final_max_similarity = 0;
};

/// Pairwise cosine extremes among the rows of each class's proxy matrix.
/// Classes with a single proxy are skipped; returns {min distance, max similarity}.
inline std::pair<double, double> proxy_diversity(const std::vector<Matrix>& proxies) {
  double min_dist = std::numeric_limits<double>::infinity();
  double max_sim = -std::numeric_limits<double>::infinity();
  for (const auto& w : proxies) {
    for (Eigen::Index a = 0; a < w.rows(); ++a) {
      for (Eigen::Index b = a + 1; b < w.rows(); ++b) {
        const double c = w.row(a).dot(w.row(b)) / (w.row(a).norm() * w.row(b).norm());
        min_dist = std::min(min_dist, 1.0 - c);
        max_sim = std::max(max_sim, c);
      }
    }
  }
  if (!std::isfinite(min_dist)) return {0.0, 1.0};
  return {min_dist, max_sim};
}

namespace detail {

struct SyntheticClasses {
  std::vector<std::vector<Vector>> modes;       // per class
  std::vector<std::discrete_distribution<int>> pick;

  Vector draw(int cls, double noise, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    const auto& m = modes[static_cast<std::size_t>(cls)];
    Vector z = m[static_cast<std::size_t>(pick[static_cast<std::size_t>(cls)](rng))];
    for (Eigen::Index d = 0; d < z.size(); ++d) z[d] += noise * g(rng);
    return z / z.norm();
  }
};

inline SyntheticClasses make_classes(const TrainSimConfig& cfg, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  SyntheticClasses sc;
  std::vector<double> w;
  for (int m = 0; m < cfg.modes_per_class; ++m) w.push_back(std::pow(cfg.mode_decay, m));
  auto random_unit = [&] {
    Vector v(cfg.dim);
    for (int d = 0; d < cfg.dim; ++d) v[d] = g(rng);
    return Vector(v / v.norm());
  };
  for (int c = 0; c < cfg.classes; ++c) {
    // Mode offsets are orthonormal and orthogonal to the class center, so every
    // pair of modes of one class has cosine 1 / (1 + spread^2).
    Matrix basis(cfg.dim, cfg.modes_per_class + 1);
    for (int b = 0; b <= cfg.modes_per_class; ++b) basis.col(b) = random_unit();
    const Matrix q = Eigen::HouseholderQR<Matrix>(basis).householderQ() * Matrix::Identity(cfg.dim, cfg.modes_per_class + 1);
    const Vector center = q.col(0);
    std::vector<Vector> modes;
    for (int m = 0; m < cfg.modes_per_class; ++m) {
      const Vector v = center + cfg.mode_spread * q.col(m + 1);
      modes.push_back(v / v.norm());
    }
    sc.modes.push_back(std::move(modes));
    sc.pick.emplace_back(w.begin(), w.end());
  }
  return sc;
}

}  // namespace detail

/// Gradient descent on L = L_det + L_ot + L_cl. L_det is binary cross-entropy of
/// the multi-proxy probability over every (instance, class) pair. L_ot uses a
/// Sinkhorn plan whose proxy marginal comes from the BoIW vocabulary once it is
/// full; the plan is held fixed when differentiating. Vocabulary words are
/// treated as constants in L_cl.
inline TrainReport train_sim(const TrainSimConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  auto data = detail::make_classes(cfg, rng);
  const auto nc = static_cast<std::size_t>(cfg.classes);

  Matrix embed = Matrix::Identity(cfg.dim, cfg.dim);

  // Proxy initialization from an initial feature sample.
  std::vector<Matrix> proxies;
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t c = 0; c < nc; ++c) {
    std::vector<Vector> sample;
    for (int s = 0; s < cfg.init_samples; ++s) sample.push_back(data.draw(static_cast<int>(c), cfg.mode_noise, rng));
    int k = cfg.proxies_per_class;
    if (k == 0) k = adaptive_k(sample, cfg.dbscan_eps, cfg.dbscan_min_pts, cfg.k_max);
    k = std::min(k, cfg.init_samples);
    Matrix w(k, cfg.dim);
    if (cfg.init == ProxyInit::KMeans) {
      // Proxy k starts at the k-th largest cluster, matching the descending marginal order.
      KMeansResult km;
      double best = std::numeric_limits<double>::infinity();
      for (int restart = 0; restart < cfg.init_restarts; ++restart) {
        auto trial = kmeans(sample, k, cfg.seed + 1000 * c + static_cast<std::uint64_t>(restart));
        double inertia = 0;
        for (std::size_t i = 0; i < sample.size(); ++i) {
          inertia += (sample[i] - trial.centers[static_cast<std::size_t>(trial.labels[i])]).squaredNorm();
        }
        if (inertia < best) {
          best = inertia;
          km = std::move(trial);
        }
      }
      std::vector<std::size_t> order(km.sizes.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return km.sizes[a] > km.sizes[b]; });
      for (int r = 0; r < k; ++r) {
        Vector v = km.centers[order[static_cast<std::size_t>(r)]];
        for (int d = 0; d < cfg.dim; ++d) v[d] += 1e-3 * g(rng);
        w.row(r) = v.transpose() / v.norm();
      }
    } else {
      for (int r = 0; r < k; ++r) {
        Vector v(cfg.dim);
        for (int d = 0; d < cfg.dim; ++d) v[d] = g(rng);
        w.row(r) = v.transpose() / v.norm();
      }
    }
    proxies.push_back(std::move(w));
  }

  TrainReport report;
  report.initial_proxies = proxies;
  report.initial_min_distance = proxy_diversity(proxies).first;

  std::vector<VocabQueue> vocab;
  std::vector<Vector> marginal(nc);
  std::vector<int> last_estimate(nc, -1);
  for (std::size_t c = 0; c < nc; ++c) {
    vocab.emplace_back(static_cast<int>(c), cfg.boiw_size);
    marginal[c] = Vector::Constant(proxies[c].rows(), 1.0 / static_cast<double>(proxies[c].rows()));
  }
  report.marginals = marginal;
  report.plan_column_mass = marginal;

  const double n_inst = static_cast<double>(cfg.classes * cfg.batch_per_class);
  for (int step = 0; step < cfg.steps; ++step) {
    const bool joint = step >= cfg.warmup_steps;
    std::vector<std::vector<Vector>> raw(nc), feat(nc);
    for (std::size_t c = 0; c < nc; ++c) {
      for (int b = 0; b < cfg.batch_per_class; ++b) {
        raw[c].push_back(data.draw(static_cast<int>(c), cfg.mode_noise, rng));
        feat[c].push_back(embed * raw[c].back());
      }
    }

    ProxyBank bank(proxies, cfg.gamma);
    std::vector<Matrix> d_proxies;
    for (const auto& w : proxies) d_proxies.push_back(Matrix::Zero(w.rows(), w.cols()));
    std::vector<std::vector<Vector>> d_feat(nc);
    for (std::size_t c = 0; c < nc; ++c) d_feat[c].assign(feat[c].size(), Vector::Zero(cfg.dim));

    TrainRecord rec;
    rec.step = step + 1;

    // Detection term.
    for (std::size_t c = 0; c < nc; ++c) {
      for (std::size_t j = 0; j < feat[c].size(); ++j) {
        for (std::size_t i = 0; i < nc; ++i) {
          const auto gr = multi_proxy_grad(bank, i, feat[c][j]);
          const double t = i == c ? 1.0 : 0.0;
          const double p = std::clamp(gr.prob, 1e-15, 1.0 - 1e-15);
          rec.l_det -= (t * std::log(p) + (1 - t) * std::log(1 - p)) / n_inst;
          const double dl_dp = (p - t) / (p * (1 - p)) / n_inst;
          d_proxies[i] += dl_dp * gr.d_proxies;
          d_feat[c][j] += dl_dp * gr.d_x;
        }
      }
    }

    // Transport term with BoIW marginals.
    if (cfg.use_ot && joint) {
      for (std::size_t c = 0; c < nc; ++c) {
        const auto n = static_cast<Eigen::Index>(feat[c].size());
        Matrix f(n, cfg.dim);
        for (Eigen::Index j = 0; j < n; ++j) f.row(j) = feat[c][static_cast<std::size_t>(j)].transpose();
        const CostMatrix cost = cost_matrix(f, proxies[c]);
        const Vector q = Vector::Constant(n, 1.0 / static_cast<double>(n));
        const TransportPlan plan = sinkhorn(cost, marginal[c], q, cfg.sinkhorn);
        rec.l_ot += transport_cost(cost, plan.entries) / static_cast<double>(nc);
        report.plan_column_mass[c] = plan.entries.colwise().sum().transpose();

        const Matrix& w = proxies[c];
        for (Eigen::Index j = 0; j < n; ++j) {
          const Vector& x = feat[c][static_cast<std::size_t>(j)];
          const double xn = x.norm();
          const Vector xh = x / xn;
          for (Eigen::Index k = 0; k < w.rows(); ++k) {
            const double wn = w.row(k).norm();
            const Vector wh = w.row(k).transpose() / wn;
            const double s = xh.dot(wh);
            // C = (1 - s) / 2, so dC = -ds / 2; weighted by the fixed plan entry.
            const double coef = -0.5 * plan.entries(j, k) / static_cast<double>(nc);
            d_proxies[c].row(k) += coef * ((xh - s * wh) / wn).transpose();
            d_feat[c][static_cast<std::size_t>(j)] += coef * (wh - s * xh) / xn;
          }
        }
      }
    }

    // Contrastive vocabulary term.
    const bool vocab_ready = std::all_of(vocab.begin(), vocab.end(), [](const VocabQueue& q) { return !q.empty(); });
    if (cfg.use_contrastive && joint && vocab_ready) {
      std::vector<LabeledFeature> batch;
      for (std::size_t c = 0; c < nc; ++c) {
        for (const auto& x : feat[c]) batch.push_back({x, static_cast<int>(c)});
      }
      rec.l_cl = contrastive_loss(batch, vocab);
      std::size_t idx = 0;
      for (std::size_t c = 0; c < nc; ++c) {
        for (std::size_t j = 0; j < feat[c].size(); ++j, ++idx) {
          d_feat[c][j] += contrastive_grad(batch[idx], vocab) / n_inst;
        }
      }
    }

    // Parameter updates.
    for (std::size_t c = 0; c < nc; ++c) {
      proxies[c] -= cfg.lr * d_proxies[c];
      for (Eigen::Index k = 0; k < proxies[c].rows(); ++k) {
        const double n = proxies[c].row(k).norm();
        if (n > 1e-12) proxies[c].row(k) /= n; else proxies[c].row(k) = report.initial_proxies[c].row(k);
      }
    }
    if (cfg.feature_lr > 0) {
      Matrix d_embed = Matrix::Zero(cfg.dim, cfg.dim);
      for (std::size_t c = 0; c < nc; ++c) {
        for (std::size_t j = 0; j < feat[c].size(); ++j) d_embed += d_feat[c][j] * raw[c][j].transpose();
      }
      embed -= cfg.feature_lr * d_embed;
    }

    // Vocabulary refresh and periodic marginal re-estimation.
    for (std::size_t c = 0; c < nc; ++c) {
      update(vocab[c], std::span<const Vector>(feat[c]), cfg.boiw_m, rng);
      const auto k = static_cast<int>(proxies[c].rows());
      const bool due = last_estimate[c] < 0 || step - last_estimate[c] >= cfg.boiw_cadence;
      if (vocab[c].warm() && due) {
        marginal[c] = estimate_marginals(vocab[c], k, cfg.seed + static_cast<std::uint64_t>(step) * 31 + c).p;
        last_estimate[c] = step;
      }
    }

    const auto [dist, sim] = proxy_diversity(proxies);
    rec.min_proxy_distance = dist;
    rec.max_proxy_similarity = sim;
    report.records.push_back(rec);
  }

  report.final_proxies = proxies;
  report.marginals = marginal;
  const auto [dist, sim] = proxy_diversity(proxies);
  report.final_min_distance = dist;
  report.final_max_similarity = sim;
  return report;
}

}  // namespace ufpmp
