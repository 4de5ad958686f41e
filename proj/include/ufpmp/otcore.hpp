#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ufpmp/error.hpp"

namespace ufpmp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Instance-to-proxy matching cost (1 - cosine) / 2, rows are instances, columns proxies.
struct CostMatrix {
  Matrix entries;

  Eigen::Index rows() const noexcept { return entries.rows(); }
  Eigen::Index cols() const noexcept { return entries.cols(); }
};

/// Coupling between instances (rows, marginal q) and proxies (columns, marginal p).
struct TransportPlan {
  Matrix entries;
  Vector row_marginal;
  Vector col_marginal;
  int iterations = 0;
  double violation = 0;  // L1 marginal error, worst of the two axes
  bool converged = true;
};

struct SinkhornOptions {
  double epsilon = 0.05;
  int max_iters = 1000;
  double tol = 1e-6;
};

namespace detail {

inline Matrix normalized_rows(const Matrix& m, const char* what) {
  Matrix out = m;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double n = m.row(r).norm();
    if (!(n > 0)) throw Error(ErrorKind::InvalidInput, std::string(what) + " row " + std::to_string(r) + " has zero norm");
    out.row(r) /= n;
  }
  return out;
}

inline void check_probability(const Vector& v, const char* what) {
  if (v.size() == 0) throw Error(ErrorKind::InvalidInput, std::string(what) + " marginal is empty");
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0) || !std::isfinite(v[i])) {
      throw Error(ErrorKind::InvalidInput, std::string(what) + " marginal has a negative or non-finite entry");
    }
  }
  if (std::abs(v.sum() - 1.0) > 1e-9) {
    throw Error(ErrorKind::InvalidInput, std::string(what) + " marginal does not sum to 1");
  }
}

inline void check_shapes(const CostMatrix& cost, const Vector& p, const Vector& q) {
  if (cost.cols() != p.size() || cost.rows() != q.size()) {
    throw Error(ErrorKind::InvalidInput, "cost matrix is " + std::to_string(cost.rows()) + "x" +
                                             std::to_string(cost.cols()) + " but marginals have sizes q=" +
                                             std::to_string(q.size()) + ", p=" + std::to_string(p.size()));
  }
}

}  // namespace detail

/// Cost between every feature row and every proxy row.
inline CostMatrix cost_matrix(const Matrix& features, const Matrix& proxies) {
  if (features.cols() != proxies.cols()) throw Error(ErrorKind::InvalidInput, "feature and proxy dimensions differ");
  const Matrix f = detail::normalized_rows(features, "feature");
  const Matrix w = detail::normalized_rows(proxies, "proxy");
  Matrix c = (1.0 - (f * w.transpose()).array()) * 0.5;
  return {c.cwiseMax(0.0).cwiseMin(1.0)};
}

inline double transport_cost(const CostMatrix& cost, const Matrix& plan) {
  return cost.entries.cwiseProduct(plan).sum();
}

/// Entropic optimal transport via log-domain Sinkhorn-Knopp scaling.
/// Rows follow `q`, columns follow `p`; zero-mass rows or columns stay identically zero.
inline TransportPlan sinkhorn(const CostMatrix& cost, const Vector& p, const Vector& q,
                              const SinkhornOptions& opt = {}) {
  detail::check_shapes(cost, p, q);
  detail::check_probability(p, "column");
  detail::check_probability(q, "row");
  if (!(opt.epsilon > 0)) throw Error(ErrorKind::InvalidParameter, "epsilon must be positive");
  if (opt.max_iters < 1) throw Error(ErrorKind::InvalidParameter, "max_iters must be >= 1");
  if (!(opt.tol > 0)) throw Error(ErrorKind::InvalidParameter, "tol must be positive");

  const Eigen::Index n = cost.rows(), k = cost.cols();
  const double eps = opt.epsilon;
  const double ninf = -std::numeric_limits<double>::infinity();
  const Matrix& c = cost.entries;

  Vector f = Vector::Zero(n), g = Vector::Zero(k);
  for (Eigen::Index j = 0; j < n; ++j) if (q[j] == 0) f[j] = ninf;
  for (Eigen::Index l = 0; l < k; ++l) if (p[l] == 0) g[l] = ninf;

  auto lse_row = [&](Eigen::Index j) {
    double mx = ninf;
    for (Eigen::Index l = 0; l < k; ++l) if (p[l] > 0) mx = std::max(mx, (g[l] - c(j, l)) / eps);
    double s = 0;
    for (Eigen::Index l = 0; l < k; ++l) if (p[l] > 0) s += std::exp((g[l] - c(j, l)) / eps - mx);
    return mx + std::log(s);
  };
  auto lse_col = [&](Eigen::Index l) {
    double mx = ninf;
    for (Eigen::Index j = 0; j < n; ++j) if (q[j] > 0) mx = std::max(mx, (f[j] - c(j, l)) / eps);
    double s = 0;
    for (Eigen::Index j = 0; j < n; ++j) if (q[j] > 0) s += std::exp((f[j] - c(j, l)) / eps - mx);
    return mx + std::log(s);
  };
  auto build = [&] {
    Matrix plan = Matrix::Zero(n, k);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (q[j] == 0) continue;
      for (Eigen::Index l = 0; l < k; ++l) {
        if (p[l] > 0) plan(j, l) = std::exp((f[j] + g[l] - c(j, l)) / eps);
      }
    }
    return plan;
  };

  TransportPlan out;
  out.row_marginal = q;
  out.col_marginal = p;
  out.converged = false;
  for (int it = 1; it <= opt.max_iters; ++it) {
    for (Eigen::Index j = 0; j < n; ++j) if (q[j] > 0) f[j] = eps * std::log(q[j]) - eps * lse_row(j);
    for (Eigen::Index l = 0; l < k; ++l) if (p[l] > 0) g[l] = eps * std::log(p[l]) - eps * lse_col(l);

    // Columns are exact right after the g update; only rows can be off.
    double row_err = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      double s = 0;
      if (q[j] > 0) {
        for (Eigen::Index l = 0; l < k; ++l) if (p[l] > 0) s += std::exp((f[j] + g[l] - c(j, l)) / eps);
      }
      row_err += std::abs(s - q[j]);
    }
    out.iterations = it;
    out.violation = row_err;
    if (row_err < opt.tol) {
      out.converged = true;
      break;
    }
  }
  out.entries = build();
  const double col_err = (out.entries.colwise().sum().transpose() - p).cwiseAbs().sum();
  const double row_err = (out.entries.rowwise().sum() - q).cwiseAbs().sum();
  out.violation = std::max(row_err, col_err);
  return out;
}

struct ExactTransport {
  Matrix plan;
  double cost = 0;
};

/// Exact transport by enumerating every basic feasible solution of the
/// transportation LP. Only meant as a small-instance oracle (both sides <= 4).
inline ExactTransport exact_ot(const CostMatrix& cost, const Vector& p, const Vector& q) {
  detail::check_shapes(cost, p, q);
  const Eigen::Index n = cost.rows(), k = cost.cols();
  if (n > 4 || k > 4) throw Error(ErrorKind::InvalidParameter, "exact_ot is limited to 4x4 problems");
  detail::check_probability(p, "column");
  detail::check_probability(q, "row");

  const Eigen::Index cells = n * k;
  const Eigen::Index basis = n + k - 1;
  Matrix a = Matrix::Zero(n + k, cells);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index l = 0; l < k; ++l) {
      a(j, j * k + l) = 1;
      a(n + l, j * k + l) = 1;
    }
  }
  Vector b(n + k);
  b << q, p;

  ExactTransport best;
  best.cost = std::numeric_limits<double>::infinity();

  std::vector<bool> pick(static_cast<std::size_t>(cells), false);
  std::fill(pick.begin(), pick.begin() + basis, true);
  Matrix sub(n + k, basis);
  do {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index i = 0; i < cells; ++i) if (pick[static_cast<std::size_t>(i)]) cols.push_back(i);
    for (Eigen::Index c = 0; c < basis; ++c) sub.col(c) = a.col(cols[static_cast<std::size_t>(c)]);

    Eigen::FullPivLU<Matrix> lu(sub);
    if (lu.rank() != basis) continue;
    const Vector x = lu.solve(b);
    if ((sub * x - b).cwiseAbs().maxCoeff() > 1e-9 || x.minCoeff() < -1e-12) continue;

    Matrix plan = Matrix::Zero(n, k);
    for (Eigen::Index c = 0; c < basis; ++c) {
      const Eigen::Index cell = cols[static_cast<std::size_t>(c)];
      plan(cell / k, cell % k) = std::max(0.0, x[c]);
    }
    const double v = transport_cost(cost, plan);
    if (v < best.cost) {
      best.cost = v;
      best.plan = plan;
    }
  } while (std::prev_permutation(pick.begin(), pick.end()));

  if (!std::isfinite(best.cost)) throw Error(ErrorKind::InvalidState, "no feasible basis found");
  return best;
}

/// Mean over classes of the per-class transport cost tr(C^T P).
inline double ot_loss(std::span<const CostMatrix> costs, std::span<const TransportPlan> plans) {
  if (costs.empty()) throw Error(ErrorKind::InvalidInput, "ot_loss needs at least one class");
  if (costs.size() != plans.size()) throw Error(ErrorKind::InvalidInput, "cost and plan counts differ");
  double total = 0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (costs[i].rows() != plans[i].entries.rows() || costs[i].cols() != plans[i].entries.cols()) {
      throw Error(ErrorKind::InvalidInput, "class " + std::to_string(i) + ": cost and plan shapes differ");
    }
    total += transport_cost(costs[i], plans[i].entries);
  }
  return total / static_cast<double>(costs.size());
}

}  // namespace ufpmp
