#pragma once

// Independent references for the test suites. Everything here works in the
// explicit embedding H = R^{|Y|} with dense LU solves, never through the
// library's Cholesky factor or label expansions.

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "osp/kernel.hpp"
#include "osp/losses.hpp"

namespace oracle {

inline Eigen::MatrixXd gram(const osp::KernelSpec& k, const std::vector<Eigen::VectorXd>& xs) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = k(xs[i], xs[j]);
  return g;
}

// Rows are phi(y_s)^T.
inline Eigen::MatrixXd one_hot(const std::vector<std::size_t>& ys, std::size_t num_labels) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ys.size()),
                                            static_cast<Eigen::Index>(num_labels));
  for (std::size_t s = 0; s < ys.size(); ++s) y(static_cast<Eigen::Index>(s), ys[s]) = 1.0;
  return y;
}

// Primal KAAR with the linear kernel: g(x) = W x minimizing
//   sum_{s<t} ||targets_s - W x_s||^2 + ridge ||W||_F^2 + ||W x_t||^2,
// evaluated at `query`. xs holds x_1..x_t, targets the first t-1 rows.
inline Eigen::VectorXd primal_kaar(const std::vector<Eigen::VectorXd>& xs,
                                   const Eigen::MatrixXd& targets, double ridge,
                                   const Eigen::VectorXd& query) {
  const auto d = xs.front().size();
  Eigen::MatrixXd cov = ridge * Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(targets.cols(), d);
  for (std::size_t s = 0; s < xs.size(); ++s) {
    cov += xs[s] * xs[s].transpose();
    if (s + 1 < xs.size()) cross += targets.row(static_cast<Eigen::Index>(s)).transpose() * xs[s].transpose();
  }
  const Eigen::MatrixXd w = cov.transpose().fullPivLu().solve(cross.transpose()).transpose();
  return w * query;
}

// Dual KAAR for any kernel through a dense LU of K_t + ridge I.
inline Eigen::VectorXd dual_kaar(const osp::KernelSpec& k, const std::vector<Eigen::VectorXd>& xs,
                                 const Eigen::MatrixXd& targets, double ridge,
                                 const Eigen::VectorXd& query) {
  const auto t = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd m = gram(k, xs);
  m.diagonal().array() += ridge;
  Eigen::VectorXd v(t);
  for (Eigen::Index s = 0; s < t; ++s) v[s] = k(query, xs[static_cast<std::size_t>(s)]);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(t, targets.cols());
  h.topRows(t - 1) = targets.topRows(t - 1);
  return h.transpose() * m.partialPivLu().solve(v);
}

// min_W sum_s ||targets_s - W x_s||^2 + ridge ||W||_F^2 for the linear kernel,
// evaluated by plugging the minimizer back into the objective.
inline double primal_min_loss(const std::vector<Eigen::VectorXd>& xs,
                              const Eigen::MatrixXd& targets, double ridge) {
  const auto d = xs.front().size();
  Eigen::MatrixXd cov = ridge * Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(targets.cols(), d);
  for (std::size_t s = 0; s < xs.size(); ++s) {
    cov += xs[s] * xs[s].transpose();
    cross += targets.row(static_cast<Eigen::Index>(s)).transpose() * xs[s].transpose();
  }
  const Eigen::MatrixXd w = cov.fullPivLu().solve(cross.transpose()).transpose();
  double obj = ridge * w.squaredNorm();
  for (std::size_t s = 0; s < xs.size(); ++s)
    obj += (targets.row(static_cast<Eigen::Index>(s)).transpose() - w * xs[s]).squaredNorm();
  return obj;
}

// Dual objective at its minimizer, any kernel: alpha = (K + ridge I)^{-1} H,
// objective = ||H - K alpha||^2 + ridge tr(alpha^T K alpha).
inline double dual_min_loss(const Eigen::MatrixXd& k, const Eigen::MatrixXd& targets,
                            double ridge) {
  Eigen::MatrixXd m = k;
  m.diagonal().array() += ridge;
  const Eigen::MatrixXd alpha = m.partialPivLu().solve(targets);
  return (targets - k * alpha).squaredNorm() + ridge * (alpha.transpose() * k * alpha).trace();
}

// argmin_z <psi(z), g> over the dense loss table, summed label by label in a
// plain loop; lowest index on ties.
inline std::size_t brute_decode(const osp::LossSpace& space, const Eigen::VectorXd& g) {
  std::size_t best = 0;
  double best_score = 0.0;
  for (std::size_t z = 0; z < space.num_outputs(); ++z) {
    double s = 0.0;
    for (std::size_t y = 0; y < space.num_labels(); ++y)
      if (g[static_cast<Eigen::Index>(y)] != 0.0) s += space.delta(z, y) * g[static_cast<Eigen::Index>(y)];
    if (z == 0 || s < best_score) {
      best = z;
      best_score = s;
    }
  }
  return best;
}

inline double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

inline std::vector<Eigen::VectorXd> random_points(std::mt19937_64& gen, std::size_t n, int d,
                                                  double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<Eigen::VectorXd> xs;
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd x(d);
    for (int j = 0; j < d; ++j) x[j] = u(gen);
    xs.push_back(x);
  }
  return xs;
}

}  // namespace oracle
