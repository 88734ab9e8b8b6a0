#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "osp/kernel.hpp"

namespace osp {

// Append-only Cholesky factor L of (K_t + lambda I) over the support points
// x_1..x_t in arrival order. Row t of L is computed when x_t arrives, so the
// leading m x m block of L is the factor of the Gram matrix after round m.
//
// Single writer. Concurrent const access is safe once writes have stopped.
class GramState {
 public:
  static constexpr double kDefaultSolveTolerance = 1e-9;

  GramState(KernelSpec kernel, double lambda,
            double solve_tolerance = kDefaultSolveTolerance);

  // Appends x as support point t+1. A pivot below 1e-12 (kappa^2 + lambda)
  // is retried once with jitter 1e-10 (kappa^2 + lambda); a second failure
  // throws NumericalError carrying the round index.
  void extend(const Point& x);

  // Solves (K_t + lambda I) u = rhs. Throws InputError on length mismatch.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  // Same with the leading m x m block, i.e. the Gram matrix of round m.
  Eigen::VectorXd solve_leading(std::size_t m, Eigen::VectorXd rhs) const;

  // L_m^{-1} rhs for the leading m x m block.
  Eigen::VectorXd forward_leading(std::size_t m, Eigen::VectorXd rhs) const;

  // (k(x, x_s))_{s=1..t}.
  Eigen::VectorXd kernel_column(const Point& x) const;

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  double lambda() const { return lambda_; }
  double solve_tolerance() const { return solve_tolerance_; }
  const KernelSpec& kernel() const { return kernel_; }
  const std::vector<Point>& support() const { return points_; }
  std::size_t jitter_count() const { return jitter_count_; }

  // Global index of the first support point, used in error messages when
  // the state belongs to an expert started after round 1.
  void set_first_round(std::size_t round) { first_round_ = round; }

  Eigen::MatrixXd factor() const;
  Eigen::MatrixXd gram_matrix() const;  // K_t, without the ridge
  Eigen::MatrixXd inverse_factor() const;  // L^{-1}, lower triangular

  // max |(L L^T - (K_t + lambda I))_{ij}|
  double reconstruction_error() const;

 private:
  auto lower(std::size_t m) const {
    return factor_.topLeftCorner(static_cast<Eigen::Index>(m),
                                 static_cast<Eigen::Index>(m))
        .triangularView<Eigen::Lower>();
  }

  KernelSpec kernel_;
  double lambda_;
  double solve_tolerance_;
  std::vector<Point> points_;
  Eigen::MatrixXd factor_;  // capacity grows geometrically
  std::size_t jitter_count_ = 0;
  std::size_t first_round_ = 1;
};

// Tr(K (K + lambda I)^{-1}) at the state's own lambda, from the factor.
double effective_dimension(const GramState& state);

// Tr(K (K + lambda_query I)^{-1}) from a fresh eigendecomposition of K.
// Throws InputError when lambda_query <= 0 or the state is empty.
double effective_dimension(const GramState& state, double lambda_query);

// Same, for an explicit symmetric PSD matrix.
double effective_dimension(const Eigen::MatrixXd& gram, double lambda_query);

}  // namespace osp
