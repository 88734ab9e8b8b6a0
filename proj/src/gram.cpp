#include "osp/gram.hpp"

#include <algorithm>
#include <cmath>

#include "osp/errors.hpp"

namespace osp {

namespace {
using Eigen::Index;
}

GramState::GramState(KernelSpec kernel, double lambda, double solve_tolerance)
    : kernel_(std::move(kernel)), lambda_(lambda), solve_tolerance_(solve_tolerance) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw InputError("ridge parameter lambda must be positive");
  if (!(solve_tolerance > 0.0)) throw InputError("solve tolerance must be positive");
}

void GramState::extend(const Point& x) {
  if (!points_.empty() && x.size() != points_.front().size())
    throw InputError("input dimension " + std::to_string(x.size()) +
                     " does not match support dimension " +
                     std::to_string(points_.front().size()));
  if (!kernel_.within_kappa(x))
    throw InputError("input exceeds the declared kappa bound of " + kernel_.describe());

  const std::size_t t = points_.size();
  const Index ti = static_cast<Index>(t);
  if (factor_.rows() <= ti) {
    const Index cap = std::max<Index>(16, 2 * factor_.rows());
    factor_.conservativeResize(cap, cap);
  }

  Eigen::VectorXd row = kernel_column(x);
  if (t > 0) lower(t).solveInPlace(row);

  const double kappa2 = kernel_.kappa() * kernel_.kappa();
  const double threshold = 1e-12 * (kappa2 + lambda_);
  double pivot = kernel_(x, x) + lambda_ - row.squaredNorm();
  if (pivot < threshold) {
    pivot += 1e-10 * (kappa2 + lambda_);
    ++jitter_count_;
    if (pivot < threshold)
      throw NumericalError("non-positive Cholesky pivot after jitter retry",
                           first_round_ + t);
  }

  factor_.block(ti, 0, 1, ti) = row.transpose();
  factor_(ti, ti) = std::sqrt(pivot);
  points_.push_back(x);
}

Eigen::VectorXd GramState::solve(const Eigen::VectorXd& rhs) const {
  if (static_cast<std::size_t>(rhs.size()) != size())
    throw InputError("rhs length " + std::to_string(rhs.size()) +
                     " does not match Gram size " + std::to_string(size()));
  return solve_leading(size(), rhs);
}

Eigen::VectorXd GramState::solve_leading(std::size_t m, Eigen::VectorXd rhs) const {
  if (m > size() || static_cast<std::size_t>(rhs.size()) != m)
    throw InputError("leading solve of size " + std::to_string(m) + " with rhs length " +
                     std::to_string(rhs.size()));
  if (m == 0) return rhs;
  lower(m).solveInPlace(rhs);
  lower(m).adjoint().solveInPlace(rhs);
  return rhs;
}

Eigen::VectorXd GramState::forward_leading(std::size_t m, Eigen::VectorXd rhs) const {
  if (m > size() || static_cast<std::size_t>(rhs.size()) != m)
    throw InputError("leading forward solve of size " + std::to_string(m) +
                     " with rhs length " + std::to_string(rhs.size()));
  if (m > 0) lower(m).solveInPlace(rhs);
  return rhs;
}

Eigen::VectorXd GramState::kernel_column(const Point& x) const {
  Eigen::VectorXd v(static_cast<Index>(points_.size()));
  for (std::size_t s = 0; s < points_.size(); ++s)
    v[static_cast<Index>(s)] = kernel_(x, points_[s]);
  return v;
}

Eigen::MatrixXd GramState::factor() const {
  const Index t = static_cast<Index>(size());
  return factor_.topLeftCorner(t, t).triangularView<Eigen::Lower>();
}

Eigen::MatrixXd GramState::gram_matrix() const {
  const Index t = static_cast<Index>(size());
  Eigen::MatrixXd k(t, t);
  for (Index i = 0; i < t; ++i)
    for (Index j = 0; j <= i; ++j) k(i, j) = k(j, i) = kernel_(points_[i], points_[j]);
  return k;
}

Eigen::MatrixXd GramState::inverse_factor() const {
  const Index t = static_cast<Index>(size());
  Eigen::MatrixXd inv = Eigen::MatrixXd::Identity(t, t);
  if (t > 0) lower(size()).solveInPlace(inv);
  return inv;
}

double GramState::reconstruction_error() const {
  if (empty()) return 0.0;
  const Eigen::MatrixXd l = factor();
  Eigen::MatrixXd target = gram_matrix();
  target.diagonal().array() += lambda_;
  return (l * l.transpose() - target).cwiseAbs().maxCoeff();
}

double effective_dimension(const GramState& state) {
  if (state.empty()) throw InputError("effective dimension of an empty Gram state");
  // d_eff = t - lambda Tr((K + lambda I)^{-1}) = t - lambda ||L^{-1}||_F^2
  const double t = static_cast<double>(state.size());
  return t - state.lambda() * state.inverse_factor().squaredNorm();
}

double effective_dimension(const GramState& state, double lambda_query) {
  if (state.empty()) throw InputError("effective dimension of an empty Gram state");
  return effective_dimension(state.gram_matrix(), lambda_query);
}

double effective_dimension(const Eigen::MatrixXd& gram, double lambda_query) {
  if (!(lambda_query > 0.0)) throw InputError("lambda_query must be positive");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  double d = 0.0;
  for (Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const double s = std::max(0.0, eig.eigenvalues()[i]);
    d += s / (s + lambda_query);
  }
  return d;
}

}  // namespace osp
