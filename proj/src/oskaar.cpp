#include "osp/oskaar.hpp"

#include <algorithm>

#include "osp/errors.hpp"

namespace osp {

KaarEstimator::KaarEstimator(KernelSpec kernel, double ridge, std::size_t first_round,
                             double solve_tolerance)
    : gram_(std::move(kernel), ridge, solve_tolerance) {
  gram_.set_first_round(first_round);
}

FeatureCoefficients KaarEstimator::combine(const Eigen::VectorXd& beta) const {
  FeatureCoefficients out;
  out.beta = beta;
  for (Eigen::Index s = 0; s < beta.size(); ++s) {
    const auto& h = targets_[static_cast<std::size_t>(s)];
    if (h.size() == 1 && h.terms().front().second == 1.0)
      out.expansion.add(h.terms().front().first, beta[s]);
    else
      out.expansion.add_scaled(h, beta[s]);
  }
  return out;
}

FeatureCoefficients KaarEstimator::predict(const Point& x) {
  if (pending_) throw ProtocolError("KAAR predict called twice without observe");
  gram_.extend(x);
  pending_ = true;
  const std::size_t t = gram_.size();
  const Eigen::VectorXd u = gram_.solve(gram_.kernel_column(x));
  return combine(u.head(static_cast<Eigen::Index>(t - 1)));
}

void KaarEstimator::observe(LabelExpansion target) {
  if (!pending_) throw ProtocolError("KAAR observe without a preceding predict");
  targets_.push_back(std::move(target));
  pending_ = false;
}

FeatureCoefficients KaarEstimator::evaluate_round(std::size_t m, const Point& x) const {
  if (m == 0 || m > targets_.size())
    throw InputError("round " + std::to_string(m) + " is not a completed round");
  Eigen::VectorXd v(static_cast<Eigen::Index>(m));
  for (std::size_t s = 0; s < m; ++s)
    v[static_cast<Eigen::Index>(s)] = gram_.kernel()(x, gram_.support()[s]);
  const Eigen::VectorXd u = gram_.solve_leading(m, std::move(v));
  return combine(u.head(static_cast<Eigen::Index>(m - 1)));
}

OskaarLearner::OskaarLearner(LossSpacePtr space, KernelSpec kernel, OskaarOptions options)
    : space_(std::move(space)),
      options_(options),
      estimator_(std::move(kernel),
                 options.mode == KaarMode::shifted ? 4.0 * options.lambda : options.lambda, 1,
                 options.solve_tolerance) {
  if (!space_) throw InputError("OSKAAR requires a loss space");
}

OskaarPrediction OskaarLearner::predict(const Point& x) {
  if (pending_) throw ProtocolError("predict called twice without update");
  OskaarPrediction out;
  out.coeffs = estimator_.predict(x);
  out.z_hat = decode(*space_, out.coeffs.expansion);
  pending_ = out.coeffs.expansion;
  return out;
}

void OskaarLearner::update(LabelIndex y) {
  if (!pending_) throw ProtocolError("update without a preceding predict");
  space_->check_label(y);
  if (options_.mode == KaarMode::plain) {
    estimator_.observe(LabelExpansion::indicator(y));
  } else {
    LabelExpansion target = LabelExpansion::indicator(y, 2.0);
    target.add_scaled(*pending_, -1.0);
    estimator_.observe(std::move(target));
  }
  labels_.push_back(y);
  history_.push_back(std::move(*pending_));
  pending_.reset();
}

double OskaarLearner::feature_residual(const FeatureCoefficients& coeffs, LabelIndex y) const {
  space_->check_label(y);
  return coeffs.expansion.residual(y);
}

BatchAverager::BatchAverager(const OskaarLearner& learner)
    : learner_(&learner), rounds_(learner.rounds()) {
  const auto& est = learner.estimator();
  if (est.pending()) throw ProtocolError("batch average of a learner with a pending round");
  if (rounds_ == 0) throw InputError("batch average needs at least one completed round");

  for (const auto& h : est.targets())
    for (const auto& [l, c] : h.terms()) basis_.push_back(l);
  std::sort(basis_.begin(), basis_.end());
  basis_.erase(std::unique(basis_.begin(), basis_.end()), basis_.end());

  const auto T = static_cast<Eigen::Index>(rounds_);
  targets_ = Eigen::MatrixXd::Zero(T, static_cast<Eigen::Index>(basis_.size()));
  for (Eigen::Index s = 0; s < T; ++s)
    for (const auto& [l, c] : est.targets()[static_cast<std::size_t>(s)].terms()) {
      const auto col = std::lower_bound(basis_.begin(), basis_.end(), l) - basis_.begin();
      targets_(s, col) = c;
    }
  const Eigen::MatrixXd l = est.gram().factor();
  projected_ = l.triangularView<Eigen::Lower>().solve(targets_);
  diag_ = l.diagonal();
}

LabelExpansion BatchAverager::to_expansion(const Eigen::VectorXd& coords) const {
  LabelExpansion out;
  for (std::size_t j = 0; j < basis_.size(); ++j)
    out.add(basis_[j], coords[static_cast<Eigen::Index>(j)]);
  return out;
}

LabelExpansion BatchAverager::round_estimate(std::size_t m, const Point& x) const {
  if (m == 0 || m > rounds_) throw InputError("round outside the completed history");
  const auto& gram = learner_->estimator().gram();
  const Eigen::VectorXd w = gram.forward_leading(rounds_, gram.kernel_column(x));
  const auto mi = static_cast<Eigen::Index>(m);
  Eigen::VectorXd g = projected_.topRows(mi).transpose() * w.head(mi);
  g -= (w[mi - 1] / diag_[mi - 1]) * targets_.row(mi - 1).transpose();
  return to_expansion(g);
}

BatchPrediction BatchAverager::operator()(const Point& x) const {
  const auto& gram = learner_->estimator().gram();
  const Eigen::VectorXd w = gram.forward_leading(rounds_, gram.kernel_column(x));
  const auto T = static_cast<Eigen::Index>(rounds_);
  // sum_t g_t(x) = sum_i (T - i) w_i P_i - sum_i w_i h_i / L_ii
  Eigen::VectorXd prefix_weights(T), direct_weights(T);
  for (Eigen::Index i = 0; i < T; ++i) {
    prefix_weights[i] = static_cast<double>(T - i) * w[i];
    direct_weights[i] = w[i] / diag_[i];
  }
  Eigen::VectorXd g = projected_.transpose() * prefix_weights - targets_.transpose() * direct_weights;
  g /= static_cast<double>(T);
  BatchPrediction out;
  out.averaged = to_expansion(g);
  out.z_hat = decode(learner_->space(), out.averaged);
  return out;
}

BatchPrediction batch_average(const OskaarLearner& learner, const Point& x) {
  return BatchAverager(learner)(x);
}

}  // namespace osp
