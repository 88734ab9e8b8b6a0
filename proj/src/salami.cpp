#include "osp/salami.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "osp/errors.hpp"

namespace osp {

namespace {
using Eigen::Index;
}

double default_eta(const LossSpace&, double g_norm_bound, double kappa) {
  if (!(g_norm_bound >= 0.0) || !std::isfinite(g_norm_bound))
    throw InputError("g_norm_bound must be a nonnegative number");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InputError("kappa must be positive");
  const double a = kappa * g_norm_bound + 1.0;
  return 1.0 / (2.0 * a * a);
}

class ExpertPool::Backend {
 public:
  virtual ~Backend() = default;
  // Fills one prediction per start s = 1..t for the current round t.
  virtual void predict(const Point& x, std::size_t t, std::vector<ExpertPrediction>& out) = 0;
  virtual void observe(const LabelExpansion& target) = 0;
  virtual std::size_t frozen() const { return 0; }
};

namespace {

class ExactBackend final : public ExpertPool::Backend {
 public:
  ExactBackend(KernelSpec kernel, double ridge, double tolerance)
      : kernel_(std::move(kernel)), ridge_(ridge), tolerance_(tolerance) {}

  void predict(const Point& x, std::size_t t, std::vector<ExpertPrediction>& out) override {
    if (t > ExpertPool::kMaxExactRounds)
      throw CapacityError("the exact expert backend is limited to " +
                          std::to_string(ExpertPool::kMaxExactRounds) + " rounds");
    experts_.push_back(std::make_unique<KaarEstimator>(kernel_, ridge_, t, tolerance_));
    frozen_.push_back(false);
    last_.emplace_back();
    out.resize(t);
    for (std::size_t s = 0; s < t; ++s) {
      if (!frozen_[s]) {
        try {
          last_[s] = experts_[s]->predict(x).expansion;
        } catch (const NumericalError&) {
          frozen_[s] = true;
        }
      }
      out[s] = ExpertPrediction{s + 1, last_[s], static_cast<bool>(frozen_[s])};
    }
  }

  void observe(const LabelExpansion& target) override {
    for (auto& e : experts_)
      if (e->pending()) e->observe(target);
  }

  std::size_t frozen() const override {
    return static_cast<std::size_t>(std::count(frozen_.begin(), frozen_.end(), true));
  }

 private:
  KernelSpec kernel_;
  double ridge_;
  double tolerance_;
  std::vector<std::unique_ptr<KaarEstimator>> experts_;
  std::vector<bool> frozen_;
  std::vector<LabelExpansion> last_;
};

// K_{1:n} + mu I = U U^T with U upper triangular. The trailing block of U
// starting at index i factors the Gram matrix of the expert started at i+1.
// For that expert, with A = K_{s:n} + mu I and b = v(x) restricted,
//   beta = mu A^{-1} b / (mu + k(x,x) - b^T A^{-1} b),
// and A^{-1} b, b^T A^{-1} b come from suffix sums of r = U^{-1} b.
class SharedBackend final : public ExpertPool::Backend {
 public:
  SharedBackend(KernelSpec kernel, double ridge, std::size_t refactor_period)
      : kernel_(std::move(kernel)), mu_(ridge), refactor_period_(refactor_period) {
    if (!(ridge > 0.0) || !std::isfinite(ridge))
      throw InputError("ridge parameter lambda must be positive");
    if (refactor_period_ == 0) throw InputError("refactor period must be positive");
  }

  void predict(const Point& x, std::size_t t, std::vector<ExpertPrediction>& out) override {
    if (!points_.empty() && x.size() != points_.front().size())
      throw InputError("input dimension " + std::to_string(x.size()) +
                       " does not match support dimension " +
                       std::to_string(points_.front().size()));
    if (!kernel_.within_kappa(x))
      throw InputError("input exceeds the declared kappa bound of " + kernel_.describe());

    const Index n = static_cast<Index>(points_.size());
    const Index m = static_cast<Index>(basis_.size());
    x_ = x;
    kxx_ = kernel_(x, x);
    b_.resize(n);
    for (Index i = 0; i < n; ++i) b_[i] = kernel_(x, points_[static_cast<std::size_t>(i)]);

    out.resize(t);
    out[t - 1] = ExpertPrediction{t, {}, false};
    if (n == 0) return;

    const auto u = u_.topLeftCorner(n, n).triangularView<Eigen::Upper>();
    const Eigen::VectorXd r = u.solve(b_);
    const Eigen::MatrixXd q = u.solve(h_.topRows(n));

    double r2 = 0.0;
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(m);
    for (Index i = n - 1; i >= 0; --i) {
      r2 += r[i] * r[i];
      acc += r[i] * q.row(i);
      const double denom = mu_ + kxx_ - r2;
      if (!(denom > 0.0)) throw NumericalError("non-positive KAAR shrink denominator", t);
      const double shrink = mu_ / denom;
      LabelExpansion g;
      for (Index j = 0; j < m; ++j) g.add(basis_[static_cast<std::size_t>(j)], shrink * acc[j]);
      out[static_cast<std::size_t>(i)] = ExpertPrediction{static_cast<std::size_t>(i) + 1,
                                                          std::move(g), false};
    }
  }

  void observe(const LabelExpansion& target) override {
    const Index n = static_cast<Index>(points_.size());
    reserve(n + 1);
    append_target(target, n);
    points_.push_back(x_);

    const double c = kxx_ + mu_;
    const double gamma = std::sqrt(c);
    const Eigen::VectorXd col = b_ / gamma;
    bool ok = (n + 1) % static_cast<Index>(refactor_period_) != 0;
    if (ok) ok = downdate(col, n);
    if (ok) {
      u_.block(0, n, n, 1) = col;
      u_.block(n, 0, 1, n).setZero();
      u_(n, n) = gamma;
    } else {
      refactor(n + 1);
    }
  }

 private:
  void reserve(Index rows) {
    if (u_.rows() < rows) {
      const Index cap = std::max<Index>({16, 2 * u_.rows(), rows});
      u_.conservativeResize(cap, cap);
    }
    if (h_.rows() < rows) {
      const Index cap = std::max<Index>({16, 2 * h_.rows(), rows});
      h_.conservativeResize(cap, h_.cols());
    }
  }

  void append_target(const LabelExpansion& target, Index row) {
    for (const auto& [label, c] : target.terms()) {
      auto it = std::lower_bound(basis_.begin(), basis_.end(), label);
      if (it != basis_.end() && *it == label) continue;
      const Index at = it - basis_.begin();
      basis_.insert(it, label);
      Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(h_.rows(), h_.cols() + 1);
      grown.leftCols(at) = h_.leftCols(at);
      grown.rightCols(h_.cols() - at) = h_.rightCols(h_.cols() - at);
      h_.swap(grown);
    }
    h_.row(row).setZero();
    for (const auto& [label, c] : target.terms()) {
      const Index j = std::lower_bound(basis_.begin(), basis_.end(), label) - basis_.begin();
      h_(row, j) = c;
    }
  }

  // U U^T - v v^T in place on the leading n x n block; false if the result
  // would not be positive definite.
  bool downdate(Eigen::VectorXd v, Index n) {
    for (Index k = n - 1; k >= 0; --k) {
      const double ukk = u_(k, k);
      const double r2 = ukk * ukk - v[k] * v[k];
      if (!(r2 > 1e-12 * mu_)) return false;
      const double r = std::sqrt(r2);
      const double c = r / ukk;
      const double s = v[k] / ukk;
      u_(k, k) = r;
      if (k == 0) break;
      auto col = u_.col(k).head(k);
      auto head = v.head(k);
      col = (col - s * head) / c;
      head = c * head - s * col;
    }
    return true;
  }

  void refactor(Index n) {
    Eigen::MatrixXd mat(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j <= i; ++j)
        mat(i, j) = mat(j, i) =
            kernel_(points_[static_cast<std::size_t>(i)], points_[static_cast<std::size_t>(j)]);
    mat.diagonal().array() += mu_;
    const Eigen::MatrixXd reversed = mat.reverse();
    Eigen::LLT<Eigen::MatrixXd> llt(reversed);
    if (llt.info() != Eigen::Success)
      throw NumericalError("shared expert factorization failed", static_cast<std::size_t>(n));
    const Eigen::MatrixXd lower = llt.matrixL();
    u_.topLeftCorner(n, n) = lower.reverse();
  }

  KernelSpec kernel_;
  double mu_;
  std::size_t refactor_period_;
  std::vector<Point> points_;
  Eigen::MatrixXd u_;
  std::vector<LabelIndex> basis_;
  Eigen::MatrixXd h_;
  Point x_;
  Eigen::VectorXd b_;
  double kxx_ = 0.0;
};

}  // namespace

ExpertPool::ExpertPool(LossSpacePtr space, KernelSpec kernel, SalamiOptions options)
    : space_(std::move(space)), options_(options) {
  if (!space_) throw InputError("SALAMI requires a loss space");
  if (!(options_.eta > 0.0) || !std::isfinite(options_.eta))
    throw InputError("eta must be positive");
  if (!(options_.lambda > 0.0) || !std::isfinite(options_.lambda))
    throw InputError("ridge parameter lambda must be positive");
  const double ridge =
      options_.mode == KaarMode::shifted ? 4.0 * options_.lambda : options_.lambda;
  if (options_.backend == SalamiBackend::exact)
    backend_ = std::make_unique<ExactBackend>(std::move(kernel), ridge, options_.solve_tolerance);
  else
    backend_ = std::make_unique<SharedBackend>(std::move(kernel), ridge, options_.refactor_period);
  log_weights_.push_back(0.0);
  cumulative_gap_.push_back(0.0);
  max_expert_regret_ = -std::numeric_limits<double>::infinity();
}

ExpertPool::~ExpertPool() = default;

const MixturePrediction& ExpertPool::predict_mixture(const Point& x) {
  if (pending_) throw ProtocolError("predict_mixture called twice without update_weights");
  const std::size_t t = rounds_ + 1;
  backend_->predict(x, t, prediction_.experts);
  prediction_.probabilities = probabilities();
  prediction_.mixture = LabelExpansion{};
  for (std::size_t s = 0; s < t; ++s)
    prediction_.mixture.add_scaled(prediction_.experts[s].g, prediction_.probabilities[s]);
  prediction_.z_hat = decode(*space_, prediction_.mixture);
  pending_ = true;
  return prediction_;
}

const WeightUpdate& ExpertPool::update_weights(LabelIndex y) {
  if (!pending_) throw ProtocolError("update_weights without a preceding predict_mixture");
  space_->check_label(y);
  const std::size_t t = rounds_ + 1;
  const double eta = options_.eta;

  update_.mixture_loss = prediction_.mixture.residual(y);
  update_.expert_losses.resize(t);
  for (std::size_t s = 0; s < t; ++s) {
    const auto& g = prediction_.experts[s].g;
    double loss;
    if (options_.mode == KaarMode::plain) {
      loss = g.residual(y);
    } else {
      LabelExpansion half;
      half.add_scaled(prediction_.mixture, 0.5);
      half.add_scaled(g, 0.5);
      loss = half.residual(y);
    }
    update_.expert_losses[s] = loss;
    log_weights_[s] -= eta * loss;
    cumulative_gap_[s] += update_.mixture_loss - loss;
    if (cumulative_gap_[s] > max_expert_regret_) {
      max_expert_regret_ = cumulative_gap_[s];
      worst_start_ = s + 1;
    }
  }
  inactive_log_weight_ -= eta * update_.mixture_loss;

  if (options_.mode == KaarMode::plain) {
    backend_->observe(LabelExpansion::indicator(y));
  } else {
    LabelExpansion target = LabelExpansion::indicator(y, 2.0);
    target.add_scaled(prediction_.mixture, -1.0);
    backend_->observe(target);
  }

  rounds_ = t;
  log_weights_.push_back(inactive_log_weight_);
  cumulative_gap_.push_back(0.0);

  const double top = *std::max_element(log_weights_.begin(), log_weights_.end());
  double sum = 0.0;
  for (double lw : log_weights_) sum += std::exp(lw - top);
  const double norm = top + std::log(sum);
  for (double& lw : log_weights_) lw -= norm;
  inactive_log_weight_ -= norm;

  pending_ = false;
  return update_;
}

std::vector<double> ExpertPool::probabilities() const {
  const double top = *std::max_element(log_weights_.begin(), log_weights_.end());
  std::vector<double> p(log_weights_.size());
  double sum = 0.0;
  for (std::size_t s = 0; s < p.size(); ++s) {
    p[s] = std::exp(log_weights_[s] - top);
    sum += p[s];
  }
  for (double& v : p) v /= sum;
  return p;
}

std::size_t ExpertPool::frozen_experts() const { return backend_->frozen(); }

}  // namespace osp
