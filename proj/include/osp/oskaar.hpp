#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <vector>

#include "osp/expansion.hpp"
#include "osp/gram.hpp"
#include "osp/losses.hpp"

namespace osp {

enum class KaarMode { plain, shifted };

// Representer weights of a feature estimate: g(x) = sum_s beta_s h_s, where
// h_s is the regression target of round s (phi(y_s) in plain mode). The
// merged label expansion is kept alongside.
struct FeatureCoefficients {
  Eigen::VectorXd beta;
  LabelExpansion expansion;
};

// Kernel AAR estimator over an append-only history:
//   g_t = argmin_g sum_{s<t} ||h_s - g(x_s)||^2 + ridge ||g||^2 + ||g(x_t)||^2
// predict(x_t) extends the Gram with x_t, then observe(h_t) records the
// target of that round.
class KaarEstimator {
 public:
  KaarEstimator(KernelSpec kernel, double ridge, std::size_t first_round = 1,
                double solve_tolerance = GramState::kDefaultSolveTolerance);

  FeatureCoefficients predict(const Point& x);
  void observe(LabelExpansion target);

  // g_m(x) for a completed round m (1-based): the first m-1 components of
  // (K_m + ridge I)^{-1} v_m(x) against targets h_1..h_{m-1}.
  FeatureCoefficients evaluate_round(std::size_t m, const Point& x) const;

  bool pending() const { return pending_; }
  double ridge() const { return gram_.lambda(); }
  const GramState& gram() const { return gram_; }
  const std::vector<LabelExpansion>& targets() const { return targets_; }

 private:
  FeatureCoefficients combine(const Eigen::VectorXd& beta) const;

  GramState gram_;
  std::vector<LabelExpansion> targets_;
  bool pending_ = false;
};

struct OskaarOptions {
  double lambda = 1.0;
  KaarMode mode = KaarMode::plain;
  double solve_tolerance = GramState::kDefaultSolveTolerance;
};

struct OskaarPrediction {
  OutputIndex z_hat = 0;
  FeatureCoefficients coeffs;
};

// Online structured prediction with KAAR feature estimates and argmin
// decoding. In shifted mode the estimator regresses 2 phi(y_s) - g_s(x_s)
// with ridge 4 lambda.
class OskaarLearner {
 public:
  OskaarLearner(LossSpacePtr space, KernelSpec kernel, OskaarOptions options);

  // Throws ProtocolError when the previous prediction was not followed by
  // update().
  OskaarPrediction predict(const Point& x);

  // Throws ProtocolError without a preceding predict().
  void update(LabelIndex y);

  // ||phi(y) - g_t(x_t)||^2 through the output kernel.
  double feature_residual(const FeatureCoefficients& coeffs, LabelIndex y) const;

  std::size_t rounds() const { return labels_.size(); }
  const std::vector<LabelIndex>& labels() const { return labels_; }
  const KaarEstimator& estimator() const { return estimator_; }
  const LossSpace& space() const { return *space_; }
  const LossSpacePtr& space_ptr() const { return space_; }
  const OskaarOptions& options() const { return options_; }
  double ridge() const { return estimator_.ridge(); }

  // Cached g_s(x_s) of every completed round.
  const std::vector<LabelExpansion>& history() const { return history_; }

 private:
  LossSpacePtr space_;
  OskaarOptions options_;
  KaarEstimator estimator_;
  std::vector<LabelIndex> labels_;
  std::vector<LabelExpansion> history_;
  std::optional<LabelExpansion> pending_;
};

struct BatchPrediction {
  LabelExpansion averaged;
  OutputIndex z_hat = 0;
};

// Online-to-batch aggregate g_bar_T = (1/T) sum_t g_t over the rounds of a
// finished learner, decoded with the same argmin rule.
//
// Because the Gram is append-only, g_t(x) only needs the leading t x t block
// of the final factor L. With w = L^{-1} v(x) and P = L^{-1} H,
//   g_t(x) = sum_{i<t} w_i P_i - w_{t-1} h_{t-1} / L_{t-1,t-1}
// (0-based), so the whole average costs one O(T^2) solve per query.
class BatchAverager {
 public:
  explicit BatchAverager(const OskaarLearner& learner);

  BatchPrediction operator()(const Point& x) const;

  // g_m(x) through the same prefix identity.
  LabelExpansion round_estimate(std::size_t m, const Point& x) const;

  std::size_t rounds() const { return rounds_; }

 private:
  LabelExpansion to_expansion(const Eigen::VectorXd& coords) const;

  const OskaarLearner* learner_;
  std::size_t rounds_;
  std::vector<LabelIndex> basis_;
  Eigen::MatrixXd targets_;    // T x |basis|
  Eigen::MatrixXd projected_;  // L^{-1} targets_
  Eigen::VectorXd diag_;       // diag(L)
};

BatchPrediction batch_average(const OskaarLearner& learner, const Point& x);

}  // namespace osp
