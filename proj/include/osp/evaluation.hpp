#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "osp/losses.hpp"
#include "osp/oskaar.hpp"
#include "osp/stream.hpp"

namespace osp {

// Absolute slack granted to every inequality check.
inline constexpr double kBoundSlack = 1e-6;

struct Baseline {
  OutputIndex z_star = 0;
  double loss = 0.0;
};

// argmin_z Delta(z, y), lowest index on ties.
Baseline baseline(const LossSpace& space, LabelIndex y);

struct RoundRecord {
  std::size_t t = 0;
  LabelIndex y = 0;
  OutputIndex z_hat = 0;
  double loss = 0.0;
  double baseline_loss = 0.0;
  double inst_regret = 0.0;
  double cum_regret = 0.0;
  double feature_residual = 0.0;
};

class RegretReport {
 public:
  explicit RegretReport(LossSpacePtr space);

  const RoundRecord& record(LabelIndex y, OutputIndex z_hat, double feature_residual);

  // Rebuilds a report from stored rows; t must count 1, 2, ... and the
  // cumulative column is recomputed.
  static RegretReport from_records(LossSpacePtr space, const std::vector<RoundRecord>& rows);

  const std::vector<RoundRecord>& rounds() const { return rounds_; }
  std::size_t horizon() const { return rounds_.size(); }
  double cumulative_regret() const { return rounds_.empty() ? 0.0 : rounds_.back().cum_regret; }
  double sum_residuals() const { return sum_residuals_; }
  const LossSpace& space() const { return *space_; }

 private:
  LossSpacePtr space_;
  std::vector<RoundRecord> rounds_;
  double sum_residuals_ = 0.0;
};

struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
  std::string detail;
};

// R_T <= 2 c_Delta sqrt(T) sqrt(sum_t ||phi_t - g_t(x_t)||^2)
BoundCheck check_lemma1(const RegretReport& report, double c_delta);

// Terms of the KAAR feature bound on a finished run.
//
// plain:   sum_t res_t <= log(e + e kappa^2 T / lambda) d_eff(lambda) + min L_T
// shifted: sum_t res_t <= (B^2/4) log(e + e kappa^2 T / (4 lambda)) d_eff(4 lambda)
//                         + min_g sum_s ||phi_s - g_s/2 - g(x_s)/2||^2 + lambda ||g||^2
// with min L = ridge * ||L^{-1} H||_F^2 (divided by 4 when shifted), H the
// stacked regression targets and L the factor of K_T + ridge I.
struct FeatureBoundTerms {
  KaarMode mode = KaarMode::plain;
  std::size_t horizon = 0;
  double lambda = 0.0;
  double ridge = 0.0;
  double kappa = 0.0;
  double d_eff = 0.0;
  double min_loss = 0.0;
  double log_factor = 0.0;
  double b_const = 1.0;
  double feature_bound = 0.0;
  std::vector<std::pair<std::size_t, double>> d_eff_checkpoints;  // t = 1, 2, 4, ..., T
};

// g_norm_bound enters the shifted constant B = max(2 + kappa * g_norm_bound,
// max_s ||h_s||). Throws InputError for a learner with a pending round or no
// completed rounds.
FeatureBoundTerms feature_bound_terms(const OskaarLearner& learner, double g_norm_bound = 1.0);

// sum_t res_t <= feature_bound
BoundCheck check_feature_bound(const RegretReport& report, const FeatureBoundTerms& terms);

// R_T <= 2 c_Delta sqrt(T) sqrt(feature_bound)
BoundCheck check_theorem1(const RegretReport& report, const FeatureBoundTerms& terms,
                          double c_delta);

// max over starts and prefixes of the mixture's excess loss over an expert,
// against log(T) / eta.
BoundCheck check_expert_regret(double max_gap, std::size_t horizon, double eta);

struct Variation {
  std::size_t v0 = 1;
  double vg = 0.0;  // proxy: table norms, see StreamMetadata
};

// nullopt when the stream carries no generator metadata.
std::optional<Variation> variation_diagnostics(const StreamMetadata* metadata);

// Least-squares slope of log(mean regret) against log(T). Points with a
// nonpositive regret are dropped; throws InputError if fewer than two remain
// or all horizons coincide.
double regret_scaling_fit(std::span<const std::pair<double, double>> points);

}  // namespace osp
