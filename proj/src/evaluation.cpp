#include "osp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "osp/errors.hpp"

namespace osp {

namespace {
using Eigen::Index;
}

Baseline baseline(const LossSpace& space, LabelIndex y) {
  space.check_label(y);
  const OutputIndex z = space.baseline(y);
  return {z, space.delta_unchecked(z, y)};
}

RegretReport::RegretReport(LossSpacePtr space) : space_(std::move(space)) {
  if (!space_) throw InputError("regret report requires a loss space");
}

const RoundRecord& RegretReport::record(LabelIndex y, OutputIndex z_hat, double feature_residual) {
  space_->check_output(z_hat);
  const Baseline b = baseline(*space_, y);
  RoundRecord r;
  r.t = rounds_.size() + 1;
  r.y = y;
  r.z_hat = z_hat;
  r.loss = space_->delta_unchecked(z_hat, y);
  r.baseline_loss = b.loss;
  r.inst_regret = r.loss - r.baseline_loss;
  r.cum_regret = cumulative_regret() + r.inst_regret;
  r.feature_residual = feature_residual;
  sum_residuals_ += feature_residual;
  rounds_.push_back(r);
  return rounds_.back();
}

RegretReport RegretReport::from_records(LossSpacePtr space, const std::vector<RoundRecord>& rows) {
  RegretReport report(std::move(space));
  for (const auto& row : rows) {
    if (row.t != report.horizon() + 1)
      throw FormatError("round " + std::to_string(row.t) + " is out of sequence");
    report.record(row.y, row.z_hat, row.feature_residual);
  }
  return report;
}

BoundCheck check_lemma1(const RegretReport& report, double c_delta) {
  BoundCheck c;
  c.name = "lemma1";
  const double t = static_cast<double>(report.horizon());
  c.lhs = report.cumulative_regret();
  c.rhs = 2.0 * c_delta * std::sqrt(t) * std::sqrt(std::max(0.0, report.sum_residuals()));
  c.satisfied = c.lhs <= c.rhs + kBoundSlack;
  c.detail = "T=" + std::to_string(report.horizon());
  return c;
}

FeatureBoundTerms feature_bound_terms(const OskaarLearner& learner, double g_norm_bound) {
  const auto& est = learner.estimator();
  if (est.pending()) throw InputError("feature bound of a learner with a pending round");
  const std::size_t T = learner.rounds();
  if (T == 0) throw InputError("feature bound needs at least one completed round");
  const auto& gram = est.gram();

  FeatureBoundTerms terms;
  terms.mode = learner.options().mode;
  terms.horizon = T;
  terms.lambda = learner.options().lambda;
  terms.ridge = gram.lambda();
  terms.kappa = gram.kernel().kappa();

  const Eigen::MatrixXd linv = gram.inverse_factor();
  // d_eff of the leading t x t block: t - ridge * sum_{i<t} ||row_i(L^{-1})||^2
  double acc = 0.0;
  std::size_t next = 1;
  for (std::size_t i = 0; i < T; ++i) {
    acc += linv.row(static_cast<Index>(i)).head(static_cast<Index>(i) + 1).squaredNorm();
    const std::size_t t = i + 1;
    if (t == next || t == T) {
      terms.d_eff_checkpoints.emplace_back(t, static_cast<double>(t) - terms.ridge * acc);
      if (t == next) next *= 2;
    }
  }
  terms.d_eff = terms.d_eff_checkpoints.back().second;

  std::vector<LabelIndex> basis;
  for (const auto& h : est.targets())
    for (const auto& [l, c] : h.terms()) basis.push_back(l);
  std::sort(basis.begin(), basis.end());
  basis.erase(std::unique(basis.begin(), basis.end()), basis.end());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Index>(T), static_cast<Index>(basis.size()));
  double max_target = 0.0;
  for (std::size_t s = 0; s < T; ++s) {
    const auto& target = est.targets()[s];
    max_target = std::max(max_target, std::sqrt(target.squared_norm()));
    for (const auto& [l, c] : target.terms())
      h(static_cast<Index>(s), std::lower_bound(basis.begin(), basis.end(), l) - basis.begin()) = c;
  }
  const double quad = (linv.triangularView<Eigen::Lower>() * h).squaredNorm();

  const double e = std::numbers::e;
  terms.log_factor =
      std::log(e + e * terms.kappa * terms.kappa * static_cast<double>(T) / terms.ridge);
  if (terms.mode == KaarMode::plain) {
    terms.b_const = 1.0;
    terms.min_loss = terms.ridge * quad;
    terms.feature_bound = terms.log_factor * terms.d_eff + terms.min_loss;
  } else {
    terms.b_const = std::max(2.0 + terms.kappa * g_norm_bound, max_target);
    terms.min_loss = 0.25 * terms.ridge * quad;
    terms.feature_bound =
        0.25 * terms.b_const * terms.b_const * terms.log_factor * terms.d_eff + terms.min_loss;
  }
  return terms;
}

BoundCheck check_feature_bound(const RegretReport& report, const FeatureBoundTerms& terms) {
  BoundCheck c;
  c.name = "feature_bound";
  c.lhs = report.sum_residuals();
  c.rhs = terms.feature_bound;
  c.satisfied = c.lhs <= c.rhs + kBoundSlack;
  c.detail = "d_eff=" + std::to_string(terms.d_eff) + " min_loss=" + std::to_string(terms.min_loss);
  return c;
}

BoundCheck check_theorem1(const RegretReport& report, const FeatureBoundTerms& terms,
                          double c_delta) {
  BoundCheck c;
  c.name = "theorem1";
  const double t = static_cast<double>(report.horizon());
  c.lhs = report.cumulative_regret();
  c.rhs = 2.0 * c_delta * std::sqrt(t) * std::sqrt(std::max(0.0, terms.feature_bound));
  c.satisfied = c.lhs <= c.rhs + kBoundSlack;
  c.detail = "d_eff=" + std::to_string(terms.d_eff) + " min_loss=" + std::to_string(terms.min_loss);
  return c;
}

BoundCheck check_expert_regret(double max_gap, std::size_t horizon, double eta) {
  if (horizon == 0) throw InputError("expert regret check needs a positive horizon");
  if (!(eta > 0.0)) throw InputError("eta must be positive");
  BoundCheck c;
  c.name = "expert_regret";
  c.lhs = max_gap;
  c.rhs = std::log(static_cast<double>(horizon)) / eta;
  c.satisfied = c.lhs <= c.rhs + kBoundSlack;
  c.detail = "T=" + std::to_string(horizon);
  return c;
}

std::optional<Variation> variation_diagnostics(const StreamMetadata* metadata) {
  if (!metadata) return std::nullopt;
  Variation v;
  v.vg = metadata->first_norm;
  for (double step : metadata->step_movement) {
    if (step > 0.0) ++v.v0;
    v.vg += step;
  }
  return v;
}

double regret_scaling_fit(std::span<const std::pair<double, double>> points) {
  std::vector<std::pair<double, double>> logs;
  for (const auto& [t, r] : points) {
    if (!(t > 0.0)) throw InputError("horizons must be positive");
    if (r > 0.0) logs.emplace_back(std::log(t), std::log(r));
  }
  if (logs.size() < 2) throw InputError("scaling fit needs at least two positive mean regrets");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : logs) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(logs.size());
  my /= static_cast<double>(logs.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : logs) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (!(sxx > 0.0)) throw InputError("scaling fit needs at least two distinct horizons");
  return sxy / sxx;
}

}  // namespace osp
