#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "osp/expansion.hpp"
#include "osp/kernel.hpp"
#include "osp/losses.hpp"
#include "osp/oskaar.hpp"

namespace osp {

enum class SalamiBackend {
  // One KaarEstimator per start time. O(t^3) per round over all experts, and
  // the memory grows cubically, so rounds are capped at kMaxExactRounds.
  exact,
  // All experts read off one reverse Cholesky factor of the full history:
  // trailing blocks of an upper factor U (K + mu I = U U^T) are factors of
  // the suffix Gram matrices. O(|Y| t^2) per round.
  shared,
};

struct SalamiOptions {
  double lambda = 1.0;
  double eta = 0.125;
  KaarMode mode = KaarMode::plain;
  SalamiBackend backend = SalamiBackend::shared;
  double solve_tolerance = GramState::kDefaultSolveTolerance;
  // The shared backend refactors from scratch every this many rounds to keep
  // rank-one downdate error from accumulating.
  std::size_t refactor_period = 512;
};

struct ExpertPrediction {
  std::size_t start = 1;
  LabelExpansion g;
  bool frozen = false;
};

struct MixturePrediction {
  OutputIndex z_hat = 0;
  LabelExpansion mixture;
  std::vector<double> probabilities;  // p_t(s) for s = 1..t
  std::vector<ExpertPrediction> experts;
};

struct WeightUpdate {
  double mixture_loss = 0.0;
  std::vector<double> expert_losses;  // l_t(g_{s:t}) for s = 1..t
};

// 1 / (2 (kappa * g_norm_bound + 1)^2)
double default_eta(const LossSpace& space, double g_norm_bound, double kappa);

// Restart-expert pool with sleeping-expert exponential weights. Expert s is a
// KAAR estimator over rounds s..t; experts that have not started yet are
// charged the mixture's own loss, so a new expert enters with the log weight
// -eta * (cumulative mixture loss).
class ExpertPool {
 public:
  static constexpr std::size_t kMaxExactRounds = 400;

  ExpertPool(LossSpacePtr space, KernelSpec kernel, SalamiOptions options);
  ~ExpertPool();
  ExpertPool(const ExpertPool&) = delete;
  ExpertPool& operator=(const ExpertPool&) = delete;

  const MixturePrediction& predict_mixture(const Point& x);
  const WeightUpdate& update_weights(LabelIndex y);

  std::size_t rounds() const { return rounds_; }
  double eta() const { return options_.eta; }
  const SalamiOptions& options() const { return options_; }
  const LossSpace& space() const { return *space_; }

  // Normalized probabilities over the starts active at the next round.
  std::vector<double> probabilities() const;

  // max over starts s* and prefixes t of sum_{tau <= t} [l(mix) - l(s*)]
  double max_expert_regret() const { return max_expert_regret_; }
  std::size_t worst_start() const { return worst_start_; }

  std::size_t frozen_experts() const;

  class Backend;

 private:
  LossSpacePtr space_;
  SalamiOptions options_;
  std::unique_ptr<Backend> backend_;
  std::vector<double> log_weights_;  // starts 1..t+1 after round t
  double inactive_log_weight_ = 0.0;
  std::vector<double> cumulative_gap_;
  double max_expert_regret_ = 0.0;
  std::size_t worst_start_ = 1;
  std::size_t rounds_ = 0;
  bool pending_ = false;
  MixturePrediction prediction_;
  WeightUpdate update_;
};

}  // namespace osp
