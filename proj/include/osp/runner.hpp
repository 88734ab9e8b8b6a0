#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "osp/config.hpp"
#include "osp/evaluation.hpp"

namespace osp {

struct CellKey {
  LearnerKind learner = LearnerKind::oskaar;
  LambdaSpec lambda;
  std::size_t horizon = 0;
  std::uint64_t seed = 0;
  bool replay = false;

  // <learner>_lam<lambda>_T<horizon>_s<seed>, or ..._replay
  std::string id() const;
};

// One row of summary.csv. NaN marks a value that does not apply to the cell.
struct CellSummary {
  CellKey key;
  double ridge = 0.0;
  double eta = 0.0;
  double c_delta = 0.0;
  double cum_regret = 0.0;
  double sum_residual = 0.0;
  double d_eff = 0.0;
  double min_loss = 0.0;
  double log_factor = 0.0;
  double b_const = 0.0;
  double expert_gap = 0.0;
  double v0 = 0.0;
  double vg = 0.0;
  double excess_risk = 0.0;
  // ||g*||^2 of the grid interpolant and sum_t ||g*(x_t) - p_t||^2
  double gstar_norm = 0.0;
  double gstar_residual = 0.0;
  std::size_t jitter = 0;
  std::size_t frozen = 0;
  bool ok = true;
  std::string error;
};

struct CheckRow {
  std::string cell;  // "*" for checks over several cells
  std::string learner;
  std::string lambda;
  std::string horizon;
  std::string seed;
  BoundCheck check;
  bool gating = true;
};

struct RunReport {
  std::vector<CellSummary> cells;
  std::vector<CheckRow> checks;
  // 0 success, 2 a gating check failed, 3 a cell failed
  int exit_code() const;
};

struct RunOptions {
  std::filesystem::path output_dir;
  unsigned jobs = 1;
  std::ostream* diagnostics = nullptr;  // failures are reported here
};

// Writes output_dir/{config.yaml,summary.csv,checks.csv} and
// output_dir/cells/<id>/rounds.csv. Throws ConfigError before running any
// cell when a stream cannot be built for some horizon.
RunReport run_experiment(const ExperimentConfig& config, const RunOptions& options);

// Runs every (learner, lambda) of the configuration on an imported stream.
RunReport replay_stream(const ExperimentConfig& config, const std::vector<StreamRound>& stream,
                        const RunOptions& options);

// Recomputes the checks of a finished run directory from its CSV files and
// config.yaml. Nothing is written.
RunReport check_directory(const std::filesystem::path& dir, std::ostream* diagnostics = nullptr);

inline const std::vector<std::string> kRoundsHeader = {
    "t", "y_index", "z_hat_index", "loss", "baseline_loss", "inst_regret", "cum_regret",
    "feature_residual"};

}  // namespace osp
