#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "osp/kernel.hpp"
#include "osp/losses.hpp"
#include "osp/salami.hpp"
#include "osp/stream.hpp"

namespace osp {

enum class LearnerKind { oskaar, oskaar_shifted, salami, salami_shifted, batch_average };

std::string learner_name(LearnerKind kind);

// A ridge value, either fixed or sqrt(T) of the cell's horizon.
struct LambdaSpec {
  bool sqrt_horizon = false;
  double value = 1.0;

  double at(std::size_t horizon) const;
  std::string label() const;  // "sqrt_T" or the number in %g
};

struct CheckFlags {
  bool lemma1 = true;
  bool theorem1 = true;
  bool expert_regret = true;
  bool scaling_fit = true;
};

struct StreamConfig {
  StreamRecipe recipe;
  // switching schedules given as fractions of each horizon; a fraction f
  // becomes change time floor(f T) + 1
  std::vector<double> change_fractions;
};

struct ExperimentConfig {
  std::vector<LearnerKind> learners;
  std::vector<LambdaSpec> lambdas;
  std::optional<double> eta;  // nullopt: default_eta
  double g_norm_bound = 1.0;
  SalamiBackend salami_backend = SalamiBackend::shared;
  KernelSpec kernel = KernelSpec::gaussian(1.0);
  BuiltinLoss loss = SubsetF1{3};
  StreamConfig stream;
  std::vector<std::size_t> horizons;
  std::size_t max_horizon = 5000;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;  // empty: caller's default
  CheckFlags checks;
  std::optional<double> c_delta;  // overrides the loss space's value in the checks
  std::size_t batch_test_points = 200;
  bool dump_weights = false;
  double solve_tolerance = 1e-9;

  double eta_for(const LossSpace& space) const;
  StreamSpec stream_spec(std::size_t num_labels, std::size_t horizon, std::uint64_t seed) const;
};

// Throws ConfigError with the YAML line and the offending key.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace osp

namespace osp {

// Canonical YAML for a parsed configuration; parse_config(to_yaml(c))
// reproduces c.
std::string to_yaml(const ExperimentConfig& config);

}  // namespace osp
