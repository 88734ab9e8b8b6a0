#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "osp/expansion.hpp"
#include "osp/kernel.hpp"
#include "osp/losses.hpp"

namespace osp {

enum class InputLaw { uniform_sphere, uniform_cube, fixed_grid };

struct Stationary {};
struct Switching {
  std::vector<std::size_t> change_times;  // first round of each new regime
};
struct Drifting {
  double step_size = 0.01;  // total-variation movement per round
};
using Schedule = std::variant<Stationary, Switching, Drifting>;

using ProbabilityRow = std::vector<double>;
using ConditionalTable = std::vector<ProbabilityRow>;  // one row per anchor

// A fully explicit stream: inputs follow input_law, each input belongs to
// the region of its nearest anchor (lowest index on ties), and its label is
// drawn from that region's row of the table in force.
//
// tables holds one table for a stationary schedule, |change_times| + 1 for a
// switching schedule, and the start and end tables for a drifting one.
struct StreamSpec {
  int input_dim = 2;
  InputLaw input_law = InputLaw::uniform_cube;
  int grid_points = 5;  // per axis, fixed_grid only
  std::vector<Point> anchors;
  std::vector<ConditionalTable> tables;
  Schedule schedule = Stationary{};
  std::size_t horizon = 100;
  std::uint64_t seed = 0;

  std::size_t num_labels() const;
  // Throws ConfigError naming the offending field.
  void validate() const;
};

enum class RowKind { dirac, noisy };

// Randomized construction of anchors and tables from env_seed. Successive
// tables move every region's dominant label to a different one.
struct StreamRecipe {
  int input_dim = 2;
  InputLaw input_law = InputLaw::uniform_cube;
  int grid_points = 5;
  std::size_t regions = 4;
  RowKind rows = RowKind::dirac;
  double noise = 0.0;  // mass spread uniformly over all labels for noisy rows
  Schedule schedule = Stationary{};
  std::uint64_t env_seed = 0;
};

StreamSpec build_stream_spec(const StreamRecipe& recipe, std::size_t num_labels,
                             std::size_t horizon, std::uint64_t seed);

struct StreamRound {
  std::size_t t = 0;
  Point x;
  LabelIndex y = 0;
  std::size_t region = 0;
  std::size_t regime = 1;  // 1-based
  std::shared_ptr<const ProbabilityRow> conditional_row;  // empty for imported streams
};

// Known structure of the regression functions g*_t, measured on the tables:
// norm of g*_1 is max_r ||row_r||_2 of the first table, and each step is
// max_r TV(row_r at t, row_r at t-1).
struct StreamMetadata {
  double first_norm = 0.0;
  std::vector<double> step_movement;  // rounds 2..T
};

struct GeneratedStream {
  std::vector<StreamRound> rounds;
  StreamMetadata metadata;
};

GeneratedStream generate(const StreamSpec& spec);

// Round t (1-based) alone; identical to generate(spec).rounds[t-1].
StreamRound generate_round(const StreamSpec& spec, std::size_t t);

std::size_t nearest_anchor(const std::vector<Point>& anchors, const Point& x);

// ||g - p||_2^2 in the explicit embedding, p the round's conditional row.
double conditional_mean_residual(const StreamRound& round, const LabelExpansion& g);

// CSV with header t,x0,..,x{d-1},y,regime.
void write_stream_csv(std::ostream& out, const std::vector<StreamRound>& rounds);
// Throws FormatError naming the line or column at fault.
std::vector<StreamRound> read_stream_csv(std::istream& in);

}  // namespace osp
