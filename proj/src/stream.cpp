#include "osp/stream.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "osp/errors.hpp"
#include "osp/rng.hpp"

namespace osp {

namespace {

std::size_t table_count(const Schedule& schedule) {
  if (const auto* sw = std::get_if<Switching>(&schedule)) return sw->change_times.size() + 1;
  if (std::holds_alternative<Drifting>(schedule)) return 2;
  return 1;
}

double total_variation(const ProbabilityRow& a, const ProbabilityRow& b) {
  double s = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) s += std::abs(a[l] - b[l]);
  return 0.5 * s;
}

Point draw_direction(std::uint64_t seed, std::uint64_t lane, std::uint64_t base, int dim) {
  Point x(dim);
  for (int i = 0; i < dim; ++i)
    x[i] = rng::normal(seed, lane, (base << 15) | static_cast<std::uint64_t>(i));
  const double n = x.norm();
  if (n > 0.0) x /= n;
  else x[0] = 1.0;
  return x;
}

Point draw_cube(std::uint64_t seed, std::uint64_t lane, std::uint64_t base, int dim) {
  Point x(dim);
  for (int i = 0; i < dim; ++i)
    x[i] = 2.0 * rng::uniform(seed, lane, (base << 16) | static_cast<std::uint64_t>(i)) - 1.0;
  return x;
}

Point draw_input(const StreamSpec& spec, std::size_t t) {
  const auto base = static_cast<std::uint64_t>(t);
  switch (spec.input_law) {
    case InputLaw::uniform_sphere:
      return draw_direction(spec.seed, rng::kLaneInput, base, spec.input_dim);
    case InputLaw::uniform_cube:
      return draw_cube(spec.seed, rng::kLaneInput, base, spec.input_dim);
    case InputLaw::fixed_grid: {
      Point x(spec.input_dim);
      const int g = spec.grid_points;
      for (int i = 0; i < spec.input_dim; ++i) {
        const double u = rng::uniform(spec.seed, rng::kLaneInput,
                                      (base << 16) | static_cast<std::uint64_t>(i));
        const int j = std::min(g - 1, static_cast<int>(u * g));
        x[i] = g == 1 ? 0.0 : -1.0 + 2.0 * j / (g - 1);
      }
      return x;
    }
  }
  return {};
}

LabelIndex draw_label(const StreamSpec& spec, std::size_t t, const ProbabilityRow& row) {
  const double u = rng::uniform(spec.seed, rng::kLaneLabel, static_cast<std::uint64_t>(t));
  double cum = 0.0;
  LabelIndex last_positive = 0;
  for (std::size_t l = 0; l < row.size(); ++l) {
    if (row[l] <= 0.0) continue;
    last_positive = l;
    cum += row[l];
    if (u < cum) return l;
  }
  return last_positive;
}

std::size_t regime_at(const Schedule& schedule, std::size_t t) {
  if (const auto* sw = std::get_if<Switching>(&schedule))
    return 1 + static_cast<std::size_t>(
                   std::upper_bound(sw->change_times.begin(), sw->change_times.end(), t) -
                   sw->change_times.begin());
  return 1;
}

// Fraction of the way from the start row to the end row at round t.
double drift_alpha(double step, double distance, std::size_t t) {
  if (!(distance > 0.0)) return 1.0;
  return std::min(1.0, static_cast<double>(t - 1) * step / distance);
}

class Generator {
 public:
  explicit Generator(const StreamSpec& spec) : spec_(spec) {
    spec.validate();
    for (const auto& table : spec.tables) {
      auto& cached = rows_.emplace_back();
      for (const auto& row : table) cached.push_back(std::make_shared<const ProbabilityRow>(row));
    }
    if (std::holds_alternative<Drifting>(spec.schedule))
      for (std::size_t r = 0; r < spec.anchors.size(); ++r)
        distance_.push_back(total_variation(spec.tables[0][r], spec.tables[1][r]));
  }

  StreamRound round(std::size_t t) const {
    StreamRound out;
    out.t = t;
    out.x = draw_input(spec_, t);
    out.region = nearest_anchor(spec_.anchors, out.x);
    out.regime = regime_at(spec_.schedule, t);
    if (const auto* d = std::get_if<Drifting>(&spec_.schedule)) {
      const double a = drift_alpha(d->step_size, distance_[out.region], t);
      const auto& start = spec_.tables[0][out.region];
      const auto& end = spec_.tables[1][out.region];
      ProbabilityRow row(start.size());
      for (std::size_t l = 0; l < row.size(); ++l) row[l] = (1.0 - a) * start[l] + a * end[l];
      out.conditional_row = std::make_shared<const ProbabilityRow>(std::move(row));
    } else {
      out.conditional_row = rows_[out.regime - 1][out.region];
    }
    out.y = draw_label(spec_, t, *out.conditional_row);
    return out;
  }

  StreamMetadata metadata() const {
    StreamMetadata meta;
    for (const auto& row : spec_.tables[0]) {
      double n2 = 0.0;
      for (double p : row) n2 += p * p;
      meta.first_norm = std::max(meta.first_norm, std::sqrt(n2));
    }
    if (spec_.horizon < 2) return meta;
    meta.step_movement.assign(spec_.horizon - 1, 0.0);
    if (const auto* sw = std::get_if<Switching>(&spec_.schedule)) {
      for (std::size_t k = 0; k < sw->change_times.size(); ++k) {
        double move = 0.0;
        for (std::size_t r = 0; r < spec_.anchors.size(); ++r)
          move = std::max(move, total_variation(spec_.tables[k][r], spec_.tables[k + 1][r]));
        meta.step_movement[sw->change_times[k] - 2] = move;
      }
    } else if (const auto* d = std::get_if<Drifting>(&spec_.schedule)) {
      for (std::size_t t = 2; t <= spec_.horizon; ++t) {
        double move = 0.0;
        for (double dist : distance_) {
          const double now = std::min(dist, static_cast<double>(t - 1) * d->step_size);
          const double before = std::min(dist, static_cast<double>(t - 2) * d->step_size);
          move = std::max(move, now - before);
        }
        meta.step_movement[t - 2] = move;
      }
    }
    return meta;
  }

 private:
  const StreamSpec& spec_;
  std::vector<std::vector<std::shared_ptr<const ProbabilityRow>>> rows_;
  std::vector<double> distance_;
};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class T>
T parse_cell(const std::string& cell, const std::string& column, std::size_t line) {
  T v{};
  const char* end = cell.data() + cell.size();
  auto [p, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc{} || p != end)
    throw FormatError("line " + std::to_string(line) + ": column '" + column +
                      "' is not a valid number: '" + cell + "'");
  return v;
}

}  // namespace

std::size_t StreamSpec::num_labels() const {
  if (tables.empty() || tables.front().empty()) return 0;
  return tables.front().front().size();
}

void StreamSpec::validate() const {
  if (input_dim < 1) throw ConfigError("must be a positive integer", "stream.input_dim");
  if (horizon < 1) throw ConfigError("must be a positive integer", "horizon");
  if (input_law == InputLaw::fixed_grid && grid_points < 1)
    throw ConfigError("must be a positive integer", "stream.grid_points");
  if (anchors.empty()) throw ConfigError("at least one anchor is required", "stream.regions");
  for (const auto& a : anchors)
    if (a.size() != input_dim)
      throw ConfigError("anchor dimension does not match input_dim", "stream.anchors");
  if (tables.size() != table_count(schedule))
    throw ConfigError("expected " + std::to_string(table_count(schedule)) +
                          " conditional tables for this schedule, got " +
                          std::to_string(tables.size()),
                      "stream.tables");
  const std::size_t ny = num_labels();
  if (ny == 0) throw ConfigError("conditional rows must be nonempty", "stream.tables");
  for (const auto& table : tables) {
    if (table.size() != anchors.size())
      throw ConfigError("each table needs one row per anchor", "stream.tables");
    for (const auto& row : table) {
      if (row.size() != ny)
        throw ConfigError("conditional rows have different lengths", "stream.tables");
      double sum = 0.0;
      for (double p : row) {
        if (!(p >= 0.0) || !std::isfinite(p))
          throw ConfigError("probabilities must be finite and nonnegative", "stream.tables");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw ConfigError("conditional row sums to " + format_double(sum) + " instead of 1",
                          "stream.tables");
    }
  }
  if (const auto* sw = std::get_if<Switching>(&schedule)) {
    for (std::size_t k = 0; k < sw->change_times.size(); ++k) {
      const std::size_t c = sw->change_times[k];
      if (c < 2 || c > horizon)
        throw ConfigError("change time " + std::to_string(c) + " outside [2, horizon]",
                          "stream.change_times");
      if (k > 0 && c <= sw->change_times[k - 1])
        throw ConfigError("change times must be strictly increasing", "stream.change_times");
    }
  }
  if (const auto* d = std::get_if<Drifting>(&schedule))
    if (!(d->step_size > 0.0) || !std::isfinite(d->step_size))
      throw ConfigError("must be positive", "stream.step_size");
}

StreamSpec build_stream_spec(const StreamRecipe& recipe, std::size_t num_labels,
                             std::size_t horizon, std::uint64_t seed) {
  if (recipe.regions == 0) throw ConfigError("must be a positive integer", "stream.regions");
  if (recipe.input_dim < 1) throw ConfigError("must be a positive integer", "stream.input_dim");
  if (num_labels == 0) throw ConfigError("label space is empty", "loss");
  if (recipe.rows == RowKind::noisy && !(recipe.noise >= 0.0 && recipe.noise <= 1.0))
    throw ConfigError("must lie in [0, 1]", "stream.noise");

  StreamSpec spec;
  spec.input_dim = recipe.input_dim;
  spec.input_law = recipe.input_law;
  spec.grid_points = recipe.grid_points;
  spec.schedule = recipe.schedule;
  spec.horizon = horizon;
  spec.seed = seed;

  for (std::size_t r = 0; r < recipe.regions; ++r) {
    const auto base = static_cast<std::uint64_t>(r);
    spec.anchors.push_back(recipe.input_law == InputLaw::uniform_sphere
                               ? draw_direction(recipe.env_seed, rng::kLaneAnchor, base,
                                                recipe.input_dim)
                               : draw_cube(recipe.env_seed, rng::kLaneAnchor, base,
                                           recipe.input_dim));
  }

  const auto ny = static_cast<double>(num_labels);
  std::vector<LabelIndex> labels(recipe.regions);
  const std::size_t count = table_count(recipe.schedule);
  for (std::size_t k = 0; k < count; ++k) {
    ConditionalTable table;
    for (std::size_t r = 0; r < recipe.regions; ++r) {
      const double u = rng::uniform(recipe.env_seed, rng::kLaneTable,
                                    (static_cast<std::uint64_t>(k) << 20) | r);
      if (k == 0) {
        labels[r] = std::min(num_labels - 1, static_cast<std::size_t>(u * ny));
      } else if (num_labels > 1) {
        const auto hop = std::min(num_labels - 2, static_cast<std::size_t>(u * (ny - 1.0)));
        labels[r] = (labels[r] + 1 + hop) % num_labels;
      }
      ProbabilityRow row(num_labels, 0.0);
      if (recipe.rows == RowKind::noisy) {
        for (double& p : row) p = recipe.noise / ny;
        row[labels[r]] += 1.0 - recipe.noise;
      } else {
        row[labels[r]] = 1.0;
      }
      table.push_back(std::move(row));
    }
    spec.tables.push_back(std::move(table));
  }
  spec.validate();
  return spec;
}

GeneratedStream generate(const StreamSpec& spec) {
  Generator gen(spec);
  GeneratedStream out;
  out.rounds.reserve(spec.horizon);
  for (std::size_t t = 1; t <= spec.horizon; ++t) out.rounds.push_back(gen.round(t));
  out.metadata = gen.metadata();
  return out;
}

StreamRound generate_round(const StreamSpec& spec, std::size_t t) {
  if (t == 0 || t > spec.horizon) throw InputError("round outside [1, horizon]");
  return Generator(spec).round(t);
}

std::size_t nearest_anchor(const std::vector<Point>& anchors, const Point& x) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < anchors.size(); ++r) {
    const double d = (anchors[r] - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = r;
    }
  }
  return best;
}

double conditional_mean_residual(const StreamRound& round, const LabelExpansion& g) {
  if (!round.conditional_row) throw InputError("round carries no conditional row");
  const auto& p = *round.conditional_row;
  double s = 0.0;
  auto it = g.terms().begin();
  for (std::size_t l = 0; l < p.size(); ++l) {
    double c = 0.0;
    if (it != g.terms().end() && it->first == l) c = (it++)->second;
    s += (c - p[l]) * (c - p[l]);
  }
  for (; it != g.terms().end(); ++it) s += it->second * it->second;
  return s;
}

void write_stream_csv(std::ostream& out, const std::vector<StreamRound>& rounds) {
  const Eigen::Index d = rounds.empty() ? 0 : rounds.front().x.size();
  out << "t";
  for (Eigen::Index i = 0; i < d; ++i) out << ",x" << i;
  out << ",y,regime\n";
  for (const auto& r : rounds) {
    if (r.x.size() != d) throw InputError("stream rounds have different input dimensions");
    out << r.t;
    for (Eigen::Index i = 0; i < d; ++i) out << ',' << format_double(r.x[i]);
    out << ',' << r.y << ',' << r.regime << '\n';
  }
}

std::vector<StreamRound> read_stream_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("stream CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  if (header.size() < 3 || header.front() != "t")
    throw FormatError("stream CSV header must start with column 't'");
  for (const char* name : {"y", "regime"})
    if (std::find(header.begin(), header.end(), name) == header.end())
      throw FormatError(std::string("stream CSV is missing column '") + name + "'");
  if (header[header.size() - 2] != "y" || header.back() != "regime")
    throw FormatError("stream CSV must end with columns 'y,regime'");
  const std::size_t d = header.size() - 3;
  if (d == 0) throw FormatError("stream CSV has no input columns x0..");
  for (std::size_t i = 0; i < d; ++i)
    if (header[i + 1] != "x" + std::to_string(i))
      throw FormatError("stream CSV is missing column 'x" + std::to_string(i) + "'");

  std::vector<StreamRound> rounds;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw FormatError("line " + std::to_string(lineno) + ": expected " +
                        std::to_string(header.size()) + " columns, got " +
                        std::to_string(cells.size()));
    StreamRound r;
    r.t = parse_cell<std::size_t>(cells[0], "t", lineno);
    r.x.resize(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i)
      r.x[static_cast<Eigen::Index>(i)] = parse_cell<double>(cells[i + 1], header[i + 1], lineno);
    r.y = parse_cell<std::size_t>(cells[d + 1], "y", lineno);
    r.regime = parse_cell<std::size_t>(cells[d + 2], "regime", lineno);
    if (r.t != rounds.size() + 1)
      throw FormatError("line " + std::to_string(lineno) + ": column 't' must count 1, 2, ...");
    rounds.push_back(std::move(r));
  }
  return rounds;
}

}  // namespace osp
