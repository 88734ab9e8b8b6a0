#include "osp/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "osp/csv.hpp"
#include "osp/errors.hpp"
#include "osp/salami.hpp"

namespace osp {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Points of a fixed grid above this count are not interpolated for the
// Monte-Carlo check.
constexpr std::size_t kMaxInterpolationPoints = 1024;
constexpr double kInterpolationRidge = 1e-6;
constexpr std::size_t kMinMonteCarloSeeds = 30;
constexpr double kScalingThreshold = 0.85;

const std::vector<std::string> kSummaryHeader = {
    "cell",      "learner",    "lambda",  "horizon",        "seed",   "ridge",
    "eta",       "c_delta",    "cum_regret", "sum_residual", "d_eff", "min_loss",
    "log_factor", "b_const",   "expert_gap", "v0",           "vg",     "excess_risk",
    "gstar_norm", "gstar_residual", "jitter", "frozen",      "status", "message"};

const std::vector<std::string> kChecksHeader = {"cell", "learner", "lambda", "horizon", "seed",
                                                "check", "lhs", "rhs", "satisfied", "gating",
                                                "detail"};

bool is_salami(LearnerKind k) {
  return k == LearnerKind::salami || k == LearnerKind::salami_shifted;
}

bool is_kaar(LearnerKind k) { return !is_salami(k); }

KaarMode mode_of(LearnerKind k) {
  return k == LearnerKind::oskaar || k == LearnerKind::salami ? KaarMode::plain
                                                              : KaarMode::shifted;
}

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

std::string seed_text(const CellKey& k) { return k.replay ? "replay" : std::to_string(k.seed); }

// Everything a cell needs besides the configuration.
struct CellInput {
  CellKey key;
  std::vector<StreamRound> rounds;
  std::optional<StreamSpec> spec;  // generated streams only
  std::optional<StreamMetadata> metadata;
};

struct Interpolant {
  double norm2 = kNaN;
  double residual = kNaN;
};

std::vector<Point> grid_points(int dim, int per_axis) {
  std::vector<Point> out;
  std::size_t total = 1;
  for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(per_axis);
  out.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    Point x(dim);
    std::size_t rest = idx;
    for (int i = dim - 1; i >= 0; --i) {
      const auto j = static_cast<double>(rest % static_cast<std::size_t>(per_axis));
      rest /= static_cast<std::size_t>(per_axis);
      x[i] = -1.0 + 2.0 * j / static_cast<double>(per_axis - 1);
    }
    out.push_back(std::move(x));
  }
  return out;
}

// g* interpolating the conditional rows on every grid point, and the sum of
// its squared errors ||g*(x_t) - p_t||^2 along the stream.
std::optional<Interpolant> grid_interpolant(const ExperimentConfig& config, const StreamSpec& spec,
                                            const std::vector<StreamRound>& rounds) {
  if (spec.input_law != InputLaw::fixed_grid || !std::holds_alternative<Stationary>(spec.schedule))
    return std::nullopt;
  double count = 1.0;
  for (int i = 0; i < spec.input_dim; ++i) count *= spec.grid_points;
  if (count > static_cast<double>(kMaxInterpolationPoints)) return std::nullopt;

  const auto pts = grid_points(spec.input_dim, spec.grid_points);
  const auto n = static_cast<Eigen::Index>(pts.size());
  const auto ny = static_cast<Eigen::Index>(spec.num_labels());
  Eigen::MatrixXd k(n, n), p(n, ny);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) k(i, j) = k(j, i) = config.kernel(pts[i], pts[j]);
    const auto& row = spec.tables.front()[nearest_anchor(spec.anchors, pts[i])];
    for (Eigen::Index l = 0; l < ny; ++l) p(i, l) = row[static_cast<std::size_t>(l)];
  }
  Eigen::MatrixXd reg = k;
  reg.diagonal().array() += kInterpolationRidge;
  const Eigen::MatrixXd alpha = reg.llt().solve(p);
  Interpolant g;
  g.norm2 = (alpha.transpose() * k * alpha).trace();
  g.residual = 0.0;
  for (const auto& r : rounds) {
    Eigen::VectorXd v(n);
    for (Eigen::Index j = 0; j < n; ++j) v[j] = config.kernel(r.x, pts[j]);
    const Eigen::VectorXd gx = alpha.transpose() * v;
    for (Eigen::Index l = 0; l < ny; ++l) {
      const double d = gx[l] - (*r.conditional_row)[static_cast<std::size_t>(l)];
      g.residual += d * d;
    }
  }
  return g;
}

void write_rounds(const fs::path& file, const RegretReport& report) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(report.horizon());
  for (const auto& r : report.rounds())
    rows.push_back({std::to_string(r.t), std::to_string(r.y), std::to_string(r.z_hat),
                    format_number(r.loss), format_number(r.baseline_loss),
                    format_number(r.inst_regret), format_number(r.cum_regret),
                    format_number(r.feature_residual)});
  write_csv(file, kRoundsHeader, rows);
}

FeatureBoundTerms terms_from_summary(const CellSummary& s) {
  FeatureBoundTerms t;
  t.mode = mode_of(s.key.learner);
  t.horizon = s.key.horizon;
  t.ridge = s.ridge;
  t.d_eff = s.d_eff;
  t.min_loss = s.min_loss;
  t.log_factor = s.log_factor;
  t.b_const = s.b_const;
  t.feature_bound = t.mode == KaarMode::plain
                        ? t.log_factor * t.d_eff + t.min_loss
                        : 0.25 * t.b_const * t.b_const * t.log_factor * t.d_eff + t.min_loss;
  return t;
}

CheckRow make_row(const CellSummary& s, BoundCheck check, bool gating = true) {
  return {s.key.id(), learner_name(s.key.learner), s.key.lambda.label(),
          std::to_string(s.key.horizon), seed_text(s.key), std::move(check), gating};
}

// Per-cell inequalities, computed from the stored report and summary terms so
// that `run` and `check` agree.
std::vector<CheckRow> cell_checks(const ExperimentConfig& config, const CellSummary& s,
                                  const RegretReport& report) {
  std::vector<CheckRow> out;
  if (config.checks.lemma1) out.push_back(make_row(s, check_lemma1(report, s.c_delta)));
  if (config.checks.theorem1 && is_kaar(s.key.learner)) {
    const auto terms = terms_from_summary(s);
    out.push_back(make_row(s, check_feature_bound(report, terms)));
    out.push_back(make_row(s, check_theorem1(report, terms, s.c_delta)));
  }
  if (config.checks.expert_regret && is_salami(s.key.learner))
    out.push_back(make_row(s, check_expert_regret(s.expert_gap, s.key.horizon, s.eta)));
  return out;
}

// Checks over groups of cells sharing (learner, lambda) or (learner, lambda,
// horizon).
std::vector<CheckRow> group_checks(const ExperimentConfig& config,
                                   const std::vector<CellSummary>& cells) {
  std::vector<CheckRow> out;
  struct Acc {
    std::size_t n = 0;
    double regret = 0.0, capacity = 0.0, gstar_norm = 0.0, gstar_residual = 0.0;
    double ridge = 0.0, c_delta = 0.0;
    bool interpolated = true;
  };
  // keyed by (learner, lambda label, horizon)
  std::map<std::tuple<int, std::string, std::size_t>, Acc> groups;
  for (const auto& c : cells) {
    if (!c.ok || c.key.replay) continue;
    auto& a = groups[{static_cast<int>(c.key.learner), c.key.lambda.label(), c.key.horizon}];
    ++a.n;
    a.regret += c.cum_regret;
    a.capacity += c.d_eff * c.log_factor;
    a.gstar_norm = c.gstar_norm;
    a.gstar_residual += c.gstar_residual;
    a.ridge = c.ridge;
    a.c_delta = c.c_delta;
    if (std::isnan(c.gstar_norm) || std::isnan(c.gstar_residual)) a.interpolated = false;
  }

  if (config.checks.theorem1) {
    for (const auto& [key, a] : groups) {
      const auto learner = static_cast<LearnerKind>(std::get<0>(key));
      if (learner != LearnerKind::oskaar || a.n < kMinMonteCarloSeeds || !a.interpolated) continue;
      const double n = static_cast<double>(a.n);
      const double t = static_cast<double>(std::get<2>(key));
      BoundCheck c;
      c.name = "expected_regret_mc";
      c.lhs = a.regret / n;
      c.rhs = 2.0 * a.c_delta * std::sqrt(t) *
              std::sqrt(a.capacity / n + a.ridge * a.gstar_norm + a.gstar_residual / n);
      c.satisfied = c.lhs <= c.rhs + kBoundSlack;
      c.detail = "seeds=" + std::to_string(a.n) + " gstar_norm=" + format_number(a.gstar_norm);
      out.push_back({"*", learner_name(learner), std::get<1>(key), std::to_string(std::get<2>(key)),
                     "*", std::move(c), true});
    }
  }

  if (config.checks.scaling_fit) {
    std::map<std::pair<int, std::string>, std::vector<std::pair<double, double>>> curves;
    for (const auto& [key, a] : groups)
      curves[{std::get<0>(key), std::get<1>(key)}].emplace_back(
          static_cast<double>(std::get<2>(key)), a.regret / static_cast<double>(a.n));
    for (const auto& [key, points] : curves) {
      if (points.size() < 4) continue;
      BoundCheck c;
      c.name = "scaling_fit";
      c.rhs = kScalingThreshold;
      try {
        c.lhs = regret_scaling_fit(points);
        c.satisfied = c.lhs <= c.rhs;
        c.detail = "horizons=" + std::to_string(points.size());
      } catch (const InputError& e) {
        c.lhs = kNaN;
        c.satisfied = false;
        c.detail = one_line(e.what());
      }
      out.push_back({"*", learner_name(static_cast<LearnerKind>(key.first)), key.second, "*", "*",
                     std::move(c), false});
    }
  }
  return out;
}

struct CellResult {
  CellSummary summary;
  std::vector<CheckRow> checks;
};

// Mean excess risk of the averaged predictor on fresh rounds of the same
// environment.
double excess_risk(const OskaarLearner& learner, const StreamSpec& spec, std::size_t test_points) {
  if (test_points == 0) return kNaN;
  StreamSpec longer = spec;
  longer.horizon = spec.horizon + test_points;
  const BatchAverager average(learner);
  const LossSpace& space = learner.space();
  double total = 0.0;
  for (std::size_t t = spec.horizon + 1; t <= longer.horizon; ++t) {
    const StreamRound r = generate_round(longer, t);
    LabelExpansion p;
    for (std::size_t l = 0; l < r.conditional_row->size(); ++l)
      if ((*r.conditional_row)[l] > 0.0) p.add(l, (*r.conditional_row)[l]);
    const OutputIndex bayes = decode(space, p);
    const OutputIndex z = average(r.x).z_hat;
    total += decoding_score(space, z, p) - decoding_score(space, bayes, p);
  }
  return total / static_cast<double>(test_points);
}

CellResult run_cell(const ExperimentConfig& config, const LossSpacePtr& space,
                    const CellInput& in, const fs::path& cell_dir) {
  CellResult out;
  CellSummary& s = out.summary;
  s.key = in.key;
  s.c_delta = config.c_delta ? *config.c_delta : space->c_delta();
  for (double* v : {&s.ridge, &s.eta, &s.cum_regret, &s.sum_residual, &s.d_eff, &s.min_loss,
                    &s.log_factor, &s.b_const, &s.expert_gap, &s.v0, &s.vg, &s.excess_risk,
                    &s.gstar_norm, &s.gstar_residual})
    *v = kNaN;
  const double lambda = in.key.lambda.at(in.key.horizon);

  try {
    fs::create_directories(cell_dir);
    RegretReport report(space);
    if (is_kaar(in.key.learner)) {
      OskaarOptions opts;
      opts.lambda = lambda;
      opts.mode = in.key.learner == LearnerKind::oskaar ? KaarMode::plain : KaarMode::shifted;
      opts.solve_tolerance = config.solve_tolerance;
      OskaarLearner learner(space, config.kernel, opts);
      for (const auto& r : in.rounds) {
        const auto pred = learner.predict(r.x);
        report.record(r.y, pred.z_hat, learner.feature_residual(pred.coeffs, r.y));
        learner.update(r.y);
      }
      const auto terms = feature_bound_terms(learner, config.g_norm_bound);
      s.ridge = terms.ridge;
      s.d_eff = terms.d_eff;
      s.min_loss = terms.min_loss;
      s.log_factor = terms.log_factor;
      s.b_const = terms.b_const;
      s.jitter = learner.estimator().gram().jitter_count();
      if (in.key.learner == LearnerKind::batch_average && in.spec)
        s.excess_risk = excess_risk(learner, *in.spec, config.batch_test_points);
      if (in.key.learner == LearnerKind::oskaar && in.spec) {
        if (const auto g = grid_interpolant(config, *in.spec, in.rounds)) {
          s.gstar_norm = g->norm2;
          s.gstar_residual = g->residual;
        }
      }
    } else {
      SalamiOptions opts;
      opts.lambda = lambda;
      opts.eta = config.eta_for(*space);
      opts.mode = mode_of(in.key.learner);
      opts.backend = config.salami_backend;
      opts.solve_tolerance = config.solve_tolerance;
      ExpertPool pool(space, config.kernel, opts);
      std::vector<std::vector<std::string>> weights;
      for (const auto& r : in.rounds) {
        const auto& pred = pool.predict_mixture(r.x);
        if (config.dump_weights)
          for (std::size_t i = 0; i < pred.probabilities.size(); ++i)
            weights.push_back({std::to_string(pool.rounds() + 1), std::to_string(i + 1),
                               format_number(pred.probabilities[i])});
        report.record(r.y, pred.z_hat, pred.mixture.residual(r.y));
        pool.update_weights(r.y);
      }
      s.ridge = opts.mode == KaarMode::plain ? lambda : 4.0 * lambda;
      s.eta = opts.eta;
      s.expert_gap = pool.max_expert_regret();
      s.frozen = pool.frozen_experts();
      if (config.dump_weights) write_csv(cell_dir / "weights.csv", {"t", "s", "p"}, weights);
    }
    s.cum_regret = report.cumulative_regret();
    s.sum_residual = report.sum_residuals();
    if (in.metadata) {
      const auto v = variation_diagnostics(&*in.metadata);
      s.v0 = static_cast<double>(v->v0);
      s.vg = v->vg;
    }
    write_rounds(cell_dir / "rounds.csv", report);
    out.checks = cell_checks(config, s, report);
  } catch (const std::exception& e) {
    s.ok = false;
    s.error = one_line(e.what());
    out.checks.clear();
  }
  return out;
}

std::vector<std::string> summary_row(const CellSummary& s) {
  return {s.key.id(),
          learner_name(s.key.learner),
          s.key.lambda.label(),
          std::to_string(s.key.horizon),
          seed_text(s.key),
          format_number(s.ridge),
          format_number(s.eta),
          format_number(s.c_delta),
          format_number(s.cum_regret),
          format_number(s.sum_residual),
          format_number(s.d_eff),
          format_number(s.min_loss),
          format_number(s.log_factor),
          format_number(s.b_const),
          format_number(s.expert_gap),
          format_number(s.v0),
          format_number(s.vg),
          format_number(s.excess_risk),
          format_number(s.gstar_norm),
          format_number(s.gstar_residual),
          std::to_string(s.jitter),
          std::to_string(s.frozen),
          s.ok ? "ok" : "error",
          s.error};
}

std::vector<std::string> check_row(const CheckRow& c) {
  return {c.cell,
          c.learner,
          c.lambda,
          c.horizon,
          c.seed,
          c.check.name,
          format_number(c.check.lhs),
          format_number(c.check.rhs),
          c.check.satisfied ? "true" : "false",
          c.gating ? "true" : "false",
          one_line(c.check.detail)};
}

void report_failures(const RunReport& report, std::ostream* diag) {
  if (!diag) return;
  for (const auto& c : report.cells)
    if (!c.ok) *diag << "cell error: " << c.key.id() << ": " << c.error << "\n";
  for (const auto& c : report.checks)
    if (!c.check.satisfied)
      *diag << (c.gating ? "check failed: " : "advisory: ") << c.check.name << " cell=" << c.cell
            << " learner=" << c.learner << " lambda=" << c.lambda << " T=" << c.horizon
            << " seed=" << c.seed << " lhs=" << format_number(c.check.lhs)
            << " rhs=" << format_number(c.check.rhs) << "\n";
}

LossSpacePtr loss_space_for(const ExperimentConfig& config) {
  try {
    return LossSpace::builtin(config.loss);
  } catch (const std::exception& e) {
    throw ConfigError(e.what(), "loss");
  }
}

RunReport execute(const ExperimentConfig& config, const LossSpacePtr& space,
                  std::vector<CellInput> inputs, const RunOptions& options,
                  const std::function<void(CellInput&)>& prepare) {
  const fs::path dir = options.output_dir;
  fs::create_directories(dir / "cells");
  {
    std::ofstream manifest(dir / "config.yaml", std::ios::binary);
    manifest << to_yaml(config);
    if (!manifest) throw std::runtime_error("cannot write " + (dir / "config.yaml").string());
  }

  std::vector<CellResult> results(inputs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < inputs.size();) {
      try {
        prepare(inputs[i]);
        results[i] = run_cell(config, space, inputs[i], dir / "cells" / inputs[i].key.id());
      } catch (const std::exception& e) {
        results[i].summary.key = inputs[i].key;
        results[i].summary.ok = false;
        results[i].summary.error = one_line(e.what());
      }
      // the stream is no longer needed once the cell is done
      inputs[i].rounds = {};
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(inputs.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  RunReport report;
  for (auto& r : results) {
    report.cells.push_back(std::move(r.summary));
    for (auto& c : r.checks) report.checks.push_back(std::move(c));
  }
  for (auto& c : group_checks(config, report.cells)) report.checks.push_back(std::move(c));

  std::vector<std::vector<std::string>> rows;
  for (const auto& c : report.cells) rows.push_back(summary_row(c));
  write_csv(dir / "summary.csv", kSummaryHeader, rows);
  rows.clear();
  for (const auto& c : report.checks) rows.push_back(check_row(c));
  write_csv(dir / "checks.csv", kChecksHeader, rows);
  report_failures(report, options.diagnostics);
  return report;
}

}  // namespace

std::string CellKey::id() const {
  std::string out = learner_name(learner) + "_lam" + lambda.label() + "_T" + std::to_string(horizon);
  return out + (replay ? "_replay" : "_s" + std::to_string(seed));
}

int RunReport::exit_code() const {
  for (const auto& c : cells)
    if (!c.ok) return 3;
  for (const auto& c : checks)
    if (c.gating && !c.check.satisfied) return 2;
  return 0;
}

RunReport run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const LossSpacePtr space = loss_space_for(config);
  const std::size_t ny = space->num_labels();

  for (std::size_t t : config.horizons)
    for (std::uint64_t seed : config.seeds) config.stream_spec(ny, t, seed).validate();

  std::vector<CellInput> inputs;
  for (auto learner : config.learners)
    for (const auto& lambda : config.lambdas)
      for (std::size_t t : config.horizons)
        for (std::uint64_t seed : config.seeds) {
          CellInput in;
          in.key = {learner, lambda, t, seed, false};
          inputs.push_back(std::move(in));
        }

  auto prepare = [&](CellInput& in) {
    in.spec = config.stream_spec(ny, in.key.horizon, in.key.seed);
    GeneratedStream g = generate(*in.spec);
    in.rounds = std::move(g.rounds);
    in.metadata = std::move(g.metadata);
  };
  return execute(config, space, std::move(inputs), options, prepare);
}

RunReport replay_stream(const ExperimentConfig& config, const std::vector<StreamRound>& stream,
                        const RunOptions& options) {
  const LossSpacePtr space = loss_space_for(config);
  if (stream.empty()) throw FormatError("replayed stream has no rounds");
  for (const auto& r : stream)
    if (r.y >= space->num_labels())
      throw FormatError("round " + std::to_string(r.t) + ": label " + std::to_string(r.y) +
                        " outside " + space->name());

  std::vector<CellInput> inputs;
  for (auto learner : config.learners)
    for (const auto& lambda : config.lambdas) {
      CellInput in;
      in.key = {learner, lambda, stream.size(), 0, true};
      inputs.push_back(std::move(in));
    }
  auto prepare = [&](CellInput& in) { in.rounds = stream; };
  return execute(config, space, std::move(inputs), options, prepare);
}

RunReport check_directory(const fs::path& dir, std::ostream* diagnostics) {
  const ExperimentConfig config = load_config(dir / "config.yaml");
  const LossSpacePtr space = loss_space_for(config);
  const CsvTable summary = read_csv(dir / "summary.csv");

  std::map<std::string, LearnerKind> kinds;
  for (auto k : {LearnerKind::oskaar, LearnerKind::oskaar_shifted, LearnerKind::salami,
                 LearnerKind::salami_shifted, LearnerKind::batch_average})
    kinds[learner_name(k)] = k;
  std::map<std::string, LambdaSpec> lambdas;
  for (const auto& l : config.lambdas) lambdas[l.label()] = l;

  RunReport report;
  for (std::size_t i = 0; i < summary.rows.size(); ++i) {
    CellSummary s;
    const auto learner = kinds.find(summary.text(i, "learner"));
    if (learner == kinds.end())
      throw FormatError(summary.source + ": unknown learner '" + summary.text(i, "learner") + "'");
    const auto lambda = lambdas.find(summary.text(i, "lambda"));
    if (lambda == lambdas.end())
      throw FormatError(summary.source + ": lambda '" + summary.text(i, "lambda") +
                        "' is not in config.yaml");
    s.key.learner = learner->second;
    s.key.lambda = lambda->second;
    s.key.horizon = static_cast<std::size_t>(summary.number(i, "horizon"));
    s.key.replay = summary.text(i, "seed") == "replay";
    if (!s.key.replay) s.key.seed = std::stoull(summary.text(i, "seed"));
    s.ok = summary.text(i, "status") == "ok";
    s.error = summary.text(i, "message");
    s.ridge = summary.number(i, "ridge");
    s.eta = summary.number(i, "eta");
    s.c_delta = config.c_delta ? *config.c_delta : space->c_delta();
    s.cum_regret = summary.number(i, "cum_regret");
    s.sum_residual = summary.number(i, "sum_residual");
    s.d_eff = summary.number(i, "d_eff");
    s.min_loss = summary.number(i, "min_loss");
    s.log_factor = summary.number(i, "log_factor");
    s.b_const = summary.number(i, "b_const");
    s.expert_gap = summary.number(i, "expert_gap");
    s.gstar_norm = summary.number(i, "gstar_norm");
    s.gstar_residual = summary.number(i, "gstar_residual");
    s.excess_risk = summary.number(i, "excess_risk");
    if (s.key.id() != summary.text(i, "cell"))
      throw FormatError(summary.source + ": cell '" + summary.text(i, "cell") +
                        "' does not match its key columns");

    if (s.ok) {
      const CsvTable rounds = read_csv(dir / "cells" / s.key.id() / "rounds.csv");
      std::vector<RoundRecord> records(rounds.rows.size());
      for (std::size_t r = 0; r < rounds.rows.size(); ++r) {
        records[r].t = static_cast<std::size_t>(rounds.number(r, "t"));
        records[r].y = static_cast<LabelIndex>(rounds.number(r, "y_index"));
        records[r].z_hat = static_cast<OutputIndex>(rounds.number(r, "z_hat_index"));
        records[r].feature_residual = rounds.number(r, "feature_residual");
      }
      const RegretReport regret = RegretReport::from_records(space, records);
      if (regret.horizon() != s.key.horizon)
        throw FormatError(rounds.source + ": " + std::to_string(regret.horizon()) +
                          " rounds, summary says " + std::to_string(s.key.horizon));
      s.cum_regret = regret.cumulative_regret();
      s.sum_residual = regret.sum_residuals();
      for (auto& c : cell_checks(config, s, regret)) report.checks.push_back(std::move(c));
    }
    report.cells.push_back(std::move(s));
  }
  for (auto& c : group_checks(config, report.cells)) report.checks.push_back(std::move(c));
  report_failures(report, diagnostics);
  return report;
}

}  // namespace osp
