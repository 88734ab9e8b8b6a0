#include "osp/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "osp/errors.hpp"

namespace osp {

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

[[noreturn]] void fail(const YAML::Node& n, const std::string& field, const std::string& what) {
  throw ConfigError(what, field, line_of(n));
}

template <class T>
T scalar(const YAML::Node& n, const std::string& field, const char* expected) {
  if (!n.IsScalar()) fail(n, field, std::string("expected ") + expected);
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, field, std::string("expected ") + expected + ", got '" + n.Scalar() + "'");
  }
}

double positive(const YAML::Node& n, const std::string& field) {
  const double v = scalar<double>(n, field, "a number");
  if (!(v > 0.0) || !std::isfinite(v)) fail(n, field, "must be positive");
  return v;
}

int positive_int(const YAML::Node& n, const std::string& field) {
  const int v = scalar<int>(n, field, "an integer");
  if (v < 1) fail(n, field, "must be a positive integer");
  return v;
}

// Rejects keys outside `known` so typos do not pass silently.
void known_keys(const YAML::Node& map, const std::string& prefix,
                std::initializer_list<const char*> known) {
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(kv.first, prefix + key, "unknown key");
  }
}

std::vector<YAML::Node> items(const YAML::Node& n) {
  std::vector<YAML::Node> out;
  if (n.IsSequence())
    for (const auto& v : n) out.push_back(v);
  else
    out.push_back(n);
  return out;
}

LearnerKind parse_learner(const YAML::Node& n) {
  const auto s = scalar<std::string>(n, "learner", "a learner name");
  for (auto k : {LearnerKind::oskaar, LearnerKind::oskaar_shifted, LearnerKind::salami,
                 LearnerKind::salami_shifted, LearnerKind::batch_average})
    if (learner_name(k) == s) return k;
  fail(n, "learner",
       "unknown learner '" + s +
           "' (oskaar, oskaar_shifted, salami, salami_shifted, batch_average)");
}

LambdaSpec parse_lambda(const YAML::Node& n) {
  if (n.IsScalar() && n.Scalar() == "sqrt_T") return {true, 0.0};
  return {false, positive(n, "lambda")};
}

KernelSpec parse_kernel(const YAML::Node& n) {
  if (!n.IsMap()) fail(n, "kernel", "expected a mapping with a 'family' key");
  if (!n["family"]) fail(n, "kernel.family", "missing");
  const auto family = scalar<std::string>(n["family"], "kernel.family", "a kernel family");
  try {
    if (family == "gaussian") {
      known_keys(n, "kernel.", {"family", "bandwidth"});
      return KernelSpec::gaussian(n["bandwidth"] ? positive(n["bandwidth"], "kernel.bandwidth")
                                                 : 1.0);
    }
    if (family == "linear") {
      known_keys(n, "kernel.", {"family", "kappa"});
      if (!n["kappa"]) fail(n, "kernel.kappa", "missing (bound on sqrt(k(x, x)))");
      return KernelSpec::linear(positive(n["kappa"], "kernel.kappa"));
    }
    if (family == "polynomial") {
      known_keys(n, "kernel.", {"family", "degree", "offset", "kappa"});
      if (!n["kappa"]) fail(n, "kernel.kappa", "missing (bound on sqrt(k(x, x)))");
      const int degree = n["degree"] ? positive_int(n["degree"], "kernel.degree") : 2;
      const double offset =
          n["offset"] ? scalar<double>(n["offset"], "kernel.offset", "a number") : 1.0;
      return KernelSpec::polynomial(degree, offset, positive(n["kappa"], "kernel.kappa"));
    }
  } catch (const InputError& e) {
    fail(n, "kernel", e.what());
  }
  fail(n["family"], "kernel.family", "unknown kernel family '" + family + "'");
}

BuiltinLoss parse_loss(const YAML::Node& n) {
  if (!n.IsMap()) fail(n, "loss", "expected a mapping with a 'name' key");
  if (!n["name"]) fail(n, "loss.name", "missing");
  const auto name = scalar<std::string>(n["name"], "loss.name", "a loss name");
  auto get = [&](const char* key, int fallback) {
    return n[key] ? positive_int(n[key], std::string("loss.") + key) : fallback;
  };
  if (name == "subset_f1") {
    known_keys(n, "loss.", {"name", "k"});
    return SubsetF1{get("k", 3)};
  }
  if (name == "ordinal") {
    known_keys(n, "loss.", {"name", "k"});
    return Ordinal{get("k", 5)};
  }
  if (name == "hamming") {
    known_keys(n, "loss.", {"name", "alphabet", "length"});
    return Hamming{get("alphabet", 2), get("length", 3)};
  }
  if (name == "ranking") {
    known_keys(n, "loss.", {"name", "num_docs", "score_levels"});
    return Ranking{get("num_docs", 3), get("score_levels", 2)};
  }
  fail(n["name"], "loss.name", "unknown loss '" + name + "' (subset_f1, ordinal, hamming, ranking)");
}

StreamConfig parse_stream(const YAML::Node& n) {
  if (!n.IsMap()) fail(n, "stream", "expected a mapping");
  known_keys(n, "stream.", {"input_dim", "input_law", "grid_points", "regions", "rows", "noise",
                            "env_seed", "schedule", "change_times", "change_fractions",
                            "step_size"});
  StreamConfig c;
  auto& r = c.recipe;
  if (n["input_dim"]) r.input_dim = positive_int(n["input_dim"], "stream.input_dim");
  if (n["input_law"]) {
    const auto law = scalar<std::string>(n["input_law"], "stream.input_law", "an input law");
    if (law == "uniform_cube") r.input_law = InputLaw::uniform_cube;
    else if (law == "uniform_sphere") r.input_law = InputLaw::uniform_sphere;
    else if (law == "fixed_grid") r.input_law = InputLaw::fixed_grid;
    else fail(n["input_law"], "stream.input_law", "unknown input law '" + law + "'");
  }
  if (n["grid_points"]) r.grid_points = positive_int(n["grid_points"], "stream.grid_points");
  if (n["regions"])
    r.regions = static_cast<std::size_t>(positive_int(n["regions"], "stream.regions"));
  if (n["rows"]) {
    const auto rows = scalar<std::string>(n["rows"], "stream.rows", "dirac or noisy");
    if (rows == "dirac") r.rows = RowKind::dirac;
    else if (rows == "noisy") r.rows = RowKind::noisy;
    else fail(n["rows"], "stream.rows", "expected dirac or noisy");
  }
  if (n["noise"]) {
    r.noise = scalar<double>(n["noise"], "stream.noise", "a number");
    if (!(r.noise >= 0.0 && r.noise <= 1.0)) fail(n["noise"], "stream.noise", "must lie in [0, 1]");
  }
  if (n["env_seed"]) r.env_seed = scalar<std::uint64_t>(n["env_seed"], "stream.env_seed", "an unsigned integer");

  const std::string schedule =
      n["schedule"] ? scalar<std::string>(n["schedule"], "stream.schedule", "a schedule")
                    : "stationary";
  if (schedule == "stationary") {
    r.schedule = Stationary{};
  } else if (schedule == "switching") {
    Switching sw;
    if (n["change_times"] && n["change_fractions"])
      fail(n, "stream.change_times", "give either change_times or change_fractions");
    if (n["change_times"]) {
      for (const auto& v : items(n["change_times"]))
        sw.change_times.push_back(static_cast<std::size_t>(positive_int(v, "stream.change_times")));
    } else if (n["change_fractions"]) {
      for (const auto& v : items(n["change_fractions"])) {
        const double f = scalar<double>(v, "stream.change_fractions", "a number");
        if (!(f > 0.0 && f < 1.0)) fail(v, "stream.change_fractions", "must lie in (0, 1)");
        c.change_fractions.push_back(f);
      }
    } else {
      fail(n, "stream.change_times", "a switching schedule needs change_times or change_fractions");
    }
    r.schedule = sw;
  } else if (schedule == "drifting") {
    if (!n["step_size"]) fail(n, "stream.step_size", "a drifting schedule needs step_size");
    r.schedule = Drifting{positive(n["step_size"], "stream.step_size")};
  } else {
    fail(n["schedule"], "stream.schedule", "unknown schedule '" + schedule + "'");
  }
  return c;
}

bool flag(const YAML::Node& n, const std::string& field) {
  return scalar<bool>(n, field, "true or false");
}

}  // namespace

std::string learner_name(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::oskaar: return "oskaar";
    case LearnerKind::oskaar_shifted: return "oskaar_shifted";
    case LearnerKind::salami: return "salami";
    case LearnerKind::salami_shifted: return "salami_shifted";
    case LearnerKind::batch_average: return "batch_average";
  }
  return "unknown";
}

double LambdaSpec::at(std::size_t horizon) const {
  return sqrt_horizon ? std::sqrt(static_cast<double>(horizon)) : value;
}

std::string LambdaSpec::label() const {
  if (sqrt_horizon) return "sqrt_T";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", value);
  return buf;
}

double ExperimentConfig::eta_for(const LossSpace& space) const {
  return eta ? *eta : default_eta(space, g_norm_bound, kernel.kappa());
}

StreamSpec ExperimentConfig::stream_spec(std::size_t num_labels, std::size_t horizon,
                                         std::uint64_t seed) const {
  StreamRecipe r = stream.recipe;
  if (!stream.change_fractions.empty()) {
    Switching sw;
    for (double f : stream.change_fractions)
      sw.change_times.push_back(static_cast<std::size_t>(std::floor(f * static_cast<double>(horizon))) + 1);
    r.schedule = sw;
  }
  return build_stream_spec(r, num_labels, horizon, seed);
}

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, "", e.mark.line >= 0 ? e.mark.line + 1 : 0);
  }
  if (!root.IsMap()) throw ConfigError("the configuration must be a mapping", "", 1);
  known_keys(root, "", {"learner", "lambda", "eta", "g_norm_bound", "salami_backend", "kernel",
                        "loss", "stream", "horizons", "max_horizon", "seeds", "output_dir",
                        "checks", "c_delta", "batch_test_points", "dump_weights",
                        "solve_tolerance"});
  ExperimentConfig c;

  for (const char* key : {"learner", "lambda", "kernel", "loss", "horizons", "seeds"})
    if (!root[key]) throw ConfigError("missing required key", key, 0);

  for (const auto& v : items(root["learner"])) c.learners.push_back(parse_learner(v));
  for (const auto& v : items(root["lambda"])) c.lambdas.push_back(parse_lambda(v));
  if (c.learners.empty()) fail(root["learner"], "learner", "list must not be empty");
  if (c.lambdas.empty()) fail(root["lambda"], "lambda", "list must not be empty");

  if (root["eta"] && !(root["eta"].IsScalar() && root["eta"].Scalar() == "auto"))
    c.eta = positive(root["eta"], "eta");
  if (root["g_norm_bound"]) {
    c.g_norm_bound = scalar<double>(root["g_norm_bound"], "g_norm_bound", "a number");
    if (!(c.g_norm_bound >= 0.0)) fail(root["g_norm_bound"], "g_norm_bound", "must be nonnegative");
  }
  if (root["salami_backend"]) {
    const auto b = scalar<std::string>(root["salami_backend"], "salami_backend", "shared or exact");
    if (b == "shared") c.salami_backend = SalamiBackend::shared;
    else if (b == "exact") c.salami_backend = SalamiBackend::exact;
    else fail(root["salami_backend"], "salami_backend", "expected shared or exact");
  }
  c.kernel = parse_kernel(root["kernel"]);
  c.loss = parse_loss(root["loss"]);
  if (root["stream"]) c.stream = parse_stream(root["stream"]);

  if (root["max_horizon"])
    c.max_horizon = static_cast<std::size_t>(positive_int(root["max_horizon"], "max_horizon"));
  for (const auto& v : items(root["horizons"])) {
    const auto t = static_cast<std::size_t>(positive_int(v, "horizons"));
    if (t > c.max_horizon)
      fail(v, "horizons", "horizon " + std::to_string(t) + " exceeds max_horizon " +
                              std::to_string(c.max_horizon));
    c.horizons.push_back(t);
  }
  if (c.horizons.empty()) fail(root["horizons"], "horizons", "list must not be empty");

  const auto& seeds = root["seeds"];
  if (seeds.IsMap()) {
    known_keys(seeds, "seeds.", {"from", "count"});
    if (!seeds["count"]) fail(seeds, "seeds.count", "missing");
    const auto from = seeds["from"] ? scalar<std::uint64_t>(seeds["from"], "seeds.from", "an unsigned integer") : 0;
    const int count = positive_int(seeds["count"], "seeds.count");
    for (int i = 0; i < count; ++i) c.seeds.push_back(from + static_cast<std::uint64_t>(i));
  } else {
    for (const auto& v : items(seeds))
      c.seeds.push_back(scalar<std::uint64_t>(v, "seeds", "an unsigned integer"));
  }
  if (c.seeds.empty()) fail(seeds, "seeds", "list must not be empty");

  if (root["output_dir"]) c.output_dir = scalar<std::string>(root["output_dir"], "output_dir", "a path");
  if (const auto& ch = root["checks"]) {
    if (!ch.IsMap()) fail(ch, "checks", "expected a mapping of flags");
    known_keys(ch, "checks.", {"lemma1", "theorem1", "expert_regret", "scaling_fit"});
    if (ch["lemma1"]) c.checks.lemma1 = flag(ch["lemma1"], "checks.lemma1");
    if (ch["theorem1"]) c.checks.theorem1 = flag(ch["theorem1"], "checks.theorem1");
    if (ch["expert_regret"]) c.checks.expert_regret = flag(ch["expert_regret"], "checks.expert_regret");
    if (ch["scaling_fit"]) c.checks.scaling_fit = flag(ch["scaling_fit"], "checks.scaling_fit");
  }
  if (root["c_delta"]) c.c_delta = positive(root["c_delta"], "c_delta");
  if (root["batch_test_points"])
    c.batch_test_points =
        static_cast<std::size_t>(positive_int(root["batch_test_points"], "batch_test_points"));
  if (root["dump_weights"]) c.dump_weights = flag(root["dump_weights"], "dump_weights");
  if (root["solve_tolerance"]) c.solve_tolerance = positive(root["solve_tolerance"], "solve_tolerance");

  try {
    (void)LossSpace::builtin(c.loss);
  } catch (const std::exception& e) {
    fail(root["loss"], "loss", e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace osp

namespace osp {

std::string to_yaml(const ExperimentConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "learner" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto l : c.learners) e << learner_name(l);
  e << YAML::EndSeq;
  e << YAML::Key << "lambda" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& l : c.lambdas) {
    if (l.sqrt_horizon) e << "sqrt_T";
    else e << l.value;
  }
  e << YAML::EndSeq;
  e << YAML::Key << "eta" << YAML::Value;
  if (c.eta) e << *c.eta;
  else e << "auto";
  e << YAML::Key << "g_norm_bound" << YAML::Value << c.g_norm_bound;
  e << YAML::Key << "salami_backend" << YAML::Value
    << (c.salami_backend == SalamiBackend::exact ? "exact" : "shared");

  e << YAML::Key << "kernel" << YAML::Value << YAML::BeginMap;
  std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, GaussianKernel>) {
          e << YAML::Key << "family" << YAML::Value << "gaussian";
          e << YAML::Key << "bandwidth" << YAML::Value << f.bandwidth;
        } else if constexpr (std::is_same_v<F, LinearKernel>) {
          e << YAML::Key << "family" << YAML::Value << "linear";
          e << YAML::Key << "kappa" << YAML::Value << c.kernel.kappa();
        } else {
          e << YAML::Key << "family" << YAML::Value << "polynomial";
          e << YAML::Key << "degree" << YAML::Value << f.degree;
          e << YAML::Key << "offset" << YAML::Value << f.offset;
          e << YAML::Key << "kappa" << YAML::Value << c.kernel.kappa();
        }
      },
      c.kernel.family());
  e << YAML::EndMap;

  e << YAML::Key << "loss" << YAML::Value << YAML::BeginMap;
  std::visit(
      [&](const auto& l) {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, SubsetF1>) {
          e << YAML::Key << "name" << YAML::Value << "subset_f1" << YAML::Key << "k" << YAML::Value << l.k;
        } else if constexpr (std::is_same_v<L, Ordinal>) {
          e << YAML::Key << "name" << YAML::Value << "ordinal" << YAML::Key << "k" << YAML::Value << l.k;
        } else if constexpr (std::is_same_v<L, Hamming>) {
          e << YAML::Key << "name" << YAML::Value << "hamming";
          e << YAML::Key << "alphabet" << YAML::Value << l.alphabet;
          e << YAML::Key << "length" << YAML::Value << l.length;
        } else {
          e << YAML::Key << "name" << YAML::Value << "ranking";
          e << YAML::Key << "num_docs" << YAML::Value << l.num_docs;
          e << YAML::Key << "score_levels" << YAML::Value << l.score_levels;
        }
      },
      c.loss);
  e << YAML::EndMap;

  const auto& r = c.stream.recipe;
  e << YAML::Key << "stream" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "input_dim" << YAML::Value << r.input_dim;
  e << YAML::Key << "input_law" << YAML::Value
    << (r.input_law == InputLaw::uniform_cube     ? "uniform_cube"
        : r.input_law == InputLaw::uniform_sphere ? "uniform_sphere"
                                                  : "fixed_grid");
  e << YAML::Key << "grid_points" << YAML::Value << r.grid_points;
  e << YAML::Key << "regions" << YAML::Value << r.regions;
  e << YAML::Key << "rows" << YAML::Value << (r.rows == RowKind::dirac ? "dirac" : "noisy");
  e << YAML::Key << "noise" << YAML::Value << r.noise;
  e << YAML::Key << "env_seed" << YAML::Value << r.env_seed;
  if (std::holds_alternative<Stationary>(r.schedule)) {
    e << YAML::Key << "schedule" << YAML::Value << "stationary";
  } else if (const auto* sw = std::get_if<Switching>(&r.schedule)) {
    e << YAML::Key << "schedule" << YAML::Value << "switching";
    if (!c.stream.change_fractions.empty()) {
      e << YAML::Key << "change_fractions" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (double f : c.stream.change_fractions) e << f;
    } else {
      e << YAML::Key << "change_times" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (auto t : sw->change_times) e << t;
    }
    e << YAML::EndSeq;
  } else {
    e << YAML::Key << "schedule" << YAML::Value << "drifting";
    e << YAML::Key << "step_size" << YAML::Value << std::get<Drifting>(r.schedule).step_size;
  }
  e << YAML::EndMap;

  e << YAML::Key << "horizons" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto t : c.horizons) e << t;
  e << YAML::EndSeq;
  e << YAML::Key << "max_horizon" << YAML::Value << c.max_horizon;
  e << YAML::Key << "seeds" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto s : c.seeds) e << s;
  e << YAML::EndSeq;
  if (!c.output_dir.empty()) e << YAML::Key << "output_dir" << YAML::Value << c.output_dir;
  e << YAML::Key << "checks" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "lemma1" << YAML::Value << c.checks.lemma1;
  e << YAML::Key << "theorem1" << YAML::Value << c.checks.theorem1;
  e << YAML::Key << "expert_regret" << YAML::Value << c.checks.expert_regret;
  e << YAML::Key << "scaling_fit" << YAML::Value << c.checks.scaling_fit;
  e << YAML::EndMap;
  if (c.c_delta) e << YAML::Key << "c_delta" << YAML::Value << *c.c_delta;
  e << YAML::Key << "batch_test_points" << YAML::Value << c.batch_test_points;
  e << YAML::Key << "dump_weights" << YAML::Value << c.dump_weights;
  e << YAML::Key << "solve_tolerance" << YAML::Value << c.solve_tolerance;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace osp
