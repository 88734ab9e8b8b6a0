#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "osp/errors.hpp"
#include "osp/evaluation.hpp"

using namespace osp;

namespace {

struct Finished {
  std::unique_ptr<OskaarLearner> learner;
  std::unique_ptr<RegretReport> report;
  std::vector<Point> xs;
  std::vector<LabelIndex> ys;
};

Finished run_oskaar(LossSpacePtr space, KernelSpec k, OskaarOptions opts, std::size_t T,
                    std::uint64_t seed, int d = 2) {
  std::mt19937_64 gen(seed);
  Finished f;
  f.learner = std::make_unique<OskaarLearner>(space, k, opts);
  f.report = std::make_unique<RegretReport>(space);
  f.xs = oracle::random_points(gen, T, d, 1.0 / std::sqrt(d));
  for (std::size_t t = 0; t < T; ++t) {
    // labels depend on the input so there is something to learn
    const LabelIndex y = (f.xs[t][0] > 0 ? 1 : 2) % space->num_labels();
    f.ys.push_back(gen() % 5 == 0 ? gen() % space->num_labels() : y);
    const auto p = f.learner->predict(f.xs[t]);
    f.report->record(f.ys[t], p.z_hat, f.learner->feature_residual(p.coeffs, f.ys[t]));
    f.learner->update(f.ys[t]);
  }
  return f;
}

}  // namespace

TEST_CASE("baseline examples") {
  const auto ham = LossSpace::builtin(Hamming{2, 2});
  const auto b = baseline(*ham, sequence_index(2, {1, 0}));
  CHECK(b.z_star == sequence_index(2, {1, 0}));
  CHECK(b.loss == 0.0);
  const auto f1 = baseline(*LossSpace::builtin(SubsetF1{3}), subset_index({1}));
  CHECK(f1.z_star == subset_index({1}));
  CHECK(f1.loss == -1.0);
  const auto ord = baseline(*LossSpace::builtin(Ordinal{5}), ordinal_index(3));
  CHECK(ord.z_star == ordinal_index(3));
  CHECK(ord.loss == 0.0);
  CHECK_THROWS_AS(baseline(*LossSpace::builtin(Ordinal{5}), 5), InputError);
}

TEST_CASE("regret report bookkeeping") {
  const auto space = LossSpace::builtin(Ordinal{3});
  RegretReport r(space);
  r.record(0, 2, 1.0);
  r.record(1, 1, 0.5);
  r.record(2, 0, 0.25);
  CHECK(r.rounds()[0].inst_regret == 1.0);
  CHECK(r.rounds()[1].inst_regret == 0.0);
  CHECK(r.cumulative_regret() == 2.0);
  CHECK(r.sum_residuals() == 1.75);
  CHECK_THROWS_AS(r.record(0, 3, 0.0), InputError);

  const auto copy = RegretReport::from_records(space, r.rounds());
  CHECK(copy.cumulative_regret() == 2.0);
  auto rows = r.rounds();
  rows[1].t = 5;
  CHECK_THROWS_AS(RegretReport::from_records(space, rows), FormatError);
}

TEST_CASE("comparison inequality examples") {
  const auto space = LossSpace::builtin(Ordinal{3});
  RegretReport zero(space);
  zero.record(1, 1, 0.0);
  auto c = check_lemma1(zero, 1.0);
  CHECK(c.rhs == 0.0);
  CHECK(c.lhs == 0.0);
  CHECK(c.satisfied);

  RegretReport one(space);
  one.record(1, 1, 1.0);
  CHECK(check_lemma1(one, 1.0).rhs == 2.0);

  const auto f1 = LossSpace::builtin(SubsetF1{3});
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto run = run_oskaar(f1, KernelSpec::gaussian(0.5), {.lambda = 1.0}, 50, seed);
    CHECK(check_lemma1(*run.report, f1->c_delta()).satisfied);
  }
}

TEST_CASE("regret bound on desk runs") {
  const auto f1 = LossSpace::builtin(SubsetF1{3});
  for (const KaarMode mode : {KaarMode::plain, KaarMode::shifted})
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto run = run_oskaar(f1, KernelSpec::gaussian(0.5), {.lambda = 2.0, .mode = mode}, 100, seed);
      const auto terms = feature_bound_terms(*run.learner);
      CHECK(check_feature_bound(*run.report, terms).satisfied);
      const auto th = check_theorem1(*run.report, terms, f1->c_delta());
      CHECK(th.satisfied);
      CHECK(th.rhs >= check_lemma1(*run.report, f1->c_delta()).rhs - 1e-9);
    }
}

TEST_CASE("min L_T closed form") {
  const auto space = LossSpace::builtin(Ordinal{4});
  // identical labels, constant kernel: lambda T / (T + lambda)
  {
    OskaarLearner l(space, KernelSpec::linear(1.0), {.lambda = 3.0});
    for (int t = 0; t < 10; ++t) {
      l.predict(Eigen::VectorXd::Ones(1));
      l.update(2);
    }
    CHECK(feature_bound_terms(l).min_loss == doctest::Approx(3.0 * 10 / 13.0));
  }
  // lambda -> infinity forces g = 0
  {
    OskaarLearner l(space, KernelSpec::gaussian(1.0), {.lambda = 1e12});
    std::mt19937_64 gen(1);
    for (const auto& x : oracle::random_points(gen, 20, 2)) {
      l.predict(x);
      l.update(gen() % 4);
    }
    CHECK(feature_bound_terms(l).min_loss == doctest::Approx(20.0).epsilon(1e-9));
  }
  // explicit ridge oracles, plain and shifted
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    for (const KaarMode mode : {KaarMode::plain, KaarMode::shifted}) {
      const double lambda = 0.2 + seed;
      auto lin = run_oskaar(space, KernelSpec::linear(1.0), {.lambda = lambda, .mode = mode}, 30, seed, 3);
      Eigen::MatrixXd h(30, 4);
      for (int s = 0; s < 30; ++s)
        h.row(s) = lin.learner->estimator().targets()[static_cast<std::size_t>(s)].dense(4).transpose();
      const double scale = mode == KaarMode::shifted ? 0.25 : 1.0;
      const double primal = scale * oracle::primal_min_loss(lin.xs, h, lin.learner->ridge());
      CHECK(std::abs(feature_bound_terms(*lin.learner).min_loss - primal) <= 1e-6 * primal);

      const auto k = KernelSpec::gaussian(0.4);
      auto gau = run_oskaar(space, k, {.lambda = lambda, .mode = mode}, 30, seed, 3);
      for (int s = 0; s < 30; ++s)
        h.row(s) = gau.learner->estimator().targets()[static_cast<std::size_t>(s)].dense(4).transpose();
      const double dual = scale * oracle::dual_min_loss(oracle::gram(k, gau.xs), h, gau.learner->ridge());
      CHECK(std::abs(feature_bound_terms(*gau.learner).min_loss - dual) <= 1e-6 * dual);
    }
  }
}

TEST_CASE("d_eff checkpoints") {
  const auto space = LossSpace::builtin(Ordinal{3});
  const auto k = KernelSpec::gaussian(0.7);
  auto run = run_oskaar(space, k, {.lambda = 0.5}, 37, 4);
  const auto terms = feature_bound_terms(*run.learner);
  std::vector<std::size_t> ts;
  for (const auto& [t, d] : terms.d_eff_checkpoints) {
    ts.push_back(t);
    const std::vector<Point> prefix(run.xs.begin(), run.xs.begin() + static_cast<long>(t));
    CHECK(d == doctest::Approx(effective_dimension(oracle::gram(k, prefix), 0.5)).epsilon(1e-9));
  }
  CHECK(ts == std::vector<std::size_t>{1, 2, 4, 8, 16, 32, 37});
  CHECK(terms.log_factor == doctest::Approx(std::log(std::exp(1.0) * (1.0 + 37 / 0.5))));
  CHECK_THROWS_AS(feature_bound_terms(OskaarLearner(space, k, {.lambda = 1.0})), InputError);
}

TEST_CASE("expert regret check") {
  const auto c = check_expert_regret(1.0, 100, 0.125);
  CHECK(c.rhs == doctest::Approx(8.0 * std::log(100.0)));
  CHECK(c.satisfied);
  CHECK_FALSE(check_expert_regret(50.0, 100, 0.125).satisfied);
  CHECK_THROWS_AS(check_expert_regret(0.0, 0, 0.1), InputError);
}

TEST_CASE("regret scaling fit") {
  std::vector<std::pair<double, double>> pts;
  for (double t : {250.0, 500.0, 1000.0, 2000.0}) pts.emplace_back(t, 3.0 * std::pow(t, 0.75));
  CHECK(regret_scaling_fit(pts) == doctest::Approx(0.75).epsilon(1e-6));
  for (auto& p : pts) p.second = 4.0;
  CHECK(regret_scaling_fit(pts) == doctest::Approx(0.0).scale(1.0));
  pts.front().second = 0.0;
  pts.back().second = -1.0;
  CHECK(regret_scaling_fit(pts) == doctest::Approx(0.0).scale(1.0));
  pts[1].second = -2.0;
  CHECK_THROWS_AS(regret_scaling_fit(pts), InputError);
}
