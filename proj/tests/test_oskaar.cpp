#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "osp/errors.hpp"
#include "osp/oskaar.hpp"

using namespace osp;

namespace {

Point pt(double a, double b) { return Eigen::Vector2d(a, b); }

struct Run {
  std::vector<Point> xs;
  std::vector<LabelIndex> ys;
};

Run random_run(std::mt19937_64& gen, std::size_t t, int d, std::size_t labels, double scale) {
  Run r;
  r.xs = oracle::random_points(gen, t, d, scale);
  for (std::size_t s = 0; s < t; ++s) r.ys.push_back(gen() % labels);
  return r;
}

// Stacked targets of a finished learner as rows of a dense |Y|-column matrix.
Eigen::MatrixXd stacked_targets(const OskaarLearner& l) {
  Eigen::MatrixXd h(static_cast<Eigen::Index>(l.rounds()),
                    static_cast<Eigen::Index>(l.space().num_labels()));
  for (std::size_t s = 0; s < l.rounds(); ++s)
    h.row(static_cast<Eigen::Index>(s)) =
        l.estimator().targets()[s].dense(l.space().num_labels()).transpose();
  return h;
}

}  // namespace

TEST_CASE("first round and the two-point example") {
  auto space = LossSpace::builtin(SubsetF1{2});
  OskaarLearner l(space, KernelSpec::linear(1.0), {.lambda = 1.0});
  const auto p1 = l.predict(pt(1, 0));
  CHECK(p1.z_hat == 0);
  CHECK(p1.coeffs.beta.size() == 0);
  CHECK(l.feature_residual(p1.coeffs, 3) == 1.0);
  l.update(subset_index({1}));
  CHECK(l.labels() == std::vector<LabelIndex>{subset_index({1})});

  // orthonormal x1, x2, lambda = 1 and query x = x1 at round 2: beta = [0.5]
  OskaarLearner e(space, KernelSpec::linear(1.0), {.lambda = 1.0});
  e.predict(pt(1, 0));
  e.update(subset_index({1}));
  const auto p2 = e.predict(pt(0, 1));
  REQUIRE(p2.coeffs.beta.size() == 1);
  CHECK(p2.coeffs.beta[0] == 0.0);
  e.update(subset_index({2}));
  const auto at_x1 = e.estimator().evaluate_round(2, pt(1, 0));
  REQUIRE(at_x1.beta.size() == 1);
  CHECK(at_x1.beta[0] == doctest::Approx(0.5));
  CHECK(decode(*space, at_x1.expansion) == subset_index({1}));

  // beta = [0.5] on y1 = {1} decodes to {1}
  FeatureCoefficients half;
  half.beta = Eigen::VectorXd::Constant(1, 0.5);
  half.expansion = LabelExpansion::indicator(subset_index({1}), 0.5);
  CHECK(decode(*space, half.expansion) == subset_index({1}));
  CHECK(l.feature_residual(half, subset_index({1})) == 0.25);
  FeatureCoefficients full;
  full.expansion = LabelExpansion::indicator(subset_index({2}));
  CHECK(l.feature_residual(full, subset_index({2})) == 0.0);
}

TEST_CASE("protocol errors") {
  auto space = LossSpace::builtin(Ordinal{4});
  OskaarLearner l(space, KernelSpec::gaussian(1.0), {.lambda = 1.0});
  CHECK_THROWS_AS(l.update(0), ProtocolError);
  l.predict(pt(0, 0));
  CHECK_THROWS_AS(l.predict(pt(0, 0)), ProtocolError);
  CHECK_THROWS_AS(l.update(7), InputError);
  l.update(1);
  CHECK(l.rounds() == 1);
}

TEST_CASE("shifted mode") {
  auto space = LossSpace::builtin(Ordinal{3});
  OskaarLearner l(space, KernelSpec::gaussian(1.0), {.lambda = 1.0, .mode = KaarMode::shifted});
  CHECK(l.ridge() == 4.0);
  const auto p = l.predict(pt(0.1, 0.2));
  CHECK(p.coeffs.expansion.empty());
  l.update(2);
  CHECK(l.history().front().empty());
  CHECK(l.estimator().targets().front() == LabelExpansion::indicator(2, 2.0));

  l.predict(pt(0.3, 0.2));
  l.update(1);
  const auto& g2 = l.history()[1];
  LabelExpansion expected = LabelExpansion::indicator(1, 2.0);
  expected.add_scaled(g2, -1.0);
  CHECK(l.estimator().targets()[1] == expected);
}

TEST_CASE("KAAR estimates match explicit ridge solves") {
  std::mt19937_64 gen(2024);
  auto space = LossSpace::builtin(Hamming{2, 3});
  for (int inst = 0; inst < 10; ++inst) {
    const int d = 2 + inst % 3;
    const auto run = random_run(gen, 32, d, 8, 1.0 / std::sqrt(d));
    const double lambda = 0.1 * (1 + inst);
    for (const KaarMode mode : {KaarMode::plain, KaarMode::shifted}) {
      OskaarLearner lin(space, KernelSpec::linear(1.0), {.lambda = lambda, .mode = mode});
      const auto gauss_kernel = KernelSpec::gaussian(0.6);
      OskaarLearner gauss(space, gauss_kernel, {.lambda = lambda, .mode = mode});
      for (std::size_t t = 0; t < 32; ++t) {
        const auto a = lin.predict(run.xs[t]);
        const auto b = gauss.predict(run.xs[t]);
        if (t > 0) {
          const std::vector<Point> prefix(run.xs.begin(), run.xs.begin() + static_cast<long>(t) + 1);
          const Eigen::VectorXd primal =
              oracle::primal_kaar(prefix, stacked_targets(lin), lin.ridge(), run.xs[t]);
          CHECK(oracle::relative_error(a.coeffs.expansion.dense(8), primal) <= 1e-6);
          Eigen::MatrixXd hg = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t) + 1, 8);
          hg.topRows(static_cast<Eigen::Index>(t)) = stacked_targets(gauss);
          const Eigen::VectorXd dual =
              oracle::dual_kaar(gauss_kernel, prefix, hg, gauss.ridge(), run.xs[t]);
          CHECK(oracle::relative_error(b.coeffs.expansion.dense(8), dual) <= 1e-6);

          // feature residual through the output kernel vs the explicit norm
          const Eigen::VectorXd e = Eigen::VectorXd::Unit(8, static_cast<Eigen::Index>(run.ys[t]));
          CHECK(lin.feature_residual(a.coeffs, run.ys[t]) ==
                doctest::Approx((e - a.coeffs.expansion.dense(8)).squaredNorm()).epsilon(1e-12));
        }
        CHECK(a.z_hat == oracle::brute_decode(*space, a.coeffs.expansion.dense(8)));
        lin.update(run.ys[t]);
        gauss.update(run.ys[t]);
      }
    }
  }
}

TEST_CASE("batch average") {
  std::mt19937_64 gen(5);
  auto space = LossSpace::builtin(Ordinal{5});
  const auto run = random_run(gen, 60, 2, 5, 0.7);
  for (const KaarMode mode : {KaarMode::plain, KaarMode::shifted}) {
    OskaarLearner l(space, KernelSpec::gaussian(0.5), {.lambda = 0.7, .mode = mode});
    CHECK_THROWS_AS(BatchAverager{l}, InputError);
    l.predict(run.xs[0]);
    CHECK_THROWS_AS(BatchAverager{l}, ProtocolError);
    l.update(run.ys[0]);

    // T = 1: the round-1 predictor, which is zero
    const auto single = batch_average(l, run.xs[5]);
    CHECK(single.averaged.squared_norm() == 0.0);
    CHECK(single.z_hat == 0);

    for (std::size_t t = 1; t < run.xs.size(); ++t) {
      l.predict(run.xs[t]);
      l.update(run.ys[t]);
    }
    const BatchAverager avg(l);
    for (int q = 0; q < 5; ++q) {
      const Point x = oracle::random_points(gen, 1, 2, 0.7).front();
      std::vector<LabelExpansion> per_round;
      for (std::size_t m = 1; m <= l.rounds(); ++m) {
        per_round.push_back(l.estimator().evaluate_round(m, x).expansion);
        const Eigen::VectorXd want = per_round.back().dense(5);
        CHECK((avg.round_estimate(m, x).dense(5) - want).norm() <= 1e-9 * (1.0 + want.norm()));
      }
      const auto direct = average_expansions(per_round);
      const auto fast = avg(x);
      CHECK(oracle::relative_error(fast.averaged.dense(5), direct.dense(5)) <= 1e-9);
      CHECK(fast.z_hat == decode(*space, fast.averaged));
    }
    // at the training points the snapshots reproduce the online predictions
    for (std::size_t m = 2; m <= l.rounds(); m += 7)
      CHECK(oracle::relative_error(avg.round_estimate(m, run.xs[m - 1]).dense(5),
                                   l.history()[m - 1].dense(5)) <= 1e-9);
  }
}
