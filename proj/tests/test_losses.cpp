#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "osp/errors.hpp"
#include "osp/expansion.hpp"
#include "osp/losses.hpp"

using namespace osp;

TEST_CASE("built-in loss examples") {
  const auto f1 = LossSpace::builtin(SubsetF1{3});
  CHECK(f1->num_outputs() == 8);
  CHECK(f1->delta(subset_index({1, 2}), subset_index({1})) == doctest::Approx(-2.0 / 3.0));
  CHECK(f1->delta(subset_index({}), subset_index({})) == -1.0);
  CHECK(f1->delta(subset_index({}), subset_index({2})) == 0.0);
  CHECK(f1->delta(subset_index({3}), subset_index({})) == 0.0);

  const auto ord = LossSpace::builtin(Ordinal{5});
  CHECK(ord->delta(ordinal_index(3), ordinal_index(5)) == 0.5);

  const auto ham = LossSpace::builtin(Hamming{4, 3});
  CHECK(ham->num_labels() == 64);
  CHECK(ham->delta(sequence_index(4, {0, 1, 2}), sequence_index(4, {0, 1, 3})) ==
        doctest::Approx(1.0 / 3.0));
  CHECK(sequence_index(2, {1, 0, 0}) == 4);

  const auto rank = LossSpace::builtin(Ranking{3, 2});
  CHECK(rank->num_outputs() == 6);
  CHECK(rank->num_labels() == 8);
  // all documents relevant: every permutation reaches the normalizer
  CHECK(rank->delta(0, 7) == doctest::Approx(-1.0));
  CHECK(rank->delta(3, 7) == doctest::Approx(-1.0));
  CHECK(rank->delta(0, 0) == 0.0);
}

TEST_CASE("out-of-space elements") {
  const auto ord = LossSpace::builtin(Ordinal{4});
  CHECK_THROWS_AS(ord->delta(4, 0), InputError);
  CHECK_THROWS_AS(ord->delta(0, 4), InputError);
  CHECK_THROWS_AS(ord->output_kernel(0, 9), InputError);
  CHECK_THROWS_AS(LossSpace::builtin(SubsetF1{17}), CapacityError);
  CHECK_THROWS_AS(LossSpace::builtin(SubsetF1{4}, 8), CapacityError);
}

TEST_CASE("canonical embedding") {
  const auto ord2 = canonical_embedding(*LossSpace::builtin(Ordinal{2}));
  CHECK(ord2.psi(0, 0) == 0.0);
  CHECK(ord2.psi(0, 1) == 1.0);
  CHECK(ord2.psi(1, 0) == 1.0);
  CHECK(ord2.psi(1, 1) == 0.0);
  CHECK(ord2.c_delta == 1.0);

  const auto f1 = canonical_embedding(*LossSpace::builtin(SubsetF1{1}));
  CHECK(f1.psi(1, 0) == 0.0);
  CHECK(f1.psi(1, 1) == -1.0);
  CHECK(f1.c_delta == 1.0);

  for (const BuiltinLoss& loss : {BuiltinLoss{SubsetF1{3}}, BuiltinLoss{Ordinal{8}},
                                  BuiltinLoss{Hamming{2, 3}}, BuiltinLoss{Ranking{3, 3}}}) {
    const auto space = LossSpace::builtin(loss);
    const auto emb = canonical_embedding(*space);
    double worst = 0.0;
    for (std::size_t z = 0; z < space->num_outputs(); ++z)
      for (std::size_t y = 0; y < space->num_labels(); ++y) {
        worst = std::max(worst, std::abs(emb.psi.row(static_cast<Eigen::Index>(z)).dot(emb.phi(y)) -
                                         space->delta(z, y)));
        CHECK(std::abs(space->delta(z, y)) <= 1.0);
      }
    CHECK(worst == 0.0);
    CHECK(emb.c_delta == doctest::Approx(space->c_delta()));
    CHECK(space->c_delta() <= std::sqrt(static_cast<double>(space->num_labels())) + 1e-12);
  }
  CHECK_THROWS_AS(canonical_embedding(*LossSpace::builtin(Hamming{4, 3}), 100), CapacityError);
}

TEST_CASE("output kernel is the Dirac kernel") {
  const auto space = LossSpace::builtin(Hamming{2, 2});
  CHECK(output_kernel_eval(*space, 1, 1) == 1.0);
  CHECK(output_kernel_eval(*space, 1, 2) == 0.0);
  Eigen::Matrix3d g;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g(i, j) = space->output_kernel(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(g);
  CHECK(eig.eigenvalues().minCoeff() >= 0.0);
}

TEST_CASE("enumeration is deterministic") {
  const auto a = LossSpace::builtin(Ranking{3, 2});
  const auto b = LossSpace::builtin(Ranking{3, 2});
  for (std::size_t z = 0; z < a->num_outputs(); ++z) {
    CHECK(a->describe_output(z) == b->describe_output(z));
    for (std::size_t y = 0; y < a->num_labels(); ++y) CHECK(a->delta(z, y) == b->delta(z, y));
  }
  CHECK(LossSpace::builtin(SubsetF1{2})->describe_output(3) == "{1,2}");
}

TEST_CASE("baselines") {
  const auto ham = LossSpace::builtin(Hamming{2, 2});
  for (std::size_t y = 0; y < 4; ++y) CHECK(ham->baseline(y) == y);
  const auto f1 = LossSpace::builtin(SubsetF1{3});
  CHECK(f1->baseline(subset_index({1})) == subset_index({1}));
  CHECK(f1->delta(f1->baseline(subset_index({1})), subset_index({1})) == -1.0);
}

TEST_CASE("custom loss spaces") {
  const auto c = LossSpace::custom("zero-one", 3, 3, [](std::size_t z, std::size_t y) {
    return z == y ? 0.0 : 1.0;
  });
  CHECK(c->delta(1, 2) == 1.0);
  CHECK(c->baseline(2) == 2);
  CHECK(c->c_delta() == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("label expansions") {
  LabelExpansion g;
  CHECK(g.residual(3) == 1.0);
  g.add(5, 0.5);
  CHECK(g.residual(5) == 0.25);
  g.add(2, 1.0);
  g.add(5, 0.5);
  CHECK(g.terms().front().first == 2);
  CHECK(g.coefficient(5) == 1.0);
  CHECK(g.residual(5) == 1.0);

  LabelExpansion h = LabelExpansion::indicator(2, 2.0);
  h.add_scaled(g, -1.0);
  CHECK(h.coefficient(2) == 1.0);
  CHECK(h.coefficient(5) == -1.0);
  CHECK(h.squared_norm() == 2.0);

  // p = [0.75, 0.25] over experts with coefficients [1] on y1 and [1] on y2
  LabelExpansion mix;
  mix.add_scaled(LabelExpansion::indicator(0), 0.75);
  mix.add_scaled(LabelExpansion::indicator(1), 0.25);
  CHECK(mix.coefficient(0) == 0.75);
  CHECK(mix.coefficient(1) == 0.25);

  const std::vector<LabelExpansion> two = {LabelExpansion::indicator(0),
                                           LabelExpansion::indicator(1)};
  const auto avg = average_expansions(two);
  CHECK(avg.coefficient(0) == 0.5);
  CHECK(avg.coefficient(1) == 0.5);
}

TEST_CASE("decoding examples") {
  const auto f1 = LossSpace::builtin(SubsetF1{2});
  CHECK(decode(*f1, LabelExpansion{}) == 0);
  // beta = [0.5] on y1 = {1}
  const auto g = LabelExpansion::indicator(subset_index({1}), 0.5);
  CHECK(decode(*f1, g) == subset_index({1}));
  CHECK(decoding_score(*f1, subset_index({1}), g) == doctest::Approx(-0.5));
  CHECK(decoding_score(*f1, subset_index({1, 2}), g) == doctest::Approx(-1.0 / 3.0));
  CHECK(decoding_score(*f1, subset_index({2}), g) == 0.0);

  // ties resolve to the lowest index
  const auto ord = LossSpace::builtin(Ordinal{3});
  LabelExpansion tie;
  tie.add(0, 1.0);
  tie.add(2, 1.0);
  CHECK(decode(*ord, tie) == 0);
}

TEST_CASE("decoding agrees with the dense embedding") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n;
  for (const BuiltinLoss& loss : {BuiltinLoss{SubsetF1{3}}, BuiltinLoss{Ordinal{8}},
                                  BuiltinLoss{Hamming{2, 3}}}) {
    const auto space = LossSpace::builtin(loss);
    for (int rep = 0; rep < 200; ++rep) {
      LabelExpansion g;
      for (std::size_t y = 0; y < space->num_labels(); ++y)
        if (gen() % 3 == 0) g.add(y, n(gen));
      CHECK(decode(*space, g) == oracle::brute_decode(*space, g.dense(space->num_labels())));
    }
  }
}
