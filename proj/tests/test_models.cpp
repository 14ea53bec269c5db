#include <doctest.h>

#include <cmath>

#include "fedmax/errors.hpp"
#include "fedmax/finite_diff.hpp"
#include "fedmax/models.hpp"
#include "oracles.hpp"

using namespace fedmax;
using namespace fedmax::testing;

TEST_CASE("linear scorer basics") {
  const ScorerSpec spec = ScorerSpec::linear(2);
  CHECK(spec.param_count() == 2);
  CHECK(score(spec, DenseVector::of({1.0, 0.0}), DenseVector::of({2.0, 3.0})) ==
        2.0);
  CHECK(score(spec, DenseVector(2), DenseVector::of({5.0, -1.0})) == 0.0);
  const DenseVector g =
      score_grad(spec, DenseVector::of({1.0, 2.0}), DenseVector::of({4.0, 7.0}));
  CHECK(g[0] == 4.0);
  CHECK(g[1] == 7.0);
}

TEST_CASE("linear scorer is homogeneous in w") {
  const ScorerSpec spec = ScorerSpec::linear(5);
  RngStream rng = derive_stream(61, 0, 0, 0, 0);
  for (int t = 0; t < 10; ++t) {
    const DenseVector w = random_vector(rng, 5);
    const DenseVector x = random_vector(rng, 5);
    DenseVector cw = w;
    const double c = 2.0 * rng.next_unit() - 1.0;
    cw.scale(c);
    CHECK(score(spec, cw, x) ==
          doctest::Approx(c * score(spec, w, x)).epsilon(1e-12));
  }
}

TEST_CASE("mlp with zero weights scores the output bias") {
  const ScorerSpec spec = ScorerSpec::mlp1(3, 4);
  CHECK(spec.param_count() == 4 * 4 + 4 + 1);
  DenseVector w(static_cast<std::size_t>(spec.param_count()));
  w[w.size() - 1] = 0.37;  // b2
  CHECK(score(spec, w, DenseVector::of({1.0, -2.0, 0.5})) ==
        doctest::Approx(0.37));
}

TEST_CASE("mlp gradient wrt first-layer weights vanishes at x = 0") {
  const ScorerSpec spec = ScorerSpec::mlp1(3, 2);
  RngStream rng = derive_stream(62, 0, 0, 0, 0);
  const DenseVector w =
      random_vector(rng, static_cast<std::size_t>(spec.param_count()));
  const DenseVector g = score_grad(spec, w, DenseVector(3));
  for (std::size_t i = 0; i < 3 * 2; ++i) CHECK(g[i] == 0.0);
}

TEST_CASE("score gradients pass finite-difference checks") {
  RngStream rng = derive_stream(63, 0, 0, 0, 0);
  const ScorerSpec specs[] = {ScorerSpec::linear(7), ScorerSpec::mlp1(3, 4)};
  for (const ScorerSpec& spec : specs) {
    for (int trial = 0; trial < 50; ++trial) {
      const DenseVector w =
          random_vector(rng, static_cast<std::size_t>(spec.param_count()), 0.7);
      const DenseVector x =
          random_vector(rng, static_cast<std::size_t>(spec.input_dim));
      const DenseVector g = score_grad(spec, w, x);
      const DenseVector fd = finite_diff_grad(
          [&](const DenseVector& ww) { return score(spec, ww, x); }, w, 1e-5);
      for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(std::fabs(g[i] - fd[i]) <= 1e-6 * (1.0 + std::fabs(fd[i])));
      }
    }
  }
}

TEST_CASE("dimension mismatches raise ShapeError") {
  const ScorerSpec spec = ScorerSpec::linear(3);
  CHECK_THROWS_AS(score(spec, DenseVector(3), DenseVector(2)), ShapeError);
  CHECK_THROWS_AS(score(spec, DenseVector(4), DenseVector(3)), ShapeError);
  const ScorerSpec mlp = ScorerSpec::mlp1(3, 2);
  CHECK_THROWS_AS(score_grad(mlp, DenseVector(3), DenseVector(3)), ShapeError);
}
