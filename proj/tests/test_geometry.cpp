#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "horen/geometry.hpp"

using namespace horen;

namespace {

VectorX vec2(Scalar a, Scalar b) {
  VectorX v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("dot computes the inner product and checks dimensions") {
  CHECK(dot(vec2(1.0, 2.0), vec2(3.0, -1.0)) == 1.0);
  VectorX three(3);
  three << 1, 2, 3;
  CHECK_THROWS_AS(dot(vec2(1, 2), three), DimensionMismatchError);
}

TEST_CASE("softmax matches the closed form at beta=20") {
  const VectorX p = softmax(vec2(1.0, 0.0), 20.0);
  CHECK(p[0] == doctest::Approx(0.99999999793884638).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(2.0611536181902036e-9).epsilon(1e-12));
  CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("softmax is a probability vector on random inputs") {
  std::mt19937_64 rng(11);
  std::normal_distribution<Scalar> gauss(0.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    VectorX z(1 + static_cast<Index>(i % 17));
    for (Index j = 0; j < z.size(); ++j) {
      z[j] = gauss(rng);
    }
    const VectorX p = softmax(z, 0.1 + (i % 5) * 7.0);
    CHECK(p.minCoeff() >= 0.0);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("softmax survives huge beta without overflow") {
  const VectorX p = softmax(vec2(1.0, 0.5), 1e6);
  CHECK(std::isfinite(p[0]));
  CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p[1] >= 0.0);
}

TEST_CASE("softmax and lse reject empty input") {
  const VectorX empty(0);
  CHECK_THROWS_AS(softmax(empty, 1.0), EmptyInputError);
  CHECK_THROWS_AS(lse(empty, 1.0), EmptyInputError);
}

TEST_CASE("lse matches the closed form and its bounds") {
  // At beta=20 the smaller entry contributes ~2e-19: exactly 1.0 in doubles.
  CHECK(lse(vec2(1.0, -1.0), 20.0) == doctest::Approx(1.0).epsilon(1e-15));

  // Direct (unshifted) evaluation agrees where it is safe.
  const VectorX z = vec2(0.3, -0.2);
  const Scalar direct = std::log(std::exp(2.0 * 0.3) + std::exp(-2.0 * 0.2)) / 2.0;
  CHECK(lse(z, 2.0) == doctest::Approx(direct).epsilon(1e-14));

  std::mt19937_64 rng(5);
  std::normal_distribution<Scalar> gauss(0.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    VectorX x(2 + static_cast<Index>(i % 9));
    for (Index j = 0; j < x.size(); ++j) {
      x[j] = gauss(rng);
    }
    const Scalar beta = 0.5 + (i % 4) * 10.0;
    const Scalar v = lse(x, beta);
    CHECK(v >= x.maxCoeff());
    CHECK(v <= x.maxCoeff() + std::log(static_cast<Scalar>(x.size())) / beta +
                  1e-12);
  }
}

TEST_CASE("normalize projects onto the unit sphere") {
  const UnitVector u = normalize(vec2(3.0, 4.0));
  CHECK(u.vec().norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(u[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(u[1] == doctest::Approx(0.8).epsilon(1e-15));

  const UnitVector diag = normalize(vec2(1.0, 1.0));
  CHECK(diag[0] == doctest::Approx(0.70710678118654752).epsilon(1e-15));
}

TEST_CASE("normalize rejects vectors with no direction") {
  CHECK_THROWS_AS(normalize(vec2(0.0, 0.0)), ZeroNormError);
  CHECK_THROWS_AS(normalize(vec2(1e-13, 0.0)), ZeroNormError);
  const Scalar nan = std::numeric_limits<Scalar>::quiet_NaN();
  CHECK_THROWS_AS(normalize(vec2(nan, 1.0)), ZeroNormError);
}

TEST_CASE("UnitVector::from_unit enforces the invariant") {
  CHECK_NOTHROW(UnitVector::from_unit(vec2(1.0, 0.0)));
  CHECK_THROWS_AS(UnitVector::from_unit(vec2(1.0, 1.0)), InvalidConfigError);
  CHECK_THROWS_AS(UnitVector::from_unit(vec2(0.0, 0.0)), InvalidConfigError);
}

TEST_CASE("cosine is clamped into [-1, 1]") {
  const UnitVector a = normalize(vec2(1.0, 0.0));
  const UnitVector b = normalize(vec2(0.0, 1.0));
  CHECK(cosine(a, b) == 0.0);
  CHECK(cosine(a, a) <= 1.0);
  CHECK(cosine(a, a) == doctest::Approx(1.0).epsilon(1e-15));
  const UnitVector na = normalize(vec2(-1.0, 0.0));
  CHECK(cosine(a, na) >= -1.0);
  CHECK(cosine(a, na) == doctest::Approx(-1.0).epsilon(1e-15));

  std::mt19937_64 rng(3);
  std::normal_distribution<Scalar> gauss(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    VectorX x(4), y(4);
    for (Index j = 0; j < 4; ++j) {
      x[j] = gauss(rng);
      y[j] = gauss(rng);
    }
    const Scalar c = cosine(normalize(x), normalize(y));
    CHECK(c >= -1.0);
    CHECK(c <= 1.0);
  }
}
