#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <vector>

#include "dalloy/density.hpp"
#include "dalloy/errors.hpp"
#include "dalloy/rng.hpp"
#include "oracles.hpp"

using namespace dalloy;

namespace {

bool throws_kind(ErrorKind kind, const std::function<void()>& body) {
  try {
    body();
  } catch (const Error& e) {
    return e.kind() == kind;
  }
  return false;
}

std::vector<Density> all_densities() {
  return {Density::uniform(0.0, 1.0), Density::triangular(0.0, 1.0),
          Density::smooth_bump(0.0, 1.0),
          Density::piecewise_linear({0.0, 0.2, 1.0}, {0.0, 2.5, 0.0})};
}

}  // namespace

TEST_CASE("every density integrates to one") {
  for (const Density& rho : all_densities())
    REQUIRE(rho.integral() == Catch::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("uniform norms") {
  const Density rho = Density::uniform(0.0, 2.0);
  REQUIRE(rho.sup_norm() == Catch::Approx(0.5));
  REQUIRE(rho.total_variation() == Catch::Approx(1.0));  // two jumps of height 1/2
  REQUIRE_FALSE(rho.has_deriv_l1());
  REQUIRE(throws_kind(ErrorKind::UnsupportedNorm, [&] { rho.deriv_l1(); }));
}

TEST_CASE("triangular on [0,1] has total variation and derivative l1 exactly 4") {
  const Density rho = Density::triangular(0.0, 1.0);
  REQUIRE(rho.sup_norm() == 2.0);
  REQUIRE(rho.total_variation() == 4.0);
  REQUIRE(rho.has_deriv_l1());
  REQUIRE(rho.deriv_l1() == 4.0);
  // brute-force grid oracle agrees
  REQUIRE(oracle::grid_total_variation(rho) == Catch::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("triangular scales with the support width") {
  const Density rho = Density::triangular(-1.0, 3.0);
  REQUIRE(rho.sup_norm() == Catch::Approx(0.5));
  REQUIRE(rho.total_variation() == Catch::Approx(1.0));
  REQUIRE(rho.pdf(1.0) == Catch::Approx(0.5));
  REQUIRE(rho.cdf(1.0) == Catch::Approx(0.5));
}

TEST_CASE("smooth bump norms and symmetry") {
  const Density rho = Density::smooth_bump(0.0, 1.0);
  // sup = 2 e^{-1} / ((b-a) I0) with I0 = 0.443994
  REQUIRE(rho.sup_norm() == Catch::Approx(1.657138).margin(2e-4));
  REQUIRE(rho.total_variation() == Catch::Approx(2.0 * rho.sup_norm()).epsilon(1e-12));
  REQUIRE(rho.deriv_l1() == Catch::Approx(rho.total_variation()).epsilon(1e-12));
  REQUIRE(rho.pdf(0.5) == Catch::Approx(rho.sup_norm()).epsilon(1e-12));
  REQUIRE(rho.pdf(0.25) == Catch::Approx(rho.pdf(0.75)).epsilon(1e-9));
  REQUIRE(rho.pdf(-0.1) == 0.0);
  REQUIRE(rho.pdf(1.1) == 0.0);
}

TEST_CASE("piecewise linear normalizes and reports norms") {
  const Density rho = Density::piecewise_linear({0.0, 1.0, 2.0}, {0.0, 3.0, 0.0});
  REQUIRE(rho.pdf(1.0) == Catch::Approx(1.0));  // raw integral 3 is divided out
  REQUIRE(rho.total_variation() == Catch::Approx(2.0));
  REQUIRE(rho.deriv_l1() == Catch::Approx(2.0));
  REQUIRE(oracle::grid_total_variation(rho) == Catch::Approx(2.0).epsilon(1e-6));

  // Peak 2.0 after normalization (raw integral 1.25), so TV = 2 up + 2 down.
  // The grid oracle's kink at 0.2 falls between grid points; its error is
  // O(h * slope), so the cross-check gets a discretization-limited margin.
  const Density skew = Density::piecewise_linear({0.0, 0.2, 1.0}, {0.0, 2.5, 0.0});
  REQUIRE(skew.total_variation() == Catch::Approx(4.0).epsilon(1e-12));
  REQUIRE(oracle::grid_total_variation(skew) == Catch::Approx(4.0).epsilon(1e-4));

  REQUIRE(throws_kind(ErrorKind::Validation,
                      [] { Density::piecewise_linear({0.0, 0.0, 1.0}, {0.0, 1.0, 0.0}); }));
  REQUIRE(throws_kind(ErrorKind::Validation,
                      [] { Density::piecewise_linear({0.0, 1.0}, {0.0, 1.0, 0.0}); }));
  REQUIRE(throws_kind(ErrorKind::Validation,
                      [] { Density::piecewise_linear({0.0, 1.0}, {-1.0, 1.0}); }));
  REQUIRE(throws_kind(ErrorKind::Validation,
                      [] { Density::piecewise_linear({0.0, 1.0}, {0.0, 0.0}); }));
}

TEST_CASE("quantile inverts the cdf") {
  for (const Density& rho : all_densities()) {
    for (double q : {0.001, 0.05, 0.25, 0.5, 0.75, 0.95, 0.999}) {
      const double x = rho.quantile(q);
      REQUIRE(rho.cdf(x) == Catch::Approx(q).margin(1e-9));
    }
  }
}

TEST_CASE("sampling matches the cdf (KS at 1%)") {
  std::uint64_t stream = 0;
  for (const Density& rho : all_densities()) {
    RngStream rng(20260822, ++stream);
    std::vector<double> xs;
    const std::size_t n = 2000;
    xs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) xs.push_back(rho.sample(rng));
    REQUIRE(oracle::ks_statistic(xs, rho) < oracle::ks_critical_1pct(n));
  }
}

TEST_CASE("singular integral closed forms") {
  const Density uni = Density::uniform(0.0, 1.0);
  // int_0^1 xi^{-1/2} = 2
  REQUIRE(singular_integral(uni, {0.0, 0.0}, 0.5) == Catch::Approx(2.0).epsilon(1e-8));
  // int_0^1 |xi - 1/2|^{-1/2} = 2 sqrt 2
  REQUIRE(singular_integral(uni, {0.5, 0.0}, 0.5) ==
          Catch::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-8));
  // triangular at the origin: 4 int_0^{1/2} xi^{1/2} + 4 int_{1/2}^1 (1-xi) xi^{-1/2}
  const Density tri = Density::triangular(0.0, 1.0);
  const double left = (8.0 / 3.0) * std::pow(0.5, 1.5);
  const double right =
      4.0 * (4.0 / 3.0 - 2.0 * std::sqrt(0.5) + (2.0 / 3.0) * std::pow(0.5, 1.5));
  REQUIRE(singular_integral(tri, {0.0, 0.0}, 0.5) ==
          Catch::Approx(left + right).epsilon(1e-8));
}

TEST_CASE("singular integral off support and with complex shift") {
  const Density uni = Density::uniform(0.0, 1.0);
  // shift left of support: int_0^1 (xi + 1)^{-1/2} = 2(sqrt 2 - 1)
  REQUIRE(singular_integral(uni, {-1.0, 0.0}, 0.5) ==
          Catch::Approx(2.0 * (std::sqrt(2.0) - 1.0)).epsilon(1e-8));
  // imaginary offset damps the singularity monotonically
  const double damped1 = singular_integral(uni, {0.5, 0.1}, 0.5);
  const double damped2 = singular_integral(uni, {0.5, 0.5}, 0.5);
  REQUIRE(damped1 < singular_integral(uni, {0.5, 0.0}, 0.5));
  REQUIRE(damped2 < damped1);
  REQUIRE(throws_kind(ErrorKind::Validation,
                      [&] { singular_integral(uni, {0.5, 0.0}, 1.0); }));
  REQUIRE(throws_kind(ErrorKind::Validation,
                      [&] { singular_integral(uni, {0.5, 0.0}, 0.0); }));
}

TEST_CASE("density factory rejects bad input") {
  REQUIRE(throws_kind(ErrorKind::Validation, [] { Density::uniform(1.0, 1.0); }));
  REQUIRE(throws_kind(ErrorKind::Validation, [] { Density::triangular(2.0, 1.0); }));
  REQUIRE(throws_kind(ErrorKind::Validation, [] { make_density("gaussian", 0.0, 1.0); }));
}
