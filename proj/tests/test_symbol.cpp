#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

#include "dalloy/lattice.hpp"
#include "dalloy/symbol.hpp"

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

}  // namespace

TEST_CASE("symbol values match the direct fourier sum") {
  SingleSitePotential u(1, {{Site{0}, 1.0}, {Site{1}, 0.5}});
  const SymbolTable table = symbol_eval(u, 8);
  for (int j = 0; j < 8; ++j) {
    const double theta = 2.0 * std::numbers::pi * j / 8.0;
    const std::complex<double> expected =
        1.0 + 0.5 * std::exp(std::complex<double>(0.0, theta));
    REQUIRE(std::abs(table.values[static_cast<std::size_t>(j)] - expected) < 1e-12);
  }
  REQUIRE(table.min_abs == Catch::Approx(0.5).epsilon(1e-12));  // attained at theta = pi
}

TEST_CASE("delta potential inverts to exactly one") {
  REQUIRE(inverse_kernel_l1(SingleSitePotential::delta(1)) == 1.0);
}

TEST_CASE("geometric series case gives two") {
  SingleSitePotential u(1, {{Site{0}, 1.0}, {Site{1}, 0.5}});
  REQUIRE(inverse_kernel_l1(u) == Catch::Approx(2.0).margin(1e-8));
}

TEST_CASE("symmetric three-point case has closed form two") {
  // A = I + (S + S^{-1})/4: inverse coefficients are geometric in 2 - sqrt 3
  // and the l1 norm telescopes to exactly 2
  SingleSitePotential u(1, {{Site{-1}, 0.25}, {Site{0}, 1.0}, {Site{1}, 0.25}});
  REQUIRE(inverse_kernel_l1(u) == Catch::Approx(2.0).margin(1e-9));
}

TEST_CASE("slowly decaying inverse still converges") {
  SingleSitePotential u(1, {{Site{0}, 1.0}, {Site{1}, 0.999}});
  REQUIRE(inverse_kernel_l1(u) == Catch::Approx(1000.0).epsilon(1e-6));
}

TEST_CASE("vanishing symbols are rejected") {
  SingleSitePotential flip(1, {{Site{0}, 1.0}, {Site{1}, -1.0}});
  REQUIRE(throws_kind(ErrorKind::NonInvertibleSymbol, [&] { inverse_kernel_l1(flip); }));
  SingleSitePotential sum(1, {{Site{0}, 1.0}, {Site{1}, 1.0}});
  REQUIRE(throws_kind(ErrorKind::NonInvertibleSymbol, [&] { inverse_kernel_l1(sum); }));
}

TEST_CASE("symbol machinery is one-dimensional only") {
  SingleSitePotential u2(2, {{Site{0, 0}, 1.0}});
  REQUIRE(throws_kind(ErrorKind::HypothesisViolation, [&] { inverse_kernel_l1(u2); }));
  REQUIRE(throws_kind(ErrorKind::HypothesisViolation, [&] { symbol_eval(u2, 64); }));
}

TEST_CASE("symbol grid must be a large enough power of two") {
  SingleSitePotential u(1, {{Site{0}, 1.0}, {Site{3}, 0.5}});
  REQUIRE(throws_kind(ErrorKind::Validation, [&] { symbol_eval(u, 12); }));
  REQUIRE(throws_kind(ErrorKind::Validation, [&] { symbol_eval(u, 4); }));  // < 2(diam+1)
  REQUIRE_NOTHROW(symbol_eval(u, 8));
}
