#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "dalloy/constants.hpp"
#include "dalloy/density.hpp"
#include "dalloy/lattice.hpp"

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

TEST_CASE("tail radius of concentrated and spread potentials") {
  REQUIRE(tail_radius(SingleSitePotential::delta(1)) == 1);
  // |u(3)| = 0.4 <= |1.4|/2 already at m = 1
  REQUIRE(tail_radius(SingleSitePotential(1, {{Site{0}, 1.0}, {Site{3}, 0.4}})) == 1);
  // 0.8 > |1.3|/2 = 0.65 until the far site leaves the tail at m = 4
  REQUIRE(tail_radius(SingleSitePotential(1, {{Site{0}, 0.5}, {Site{3}, 0.8}})) == 4);
  REQUIRE(throws_kind(ErrorKind::HypothesisViolation, [] {
    tail_radius(SingleSitePotential(1, {{Site{0}, 1.0}, {Site{1}, -1.0}}));
  }));
}

TEST_CASE("wegner bound worked value") {
  const SingleSitePotential u = SingleSitePotential::delta(1);
  const Density rho = Density::uniform(0.0, 1.0);
  // (8/1) * 2 * min(10, 1) * 0.01 * (10+1) = 1.76
  REQUIRE(wegner_bound_thm2(u, rho, 10, 0.01, 1) == Catch::Approx(1.76).epsilon(1e-12));
  REQUIRE(throws_kind(ErrorKind::Validation, [&] { wegner_bound_thm2(u, rho, 0, 0.01, 1); }));
  REQUIRE(throws_kind(ErrorKind::Validation, [&] { wegner_bound_thm2(u, rho, 10, 0.0, 1); }));
  REQUIRE(throws_kind(ErrorKind::Validation, [&] { wegner_bound_thm2(u, rho, 10, 0.01, 2); }));
  REQUIRE(throws_kind(ErrorKind::HypothesisViolation, [&] {
    wegner_bound_thm2(SingleSitePotential(1, {{Site{0}, 1.0}, {Site{1}, -1.0}}), rho, 10, 0.01,
                      1);
  }));
}

TEST_CASE("rank caps the cell count in the thm 2 bound") {
  // rank 3 potential on a box with L^d = 2 < 3 uses the volume instead
  const SingleSitePotential wide(
      1, {{Site{0}, 1.0}, {Site{1}, 0.5}, {Site{2}, 0.5}});
  const Density rho = Density::uniform(0.0, 1.0);
  const int m = tail_radius(wide);
  const double expected = 8.0 / 2.0 * 2.0 * 2.0 * 0.1 * (2 + m);
  REQUIRE(wegner_bound_thm2(wide, rho, 2, 0.1, 1) == Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("fractional moment bound worked value") {
  const SingleSitePotential u = SingleSitePotential::delta(1);
  const Density tri = Density::triangular(0.0, 1.0);
  // (1 * 4)^{1/2} * 2^{3/2} * (1/2)^{-1/2} / (1/2) = 16
  REQUIRE(frac_moment_bound_thm3(u, tri, 0.5) == Catch::Approx(16.0).epsilon(1e-9));
  REQUIRE(throws_kind(ErrorKind::Validation, [&] { frac_moment_bound_thm3(u, tri, 0.0); }));
  REQUIRE(throws_kind(ErrorKind::Validation, [&] { frac_moment_bound_thm3(u, tri, 1.0); }));
  // uniform density has no derivative norm
  REQUIRE(throws_kind(ErrorKind::UnsupportedNorm, [&] {
    frac_moment_bound_thm3(u, Density::uniform(0.0, 1.0), 0.5);
  }));
}

TEST_CASE("decay constants and the rate threshold") {
  const SingleSitePotential u = SingleSitePotential::delta(1);
  const DecayConstants wide = decay_constants(u, Density::uniform(0.0, 100.0), 0.5);
  // C = 0.01^{1/2} 2^{1/2} (1/2)^{-1/2} / (1/2) = 0.4, m = ln 2.5
  REQUIRE(wide.c_u_rho == Catch::Approx(0.4).epsilon(1e-12));
  REQUIRE(wide.decay_rate_m == Catch::Approx(std::log(2.5)).epsilon(1e-12));
  REQUIRE(wide.positive_rate);

  const DecayConstants narrow = decay_constants(u, Density::uniform(0.0, 1.0), 0.5);
  REQUIRE(narrow.c_u_rho == Catch::Approx(4.0).epsilon(1e-12));
  REQUIRE_FALSE(narrow.positive_rate);

  // condition (A) requires contiguous support after translation
  REQUIRE(throws_kind(ErrorKind::HypothesisViolation, [&] {
    decay_constants(SingleSitePotential(1, {{Site{0}, 1.0}, {Site{2}, 0.5}}),
                    Density::uniform(0.0, 1.0), 0.5);
  }));
  REQUIRE(throws_kind(ErrorKind::HypothesisViolation, [&] {
    decay_constants(SingleSitePotential(2, {{Site{0, 0}, 1.0}}), Density::uniform(0.0, 1.0),
                    0.5);
  }));
  // translated contiguous support is accepted
  REQUIRE_NOTHROW(decay_constants(SingleSitePotential(1, {{Site{-1}, 2.0}, {Site{0}, 1.0}}),
                                  Density::uniform(0.0, 100.0), 0.5));
}

TEST_CASE("thm 1 shape factors") {
  const SingleSitePotential u(1, {{Site{0}, 1.0}, {Site{1}, -1.0}});
  const Density rho = Density::uniform(0.0, 1.0);
  const Thm1Shape shape = thm1_shape(u, rho, 10, 0.01, 1);
  REQUIRE(shape.volume_factor == Catch::Approx(121.0));  // (10+1)^{1*(1+1)}
  REQUIRE(shape.epsilon_factor == Catch::Approx(2.0 * 2.0 * 0.01));
}

TEST_CASE("bound set records which constants are unavailable and why") {
  const SingleSitePotential flip(1, {{Site{0}, 1.0}, {Site{1}, -1.0}});
  const BoundSet bs = bound_set(flip, Density::triangular(0.0, 1.0), 10, 0.01, 0.4);
  REQUIRE_FALSE(bs.wegner_thm2.has_value());
  REQUIRE_FALSE(bs.frac_moment_thm3.has_value());
  REQUIRE(bs.absent.count("wegner_thm2") == 1);
  REQUIRE(bs.absent.count("frac_moment_thm3") == 1);
  // condition (A) holds and the coupling product is 1, so decay constants exist
  REQUIRE(bs.c_u_rho.has_value());
  REQUIRE(bs.decay_rate_m.has_value());

  const BoundSet good = bound_set(SingleSitePotential::delta(1),
                                  Density::triangular(0.0, 1.0), 10, 0.01, 0.4);
  REQUIRE(good.wegner_thm2.has_value());
  REQUIRE(good.frac_moment_thm3.has_value());
  REQUIRE(good.absent.empty());
}

TEST_CASE("potential report for the geometric pair") {
  const PotentialReport rep =
      potential_report(SingleSitePotential(1, {{Site{0}, 1.0}, {Site{1}, 0.5}}));
  REQUIRE(rep.rank == 2);
  REQUIRE(rep.ubar == Catch::Approx(1.5));
  REQUIRE(rep.diameter_n == 2);
  REQUIRE(rep.condition_a);
  REQUIRE(rep.tail_radius_m.has_value());
  REQUIRE(rep.symbol_min_abs.has_value());
  REQUIRE(*rep.symbol_min_abs == Catch::Approx(0.5).margin(1e-9));
  REQUIRE(rep.c_u.has_value());
  REQUIRE(*rep.c_u == Catch::Approx(2.0).margin(1e-8));
}

TEST_CASE("interpretation flags are frozen") {
  const auto flags = interpretation_flags();
  REQUIRE(flags.size() == 5);
  REQUIRE(flags[0].first == "interval");
  REQUIRE(flags[1].first == "theta");
  REQUIRE(flags[2].first == "tail_norm");
  REQUIRE(flags[3].first == "thm2_constant");
  REQUIRE(flags[4].first == "thm1_c_u");
}
