#include <catch2/catch_amalgamated.hpp>

#include <functional>

#include "dalloy/density.hpp"
#include "dalloy/errors.hpp"
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

TEST_CASE("box enumeration is lexicographic") {
  const BoxRegion b1 = BoxRegion::box(3, 1);
  REQUIRE(b1.size() == 4);
  REQUIRE(b1.sites().front() == Site{0});
  REQUIRE(b1.sites().back() == Site{3});

  const BoxRegion b2 = BoxRegion::box(1, 2);
  REQUIRE(b2.size() == 4);
  REQUIRE(b2.sites()[0] == (Site{0, 0}));
  REQUIRE(b2.sites()[1] == (Site{0, 1}));
  REQUIRE(b2.sites()[2] == (Site{1, 0}));
  REQUIRE(b2.sites()[3] == (Site{1, 1}));
}

TEST_CASE("site index round trip") {
  const BoxRegion b = BoxRegion::box(2, 3);
  REQUIRE(b.size() == 27);
  for (int i = 0; i < b.size(); ++i)
    REQUIRE(b.index_of(b.sites()[static_cast<std::size_t>(i)]) == i);
  REQUIRE(throws_kind(ErrorKind::Validation, [&] { b.index_of(Site{0, 0, 3}); }));
  REQUIRE(throws_kind(ErrorKind::Validation, [&] { b.index_of(Site{-1, 0, 0}); }));
}

TEST_CASE("box capacity is enforced") {
  REQUIRE_NOTHROW(BoxRegion::box(4095, 1));  // 4096 sites
  REQUIRE(throws_kind(ErrorKind::Capacity, [] { BoxRegion::box(4096, 1); }));
  REQUIRE_NOTHROW(BoxRegion::box(63, 2));
  REQUIRE(throws_kind(ErrorKind::Capacity, [] { BoxRegion::box(64, 2); }));
}

TEST_CASE("single-site potential invariants") {
  SingleSitePotential u(1, {{Site{-1}, 0.5}, {Site{0}, 1.0}, {Site{2}, 0.0}});
  REQUIRE(u.rank() == 2);  // exact zeros are dropped
  REQUIRE(u.ubar() == Catch::Approx(1.5));
  REQUIRE(u.l1_norm() == Catch::Approx(1.5));
  REQUIRE(u.diameter() == 1);
  REQUIRE(u.contiguous_1d());
  REQUIRE(u.value(Site{-1}) == 0.5);
  REQUIRE(u.value(Site{7}) == 0.0);

  SingleSitePotential gap(1, {{Site{0}, 1.0}, {Site{2}, 1.0}});
  REQUIRE_FALSE(gap.contiguous_1d());
  REQUIRE(gap.diameter() == 2);

  REQUIRE(throws_kind(ErrorKind::Validation,
                      [] { SingleSitePotential(1, {{Site{0, 1}, 1.0}}); }));
  REQUIRE(throws_kind(ErrorKind::Validation, [] { SingleSitePotential(1, {}); }));
  REQUIRE(throws_kind(ErrorKind::Validation,
                      [] { SingleSitePotential(1, {{Site{0}, 0.0}}); }));
}

TEST_CASE("support dilation covers every translate that meets the box") {
  SingleSitePotential u(1, {{Site{-1}, 0.5}, {Site{0}, 1.0}});
  const BoxRegion region = support_dilate(BoxRegion::box(3, 1), u);
  // {x - s : x in [0,3], s in {-1,0}} = [0,4]
  REQUIRE(static_cast<int>(region.plus_sites().size()) == 5);
  REQUIRE(region.plus_sites().front() == Site{0});
  REQUIRE(region.plus_sites().back() == Site{4});
  for (int i = 0; i < 5; ++i) REQUIRE(region.plus_index(Site{i}) == i);
}

TEST_CASE("potential assembly matches the convolution by hand") {
  SingleSitePotential u(1, {{Site{-1}, 0.5}, {Site{0}, 1.0}});
  const BoxRegion region = support_dilate(BoxRegion::box(2, 1), u);
  DisorderConfiguration omega;
  omega.values = {2.0, 3.0, 5.0, 7.0};  // omega_0..omega_3 in plus-site order
  REQUIRE(static_cast<int>(region.plus_sites().size()) == 4);
  const std::vector<double> v = assemble_potential(u, omega, region);
  // V(x) = omega_x + 0.5 omega_{x+1}
  REQUIRE(v[0] == Catch::Approx(2.0 + 0.5 * 3.0));
  REQUIRE(v[1] == Catch::Approx(3.0 + 0.5 * 5.0));
  REQUIRE(v[2] == Catch::Approx(5.0 + 0.5 * 7.0));
}

TEST_CASE("hamiltonian has nearest-neighbour hopping and the given diagonal") {
  const BoxRegion chain = BoxRegion::box(2, 1);
  const Hamiltonian h = assemble_hamiltonian(chain, {4.0, 5.0, 6.0});
  REQUIRE(h.size() == 3);
  REQUIRE(h.matrix()(0, 0) == 4.0);
  REQUIRE(h.matrix()(1, 1) == 5.0);
  REQUIRE(h.matrix()(2, 2) == 6.0);
  REQUIRE(h.matrix()(0, 1) == -1.0);
  REQUIRE(h.matrix()(1, 2) == -1.0);
  REQUIRE(h.matrix()(0, 2) == 0.0);
  REQUIRE(h.one_dimensional());

  const BoxRegion square = BoxRegion::box(1, 2);
  const Hamiltonian h2 = assemble_hamiltonian(square, {0.0, 0.0, 0.0, 0.0});
  // lex order (0,0),(0,1),(1,0),(1,1): neighbours differ in one axis by 1
  REQUIRE(h2.matrix()(0, 1) == -1.0);
  REQUIRE(h2.matrix()(0, 2) == -1.0);
  REQUIRE(h2.matrix()(0, 3) == 0.0);
  REQUIRE(h2.matrix()(1, 3) == -1.0);
  REQUIRE(h2.matrix()(2, 3) == -1.0);
  REQUIRE(h2.matrix()(1, 2) == 0.0);
  REQUIRE_FALSE(h2.one_dimensional());

  REQUIRE(throws_kind(ErrorKind::Validation,
                      [&] { assemble_hamiltonian(chain, {1.0, 2.0}); }));
}

TEST_CASE("disorder draws are reproducible and stay inside the support") {
  SingleSitePotential u(1, {{Site{0}, 1.0}, {Site{1}, -0.25}});
  const BoxRegion region = support_dilate(BoxRegion::box(9, 1), u);
  const Density rho = Density::triangular(-1.0, 2.0);
  const DisorderConfiguration a = draw_disorder(region, rho, 42, 7);
  const DisorderConfiguration b = draw_disorder(region, rho, 42, 7);
  const DisorderConfiguration c = draw_disorder(region, rho, 42, 8);
  REQUIRE(a.values == b.values);
  REQUIRE(a.values != c.values);
  REQUIRE(a.values.size() == region.plus_sites().size());
  for (double v : a.values) {
    REQUIRE(v >= -1.0);
    REQUIRE(v <= 2.0);
  }
}
