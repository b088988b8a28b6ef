#pragma once

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dalloy/config.hpp"
#include "dalloy/constants.hpp"
#include "dalloy/density.hpp"
#include "dalloy/errors.hpp"
#include "dalloy/experiments.hpp"
#include "dalloy/lattice.hpp"
#include "dalloy/linalg.hpp"
#include "dalloy/rng.hpp"
#include "dalloy/symbol.hpp"

namespace dalloy {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

template <typename Body>
inline CheckResult timed_check(const std::string& name, Body&& body) {
  CheckResult result;
  result.name = name;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(result);
  } catch (const std::exception& e) {
    result.pass = false;
    result.detail = std::string("exception: ") + e.what();
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

// Gauss-Jordan inversion with partial pivoting; the independent route for the
// resolvent oracle.
inline DenseMatrix<std::complex<double>> invert_dense_gj(DenseMatrix<std::complex<double>> a) {
  const int n = a.rows();
  DenseMatrix<std::complex<double>> inv(n, n, {0.0, 0.0});
  for (int i = 0; i < n; ++i) inv(i, i) = {1.0, 0.0};
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int r = k + 1; r < n; ++r)
      if (std::abs(a(r, k)) > std::abs(a(p, k))) p = r;
    if (std::abs(a(p, k)) == 0.0)
      fail(ErrorKind::NumericalDegeneracy, "oracle inversion hit a zero pivot");
    if (p != k) {
      for (int j = 0; j < n; ++j) {
        std::swap(a(k, j), a(p, j));
        std::swap(inv(k, j), inv(p, j));
      }
    }
    const std::complex<double> scale = 1.0 / a(k, k);
    for (int j = 0; j < n; ++j) {
      a(k, j) *= scale;
      inv(k, j) *= scale;
    }
    for (int r = 0; r < n; ++r) {
      if (r == k) continue;
      const std::complex<double> factor = a(r, k);
      if (factor == std::complex<double>(0.0, 0.0)) continue;
      for (int j = 0; j < n; ++j) {
        a(r, j) -= factor * a(k, j);
        inv(r, j) -= factor * inv(k, j);
      }
    }
  }
  return inv;
}

struct RandomInstance {
  SingleSitePotential u;
  Density rho;
  Hamiltonian h;
};

inline RandomInstance random_instance(std::uint64_t seed, int t, std::uint64_t draw_stream) {
  RngStream gen(seed, 7000 + static_cast<std::uint64_t>(t));
  const int d = (t % 2) + 1;
  const int box_l = d == 1 ? 4 + static_cast<int>(gen.uniform01() * 41)
                           : 1 + static_cast<int>(gen.uniform01() * 5.999);
  const int rank = 1 + static_cast<int>(gen.uniform01() * 2.999);
  std::map<Site, double> entries;
  for (int r = 0; r < rank; ++r) {
    Site site(static_cast<std::size_t>(d));
    for (int axis = 0; axis < d; ++axis)
      site[static_cast<std::size_t>(axis)] = -2 + static_cast<int>(gen.uniform01() * 4.999);
    const double magnitude = 0.2 + gen.uniform01();
    entries[site] = gen.uniform01() < 0.5 ? -magnitude : magnitude;
  }
  SingleSitePotential u(d, entries);
  Density rho = (t % 4) < 2 ? Density::uniform(0.0, 1.0) : Density::triangular(-1.0, 1.0);
  const BoxRegion region = support_dilate(BoxRegion::box(box_l, d), u);
  const DisorderConfiguration omega = draw_disorder(region, rho, seed, draw_stream);
  Hamiltonian h = assemble_hamiltonian(region, assemble_potential(u, omega, region));
  return RandomInstance{std::move(u), std::move(rho), std::move(h)};
}

}  // namespace detail

// Spectral counts via LDL^T inertia against an independent Jacobi spectrum,
// exact equality on random instances in d = 1 and d = 2.
inline CheckResult check_count_oracle(std::uint64_t seed) {
  return detail::timed_check("count-oracle", [&](CheckResult& out) {
    int checked = 0, trace_checked = 0, mismatches = 0;
    for (int t = 0; t < 200; ++t) {
      const detail::RandomInstance inst =
          detail::random_instance(seed, t, 9000 + static_cast<std::uint64_t>(t));
      const std::vector<double> w = full_spectrum(inst.h);
      const int n = static_cast<int>(w.size());
      const double scale = std::max(1.0, std::max(std::abs(w.front()), std::abs(w.back())));

      RngStream pick(seed, 11000 + static_cast<std::uint64_t>(t));
      std::vector<int> gaps;
      for (int k = 0; k + 1 < n; ++k)
        if (w[static_cast<std::size_t>(k + 1)] - w[static_cast<std::size_t>(k)] > 1e-6 * scale)
          gaps.push_back(k);

      auto expect_below = [&](double c) {
        int count = 0;
        for (double lam : w) count += lam < c ? 1 : 0;
        return count;
      };
      auto midpoint = [&](int k) {
        return 0.5 * (w[static_cast<std::size_t>(k)] + w[static_cast<std::size_t>(k + 1)]);
      };

      std::vector<std::pair<double, int>> count_cases = {{w.front() - 1.0, 0},
                                                         {w.back() + 1.0, n}};
      if (!gaps.empty()) {
        const int k = gaps[static_cast<std::size_t>(pick.uniform01() * gaps.size() * 0.999)];
        const double c = midpoint(k);
        count_cases.emplace_back(c, expect_below(c));
      }
      for (const auto& [c, expected] : count_cases) {
        ++checked;
        if (eig_count_below(inst.h, c) != expected) ++mismatches;
      }

      if (gaps.size() >= 2) {
        std::size_t i1 = static_cast<std::size_t>(pick.uniform01() * gaps.size() * 0.999);
        std::size_t i2 = static_cast<std::size_t>(pick.uniform01() * gaps.size() * 0.999);
        if (i1 != i2) {
          if (i1 > i2) std::swap(i1, i2);
          const double m1 = midpoint(gaps[i1]);
          const double m2 = midpoint(gaps[i2]);
          const int expected = expect_below(m2) - expect_below(m1);
          ++trace_checked;
          if (interval_trace(inst.h, 0.5 * (m1 + m2), 0.5 * (m2 - m1)) != expected)
            ++mismatches;
        }
      }
    }
    out.pass = mismatches == 0;
    out.detail = std::to_string(checked) + " count cases + " + std::to_string(trace_checked) +
                 " interval traces on 200 instances, " + std::to_string(mismatches) +
                 " mismatches";
  });
}

// Resolvent columns against Gauss-Jordan inversion, 1e-10 normwise relative.
inline CheckResult check_green_oracle(std::uint64_t seed) {
  return detail::timed_check("green-oracle", [&](CheckResult& out) {
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
      const detail::RandomInstance inst =
          detail::random_instance(seed, t, 9500 + static_cast<std::uint64_t>(t));
      const int n = inst.h.size();
      RngStream pick(seed, 12000 + static_cast<std::uint64_t>(t));
      const auto [vlo, vhi] = potential_range(inst.u, inst.rho);
      const double lo = -2.0 * inst.u.dim() + vlo;
      const double hi = 2.0 * inst.u.dim() + vhi;
      const double re = lo + pick.uniform01() * (hi - lo);
      const double im_mag = std::pow(10.0, -2.5 + 2.5 * pick.uniform01());
      const std::complex<double> z(re, t % 2 == 0 ? im_mag : -im_mag);
      const int y = std::min(n - 1, static_cast<int>(pick.uniform01() * n));

      const auto column = green_column(inst.h, z, y);
      DenseMatrix<std::complex<double>> shifted(n, n, {0.0, 0.0});
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) shifted(r, c) = inst.h.matrix()(r, c);
      for (int r = 0; r < n; ++r) shifted(r, r) -= z;
      const auto inv = detail::invert_dense_gj(shifted);

      double norm = 0.0;
      for (int r = 0; r < n; ++r) norm = std::max(norm, std::abs(inv(r, y)));
      for (int r = 0; r < n; ++r)
        worst = std::max(worst,
                         std::abs(column[static_cast<std::size_t>(r)] - inv(r, y)) / norm);
    }
    out.pass = worst <= 1e-10;
    out.detail = "50 instances, worst normwise deviation " + format_double(worst);
  });
}

// Toeplitz symbol inversion: delta gives exactly 1, (1, 0.5) gives 2, a
// vanishing symbol is rejected.
inline CheckResult check_toeplitz() {
  return detail::timed_check("toeplitz-constant", [&](CheckResult& out) {
    std::vector<std::string> problems;

    const double c_delta = inverse_kernel_l1(SingleSitePotential::delta(1));
    if (c_delta != 1.0)
      problems.push_back("delta potential gave " + format_double(c_delta) + ", want exactly 1");

    // geometric-series oracle: (I + 0.5 S)^{-1} has l1 norm sum 0.5^k = 2
    const SingleSitePotential pair_u(
        1, {{Site{0}, 1.0}, {Site{1}, 0.5}});
    const double c_pair = inverse_kernel_l1(pair_u);
    if (std::abs(c_pair - 2.0) > 1e-8)
      problems.push_back("(1, 0.5) potential gave " + format_double(c_pair) +
                         ", want 2 within 1e-8");

    const SingleSitePotential vanishing(
        1, {{Site{0}, 1.0}, {Site{1}, -1.0}});
    bool rejected = false;
    try {
      inverse_kernel_l1(vanishing);
    } catch (const Error& e) {
      rejected = e.kind() == ErrorKind::NonInvertibleSymbol;
    }
    if (!rejected) problems.push_back("vanishing symbol was not rejected");

    out.pass = problems.empty();
    if (problems.empty())
      out.detail = "delta exact, (1, 0.5) -> " + format_double(c_pair) +
                   ", vanishing symbol rejected";
    else {
      for (const auto& p : problems) out.detail += (out.detail.empty() ? "" : "; ") + p;
    }
  });
}

// Diagonal resolvent identity: alpha = t - 1/G(z;x,x) is sweep-invariant and
// predicts a held-out sweep point.
inline CheckResult check_krein(std::uint64_t seed) {
  return detail::timed_check("krein-identity", [&](CheckResult& out) {
    ExperimentConfig cfg = parse_config_json(nlohmann::json::object());
    cfg.seed = seed;
    const KreinResult kr = run_krein(cfg);
    out.pass = kr.worst_dev < kKreinDevTolerance && kr.worst_oos < kKreinPredictTolerance;
    out.detail = std::to_string(kr.instances.size()) + " instances, worst sweep deviation " +
                 format_double(kr.worst_dev) + ", worst out-of-sample error " +
                 format_double(kr.worst_oos);
  });
}

// Singular-integral inequality: both closed-form bounds majorize the
// quadrature at every lambda for every density/s/shift combination.
inline CheckResult check_graf() {
  return detail::timed_check("singular-integral-bound", [&](CheckResult& out) {
    const std::vector<std::pair<std::string, Density>> densities = {
        {"triangular", Density::triangular(0.0, 1.0)},
        {"smooth-bump", Density::smooth_bump(0.0, 1.0)},
        {"piecewise-linear", Density::piecewise_linear({0.0, 0.2, 1.0}, {0.0, 2.5, 0.0})},
    };
    const std::vector<double> s_values = {0.2, 0.5, 0.8};
    const std::vector<std::complex<double>> deltas = {
        {0.3, 0.0}, {0.9, 0.0}, {-0.5, 0.0}, {0.5, 0.25}, {0.2, -1.5}};
    std::vector<double> lambdas;
    for (int p = -3; p <= 3; ++p) lambdas.push_back(std::pow(10.0, p));

    int checked = 0, violations = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (const auto& [name, rho] : densities) {
      const double sup = rho.sup_norm();
      const double deriv = rho.deriv_l1();
      for (double s : s_values) {
        for (const auto& delta : deltas) {
          const double integral = singular_integral(rho, delta, s);
          for (double lambda : lambdas) {
            const double mass_term = std::pow(lambda, -s);  // ||g||_1 = 1
            const double tail = std::pow(lambda, 1.0 - s) / (1.0 - s);
            const double bound_sup = mass_term + sup * 2.0 * tail;
            const double bound_deriv = mass_term + deriv * tail;
            for (double bound : {bound_sup, bound_deriv}) {
              ++checked;
              const double slack = 1e-9 * std::max(1.0, bound);
              if (integral > bound + slack) ++violations;
              worst_margin = std::min(worst_margin, bound - integral);
            }
          }
        }
      }
    }
    out.pass = violations == 0;
    out.detail = std::to_string(checked) + " bound evaluations, " + std::to_string(violations) +
                 " violations, smallest margin " + format_double(worst_margin);
  });
}

inline std::vector<CheckResult> selftest_all(std::uint64_t seed) {
  return {check_count_oracle(seed), check_green_oracle(seed), check_toeplitz(),
          check_krein(seed), check_graf()};
}

}  // namespace dalloy
