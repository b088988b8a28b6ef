#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dalloy/density.hpp"
#include "dalloy/errors.hpp"
#include "dalloy/lattice.hpp"
#include "dalloy/symbol.hpp"

namespace dalloy {

// Interpretation choices frozen into this artifact; echoed in every manifest.
inline std::vector<std::pair<std::string, std::string>> interpretation_flags() {
  return {
      {"interval", "the spectral interval in the count bounds is read as [E-eps, E+eps]"},
      {"theta", "Theta in the C_{u,rho} product is read as supp u"},
      {"tail_norm", "||k|| in the tail-radius condition is the sup norm on Z^d"},
      {"thm2_constant", "8/ubar in the explicit count bound is evaluated as 8/|ubar| so it stays positive"},
      {"thm1_c_u", "the abstract count-bound constant c_u is existential; experiments fit an empirical value"},
  };
}

// minimal m >= 1 with sum_{||k||_inf >= m} |u(k)| <= |ubar|/2
inline int tail_radius(const SingleSitePotential& u) {
  const double ubar = u.ubar();
  if (ubar == 0.0)
    fail(ErrorKind::HypothesisViolation,
         "tail radius needs ubar = sum u(k) != 0 (explicit count bound hypothesis)");
  int reach = 0;
  for (const auto& [site, v] : u.entries())
    for (int coord : site) reach = std::max(reach, std::abs(coord));
  for (int m = 1;; ++m) {
    double tail = 0.0;
    for (const auto& [site, v] : u.entries()) {
      int norm = 0;
      for (int coord : site) norm = std::max(norm, std::abs(coord));
      if (norm >= m) tail += std::abs(v);
    }
    if (tail <= 0.5 * std::abs(ubar)) return m;
    if (m > reach + 1)
      fail(ErrorKind::NumericalDegeneracy, "tail radius search failed to terminate");
  }
}

struct PotentialReport {
  int rank = 0;
  double ubar = 0.0;
  std::optional<int> tail_radius_m;      // absent when ubar = 0
  int diameter_n = 0;                    // n with support diameter n-1
  bool condition_a = false;              // d=1 contiguous support
  std::optional<double> symbol_min_abs;  // d=1 only
  std::optional<double> c_u;             // d=1, non-vanishing symbol only
};

inline PotentialReport potential_report(const SingleSitePotential& u) {
  PotentialReport report;
  report.rank = u.rank();
  report.ubar = u.ubar();
  if (report.ubar != 0.0) report.tail_radius_m = tail_radius(u);
  report.diameter_n = u.diameter() + 1;
  report.condition_a = u.contiguous_1d();
  if (u.dim() == 1) {
    int grid = 64;
    while (grid < 4 * (u.diameter() + 1)) grid *= 2;
    report.symbol_min_abs = symbol_eval(u, grid).min_abs;
    try {
      report.c_u = inverse_kernel_l1(u);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonInvertibleSymbol) throw;
    }
  }
  return report;
}

// Explicit count bound: (8/|ubar|) ||rho||_Var min(L^d, rank u) eps (L+m)^d
inline double wegner_bound_thm2(const SingleSitePotential& u, const Density& rho, int L,
                                double eps, int d) {
  if (d != u.dim())
    fail(ErrorKind::Validation, "wegner_bound_thm2 dimension does not match the potential");
  if (L < 1) fail(ErrorKind::Validation, "wegner_bound_thm2 needs L >= 1");
  if (!(eps > 0.0)) fail(ErrorKind::Validation, "wegner_bound_thm2 needs eps > 0");
  const double ubar = u.ubar();
  if (ubar == 0.0)
    fail(ErrorKind::HypothesisViolation,
         "the explicit count bound needs ubar != 0; use shape-fit mode for sign-cancelling u");
  if (!(std::isfinite(rho.support_lo()) && std::isfinite(rho.support_hi())))
    fail(ErrorKind::HypothesisViolation, "the count bound needs a compactly supported density");
  const int m = tail_radius(u);
  const double volume = std::pow(static_cast<double>(L), d);
  const double cells = std::min(volume, static_cast<double>(u.rank()));
  return 8.0 / std::abs(ubar) * rho.total_variation() * cells * eps *
         std::pow(static_cast<double>(L + m), d);
}

// Fractional-moment bound: (C_u ||rho'||_L1)^s 2^{1+s} s^{-s} / (1-s)
inline double frac_moment_bound_thm3(const SingleSitePotential& u, const Density& rho, double s) {
  if (!(s > 0.0 && s < 1.0))
    fail(ErrorKind::Validation, "frac_moment_bound_thm3 needs s in (0,1)");
  if (u.dim() != 1)
    fail(ErrorKind::HypothesisViolation,
         "C_u is computed via the 1D symbol; d must be 1 for the fractional-moment bound");
  const double c_u = inverse_kernel_l1(u);
  const double rho_deriv = rho.deriv_l1();
  return std::pow(c_u * rho_deriv, s) * std::pow(2.0, 1.0 + s) * std::pow(s, -s) / (1.0 - s);
}

struct DecayConstants {
  double c_u_rho = 0.0;
  double decay_rate_m = 0.0;  // -ln C_{u,rho}; positive iff C_{u,rho} < 1
  bool positive_rate = false;
};

// C_{u,rho} = |prod_{k in supp u} u(k)|^{-s/n} ||rho||_inf^s 2^s s^{-s}/(1-s)
inline DecayConstants decay_constants(const SingleSitePotential& u, const Density& rho, double s) {
  if (!(s > 0.0 && s < 1.0)) fail(ErrorKind::Validation, "decay_constants needs s in (0,1)");
  if (u.dim() != 1) fail(ErrorKind::HypothesisViolation, "decay rates are defined for 1D chains");
  if (!u.contiguous_1d())
    fail(ErrorKind::HypothesisViolation,
         "condition (A) violated: supp u must be {0,...,n-1} up to translation, with no gaps");
  const int n = u.rank();
  double product = 1.0;
  for (const auto& [site, v] : u.entries()) product *= v;
  DecayConstants out;
  out.c_u_rho = std::pow(std::abs(product), -s / n) * std::pow(rho.sup_norm(), s) *
                std::pow(2.0, s) * std::pow(s, -s) / (1.0 - s);
  out.decay_rate_m = -std::log(out.c_u_rho);
  out.positive_rate = out.decay_rate_m > 0.0;
  return out;
}

struct Thm1Shape {
  double epsilon_factor = 0.0;  // ||rho||_Var rank u eps
  int volume_exponent = 0;      // d (n+1)
  double volume_factor = 0.0;   // (L+n)^{d(n+1)}
};

// Structural factors of the abstract count bound, c_u left symbolic.
inline Thm1Shape thm1_shape(const SingleSitePotential& u, const Density& rho, int L, double eps,
                            int n) {
  Thm1Shape shape;
  shape.epsilon_factor = rho.total_variation() * u.rank() * eps;
  shape.volume_exponent = u.dim() * (n + 1);
  shape.volume_factor = std::pow(static_cast<double>(L + n), shape.volume_exponent);
  return shape;
}

// Everything the `constants` subcommand prints: the report plus whichever
// bounds exist for (u, rho, L, eps, s), with reasons for the absent ones.
struct BoundSet {
  int L = 10;
  double eps = 0.01;
  double s = 0.4;
  DensityNorms norms;
  std::optional<double> wegner_thm2;
  std::optional<double> frac_moment_thm3;
  std::optional<double> c_u_rho;
  std::optional<double> decay_rate_m;
  std::map<std::string, std::string> absent;  // bound name -> reason
};

inline BoundSet bound_set(const SingleSitePotential& u, const Density& rho, int L, double eps,
                          double s) {
  BoundSet out;
  out.L = L;
  out.eps = eps;
  out.s = s;
  out.norms = rho.norms();
  try {
    out.wegner_thm2 = wegner_bound_thm2(u, rho, L, eps, u.dim());
  } catch (const Error& e) {
    out.absent.emplace("wegner_thm2", e.what());
  }
  try {
    out.frac_moment_thm3 = frac_moment_bound_thm3(u, rho, s);
  } catch (const Error& e) {
    out.absent.emplace("frac_moment_thm3", e.what());
  }
  try {
    const DecayConstants dc = decay_constants(u, rho, s);
    out.c_u_rho = dc.c_u_rho;
    out.decay_rate_m = dc.decay_rate_m;
  } catch (const Error& e) {
    out.absent.emplace("decay", e.what());
  }
  return out;
}

}  // namespace dalloy
