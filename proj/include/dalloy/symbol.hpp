#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "dalloy/errors.hpp"
#include "dalloy/lattice.hpp"

namespace dalloy {

namespace detail {

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 FFT, unnormalized.  sign = +1 applies e^{+2 pi i jk/N}
// (synthesis), sign = -1 the conjugate (analysis).
inline void fft_radix2(std::vector<std::complex<double>>& a, int sign) {
  const std::size_t n = a.size();
  if (!is_power_of_two(static_cast<int>(n)))
    fail(ErrorKind::Validation, "fft length must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

}  // namespace detail

struct SymbolTable {
  int grid_size = 0;
  std::vector<std::complex<double>> values;  // hat u (theta_j), theta_j = 2 pi j / N
  double min_abs = 0.0;
};

// hat u(theta) = sum_k u(k) e^{i k theta} on the uniform N-point grid, via FFT
// after wrapping the (finite) support onto Z/NZ.
inline SymbolTable symbol_eval(const SingleSitePotential& u, int grid_size) {
  if (u.dim() != 1)
    fail(ErrorKind::HypothesisViolation, "symbol machinery is defined for d = 1 only");
  if (!detail::is_power_of_two(grid_size) || grid_size < 4)
    fail(ErrorKind::Validation, "symbol grid size must be a power of two, at least 4");
  if (grid_size < 2 * (u.diameter() + 1))
    fail(ErrorKind::Validation, "symbol grid too small for the support diameter");
  std::vector<std::complex<double>> a(static_cast<std::size_t>(grid_size), 0.0);
  for (const auto& [site, value] : u.entries()) {
    const int wrapped = ((site[0] % grid_size) + grid_size) % grid_size;
    a[static_cast<std::size_t>(wrapped)] += value;
  }
  detail::fft_radix2(a, +1);
  SymbolTable table;
  table.grid_size = grid_size;
  table.min_abs = std::abs(a[0]);
  for (const auto& v : a) table.min_abs = std::min(table.min_abs, std::abs(v));
  table.values = std::move(a);
  return table;
}

// C_u = ||A^{-1}||_{l1 -> l1} for the Toeplitz operator A(j,k) = u(j-k): the
// l1 norm of the Fourier coefficients of 1/hat u.  Grid doubling until the
// high-frequency band has fallen below the resolution gate and the partial
// sums stabilize.  Both thresholds must track the conditioning kappa =
// ||u||_1 / min |hat u|: FFT roundoff floors the coefficients near
// eps / min_abs (so the gate scales with it, and sub-gate coefficients are
// dropped to keep accumulated roundoff mass out of the sum), and the
// grid-to-grid fluctuation of the kept sum grows like eps * kappa^2 (so the
// stabilization tolerance is max(tol, that noise floor)).  Either way the
// returned value carries a relative error of order the gate, far inside tol
// for well-conditioned symbols.
inline double inverse_kernel_l1(const SingleSitePotential& u, double tol = 1e-10) {
  if (u.dim() != 1)
    fail(ErrorKind::HypothesisViolation, "inverse_kernel_l1 is defined for d = 1 only");
  const double vanish_floor = 1e-10 * u.l1_norm();
  int grid = 64;
  while (grid < 4 * (u.diameter() + 1)) grid *= 2;
  double prev_sum = -1.0;
  for (; grid <= (1 << 20); grid *= 2) {
    SymbolTable table = symbol_eval(u, grid);
    if (table.min_abs < vanish_floor)
      fail(ErrorKind::NonInvertibleSymbol,
           "symbol vanishes on the torus (min |hat u| = " + std::to_string(table.min_abs) +
               "); Toeplitz inverse kernel undefined");
    const double kappa = u.l1_norm() / table.min_abs;
    const double gate = std::max(1e-15, 1e-12 / table.min_abs);
    const double tol_eff =
        std::max(tol, 32.0 * std::numeric_limits<double>::epsilon() * kappa * kappa);
    std::vector<std::complex<double>>& w = table.values;
    for (auto& v : w) v = 1.0 / v;
    detail::fft_radix2(w, -1);
    double sum = 0.0;
    double far_band_max = 0.0;
    for (int k = 0; k < grid; ++k) {
      const double mag = std::abs(w[static_cast<std::size_t>(k)]) / grid;
      const int freq = std::min(k, grid - k);
      if (freq > grid / 4) far_band_max = std::max(far_band_max, mag);
      if (mag >= gate) sum += mag;
    }
    const bool tail_resolved = far_band_max < gate;
    if (prev_sum >= 0.0 && tail_resolved &&
        std::abs(sum - prev_sum) <= tol_eff * std::max(sum, 1e-300))
      return sum;
    prev_sum = sum;
  }
  fail(ErrorKind::NonInvertibleSymbol,
       "inverse symbol coefficient series did not stabilize up to grid 2^20; "
       "symbol is at or near a zero");
}

}  // namespace dalloy
