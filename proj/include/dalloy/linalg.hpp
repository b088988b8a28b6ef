#pragma once

#include <cassert>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "dalloy/errors.hpp"
#include "dalloy/lattice.hpp"
#include "dalloy/matrix.hpp"

namespace dalloy {

struct Inertia {
  int negative = 0;
  int positive = 0;
};

namespace detail {

// Symmetric interchange of rows/columns r < p inside the trailing block of a
// lower-triangular factorization (earlier columns are never revisited).
inline void symmetric_swap_lower(DenseMatrix<double>& a, int first_col, int r, int p) {
  const int n = a.rows();
  for (int i = p + 1; i < n; ++i) std::swap(a(i, r), a(i, p));
  for (int j = r + 1; j < p; ++j) std::swap(a(j, r), a(p, j));
  std::swap(a(r, r), a(p, p));
  for (int j = first_col; j < r; ++j) std::swap(a(r, j), a(p, j));
}

}  // namespace detail

// Inertia of a symmetric matrix via Bunch-Kaufman LDL^T (partial pivoting,
// 1x1 and 2x2 pivots, alpha = (1+sqrt(17))/8).  Only the lower triangle of
// the argument is referenced.  A pivot whose block eigenvalue magnitude
// falls below pivot_floor aborts with ShiftCollision: the factorization
// cannot certify the inertia there.
inline Inertia bunch_kaufman_inertia(DenseMatrix<double> a, double pivot_floor) {
  const int n = a.rows();
  if (n != a.cols()) fail(ErrorKind::Validation, "inertia needs a square matrix");
  static const double alpha = (1.0 + std::sqrt(17.0)) / 8.0;
  Inertia inertia;

  auto collision = [&](double magnitude) {
    fail(ErrorKind::ShiftCollision,
         "near-zero pivot |" + std::to_string(magnitude) + "| < floor " +
             std::to_string(pivot_floor) + "; shift sits on an eigenvalue");
  };

  int k = 0;
  while (k < n) {
    const double absakk = std::abs(a(k, k));
    int imax = k;
    double colmax = 0.0;
    for (int i = k + 1; i < n; ++i) {
      const double v = std::abs(a(i, k));
      if (v > colmax) {
        colmax = v;
        imax = i;
      }
    }
    if (std::max(absakk, colmax) == 0.0) collision(0.0);

    int kstep = 1;
    int kp = k;
    if (absakk < alpha * colmax) {
      double rowmax = 0.0;
      for (int j = k; j < imax; ++j) rowmax = std::max(rowmax, std::abs(a(imax, j)));
      for (int i = imax + 1; i < n; ++i) rowmax = std::max(rowmax, std::abs(a(i, imax)));
      if (absakk >= alpha * colmax * (colmax / rowmax)) {
        kstep = 1;
      } else if (std::abs(a(imax, imax)) >= alpha * rowmax) {
        kstep = 1;
        kp = imax;
      } else {
        kstep = 2;
        kp = imax;
      }
    }

    const int kk = k + kstep - 1;
    if (kp != kk) detail::symmetric_swap_lower(a, k, kk, kp);

    if (kstep == 1) {
      const double d = a(k, k);
      if (std::abs(d) < pivot_floor || d == 0.0) collision(std::abs(d));
      (d < 0.0 ? inertia.negative : inertia.positive)++;
      for (int i = k + 1; i < n; ++i) {
        const double m = a(i, k) / d;
        for (int j = k + 1; j <= i; ++j) a(i, j) -= m * a(j, k);
      }
      ++k;
    } else {
      const double d11 = a(k, k);
      const double d21 = a(k + 1, k);
      const double d22 = a(k + 1, k + 1);
      const double half_tr = 0.5 * (d11 + d22);
      const double disc = std::sqrt(0.25 * (d11 - d22) * (d11 - d22) + d21 * d21);
      const double lam1 = half_tr - disc;
      const double lam2 = half_tr + disc;
      if (std::min(std::abs(lam1), std::abs(lam2)) < pivot_floor)
        collision(std::min(std::abs(lam1), std::abs(lam2)));
      (lam1 < 0.0 ? inertia.negative : inertia.positive)++;
      (lam2 < 0.0 ? inertia.negative : inertia.positive)++;
      const double det = d11 * d22 - d21 * d21;
      for (int i = k + 2; i < n; ++i) {
        const double w1 = (d22 * a(i, k) - d21 * a(i, k + 1)) / det;
        const double w2 = (d11 * a(i, k + 1) - d21 * a(i, k)) / det;
        for (int j = k + 2; j <= i; ++j) a(i, j) -= w1 * a(j, k) + w2 * a(j, k + 1);
      }
      k += 2;
    }
  }
  return inertia;
}

// #{eigenvalues < c} via the inertia of H - cI.  Throws ShiftCollision when c
// is numerically indistinguishable from an eigenvalue.
inline int eig_count_below(const DenseMatrix<double>& h, double c) {
  DenseMatrix<double> shifted = h;
  for (int i = 0; i < shifted.rows(); ++i) shifted(i, i) -= c;
  const double pivot_floor = 1e-12 * std::max(h.inf_norm(), 1e-100);
  return bunch_kaufman_inertia(std::move(shifted), pivot_floor).negative;
}

inline int eig_count_below(const Hamiltonian& h, double c) {
  return eig_count_below(h.matrix(), c);
}

// Jittered counting ladder: shift c, then c(1 + j*1e-10) for j = 1..max_jitter
// (additive steps of size 1e-10*max(1,||H||_inf) when c is zero).  Exhausting
// the ladder is a NumericalDegeneracy.
inline int eig_count_below_jittered(const DenseMatrix<double>& h, double c, int max_jitter = 3) {
  for (int j = 0; j <= max_jitter; ++j) {
    const double cj = (j == 0)              ? c
                      : (std::abs(c) > 1e-300) ? c * (1.0 + static_cast<double>(j) * 1e-10)
                                               : c + static_cast<double>(j) * 1e-10 *
                                                         std::max(1.0, h.inf_norm());
    try {
      return eig_count_below(h, cj);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ShiftCollision) throw;
    }
  }
  fail(ErrorKind::NumericalDegeneracy,
       "eigenvalue count at shift " + std::to_string(c) + " failed after " +
           std::to_string(max_jitter) + " jitter retries");
}

// tr chi_{[E-eps, E+eps]}(H) computed as a difference of jittered counts.
inline int interval_trace(const DenseMatrix<double>& h, double energy, double eps,
                          int max_jitter = 3) {
  if (!(eps > 0.0)) fail(ErrorKind::Validation, "interval_trace needs eps > 0");
  const int upper = eig_count_below_jittered(h, energy + eps, max_jitter);
  const int lower = eig_count_below_jittered(h, energy - eps, max_jitter);
  return upper - lower;
}

inline int interval_trace(const Hamiltonian& h, double energy, double eps, int max_jitter = 3) {
  return interval_trace(h.matrix(), energy, eps, max_jitter);
}

inline constexpr int kMaxJacobiSize = 200;

// Cyclic Jacobi eigenvalue iteration; the independent route used to validate
// the inertia-based counts.  Sorted ascending.
inline std::vector<double> jacobi_eigenvalues(DenseMatrix<double> a) {
  const int n = a.rows();
  if (n != a.cols()) fail(ErrorKind::Validation, "eigenvalues need a square matrix");
  if (n > kMaxJacobiSize)
    fail(ErrorKind::Capacity, "full spectrum capped at " + std::to_string(kMaxJacobiSize) +
                                  " sites, got " + std::to_string(n));
  std::vector<double> diag(static_cast<std::size_t>(n));
  if (n == 0) return diag;
  const double norm = a.frobenius_norm();
  bool converged = norm == 0.0;
  for (int sweep = 0; sweep < 60 && !converged; ++sweep) {
    double off2 = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off2 += a(i, j) * a(i, j);
    if (std::sqrt(2.0 * off2) <= 1e-12 * norm) {
      converged = true;
      break;
    }
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = theta >= 0.0 ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                                      : -1.0 / (-theta + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (int i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = a(p, i) = c * aip - s * aiq;
          a(i, q) = a(q, i) = s * aip + c * aiq;
        }
      }
    }
  }
  if (!converged) fail(ErrorKind::NumericalDegeneracy, "Jacobi iteration did not converge");
  for (int i = 0; i < n; ++i) diag[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(diag.begin(), diag.end());
  return diag;
}

inline std::vector<double> full_spectrum(const Hamiltonian& h) {
  return jacobi_eigenvalues(h.matrix());
}

namespace detail {

// LAPACK-gtsv style tridiagonal solve with adjacent-row partial pivoting.
inline std::vector<std::complex<double>> solve_tridiagonal(
    std::vector<std::complex<double>> diag, std::vector<std::complex<double>> sub,
    std::vector<std::complex<double>> super, std::vector<std::complex<double>> rhs) {
  const int n = static_cast<int>(diag.size());
  std::vector<std::complex<double>> fill(static_cast<std::size_t>(std::max(n - 2, 0)));
  for (int k = 0; k < n - 1; ++k) {
    if (std::abs(diag[k]) >= std::abs(sub[k])) {
      if (diag[k] == std::complex<double>(0.0))
        fail(ErrorKind::NumericalDegeneracy, "singular tridiagonal system");
      const std::complex<double> m = sub[k] / diag[k];
      diag[k + 1] -= m * super[k];
      rhs[k + 1] -= m * rhs[k];
      if (k < n - 2) fill[k] = 0.0;
    } else {
      const std::complex<double> m = diag[k] / sub[k];
      diag[k] = sub[k];
      const std::complex<double> old_next_diag = diag[k + 1];
      diag[k + 1] = super[k] - m * old_next_diag;
      if (k < n - 2) {
        fill[k] = super[k + 1];
        super[k + 1] = -m * fill[k];
      }
      super[k] = old_next_diag;
      const std::complex<double> old_rhs = rhs[k];
      rhs[k] = rhs[k + 1];
      rhs[k + 1] = old_rhs - m * rhs[k + 1];
    }
  }
  if (diag[n - 1] == std::complex<double>(0.0))
    fail(ErrorKind::NumericalDegeneracy, "singular tridiagonal system");
  std::vector<std::complex<double>> x(static_cast<std::size_t>(n));
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  if (n > 1) x[n - 2] = (rhs[n - 2] - super[n - 2] * x[n - 1]) / diag[n - 2];
  for (int k = n - 3; k >= 0; --k)
    x[k] = (rhs[k] - super[k] * x[k + 1] - fill[k] * x[k + 2]) / diag[k];
  return x;
}

// Dense LU with partial pivoting, single right-hand side, in place.
inline std::vector<std::complex<double>> solve_dense(DenseMatrix<std::complex<double>> m,
                                                     std::vector<std::complex<double>> rhs) {
  const int n = m.rows();
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(m(k, k));
    for (int i = k + 1; i < n; ++i) {
      const double v = std::abs(m(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best == 0.0) fail(ErrorKind::NumericalDegeneracy, "singular resolvent system");
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
      std::swap(rhs[k], rhs[piv]);
    }
    for (int i = k + 1; i < n; ++i) {
      const std::complex<double> f = m(i, k) / m(k, k);
      if (f == std::complex<double>(0.0)) continue;
      for (int j = k + 1; j < n; ++j) m(i, j) -= f * m(k, j);
      rhs[i] -= f * rhs[k];
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    std::complex<double> acc = rhs[i];
    for (int j = i + 1; j < n; ++j) acc -= m(i, j) * rhs[j];
    rhs[i] = acc / m(i, i);
  }
  return rhs;
}

}  // namespace detail

// Column y of the resolvent (H - z)^{-1}: w[x] = G(z; x, y).  d = 1 boxes use
// the pivoted tridiagonal path, everything else dense LU.
inline std::vector<std::complex<double>> green_column(const Hamiltonian& h, std::complex<double> z,
                                                      int y_index) {
  const int n = h.size();
  if (y_index < 0 || y_index >= n) fail(ErrorKind::Validation, "green: site index out of range");
  if (z.imag() == 0.0) fail(ErrorKind::Validation, "green: Im z must be nonzero");
  std::vector<std::complex<double>> rhs(static_cast<std::size_t>(n));
  rhs[static_cast<std::size_t>(y_index)] = 1.0;
  std::vector<std::complex<double>> column;
  if (h.one_dimensional()) {
    std::vector<std::complex<double>> diag(static_cast<std::size_t>(n));
    std::vector<std::complex<double>> sub(static_cast<std::size_t>(std::max(n - 1, 0)));
    std::vector<std::complex<double>> super(static_cast<std::size_t>(std::max(n - 1, 0)));
    for (int i = 0; i < n; ++i) {
      diag[i] = h.matrix()(i, i) - z;
      if (i + 1 < n) {
        sub[i] = h.matrix()(i + 1, i);
        super[i] = h.matrix()(i, i + 1);
      }
    }
    column = detail::solve_tridiagonal(std::move(diag), std::move(sub), std::move(super),
                                       std::move(rhs));
  } else {
    DenseMatrix<std::complex<double>> m(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) m(i, j) = h.matrix()(i, j);
      m(i, i) -= z;
    }
    column = detail::solve_dense(std::move(m), std::move(rhs));
  }
#ifndef NDEBUG
  for (const auto& w : column) assert(std::abs(w) <= 1.0 / std::abs(z.imag()) * (1.0 + 1e-9));
#endif
  return column;
}

inline std::complex<double> green_entry(const Hamiltonian& h, std::complex<double> z, int x_index,
                                        int y_index) {
  const auto column = green_column(h, z, y_index);
  if (x_index < 0 || x_index >= h.size())
    fail(ErrorKind::Validation, "green: site index out of range");
  return column[static_cast<std::size_t>(x_index)];
}

inline std::complex<double> green_entry(const Hamiltonian& h, std::complex<double> z,
                                        const Site& x, const Site& y) {
  return green_entry(h, z, h.region().index_of(x), h.region().index_of(y));
}

}  // namespace dalloy
