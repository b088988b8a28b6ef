#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dalloy/errors.hpp"
#include "dalloy/lattice.hpp"
#include "dalloy/rng.hpp"

namespace dalloy {

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature (absolute tolerance, Richardson correction).
// ---------------------------------------------------------------------------

namespace detail {

template <typename F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 40) {
  if (!(b > a)) return 0.0;
  const double fa = f(a);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// integral of exp(-1/(1-t^2)) over (-1,1); normalizer of the mollifier bump
inline double bump_mass() {
  static const double value = [] {
    auto f = [](double t) {
      const double w = 1.0 - t * t;
      return w > 1e-300 ? std::exp(-1.0 / w) : 0.0;
    };
    return adaptive_simpson(f, -1.0, 1.0, 1e-15, 48);
  }();
  return value;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Densities
// ---------------------------------------------------------------------------

enum class DensityKind { Uniform, Triangular, SmoothBump, PiecewiseLinear };

inline const char* to_string(DensityKind k) {
  switch (k) {
    case DensityKind::Uniform: return "uniform";
    case DensityKind::Triangular: return "triangular";
    case DensityKind::SmoothBump: return "smooth-bump";
    case DensityKind::PiecewiseLinear: return "piecewise-linear";
  }
  return "unknown";
}

struct DensityNorms {
  double total_variation = 0.0;           // ||rho||_Var, jumps included
  double sup_norm = 0.0;                  // ||rho||_inf
  std::optional<double> deriv_l1;         // ||rho'||_{L^1}, absent outside W^{1,1}
};

// Compactly supported probability density on [a,b].  The three linear kinds
// share one exact piecewise-linear representation (nodes xs_, values ys_);
// the smooth bump keeps its analytic form plus a cumulative table.
class Density {
 public:
  static Density uniform(double a, double b) {
    check_interval(a, b);
    const double h = 1.0 / (b - a);
    return Density(DensityKind::Uniform, {a, b}, {h, h});
  }

  // symmetric tent with peak 2/(b-a) at the midpoint
  static Density triangular(double a, double b) {
    check_interval(a, b);
    const double h = 2.0 / (b - a);
    return Density(DensityKind::Triangular, {a, 0.5 * (a + b), b}, {0.0, h, 0.0});
  }

  static Density smooth_bump(double a, double b) {
    check_interval(a, b);
    Density d(DensityKind::SmoothBump, {a, b}, {});
    d.build_bump_table();
    return d;
  }

  // arbitrary nonnegative node values, rescaled to integrate to 1
  static Density piecewise_linear(std::vector<double> breakpoints, std::vector<double> values) {
    if (breakpoints.size() < 2 || breakpoints.size() != values.size())
      fail(ErrorKind::Validation,
           "piecewise-linear density needs matching breakpoints/values with >= 2 nodes");
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
      if (!(breakpoints[i] < breakpoints[i + 1]))
        fail(ErrorKind::Validation, "piecewise-linear breakpoints must be strictly increasing");
    double mass = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i]) || values[i] < 0.0)
        fail(ErrorKind::Validation, "piecewise-linear density values must be finite and >= 0");
      if (i + 1 < values.size())
        mass += 0.5 * (values[i] + values[i + 1]) * (breakpoints[i + 1] - breakpoints[i]);
    }
    if (!(mass > 0.0))
      fail(ErrorKind::Validation, "piecewise-linear density must have positive raw integral");
    for (double& y : values) y /= mass;
    return Density(DensityKind::PiecewiseLinear, std::move(breakpoints), std::move(values));
  }

  DensityKind kind() const noexcept { return kind_; }
  const char* kind_name() const noexcept { return to_string(kind_); }
  double support_lo() const noexcept { return xs_.front(); }
  double support_hi() const noexcept { return xs_.back(); }
  const std::vector<double>& breakpoints() const noexcept { return xs_; }

  double pdf(double x) const {
    if (x < xs_.front() || x > xs_.back()) return 0.0;
    if (kind_ == DensityKind::SmoothBump) return bump_pdf(x);
    const std::size_t i = segment_of(x);
    const double t = x - xs_[i];
    const double slope = (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
    return ys_[i] + slope * t;
  }

  double cdf(double x) const {
    if (x <= xs_.front()) return 0.0;
    if (x >= xs_.back()) return 1.0;
    if (kind_ == DensityKind::SmoothBump) return bump_cdf(x);
    const std::size_t i = segment_of(x);
    const double t = x - xs_[i];
    const double slope = (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
    return cum_[i] + ys_[i] * t + 0.5 * slope * t * t;
  }

  // inverse cdf; closed form where available, bisection for the bump
  double quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::Validation, "quantile argument outside [0,1]");
    const double a = xs_.front();
    const double b = xs_.back();
    switch (kind_) {
      case DensityKind::Uniform:
        return std::min(b, a + p * (b - a));
      case DensityKind::Triangular:
        return p <= 0.5 ? a + (b - a) * std::sqrt(0.5 * p) : b - (b - a) * std::sqrt(0.5 * (1.0 - p));
      case DensityKind::SmoothBump: {
        double lo = a;
        double hi = b;
        while (hi - lo > 1e-14 * (b - a)) {
          const double mid = 0.5 * (lo + hi);
          (bump_cdf(mid) < p ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
      }
      case DensityKind::PiecewiseLinear: {
        const auto it = std::upper_bound(cum_.begin(), cum_.end(), p);
        std::size_t i = it == cum_.begin() ? 0 : static_cast<std::size_t>(it - cum_.begin()) - 1;
        i = std::min(i, xs_.size() - 2);
        const double q = p - cum_[i];
        const double h = xs_[i + 1] - xs_[i];
        if (q <= 0.0) return xs_[i];
        const double slope = (ys_[i + 1] - ys_[i]) / h;
        const double denom = ys_[i] + std::sqrt(std::max(ys_[i] * ys_[i] + 2.0 * slope * q, 0.0));
        if (denom <= 0.0) return xs_[i];
        return xs_[i] + std::min(h, 2.0 * q / denom);
      }
    }
    return a;
  }

  double sample(RngStream& stream) const { return quantile(stream.uniform01()); }

  DensityNorms norms() const { return norms_; }
  double total_variation() const noexcept { return norms_.total_variation; }
  double sup_norm() const noexcept { return norms_.sup_norm; }
  bool has_deriv_l1() const noexcept { return norms_.deriv_l1.has_value(); }

  double deriv_l1() const {
    if (!norms_.deriv_l1)
      fail(ErrorKind::UnsupportedNorm, std::string("||rho'||_L1 undefined for ") + kind_name() +
                                           " density (jump at a support endpoint)");
    return *norms_.deriv_l1;
  }

  // recomputed mass, used by the normalization invariant checks
  double integral() const {
    if (kind_ == DensityKind::SmoothBump) {
      auto f = [this](double x) { return bump_pdf(x); };
      return detail::adaptive_simpson(f, xs_.front(), xs_.back(), 1e-14, 48);
    }
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < xs_.size(); ++i)
      mass += 0.5 * (ys_[i] + ys_[i + 1]) * (xs_[i + 1] - xs_[i]);
    return mass;
  }

 private:
  Density(DensityKind kind, std::vector<double> xs, std::vector<double> ys)
      : kind_(kind), xs_(std::move(xs)), ys_(std::move(ys)) {
    if (kind_ != DensityKind::SmoothBump) {
      cum_.assign(xs_.size(), 0.0);
      for (std::size_t i = 0; i + 1 < xs_.size(); ++i)
        cum_[i + 1] = cum_[i] + 0.5 * (ys_[i] + ys_[i + 1]) * (xs_[i + 1] - xs_[i]);
      double sup = 0.0;
      double slope_var = 0.0;
      for (std::size_t i = 0; i < ys_.size(); ++i) {
        sup = std::max(sup, ys_[i]);
        if (i + 1 < ys_.size()) slope_var += std::abs(ys_[i + 1] - ys_[i]);
      }
      norms_.sup_norm = sup;
      norms_.total_variation = ys_.front() + ys_.back() + slope_var;
      if (ys_.front() == 0.0 && ys_.back() == 0.0) norms_.deriv_l1 = slope_var;
    }
  }

  static void check_interval(double a, double b) {
    if (!(std::isfinite(a) && std::isfinite(b) && a < b))
      fail(ErrorKind::Validation, "density support [a,b] must be a finite interval with a < b");
  }

  std::size_t segment_of(double x) const {
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    std::size_t i = it == xs_.begin() ? 0 : static_cast<std::size_t>(it - xs_.begin()) - 1;
    return std::min(i, xs_.size() - 2);
  }

  // --- smooth bump internals; everything in the reference coordinate
  // t = 2(x-a)/(b-a) - 1 in [-1,1].
  static double bump_reference(double t) {
    const double w = 1.0 - t * t;
    return w > 1e-300 ? std::exp(-1.0 / w) : 0.0;
  }

  double bump_pdf(double x) const {
    const double a = xs_.front();
    const double b = xs_.back();
    const double t = 2.0 * (x - a) / (b - a) - 1.0;
    return bump_reference(t) * 2.0 / ((b - a) * detail::bump_mass());
  }

  void build_bump_table() {
    const int cells = 4096;
    bump_cum_.assign(cells + 1, 0.0);
    const double h = 2.0 / cells;
    for (int j = 0; j < cells; ++j) {
      const double t0 = -1.0 + j * h;
      const double t1 = t0 + h;
      const double tm = 0.5 * (t0 + t1);
      bump_cum_[j + 1] = bump_cum_[j] + h / 6.0 * (bump_reference(t0) + 4.0 * bump_reference(tm) +
                                                   bump_reference(t1));
    }
    const double sup_ref = std::exp(-1.0);
    const double scale = 2.0 / ((xs_.back() - xs_.front()) * detail::bump_mass());
    norms_.sup_norm = sup_ref * scale;
    norms_.total_variation = 2.0 * norms_.sup_norm;
    norms_.deriv_l1 = 2.0 * norms_.sup_norm;
  }

  double bump_cdf(double x) const {
    const double a = xs_.front();
    const double b = xs_.back();
    double t = 2.0 * (x - a) / (b - a) - 1.0;
    t = std::clamp(t, -1.0, 1.0);
    const int cells = static_cast<int>(bump_cum_.size()) - 1;
    const double h = 2.0 / cells;
    int j = std::min(cells - 1, static_cast<int>((t + 1.0) / h));
    const double t0 = -1.0 + j * h;
    const double tm = 0.5 * (t0 + t);
    const double partial =
        (t - t0) / 6.0 * (bump_reference(t0) + 4.0 * bump_reference(tm) + bump_reference(t));
    return std::min(1.0, (bump_cum_[j] + partial) / detail::bump_mass());
  }

  DensityKind kind_;
  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<double> cum_;       // cumulative mass at nodes (linear kinds)
  std::vector<double> bump_cum_;  // cumulative reference-bump mass on [-1,1]
  DensityNorms norms_;
};

inline Density make_density(const std::string& kind, double a, double b) {
  if (kind == "uniform") return Density::uniform(a, b);
  if (kind == "triangular") return Density::triangular(a, b);
  if (kind == "smooth-bump") return Density::smooth_bump(a, b);
  fail(ErrorKind::Validation, "unknown density kind '" + kind + "'");
}

inline Density make_density(const std::vector<double>& breakpoints,
                            const std::vector<double>& values) {
  return Density::piecewise_linear(breakpoints, values);
}

// ---------------------------------------------------------------------------
// Singular moment integral  int rho(xi) |xi - delta|^{-s} dxi,  0 < s < 1.
//
// For real delta the weight substitution y = r^{1-s} (r = |xi - delta|)
// removes the singularity:  int phi(r) r^{-s} dr = 1/(1-s) int phi(y^{1/(1-s)}) dy.
// ---------------------------------------------------------------------------

inline double singular_integral(const Density& rho, std::complex<double> delta, double s) {
  if (!(s > 0.0 && s < 1.0))
    fail(ErrorKind::Validation, "singular_integral needs s in (0,1), got s=" + std::to_string(s));

  std::vector<double> cuts = rho.breakpoints();
  if (rho.kind() == DensityKind::SmoothBump) {
    // refine so each adaptive piece is mild
    const double a = rho.support_lo();
    const double b = rho.support_hi();
    cuts = {a, 0.25 * (3 * a + b), 0.5 * (a + b), 0.25 * (a + 3 * b), b};
  }
  const double re = delta.real();
  const double im = delta.imag();
  if (re > cuts.front() && re < cuts.back()) {
    cuts.push_back(re);
    std::sort(cuts.begin(), cuts.end());
  }

  auto piece = [&](double p, double q, double tol) -> double {
    if (!(q > p)) return 0.0;
    if (im != 0.0) {
      auto f = [&](double xi) {
        const double dr = xi - re;
        return rho.pdf(xi) * std::pow(dr * dr + im * im, -0.5 * s);
      };
      return detail::adaptive_simpson(f, p, q, tol, 44);
    }
    // real pole at re; [p,q] lies on one side of it after the cut insertion
    const bool right = p >= re;
    const double r1 = right ? p - re : re - q;
    const double r2 = right ? q - re : re - p;
    const double alpha = 1.0 / (1.0 - s);
    auto f = [&](double y) {
      const double r = std::pow(y, alpha);
      return rho.pdf(right ? re + r : re - r);
    };
    const double y1 = std::pow(std::max(r1, 0.0), 1.0 - s);
    const double y2 = std::pow(r2, 1.0 - s);
    return detail::adaptive_simpson(f, y1, y2, tol, 44) / (1.0 - s);
  };

  // pass 1: rough magnitude; pass 2: absolute tolerances sized for ~1e-9 relative
  double rough = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) rough += piece(cuts[i], cuts[i + 1], 1e-6);
  const double tol = std::max(std::abs(rough), 1e-12) * 1e-9 / static_cast<double>(cuts.size());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += piece(cuts[i], cuts[i + 1], tol);
  return total;
}

// ---------------------------------------------------------------------------
// Reproducible disorder draw: stream (master_seed, sample_index), couplings
// in the lexicographic order of the influence set.
// ---------------------------------------------------------------------------

inline DisorderConfiguration draw_disorder(const BoxRegion& region, const Density& rho,
                                           std::uint64_t master_seed, std::uint64_t sample_index) {
  RngStream stream(master_seed, sample_index);
  DisorderConfiguration out;
  out.seed = master_seed;
  out.sample_index = sample_index;
  const std::size_t count = region.plus_sites().size();
  out.values.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.values.push_back(rho.sample(stream));
  return out;
}

}  // namespace dalloy
