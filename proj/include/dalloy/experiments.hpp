#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dalloy/config.hpp"
#include "dalloy/constants.hpp"
#include "dalloy/csvio.hpp"
#include "dalloy/density.hpp"
#include "dalloy/errors.hpp"
#include "dalloy/lattice.hpp"
#include "dalloy/linalg.hpp"

namespace dalloy {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Pinned by the acceptance contract: a fitted decay rate may undershoot the
// theoretical rate by at most this much.
inline constexpr double kDecayFitTolerance = 0.15;

// Pinned: sweep values of the diagonal identity must agree this tightly, and
// the held-out sweep point must be predicted this tightly.
inline constexpr double kKreinDevTolerance = 1e-10;
inline constexpr double kKreinPredictTolerance = 1e-9;

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

struct Stats {
  double mean = kNaN;
  double stddev = kNaN;
  double se = kNaN;
  double mom = kNaN;  // median of means over <= 20 contiguous blocks
  long long n = 0;
};

inline Stats reduce_stats(const std::vector<double>& xs) {
  Stats st;
  st.n = static_cast<long long>(xs.size());
  if (xs.empty()) return st;
  double sum = 0.0;
  for (double x : xs) sum += x;
  st.mean = sum / static_cast<double>(st.n);
  if (st.n >= 2) {
    double ss = 0.0;
    for (double x : xs) ss += (x - st.mean) * (x - st.mean);
    st.stddev = std::sqrt(ss / static_cast<double>(st.n - 1));
    st.se = st.stddev / std::sqrt(static_cast<double>(st.n));
  } else {
    st.stddev = 0.0;
    st.se = 0.0;
  }
  const int blocks = static_cast<int>(std::min<long long>(20, st.n));
  std::vector<double> block_means;
  block_means.reserve(static_cast<std::size_t>(blocks));
  for (int b = 0; b < blocks; ++b) {
    const std::size_t lo = static_cast<std::size_t>(st.n) * b / blocks;
    const std::size_t hi = static_cast<std::size_t>(st.n) * (b + 1) / blocks;
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += xs[i];
    block_means.push_back(acc / static_cast<double>(hi - lo));
  }
  std::sort(block_means.begin(), block_means.end());
  const std::size_t k = block_means.size();
  st.mom = (k % 2 == 1) ? block_means[k / 2]
                        : 0.5 * (block_means[k / 2 - 1] + block_means[k / 2]);
  return st;
}

struct LinFit {
  double slope = kNaN;
  double intercept = kNaN;
  double r2 = kNaN;
};

inline LinFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  LinFit fit;
  const std::size_t n = xs.size();
  if (n < 2 || ys.size() != n) return fit;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssres = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ssres += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ssres / syy : kNaN;
  return fit;
}

// ---------------------------------------------------------------------------
// Result table
// ---------------------------------------------------------------------------

struct MomentTable {
  std::vector<std::string> param_names;
  struct Row {
    std::vector<double> params;
    Stats stats;
    double bound = kNaN;  // NaN = no bound applicable
    int pass = -1;        // 1 pass, 0 fail, -1 not applicable
  };
  std::vector<Row> rows;

  std::string to_csv() const {
    std::vector<std::string> header = param_names;
    header.insert(header.end(), {"mean", "std", "se", "mom", "n", "bound", "pass"});
    std::string out = csv_row(header);
    for (const Row& row : rows) {
      std::vector<std::string> cells;
      cells.reserve(header.size());
      for (double p : row.params) cells.push_back(format_double(p));
      cells.push_back(format_double(row.stats.mean));
      cells.push_back(format_double(row.stats.stddev));
      cells.push_back(format_double(row.stats.se));
      cells.push_back(format_double(row.stats.mom));
      cells.push_back(std::to_string(row.stats.n));
      cells.push_back(std::isnan(row.bound) ? "na" : format_double(row.bound));
      cells.push_back(row.pass < 0 ? "na" : (row.pass ? "1" : "0"));
      out += csv_row(cells);
    }
    return out;
  }

  bool all_pass() const {
    for (const Row& row : rows)
      if (row.pass == 0) return false;
    return true;
  }
};

inline int pass_flag(const Stats& st, double bound) {
  if (std::isnan(bound) || st.n == 0) return -1;
  return st.mean - 2.0 * st.se <= bound ? 1 : 0;
}

// ---------------------------------------------------------------------------
// Deterministic sample runner: contiguous index chunks per worker, every
// sample's randomness is a pure function of (master_seed, stream id), results
// land in per-sample slots, reductions run serially afterwards.
// ---------------------------------------------------------------------------

inline int effective_workers(int configured, long long count) {
  int w = configured > 0 ? configured : static_cast<int>(std::thread::hardware_concurrency());
  if (w < 1) w = 1;
  return static_cast<int>(std::min<long long>(w, std::max<long long>(count, 1)));
}

template <typename PerSample>
inline void run_samples(long long count, int workers, PerSample&& per_sample) {
  const int w = effective_workers(workers, count);
  if (w <= 1) {
    for (long long i = 0; i < count; ++i) per_sample(i);
    return;
  }
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(w));
  for (int t = 0; t < w; ++t) {
    const long long lo = count * t / w;
    const long long hi = count * (t + 1) / w;
    pool.emplace_back([&, lo, hi] {
      try {
        for (long long i = lo; i < hi; ++i) per_sample(i);
      } catch (...) {
        std::lock_guard<std::mutex> hold(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// Wegner experiment (explicit-bound mode and shape-fit mode)
// ---------------------------------------------------------------------------

struct EpsFit {
  int box_l = 0;
  double energy = 0.0;
  double slope = kNaN;
  double intercept = kNaN;
  double r2 = kNaN;
};

struct CuFit {
  double c_u_hat = kNaN;
  double se = kNaN;
  double ci_lo = kNaN;
  double ci_hi = kNaN;
  double r2 = kNaN;
  long long points = 0;
};

struct WegnerResult {
  MomentTable table;  // params L, E, eps
  std::vector<EpsFit> eps_fits;
  std::optional<CuFit> cu_fit;
  std::string mode;  // resolved: "thm2" or "shapefit"
  long long retried = 0;
  long long failed = 0;
  std::optional<std::string> failure;  // set when the degenerate-sample budget is blown
};

inline WegnerResult run_wegner(const ExperimentConfig& cfg) {
  const SingleSitePotential u = cfg.potential.make();
  const Density rho = cfg.density.make();
  const int d = u.dim();
  const long long n_mc = cfg.samples;

  WegnerResult result;
  if (cfg.wegner.mode == "auto")
    result.mode = u.ubar() != 0.0 ? "thm2" : "shapefit";
  else
    result.mode = cfg.wegner.mode;
  if (result.mode == "thm2" && u.ubar() == 0.0)
    fail(ErrorKind::HypothesisViolation,
         "wegner mode thm2 requires ubar != 0; use mode shapefit");

  result.table.param_names = {"L", "E", "eps"};
  const std::size_t n_energy = cfg.wegner.energies.size();
  const std::size_t n_eps = cfg.wegner.epsilons.size();
  const std::size_t cells = n_energy * n_eps;

  long long total_samples = 0;
  for (std::size_t bi = 0; bi < cfg.wegner.box_sizes.size(); ++bi) {
    const int box_l = cfg.wegner.box_sizes[bi];
    const BoxRegion region = support_dilate(BoxRegion::box(box_l, d), u);
    const int volume = region.size();

    std::vector<std::vector<double>> values(cells);
    for (auto& v : values) v.assign(static_cast<std::size_t>(n_mc), kNaN);
    std::vector<std::uint8_t> sample_failed(static_cast<std::size_t>(n_mc), 0);
    std::vector<std::uint8_t> sample_retried(static_cast<std::size_t>(n_mc), 0);
    std::vector<std::uint8_t> nesting_violated(static_cast<std::size_t>(n_mc), 0);

    run_samples(n_mc, cfg.workers, [&](long long i) {
      const std::uint64_t stream = static_cast<std::uint64_t>(bi) * static_cast<std::uint64_t>(n_mc) +
                                   static_cast<std::uint64_t>(i);
      const DisorderConfiguration omega = draw_disorder(region, rho, cfg.seed, stream);
      const Hamiltonian h = assemble_hamiltonian(region, assemble_potential(u, omega, region));
      for (std::size_t ei = 0; ei < n_energy; ++ei) {
        int prev = -1;
        for (std::size_t xi = 0; xi < n_eps; ++xi) {
          int trace = -1;
          try {
            trace = interval_trace(h, cfg.wegner.energies[ei], cfg.wegner.epsilons[xi]);
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::NumericalDegeneracy) throw;
            sample_retried[static_cast<std::size_t>(i)] = 1;
            try {
              trace = interval_trace(h, cfg.wegner.energies[ei], cfg.wegner.epsilons[xi], 8);
            } catch (const Error& e2) {
              if (e2.kind() != ErrorKind::NumericalDegeneracy) throw;
              sample_failed[static_cast<std::size_t>(i)] = 1;
              return;
            }
          }
          // intervals nest, so per-sample traces must be monotone in eps
          if (trace < prev || trace > volume) nesting_violated[static_cast<std::size_t>(i)] = 1;
          prev = trace;
          values[ei * n_eps + xi][static_cast<std::size_t>(i)] = trace;
        }
      }
    });

    for (long long i = 0; i < n_mc; ++i) {
      if (nesting_violated[static_cast<std::size_t>(i)])
        fail(ErrorKind::NumericalDegeneracy,
             "per-sample interval nesting or trace bound violated (L=" + std::to_string(box_l) +
                 ", sample " + std::to_string(i) + ")");
      result.retried += sample_retried[static_cast<std::size_t>(i)];
      result.failed += sample_failed[static_cast<std::size_t>(i)];
    }
    total_samples += n_mc;

    for (std::size_t ei = 0; ei < n_energy; ++ei) {
      std::vector<double> eps_means;
      for (std::size_t xi = 0; xi < n_eps; ++xi) {
        std::vector<double> kept;
        kept.reserve(static_cast<std::size_t>(n_mc));
        for (long long i = 0; i < n_mc; ++i)
          if (!sample_failed[static_cast<std::size_t>(i)])
            kept.push_back(values[ei * n_eps + xi][static_cast<std::size_t>(i)]);
        MomentTable::Row row;
        row.params = {static_cast<double>(box_l), cfg.wegner.energies[ei],
                      cfg.wegner.epsilons[xi]};
        row.stats = reduce_stats(kept);
        if (result.mode == "thm2")
          row.bound = wegner_bound_thm2(u, rho, box_l, cfg.wegner.epsilons[xi], d);
        row.pass = pass_flag(row.stats, row.bound);
        eps_means.push_back(row.stats.mean);
        result.table.rows.push_back(std::move(row));
      }
      EpsFit fit;
      fit.box_l = box_l;
      fit.energy = cfg.wegner.energies[ei];
      const LinFit lf = linear_fit(cfg.wegner.epsilons, eps_means);
      fit.slope = lf.slope;
      fit.intercept = lf.intercept;
      fit.r2 = lf.r2;
      result.eps_fits.push_back(fit);
    }

    if (result.failed > total_samples / 1000) {
      result.failure = "degenerate-sample budget exceeded: " + std::to_string(result.failed) +
                       " of " + std::to_string(total_samples) +
                       " samples failed the jitter ladder; partial results emitted";
      break;
    }
  }

  if (result.mode == "shapefit") {
    // regress mean/(||rho||_Var rank u eps) against (L+n)^{d(n+1)} through 0
    const int n_thm1 = u.diameter();
    std::vector<double> xs, ys;
    for (const auto& row : result.table.rows) {
      const Thm1Shape shape = thm1_shape(u, rho, static_cast<int>(row.params[0]), row.params[2],
                                         n_thm1);
      if (shape.epsilon_factor > 0.0 && row.stats.n > 0) {
        xs.push_back(shape.volume_factor);
        ys.push_back(row.stats.mean / shape.epsilon_factor);
      }
    }
    if (xs.size() >= 2) {
      double sxx = 0.0, sxy = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
      }
      CuFit fit;
      fit.points = static_cast<long long>(xs.size());
      fit.c_u_hat = sxy / sxx;
      double ssres = 0.0, my = 0.0, syy = 0.0;
      for (double y : ys) my += y;
      my /= static_cast<double>(ys.size());
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - fit.c_u_hat * xs[i];
        ssres += r * r;
        syy += (ys[i] - my) * (ys[i] - my);
      }
      fit.se = std::sqrt(ssres / (static_cast<double>(xs.size() - 1) * sxx));
      fit.ci_lo = fit.c_u_hat - 2.0 * fit.se;
      fit.ci_hi = fit.c_u_hat + 2.0 * fit.se;
      fit.r2 = syy > 0.0 ? 1.0 - ssres / syy : kNaN;
      result.cu_fit = fit;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Fractional-moment boundedness with optional diagonal scan
// ---------------------------------------------------------------------------

struct MomentBoundResult {
  MomentTable table;  // params re, im, x, y
  double bound = kNaN;
  double c_u = kNaN;
  double rho_deriv_l1 = kNaN;
  std::string bound_absent_reason;  // nonempty iff bound is NaN
  bool all_pass = false;
  bool mom_guard_ok = false;
  std::optional<MomentTable> diag_scan;  // params re, im, x
  double diag_scan_s = kNaN;
};

// Estimates E|G(x,y;z)|^s for the configured pairs and z values.  The
// theoretical bound needs both C_u and ||rho'||_1; when either hypothesis
// fails (symbol at a zero, density with a jump) the run still produces the
// moment table, with the bound column marked not-applicable and the reason
// recorded.
inline MomentBoundResult run_moment_bound(const ExperimentConfig& cfg) {
  const SingleSitePotential u = cfg.potential.make();
  const Density rho = cfg.density.make();
  const double s = cfg.moments.s;
  const long long n_mc = cfg.samples;
  if (!(s > 0.0 && s < 1.0))
    fail(ErrorKind::Validation, "moments.s must lie in (0, 1)");

  MomentBoundResult result;
  const auto note_absent = [&result](const Error& e) {
    if (!result.bound_absent_reason.empty()) result.bound_absent_reason += "; ";
    result.bound_absent_reason += e.what();
  };
  try {
    result.c_u = inverse_kernel_l1(u);
  } catch (const Error& e) {
    note_absent(e);
  }
  try {
    result.rho_deriv_l1 = rho.deriv_l1();
  } catch (const Error& e) {
    note_absent(e);
  }
  if (std::isfinite(result.c_u) && std::isfinite(result.rho_deriv_l1))
    result.bound = frac_moment_bound_thm3(u, rho, s);

  const int box_sites = cfg.moments.box_size;
  const BoxRegion region = support_dilate(BoxRegion::box(box_sites - 1, 1), u);

  // diagonal-scan sites (boundedness probe for s < 1/(4n))
  std::vector<int> diag_sites;
  if (cfg.moments.diag_scan) {
    const int n_diam = u.diameter() + 1;
    if (!(cfg.moments.diag_scan_s > 0.0 && cfg.moments.diag_scan_s < 1.0 / (4.0 * n_diam)))
      fail(ErrorKind::Validation, "moments.diag_scan_s must lie in (0, 1/(4n)) with n = " +
                                      std::to_string(n_diam));
    for (int i = 0; i < 9; ++i) {
      const int site = std::min(box_sites - 1, i * box_sites / 8);
      if (diag_sites.empty() || diag_sites.back() != site) diag_sites.push_back(site);
    }
    result.diag_scan_s = cfg.moments.diag_scan_s;
  }

  std::vector<int> solve_sites;
  for (const auto& [x, y] : cfg.moments.pairs) solve_sites.push_back(y);
  solve_sites.insert(solve_sites.end(), diag_sites.begin(), diag_sites.end());
  std::sort(solve_sites.begin(), solve_sites.end());
  solve_sites.erase(std::unique(solve_sites.begin(), solve_sites.end()), solve_sites.end());
  std::map<int, std::size_t> solve_slot;
  for (std::size_t i = 0; i < solve_sites.size(); ++i) solve_slot[solve_sites[i]] = i;

  const std::size_t n_z = cfg.moments.zs.size();
  const std::size_t n_pairs = cfg.moments.pairs.size();
  std::vector<std::vector<double>> pair_vals(n_z * n_pairs);
  for (auto& v : pair_vals) v.assign(static_cast<std::size_t>(n_mc), kNaN);
  std::vector<std::vector<double>> diag_vals(n_z * diag_sites.size());
  for (auto& v : diag_vals) v.assign(static_cast<std::size_t>(n_mc), kNaN);

  run_samples(n_mc, cfg.workers, [&](long long i) {
    const DisorderConfiguration omega =
        draw_disorder(region, rho, cfg.seed, static_cast<std::uint64_t>(i));
    const Hamiltonian h = assemble_hamiltonian(region, assemble_potential(u, omega, region));
    std::vector<std::vector<std::complex<double>>> columns(solve_sites.size());
    for (std::size_t zi = 0; zi < n_z; ++zi) {
      for (std::size_t c = 0; c < solve_sites.size(); ++c)
        columns[c] = green_column(h, cfg.moments.zs[zi], solve_sites[c]);
      for (std::size_t pi = 0; pi < n_pairs; ++pi) {
        const auto [x, y] = cfg.moments.pairs[pi];
        const std::complex<double> g = columns[solve_slot.at(y)][static_cast<std::size_t>(x)];
        pair_vals[zi * n_pairs + pi][static_cast<std::size_t>(i)] = std::pow(std::abs(g), s);
      }
      for (std::size_t di = 0; di < diag_sites.size(); ++di) {
        const std::complex<double> g =
            columns[solve_slot.at(diag_sites[di])][static_cast<std::size_t>(diag_sites[di])];
        diag_vals[zi * diag_sites.size() + di][static_cast<std::size_t>(i)] =
            std::pow(std::abs(g), cfg.moments.diag_scan_s);
      }
    }
  });

  result.table.param_names = {"re", "im", "x", "y"};
  result.all_pass = true;
  result.mom_guard_ok = true;
  for (std::size_t zi = 0; zi < n_z; ++zi) {
    for (std::size_t pi = 0; pi < n_pairs; ++pi) {
      MomentTable::Row row;
      row.params = {cfg.moments.zs[zi].real(), cfg.moments.zs[zi].imag(),
                    static_cast<double>(cfg.moments.pairs[pi].first),
                    static_cast<double>(cfg.moments.pairs[pi].second)};
      row.stats = reduce_stats(pair_vals[zi * n_pairs + pi]);
      row.bound = result.bound;
      row.pass = pass_flag(row.stats, row.bound);
      if (row.pass == 0) result.all_pass = false;
      if (row.stats.se > 0.0 && std::abs(row.stats.mom - row.stats.mean) >= 3.0 * row.stats.se)
        result.mom_guard_ok = false;
      result.table.rows.push_back(std::move(row));
    }
  }

  if (cfg.moments.diag_scan) {
    MomentTable scan;
    scan.param_names = {"re", "im", "x"};
    for (std::size_t zi = 0; zi < n_z; ++zi) {
      for (std::size_t di = 0; di < diag_sites.size(); ++di) {
        MomentTable::Row row;
        row.params = {cfg.moments.zs[zi].real(), cfg.moments.zs[zi].imag(),
                      static_cast<double>(diag_sites[di])};
        row.stats = reduce_stats(diag_vals[zi * diag_sites.size() + di]);
        scan.rows.push_back(std::move(row));
      }
    }
    result.diag_scan = std::move(scan);
  }
  return result;
}

// ---------------------------------------------------------------------------
// 1D exponential decay (fixed density, plus an onset scan over uniform widths)
// ---------------------------------------------------------------------------

struct DecayResult {
  MomentTable table;  // params bucket, dist
  double c_u_rho = kNaN;
  double m_theory = kNaN;
  bool m_positive = false;
  double m_fit = kNaN;
  double c_fit = kNaN;
  int fit_lo = 0;
  int fit_hi = 0;        // inclusive bucket range used by the fit
  bool floor_truncated = false;
  std::optional<bool> rate_pass;  // set iff m_theory > 0
  std::string note;
  double density_width = kNaN;  // scan runs record the uniform width
};

namespace detail {

inline DecayResult run_decay_density(const ExperimentConfig& cfg, const Density& rho,
                                     std::uint64_t stream_base) {
  const SingleSitePotential u = cfg.potential.make();
  const double s = cfg.decay.s;
  const DecayConstants dc = decay_constants(u, rho, s);  // checks d=1 + condition (A)
  const int n = u.rank();
  const int len = cfg.decay.chain_length;
  if (len < 40 * n)
    fail(ErrorKind::HypothesisViolation,
         "decay chain_length must be >= 40 n to stand in for the infinite lattice");

  DecayResult result;
  result.c_u_rho = dc.c_u_rho;
  result.m_theory = dc.decay_rate_m;
  result.m_positive = dc.positive_rate;

  // anchors and probes stay a quarter-length away from the chain ends
  const int margin_lo = len / 4;
  const int margin_hi = 3 * len / 4;
  int max_bucket = cfg.decay.max_bucket;
  for (int anchor : cfg.decay.anchors) {
    if (anchor < margin_lo || anchor > margin_hi)
      fail(ErrorKind::Validation,
           "decay anchor " + std::to_string(anchor) + " violates the quarter-length margin [" +
               std::to_string(margin_lo) + "," + std::to_string(margin_hi) + "]");
    max_bucket = std::min(max_bucket, (margin_hi - anchor) / n);
  }
  if (max_bucket < cfg.decay.max_bucket) {
    result.note = "max bucket clamped to " + std::to_string(max_bucket) +
                  " by the boundary margin";
    result.floor_truncated = false;
  }
  if (max_bucket < 2) fail(ErrorKind::Validation, "decay geometry leaves fewer than 2 buckets");

  const long long n_mc = cfg.samples;
  const BoxRegion region = support_dilate(BoxRegion::box(len - 1, 1), u);
  std::vector<std::vector<double>> values(static_cast<std::size_t>(max_bucket));
  for (auto& v : values) v.assign(static_cast<std::size_t>(n_mc), kNaN);

  run_samples(n_mc, cfg.workers, [&](long long i) {
    const DisorderConfiguration omega =
        draw_disorder(region, rho, cfg.seed, stream_base + static_cast<std::uint64_t>(i));
    const Hamiltonian h = assemble_hamiltonian(region, assemble_potential(u, omega, region));
    std::vector<double> acc(static_cast<std::size_t>(max_bucket), 0.0);
    for (int anchor : cfg.decay.anchors) {
      const auto column = green_column(h, cfg.decay.z, anchor);
      for (int j = 1; j <= max_bucket; ++j) {
        const double g = std::abs(column[static_cast<std::size_t>(anchor + j * n)]);
        acc[static_cast<std::size_t>(j - 1)] += std::pow(g, s / n);
      }
    }
    for (int j = 1; j <= max_bucket; ++j)
      values[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(i)] =
          acc[static_cast<std::size_t>(j - 1)] / static_cast<double>(cfg.decay.anchors.size());
  });

  result.table.param_names = {"bucket", "dist"};
  for (int j = 1; j <= max_bucket; ++j) {
    MomentTable::Row row;
    row.params = {static_cast<double>(j), static_cast<double>(j * n)};
    row.stats = reduce_stats(values[static_cast<std::size_t>(j - 1)]);
    result.table.rows.push_back(std::move(row));
  }

  // log-linear fit over the prefix of buckets that carry signal
  const double m1 = result.table.rows.front().stats.mean;
  const double floor = std::max(1e-10 * std::max(m1, 0.0), 1e-290);
  std::vector<double> xs, ys;
  for (const auto& row : result.table.rows) {
    const double mean = row.stats.mean;
    const bool noisy = !(mean > 0.0) || row.stats.se / mean >= 0.2;
    const bool floored = mean < floor;
    if (noisy || floored) {
      if (floored && !noisy) result.floor_truncated = true;
      break;
    }
    xs.push_back(row.params[0]);
    ys.push_back(std::log(mean));
  }
  if (xs.size() >= 2) {
    const LinFit lf = linear_fit(xs, ys);
    result.m_fit = -lf.slope;
    result.c_fit = std::exp(lf.intercept);
    result.fit_lo = static_cast<int>(xs.front());
    result.fit_hi = static_cast<int>(xs.back());
  } else {
    result.note += (result.note.empty() ? "" : "; ");
    result.note += "fewer than 2 buckets above the noise floor; no rate fit";
  }
  if (result.m_positive && !std::isnan(result.m_fit))
    result.rate_pass = result.m_fit >= result.m_theory - kDecayFitTolerance;
  else if (result.m_positive)
    result.rate_pass = false;
  return result;
}

}  // namespace detail

inline DecayResult run_decay(const ExperimentConfig& cfg) {
  const Density rho = cfg.density.make();
  DecayResult result = detail::run_decay_density(cfg, rho, 0);
  return result;
}

// Rate-onset scan: uniform[0,w] densities of decreasing sup norm.
inline std::vector<DecayResult> run_decay_scan(const ExperimentConfig& cfg) {
  if (cfg.decay.support_widths.empty())
    fail(ErrorKind::Validation, "decay scan needs experiment.decay.support_widths");
  std::vector<DecayResult> results;
  for (std::size_t wi = 0; wi < cfg.decay.support_widths.size(); ++wi) {
    const double width = cfg.decay.support_widths[wi];
    const Density rho = Density::uniform(0.0, width);
    DecayResult r = detail::run_decay_density(
        cfg, rho, static_cast<std::uint64_t>(wi) * static_cast<std::uint64_t>(cfg.samples));
    r.density_width = width;
    results.push_back(std::move(r));
  }
  return results;
}

// ---------------------------------------------------------------------------
// Counterexample (conditional regularity failure)
// ---------------------------------------------------------------------------

struct CounterexampleResult {
  struct Cell {
    double a = 0.0;
    double eps = 0.0;
    long long raw = 0;
    long long accepted = 0;    // B occurrences
    long long violations = 0;  // B and not A (deterministically impossible)
    long long marginal_hits = 0;  // unconditioned A occurrences
    double conditional_estimate = kNaN;
    double acceptance_rate = 0.0;
    double marginal_estimate = kNaN;
    bool thin = false;  // acceptance below the reporting threshold
  };
  std::vector<Cell> cells;
  bool all_zero_violations = true;

  std::string to_csv() const {
    std::string out = csv_row({"a", "eps", "raw", "accepted", "violations", "conditional",
                               "marginal", "acceptance_rate", "thin"});
    for (const Cell& c : cells) {
      out += csv_row({format_double(c.a), format_double(c.eps), std::to_string(c.raw),
                      std::to_string(c.accepted), std::to_string(c.violations),
                      std::isnan(c.conditional_estimate) ? "na"
                                                         : format_double(c.conditional_estimate),
                      format_double(c.marginal_estimate), format_double(c.acceptance_rate),
                      c.thin ? "1" : "0"});
    }
    return out;
  }
};

// V(x) = omega_x + a omega_{x+1} for u(0)=1, u(-1)=a.  Events:
// B: V(-1), V(1) in [0,eps];  A: V(0) in [0, eps(a+1/a)].
inline CounterexampleResult run_counterexample(const ExperimentConfig& cfg) {
  const Density rho = cfg.density.make();
  if (rho.support_lo() != 0.0)
    fail(ErrorKind::HypothesisViolation,
         "the example requires inf supp rho = 0 (density support must start at 0)");
  CounterexampleResult result;
  const long long raw = cfg.counterexample.raw_samples;
  std::size_t cell_index = 0;
  for (double a : cfg.counterexample.a_values) {
    for (double eps : cfg.counterexample.epsilons) {
      const int w = effective_workers(cfg.workers, raw);
      std::vector<long long> acc_accepted(static_cast<std::size_t>(w), 0);
      std::vector<long long> acc_violations(static_cast<std::size_t>(w), 0);
      std::vector<long long> acc_marginal(static_cast<std::size_t>(w), 0);
      const std::uint64_t stream_base =
          static_cast<std::uint64_t>(cell_index) * static_cast<std::uint64_t>(raw);
      std::mutex error_mutex;
      std::exception_ptr first_error;
      std::vector<std::thread> pool;
      for (int t = 0; t < w; ++t) {
        const long long lo = raw * t / w;
        const long long hi = raw * (t + 1) / w;
        pool.emplace_back([&, t, lo, hi] {
          try {
            long long accepted = 0, violations = 0, marginal = 0;
            for (long long i = lo; i < hi; ++i) {
              RngStream stream(cfg.seed, stream_base + static_cast<std::uint64_t>(i));
              // draw order fixed: omega_{-1}, omega_0, omega_1, omega_2
              const double om_m1 = rho.sample(stream);
              const double om_0 = rho.sample(stream);
              const double om_1 = rho.sample(stream);
              const double om_2 = rho.sample(stream);
              const double v_m1 = om_m1 + a * om_0;
              const double v_p1 = om_1 + a * om_2;
              const double v_0 = om_0 + a * om_1;
              const bool in_b = v_m1 >= 0.0 && v_m1 <= eps && v_p1 >= 0.0 && v_p1 <= eps;
              const bool in_a = v_0 >= 0.0 && v_0 <= eps * (a + 1.0 / a);
              if (in_a) ++marginal;
              if (in_b) {
                ++accepted;
                // deterministic inclusion check, spelled out coupling-wise
                const bool premise = (om_m1 + a * om_0 <= eps) && (om_1 + a * om_2 <= eps);
                const bool conclusion = om_0 + a * om_1 <= eps * (a + 1.0 / a);
                if (!in_a || (premise && !conclusion)) ++violations;
              }
            }
            acc_accepted[static_cast<std::size_t>(t)] = accepted;
            acc_violations[static_cast<std::size_t>(t)] = violations;
            acc_marginal[static_cast<std::size_t>(t)] = marginal;
          } catch (...) {
            std::lock_guard<std::mutex> hold(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
        });
      }
      for (std::thread& th : pool) th.join();
      if (first_error) std::rethrow_exception(first_error);

      CounterexampleResult::Cell cell;
      cell.a = a;
      cell.eps = eps;
      cell.raw = raw;
      for (int t = 0; t < w; ++t) {
        cell.accepted += acc_accepted[static_cast<std::size_t>(t)];
        cell.violations += acc_violations[static_cast<std::size_t>(t)];
        cell.marginal_hits += acc_marginal[static_cast<std::size_t>(t)];
      }
      cell.acceptance_rate = static_cast<double>(cell.accepted) / static_cast<double>(raw);
      cell.marginal_estimate = static_cast<double>(cell.marginal_hits) / static_cast<double>(raw);
      if (cell.accepted > 0)
        cell.conditional_estimate =
            static_cast<double>(cell.accepted - cell.violations) /
            static_cast<double>(cell.accepted);
      cell.thin = cell.acceptance_rate < 1e-6;
      if (cell.violations != 0) result.all_zero_violations = false;
      result.cells.push_back(cell);
      ++cell_index;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Krein probe: alpha(t) = t - 1/G(z;x,x) must not depend on t
// ---------------------------------------------------------------------------

struct KreinResult {
  struct Instance {
    long long index = 0;
    int x = 0;
    std::complex<double> alpha;
    double max_rel_dev = 0.0;
    double oos_rel_err = 0.0;
  };
  std::vector<Instance> instances;
  double worst_dev = 0.0;
  double worst_oos = 0.0;

  std::string to_csv() const {
    std::string out = csv_row({"instance", "x", "alpha_re", "alpha_im", "max_rel_dev",
                               "oos_rel_err"});
    for (const Instance& inst : instances) {
      out += csv_row({std::to_string(inst.index), std::to_string(inst.x),
                      format_double(inst.alpha.real()), format_double(inst.alpha.imag()),
                      format_double(inst.max_rel_dev), format_double(inst.oos_rel_err)});
    }
    return out;
  }
};

inline KreinResult run_krein(const ExperimentConfig& cfg) {
  const SingleSitePotential u = cfg.potential.make();
  const Density rho = cfg.density.make();
  const int d = u.dim();
  int side = cfg.krein.box_size - 1;
  if (d > 1) {
    side = 1;
    while (std::pow(static_cast<double>(side + 2), d) <= cfg.krein.box_size) ++side;
  }
  side = std::max(side, 0);
  const BoxRegion region = support_dilate(BoxRegion::box(side, d), u);
  const int volume = region.size();
  const std::complex<double> z = cfg.krein.z;

  const auto [vlo, vhi] = potential_range(u, rho);
  const double t_center = 0.5 * (vlo + vhi);
  const double t_range = 2.0 + (vhi - vlo);

  KreinResult result;
  const long long count = cfg.krein.instances;
  std::vector<KreinResult::Instance> slots(static_cast<std::size_t>(count));

  run_samples(count, cfg.workers, [&](long long i) {
    const DisorderConfiguration omega =
        draw_disorder(region, rho, cfg.seed, static_cast<std::uint64_t>(i));
    std::vector<double> v = assemble_potential(u, omega, region);
    RngStream aux(cfg.seed, 0x4B52454Eull + static_cast<std::uint64_t>(i));
    const int x = std::min(volume - 1, static_cast<int>(aux.uniform01() * volume));
    // four pairwise separated sweep values for the on-site potential
    std::vector<double> sweeps;
    while (sweeps.size() < 4) {
      const double t = t_center + (2.0 * aux.uniform01() - 1.0) * t_range;
      bool distinct = true;
      for (double prev : sweeps)
        if (std::abs(prev - t) < 1e-3 * t_range) distinct = false;
      if (distinct) sweeps.push_back(t);
    }
    std::vector<std::complex<double>> alphas;
    std::complex<double> g4;
    for (std::size_t k = 0; k < sweeps.size(); ++k) {
      v[static_cast<std::size_t>(x)] = sweeps[k];
      const Hamiltonian h = assemble_hamiltonian(region, v);
      const std::complex<double> g = green_entry(h, z, x, x);
      if (k < 3)
        alphas.push_back(sweeps[k] - 1.0 / g);
      else
        g4 = g;
    }
    KreinResult::Instance inst;
    inst.index = i;
    inst.x = x;
    inst.alpha = (alphas[0] + alphas[1] + alphas[2]) / 3.0;
    const double scale = std::max(std::abs(inst.alpha), 1e-300);
    for (std::size_t p = 0; p < alphas.size(); ++p)
      for (std::size_t q = p + 1; q < alphas.size(); ++q)
        inst.max_rel_dev = std::max(inst.max_rel_dev, std::abs(alphas[p] - alphas[q]) / scale);
    const double predicted = 1.0 / std::abs(sweeps[3] - inst.alpha);
    inst.oos_rel_err = std::abs(predicted - std::abs(g4)) / std::abs(g4);
    slots[static_cast<std::size_t>(i)] = inst;
  });

  result.instances = std::move(slots);
  for (const auto& inst : result.instances) {
    result.worst_dev = std::max(result.worst_dev, inst.max_rel_dev);
    result.worst_oos = std::max(result.worst_oos, inst.oos_rel_err);
  }
  return result;
}

}  // namespace dalloy
