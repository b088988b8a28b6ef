// Acceptance gate: one line per criterion, exit 0 only if all ten hold.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dalloy/config.hpp"
#include "dalloy/constants.hpp"
#include "dalloy/experiments.hpp"
#include "dalloy/selftest.hpp"

namespace {

using dalloy::ExperimentConfig;
using nlohmann::json;

constexpr std::uint64_t kSeed = 20260822;

struct Criterion {
  int number;
  std::string name;
  bool pass;
  std::string detail;
  double seconds;
};

template <typename Body>
Criterion run_criterion(int number, const std::string& name, Body&& body) {
  Criterion c;
  c.number = number;
  c.name = name;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.pass = false;
    c.detail = std::string("exception: ") + e.what();
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return c;
}

ExperimentConfig defaults() {
  return dalloy::parse_config_json(json::object());
}

Criterion criterion_oracles() {
  return run_criterion(1, "oracle-equivalence", [](Criterion& c) {
    const dalloy::CheckResult counts = dalloy::check_count_oracle(kSeed);
    const dalloy::CheckResult green = dalloy::check_green_oracle(kSeed);
    c.pass = counts.pass && green.pass;
    c.detail = counts.detail + "; " + green.detail;
  });
}

Criterion criterion_toeplitz() {
  return run_criterion(2, "toeplitz-constant", [](Criterion& c) {
    const dalloy::CheckResult check = dalloy::check_toeplitz();
    c.pass = check.pass;
    c.detail = check.detail;
  });
}

Criterion criterion_wegner() {
  return run_criterion(3, "wegner-thm2-bound", [](Criterion& c) {
    ExperimentConfig cfg = defaults();
    cfg.wegner.box_sizes = {5, 10, 20};
    cfg.wegner.epsilons = {1e-3, 1e-2, 1e-1};
    const dalloy::WegnerResult res = dalloy::run_wegner(cfg);
    long long cells = 0, pass = 0;
    double worst_ratio = 0.0;
    for (const auto& row : res.table.rows) {
      ++cells;
      pass += row.pass == 1;
      if (row.bound > 0.0)
        worst_ratio = std::max(worst_ratio, (row.stats.mean - 2.0 * row.stats.se) / row.bound);
    }
    c.pass = res.mode == "thm2" && !res.failure && res.failed == 0 && pass == cells;
    c.detail = std::to_string(pass) + "/" + std::to_string(cells) +
               " cells under the bound, worst margin ratio " +
               dalloy::format_double(worst_ratio);
  });
}

Criterion criterion_shapefit() {
  return run_criterion(4, "thm1-eps-linearity", [](Criterion& c) {
    ExperimentConfig cfg = defaults();
    cfg.potential.entries = {{dalloy::Site{0}, 1.0}, {dalloy::Site{1}, -1.0}};
    cfg.wegner.box_sizes = {12, 16};
    cfg.wegner.energies = {-1.6, -1.2, -0.8, -0.4, 0.0, 0.4, 0.8, 1.2, 1.6};
    // One decade, kept low: the count mean is 2 eps rho(E) + O(eps^3), so the
    // cubic contamination of the linear fit scales as (top eps)^2.  Boxes are
    // large enough that the finite-volume counting function is locally smooth.
    cfg.wegner.epsilons = {0.005, 0.01, 0.015, 0.025, 0.035, 0.0425, 0.05};
    cfg.samples = 40000;
    const dalloy::WegnerResult res = dalloy::run_wegner(cfg);
    double worst_r2 = 1.0;
    for (const auto& fit : res.eps_fits) worst_r2 = std::min(worst_r2, fit.r2);
    c.pass = res.mode == "shapefit" && !res.eps_fits.empty() && worst_r2 > 0.99;
    c.detail = std::to_string(res.eps_fits.size()) + " (L,E) regressions, worst R^2 " +
               dalloy::format_double(worst_r2);
    if (res.cu_fit)
      c.detail += ", fitted c_u " + dalloy::format_double(res.cu_fit->c_u_hat) + " +- " +
                  dalloy::format_double(2.0 * res.cu_fit->se);
  });
}

Criterion criterion_moments() {
  return run_criterion(5, "frac-moment-bound", [](Criterion& c) {
    const json root = {{"density", {{"kind", "triangular"}, {"a", 0.0}, {"b", 1.0}}}};
    const ExperimentConfig cfg = dalloy::parse_config_json(root);
    const dalloy::MomentBoundResult res = dalloy::run_moment_bound(cfg);
    double worst = 0.0;
    for (const auto& row : res.table.rows)
      worst = std::max(worst, (row.stats.mean - 2.0 * row.stats.se) / row.bound);
    c.pass = std::isfinite(res.bound) && res.all_pass && res.mom_guard_ok && res.c_u == 1.0;
    c.detail = std::to_string(res.table.rows.size()) + " cells vs bound " +
               dalloy::format_double(res.bound) + ", worst ratio " +
               dalloy::format_double(worst) + ", heavy-tail guard " +
               (res.mom_guard_ok ? "ok" : "tripped");
  });
}

Criterion criterion_decay() {
  return run_criterion(6, "decay-rate", [](Criterion& c) {
    const json root = {{"density", {{"kind", "uniform"}, {"a", 0.0}, {"b", 100.0}}}};
    const ExperimentConfig cfg = dalloy::parse_config_json(root);
    const dalloy::DecayResult res = dalloy::run_decay(cfg);
    const bool derived_ok = std::abs(res.m_theory - 0.916) < 1e-3;
    c.pass = res.m_positive && derived_ok && res.rate_pass.has_value() && *res.rate_pass;
    c.detail = "m_theory " + dalloy::format_double(res.m_theory) + ", m_fit " +
               dalloy::format_double(res.m_fit) + " over buckets [" +
               std::to_string(res.fit_lo) + "," + std::to_string(res.fit_hi) +
               "], tolerance " + dalloy::format_double(dalloy::kDecayFitTolerance);
  });
}

Criterion criterion_counterexample() {
  return run_criterion(7, "counterexample-inclusion", [](Criterion& c) {
    const ExperimentConfig cfg = defaults();
    const dalloy::CounterexampleResult res = dalloy::run_counterexample(cfg);
    long long violations = 0, thin = 0;
    bool raw_ok = true;
    for (const auto& cell : res.cells) {
      violations += cell.violations;
      thin += cell.thin ? 1 : 0;
      raw_ok = raw_ok && cell.raw >= 1000000;
    }
    c.pass = res.all_zero_violations && raw_ok && res.cells.size() == 6;
    c.detail = std::to_string(res.cells.size()) + " cells, " + std::to_string(violations) +
               " violations (exact), " + std::to_string(thin) + " thin cell(s)";
  });
}

Criterion criterion_krein() {
  return run_criterion(8, "krein-identity", [](Criterion& c) {
    const dalloy::CheckResult check = dalloy::check_krein(kSeed);
    c.pass = check.pass;
    c.detail = check.detail;
  });
}

Criterion criterion_graf() {
  return run_criterion(9, "graf-bounds", [](Criterion& c) {
    const dalloy::CheckResult check = dalloy::check_graf();
    c.pass = check.pass;
    c.detail = check.detail;
  });
}

Criterion criterion_reproducibility() {
  return run_criterion(10, "reproducibility", [](Criterion& c) {
    ExperimentConfig wcfg = defaults();
    wcfg.samples = 500;
    wcfg.wegner.box_sizes = {5};
    wcfg.wegner.energies = {0.0, 0.5, 1.0};
    wcfg.wegner.epsilons = {1e-2, 1e-1};
    wcfg.workers = 1;
    const std::string wegner_serial = dalloy::run_wegner(wcfg).table.to_csv();
    wcfg.workers = 4;
    const std::string wegner_pool = dalloy::run_wegner(wcfg).table.to_csv();

    ExperimentConfig mcfg = defaults();
    mcfg.samples = 300;
    mcfg.moments.box_size = 12;
    mcfg.moments.zs = {{0.5, 0.1}};
    mcfg.moments.pairs = {{3, 8}, {8, 3}, {6, 6}};
    mcfg.workers = 1;
    const std::string moments_serial = dalloy::run_moment_bound(mcfg).table.to_csv();
    mcfg.workers = 4;
    const std::string moments_pool = dalloy::run_moment_bound(mcfg).table.to_csv();

    c.pass = wegner_serial == wegner_pool && moments_serial == moments_pool;
    c.detail = std::string("wegner csv ") +
               (wegner_serial == wegner_pool ? "identical" : "DIFFERS") + ", moments csv " +
               (moments_serial == moments_pool ? "identical" : "DIFFERS") +
               " across 1 vs 4 workers";
  });
}

}  // namespace

int main() {
  const std::vector<Criterion> results = {
      criterion_oracles(),       criterion_toeplitz(),  criterion_wegner(),
      criterion_shapefit(),      criterion_moments(),   criterion_decay(),
      criterion_counterexample(), criterion_krein(),    criterion_graf(),
      criterion_reproducibility()};

  bool all = true;
  for (const Criterion& c : results) {
    all = all && c.pass;
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.number << ": " << c.name << " — "
              << c.detail << " (" << dalloy::format_double(c.seconds) << " s)\n";
  }
  std::cout << (all ? "acceptance: all criteria hold\n" : "acceptance: FAILURES present\n");
  return all ? 0 : 1;
}
