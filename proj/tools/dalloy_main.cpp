// Command-line front end: constants report, Monte Carlo experiments, self tests.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dalloy/config.hpp"
#include "dalloy/constants.hpp"
#include "dalloy/csvio.hpp"
#include "dalloy/errors.hpp"
#include "dalloy/experiments.hpp"
#include "dalloy/selftest.hpp"

namespace {

using nlohmann::json;

struct CommandContext {
  dalloy::ExperimentConfig cfg;
  std::filesystem::path out_dir;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::vector<std::string> outputs;

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  void write_file(const std::string& name, const std::string& text) {
    const std::filesystem::path path = out_dir / name;
    std::ofstream out(path);
    if (!out) dalloy::fail(dalloy::ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) dalloy::fail(dalloy::ErrorKind::Io, "write to '" + path.string() + "' failed");
    outputs.push_back(path.string());
  }

  void write_manifest(const std::string& command, json summary, const std::string& status,
                      const std::string& failure = "") {
    json m;
    m["version"] = dalloy::kVersion;
    m["command"] = command;
    m["seed"] = cfg.seed;
    m["status"] = status;
    if (!failure.empty()) m["failure"] = failure;
    m["duration_seconds"] = elapsed();
    json flags = json::object();
    for (const auto& [key, value] : dalloy::interpretation_flags()) flags[key] = value;
    m["interpretation"] = flags;
    m["summary"] = std::move(summary);
    m["outputs"] = outputs;
    m["config"] = dalloy::config_to_json(cfg);
    write_file(command + "_manifest.json", m.dump(2) + "\n");
    std::cout << "wrote " << (out_dir / (command + "_manifest.json")).string() << "\n";
  }
};

json optional_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

json report_json(const dalloy::PotentialReport& rep) {
  json j;
  j["rank"] = rep.rank;
  j["ubar"] = rep.ubar;
  j["tail_radius_m"] = rep.tail_radius_m ? json(*rep.tail_radius_m) : json(nullptr);
  j["diameter_n"] = rep.diameter_n;
  j["condition_a"] = rep.condition_a;
  j["symbol_min_abs"] = optional_json(rep.symbol_min_abs);
  j["c_u"] = optional_json(rep.c_u);
  return j;
}

json bounds_json(const dalloy::BoundSet& bs) {
  json j;
  j["L"] = bs.L;
  j["eps"] = bs.eps;
  j["s"] = bs.s;
  j["density_total_variation"] = bs.norms.total_variation;
  j["density_sup_norm"] = bs.norms.sup_norm;
  j["density_deriv_l1"] = optional_json(bs.norms.deriv_l1);
  j["wegner_thm2"] = optional_json(bs.wegner_thm2);
  j["frac_moment_thm3"] = optional_json(bs.frac_moment_thm3);
  j["c_u_rho"] = optional_json(bs.c_u_rho);
  j["decay_rate_m"] = optional_json(bs.decay_rate_m);
  json absent = json::object();
  for (const auto& [name, reason] : bs.absent) absent[name] = reason;
  j["absent"] = absent;
  return j;
}

int cmd_constants(CommandContext& ctx) {
  const dalloy::SingleSitePotential u = ctx.cfg.potential.make();
  const dalloy::Density rho = ctx.cfg.density.make();
  const dalloy::PotentialReport rep = dalloy::potential_report(u);
  const dalloy::BoundSet bs = dalloy::bound_set(u, rho, ctx.cfg.constants.L,
                                                ctx.cfg.constants.eps, ctx.cfg.constants.s);
  json summary;
  summary["potential"] = report_json(rep);
  summary["bounds"] = bounds_json(bs);

  std::cout << "potential: rank " << rep.rank << ", ubar " << dalloy::format_double(rep.ubar)
            << ", n " << rep.diameter_n << ", condition (A) "
            << (rep.condition_a ? "yes" : "no") << "\n";
  if (rep.c_u) std::cout << "C_u = " << dalloy::format_double(*rep.c_u) << "\n";
  if (bs.wegner_thm2)
    std::cout << "wegner bound (L=" << bs.L << ", eps=" << dalloy::format_double(bs.eps)
              << "): " << dalloy::format_double(*bs.wegner_thm2) << "\n";
  if (bs.frac_moment_thm3)
    std::cout << "fractional-moment bound (s=" << dalloy::format_double(bs.s)
              << "): " << dalloy::format_double(*bs.frac_moment_thm3) << "\n";
  if (bs.c_u_rho)
    std::cout << "C_{u,rho} = " << dalloy::format_double(*bs.c_u_rho)
              << ", decay rate m = " << dalloy::format_double(*bs.decay_rate_m) << "\n";
  for (const auto& [name, reason] : bs.absent)
    std::cout << "absent " << name << ": " << reason << "\n";

  ctx.write_manifest("constants", std::move(summary), "ok");
  return 0;
}

int cmd_wegner(CommandContext& ctx) {
  const dalloy::WegnerResult res = dalloy::run_wegner(ctx.cfg);
  ctx.write_file("wegner_table.csv", res.table.to_csv());

  std::string fits = dalloy::csv_row({"L", "E", "slope", "intercept", "r2"});
  for (const auto& fit : res.eps_fits)
    fits += dalloy::csv_row({std::to_string(fit.box_l), dalloy::format_double(fit.energy),
                             dalloy::format_double(fit.slope),
                             dalloy::format_double(fit.intercept),
                             dalloy::format_double(fit.r2)});
  ctx.write_file("wegner_eps_fits.csv", fits);

  long long cells_pass = 0, cells_bound = 0;
  for (const auto& row : res.table.rows) {
    if (row.pass >= 0) {
      ++cells_bound;
      cells_pass += row.pass;
    }
  }
  json summary;
  summary["mode"] = res.mode;
  summary["rows"] = res.table.rows.size();
  summary["cells_with_bound"] = cells_bound;
  summary["cells_pass"] = cells_pass;
  summary["retried_samples"] = res.retried;
  summary["failed_samples"] = res.failed;
  if (res.cu_fit) {
    json fit;
    fit["c_u_hat"] = res.cu_fit->c_u_hat;
    fit["se"] = res.cu_fit->se;
    fit["ci_lo"] = res.cu_fit->ci_lo;
    fit["ci_hi"] = res.cu_fit->ci_hi;
    fit["r2"] = std::isnan(res.cu_fit->r2) ? json(nullptr) : json(res.cu_fit->r2);
    fit["points"] = res.cu_fit->points;
    summary["shape_fit"] = fit;
  }

  std::cout << "wegner mode " << res.mode << ": " << res.table.rows.size() << " cells";
  if (cells_bound > 0) std::cout << ", bound holds in " << cells_pass << "/" << cells_bound;
  std::cout << " (retried " << res.retried << ", failed " << res.failed << ")\n";
  if (res.cu_fit)
    std::cout << "shape fit c_u = " << dalloy::format_double(res.cu_fit->c_u_hat) << " +- "
              << dalloy::format_double(2.0 * res.cu_fit->se) << "\n";

  if (res.failure) {
    ctx.write_manifest("wegner", std::move(summary), "failed", *res.failure);
    std::cerr << "wegner: " << *res.failure << "\n";
    return dalloy::exit_code(dalloy::ErrorKind::NumericalDegeneracy);
  }
  const bool ok = cells_pass == cells_bound;
  ctx.write_manifest("wegner", std::move(summary), ok ? "ok" : "bound-violated");
  return ok ? 0 : 1;
}

int cmd_moments(CommandContext& ctx) {
  const dalloy::MomentBoundResult res = dalloy::run_moment_bound(ctx.cfg);
  ctx.write_file("moments_table.csv", res.table.to_csv());
  if (res.diag_scan) ctx.write_file("moments_diag_scan.csv", res.diag_scan->to_csv());

  json summary;
  summary["bound"] = res.bound;
  summary["c_u"] = res.c_u;
  summary["rho_deriv_l1"] = res.rho_deriv_l1;
  if (!res.bound_absent_reason.empty()) summary["bound_absent"] = res.bound_absent_reason;
  summary["all_pass"] = res.all_pass;
  summary["mom_guard_ok"] = res.mom_guard_ok;
  summary["rows"] = res.table.rows.size();
  if (res.diag_scan) summary["diag_scan_s"] = res.diag_scan_s;

  if (std::isfinite(res.bound))
    std::cout << "fractional-moment bound " << dalloy::format_double(res.bound) << " (C_u "
              << dalloy::format_double(res.c_u) << "), " << res.table.rows.size() << " cells, "
              << (res.all_pass ? "all pass" : "VIOLATIONS") << ", heavy-tail guard "
              << (res.mom_guard_ok ? "ok" : "TRIPPED") << "\n";
  else
    std::cout << "fractional moments estimated, " << res.table.rows.size()
              << " cells, no theoretical bound (" << res.bound_absent_reason << "), heavy-tail guard "
              << (res.mom_guard_ok ? "ok" : "TRIPPED") << "\n";

  const bool ok = res.all_pass && res.mom_guard_ok;
  ctx.write_manifest("moments", std::move(summary), ok ? "ok" : "bound-violated");
  return ok ? 0 : 1;
}

json decay_summary_json(const dalloy::DecayResult& res) {
  json j;
  j["c_u_rho"] = res.c_u_rho;
  j["m_theory"] = res.m_theory;
  j["m_positive"] = res.m_positive;
  j["m_fit"] = std::isnan(res.m_fit) ? json(nullptr) : json(res.m_fit);
  j["c_fit"] = std::isnan(res.c_fit) ? json(nullptr) : json(res.c_fit);
  j["fit_buckets"] = {res.fit_lo, res.fit_hi};
  j["floor_truncated"] = res.floor_truncated;
  j["rate_pass"] = res.rate_pass ? json(*res.rate_pass) : json(nullptr);
  if (!res.note.empty()) j["note"] = res.note;
  if (!std::isnan(res.density_width)) j["density_width"] = res.density_width;
  return j;
}

int cmd_decay(CommandContext& ctx) {
  if (!ctx.cfg.decay.support_widths.empty()) {
    const std::vector<dalloy::DecayResult> scan = dalloy::run_decay_scan(ctx.cfg);
    std::string table;
    bool any_fail = false;
    json rows = json::array();
    std::string buckets = dalloy::csv_row({"width", "bucket", "dist", "mean", "se", "n"});
    table = dalloy::csv_row(
        {"width", "sup_norm", "c_u_rho", "m_theory", "m_positive", "m_fit", "rate_pass"});
    for (const auto& res : scan) {
      table += dalloy::csv_row(
          {dalloy::format_double(res.density_width),
           dalloy::format_double(1.0 / res.density_width), dalloy::format_double(res.c_u_rho),
           dalloy::format_double(res.m_theory), res.m_positive ? "1" : "0",
           dalloy::format_double(res.m_fit),
           res.rate_pass ? (*res.rate_pass ? "1" : "0") : "na"});
      for (const auto& row : res.table.rows)
        buckets += dalloy::csv_row({dalloy::format_double(res.density_width),
                                    dalloy::format_double(row.params[0]),
                                    dalloy::format_double(row.params[1]),
                                    dalloy::format_double(row.stats.mean),
                                    dalloy::format_double(row.stats.se),
                                    std::to_string(row.stats.n)});
      rows.push_back(decay_summary_json(res));
      if (res.rate_pass && !*res.rate_pass) any_fail = true;
      std::cout << "width " << dalloy::format_double(res.density_width) << ": m_theory "
                << dalloy::format_double(res.m_theory) << (res.m_positive ? " (positive)" : "")
                << ", m_fit " << dalloy::format_double(res.m_fit) << "\n";
    }
    ctx.write_file("decay_scan.csv", table);
    ctx.write_file("decay_scan_buckets.csv", buckets);
    json summary;
    summary["widths"] = rows;
    ctx.write_manifest("decay", std::move(summary), any_fail ? "rate-violated" : "ok");
    return any_fail ? 1 : 0;
  }

  const dalloy::DecayResult res = dalloy::run_decay(ctx.cfg);
  ctx.write_file("decay_table.csv", res.table.to_csv());
  std::cout << "C_{u,rho} " << dalloy::format_double(res.c_u_rho) << ", m_theory "
            << dalloy::format_double(res.m_theory) << (res.m_positive ? " (positive)" : "")
            << ", m_fit " << dalloy::format_double(res.m_fit) << " over buckets ["
            << res.fit_lo << "," << res.fit_hi << "]\n";
  if (!res.note.empty()) std::cout << "note: " << res.note << "\n";
  const bool fail_rate = res.rate_pass && !*res.rate_pass;
  ctx.write_manifest("decay", decay_summary_json(res), fail_rate ? "rate-violated" : "ok");
  return fail_rate ? 1 : 0;
}

int cmd_counterexample(CommandContext& ctx) {
  const dalloy::CounterexampleResult res = dalloy::run_counterexample(ctx.cfg);
  ctx.write_file("counterexample_table.csv", res.to_csv());
  long long thin = 0;
  for (const auto& cell : res.cells) thin += cell.thin ? 1 : 0;
  json summary;
  summary["cells"] = res.cells.size();
  summary["all_zero_violations"] = res.all_zero_violations;
  summary["thin_cells"] = thin;
  std::cout << res.cells.size() << " cells, "
            << (res.all_zero_violations ? "0 violations" : "VIOLATIONS FOUND") << ", " << thin
            << " thin cell(s)\n";
  ctx.write_manifest("counterexample", std::move(summary),
                     res.all_zero_violations ? "ok" : "inclusion-violated");
  return res.all_zero_violations ? 0 : 1;
}

int cmd_krein(CommandContext& ctx) {
  const dalloy::KreinResult res = dalloy::run_krein(ctx.cfg);
  ctx.write_file("krein_table.csv", res.to_csv());
  json summary;
  summary["instances"] = res.instances.size();
  summary["worst_dev"] = res.worst_dev;
  summary["worst_oos"] = res.worst_oos;
  const bool ok = res.worst_dev < dalloy::kKreinDevTolerance &&
                  res.worst_oos < dalloy::kKreinPredictTolerance;
  std::cout << res.instances.size() << " instances, worst sweep deviation "
            << dalloy::format_double(res.worst_dev) << ", worst out-of-sample error "
            << dalloy::format_double(res.worst_oos) << "\n";
  ctx.write_manifest("krein", std::move(summary), ok ? "ok" : "identity-violated");
  return ok ? 0 : 1;
}

int cmd_selftest(CommandContext& ctx) {
  const std::vector<dalloy::CheckResult> checks = dalloy::selftest_all(ctx.cfg.seed);
  bool all = true;
  json rows = json::array();
  for (const auto& check : checks) {
    all = all && check.pass;
    std::cout << (check.pass ? "[PASS] " : "[FAIL] ") << check.name << ": " << check.detail
              << " (" << dalloy::format_double(check.seconds) << " s)\n";
    json row;
    row["name"] = check.name;
    row["pass"] = check.pass;
    row["detail"] = check.detail;
    row["seconds"] = check.seconds;
    rows.push_back(row);
  }
  json summary;
  summary["checks"] = rows;
  summary["all_pass"] = all;
  ctx.write_manifest("selftest", std::move(summary), all ? "ok" : "failed");
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"alloy-type random operator experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
  std::optional<long long> samples_override;
  std::optional<int> workers_override;
  app.add_option("--config", config_path, "JSON experiment configuration");
  app.add_option("--out", out_dir, "output directory (default $DALLOY_OUT_DIR or .)");
  app.add_option("--seed", seed_override, "master seed override");
  app.add_option("--samples", samples_override, "Monte Carlo sample count override");
  app.add_option("--workers", workers_override, "worker thread count override (0 = hardware)");

  auto* sub_constants = app.add_subcommand("constants", "explicit constants and norms report");
  auto* sub_wegner = app.add_subcommand("wegner", "eigenvalue-count bound experiment");
  auto* sub_moments = app.add_subcommand("moments", "fractional-moment bound experiment");
  auto* sub_decay = app.add_subcommand("decay", "off-diagonal decay experiment");
  auto* sub_counterexample =
      app.add_subcommand("counterexample", "conditional-regularity failure experiment");
  auto* sub_krein = app.add_subcommand("krein", "diagonal resolvent identity probe");
  auto* sub_selftest = app.add_subcommand("selftest", "oracle and identity self tests");

  CLI11_PARSE(app, argc, argv);

  try {
    CommandContext ctx;
    std::vector<std::string> warnings;
    if (!config_path.empty())
      ctx.cfg = dalloy::parse_config(config_path, &warnings);
    else
      ctx.cfg = dalloy::parse_config_json(nlohmann::json::object(), &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    if (seed_override) ctx.cfg.seed = *seed_override;
    if (samples_override) {
      if (*samples_override < 100)
        dalloy::fail(dalloy::ErrorKind::Validation, "--samples must be at least 100");
      ctx.cfg.samples = *samples_override;
    }
    if (workers_override) {
      if (*workers_override < 0 || *workers_override > 256)
        dalloy::fail(dalloy::ErrorKind::Validation, "--workers must lie in [0, 256]");
      ctx.cfg.workers = *workers_override;
    }

    if (out_dir.empty()) {
      const char* env = std::getenv("DALLOY_OUT_DIR");
      out_dir = env != nullptr && *env != '\0' ? env : ".";
    }
    ctx.out_dir = out_dir;
    std::error_code ec;
    std::filesystem::create_directories(ctx.out_dir, ec);
    if (ec)
      dalloy::fail(dalloy::ErrorKind::Io,
                   "cannot create output directory '" + ctx.out_dir.string() + "': " + ec.message());

    if (*sub_constants) return cmd_constants(ctx);
    if (*sub_wegner) return cmd_wegner(ctx);
    if (*sub_moments) return cmd_moments(ctx);
    if (*sub_decay) return cmd_decay(ctx);
    if (*sub_counterexample) return cmd_counterexample(ctx);
    if (*sub_krein) return cmd_krein(ctx);
    if (*sub_selftest) return cmd_selftest(ctx);
    return 7;
  } catch (const dalloy::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dalloy::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 7;
  }
}
