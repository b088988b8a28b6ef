#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dalloy/density.hpp"
#include "dalloy/errors.hpp"
#include "dalloy/lattice.hpp"

namespace dalloy {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config blocks.  Every field has a default; parse materializes defaults so a
// config echo always round-trips to an equal config.  Box-size conventions:
// wegner.box_sizes lists the box scale parameter L (the box [0,L] has L+1
// sites); moments.box_size, decay.chain_length and krein.box_size are site
// counts |Lambda|.
// ---------------------------------------------------------------------------

struct PotentialSpec {
  int dim = 1;
  std::vector<std::pair<Site, double>> entries = {{Site{0}, 1.0}};  // sorted by site

  SingleSitePotential make() const {
    std::map<Site, double> m;
    for (const auto& [site, value] : entries) {
      if (!m.emplace(site, value).second)
        fail(ErrorKind::Validation, "potential.entries repeats site " + site_to_string(site));
    }
    return SingleSitePotential(dim, std::move(m));
  }
};

struct DensitySpec {
  std::string kind = "uniform";
  double a = 0.0;
  double b = 1.0;
  std::vector<double> breakpoints;  // piecewise-linear only
  std::vector<double> values;

  Density make() const {
    if (kind == "piecewise-linear") return Density::piecewise_linear(breakpoints, values);
    return make_density(kind, a, b);
  }
};

struct WegnerBlock {
  std::vector<int> box_sizes = {10};
  std::vector<double> energies;  // default computed from the spectral window
  std::vector<double> epsilons = {1e-3, 1e-2, 1e-1, 1.0};
  std::string mode = "auto";  // auto | thm2 | shapefit
};

struct MomentsBlock {
  int box_size = 50;
  double s = 0.4;
  std::vector<std::complex<double>> zs;          // default: center + log-spaced Im
  std::vector<std::pair<int, int>> pairs;        // default derived from box_size
  bool diag_scan = false;
  double diag_scan_s = 0.0;                      // default 0.2/n at run time when 0
};

struct DecayBlock {
  int chain_length = 400;
  double s = 0.5;
  std::complex<double> z{0.0, 0.01};     // default Re = spectral center
  int max_bucket = 40;
  std::vector<int> anchors;              // default {3len/10, 9len/20, 3len/5}
  std::vector<double> support_widths;    // nonempty => rate-onset scan over uniform[0,w]
};

struct CounterexampleBlock {
  std::vector<double> a_values = {0.5, 1.0, 2.0};
  std::vector<double> epsilons = {0.05, 0.1};
  long long raw_samples = 1000000;
};

struct KreinBlock {
  int box_size = 20;
  int instances = 100;
  std::complex<double> z{0.0, 0.5};
};

struct ConstantsBlock {
  int L = 10;
  double eps = 0.01;
  double s = 0.4;
};

struct ExperimentConfig {
  PotentialSpec potential;
  DensitySpec density;
  long long samples = 10000;
  std::uint64_t seed = 20260822;
  int workers = 0;  // 0 = hardware concurrency
  WegnerBlock wegner;
  MomentsBlock moments;
  DecayBlock decay;
  CounterexampleBlock counterexample;
  KreinBlock krein;
  ConstantsBlock constants;
};

// ---------------------------------------------------------------------------
// Spectral window helpers used for default grids.
// ---------------------------------------------------------------------------

// range of V(x) = sum omega_k u(x-k) over couplings in [a,b]
inline std::pair<double, double> potential_range(const SingleSitePotential& u, const Density& rho) {
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& [site, v] : u.entries()) {
    lo += std::min(v * rho.support_lo(), v * rho.support_hi());
    hi += std::max(v * rho.support_lo(), v * rho.support_hi());
  }
  return {lo, hi};
}

inline std::pair<double, double> spectral_window(const SingleSitePotential& u, const Density& rho) {
  const auto [lo, hi] = potential_range(u, rho);
  const double d = u.dim();
  return {-2.0 * d + lo, 2.0 * d + hi};
}

namespace detail {

inline void config_fail(const std::string& where, const std::string& message) {
  fail(ErrorKind::Validation, "config " + where + ": " + message);
}

inline void expect_keys(const json& obj, const std::string& where,
                        std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) config_fail(where, "must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* k) { return key == k; }) == allowed.end())
      config_fail(where, "unknown key '" + key + "'");
  }
}

inline double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) config_fail(where, "must be a number");
  return v.get<double>();
}

inline std::int64_t as_integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) config_fail(where, "must be an integer");
  return v.get<std::int64_t>();
}

inline std::complex<double> as_complex(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) config_fail(where, "must be a [re, im] pair");
  return {as_number(v[0], where), as_number(v[1], where)};
}

inline void require_im(const std::complex<double>& z, const std::string& where) {
  if (z.imag() == 0.0) config_fail(where, "Im z must be nonzero");
}

inline void require_s(double s, const std::string& where) {
  if (!(s > 0.0 && s < 1.0))
    config_fail(where, "s must lie in the open interval (0,1), got " + std::to_string(s));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Parsing (strict: unknown keys are errors) + default materialization.
// ---------------------------------------------------------------------------

inline ExperimentConfig parse_config_json(const json& root,
                                          std::vector<std::string>* warnings = nullptr);

inline ExperimentConfig parse_config(const std::string& path,
                                     std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config file '" + path + "'");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::Validation, "config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config_json(root, warnings);
}

inline ExperimentConfig parse_config_json(const json& root, std::vector<std::string>* warnings) {
  using detail::as_complex;
  using detail::as_integer;
  using detail::as_number;
  using detail::config_fail;
  using detail::expect_keys;

  ExperimentConfig cfg;
  expect_keys(root, "(top level)", {"potential", "density", "experiment"});

  if (root.contains("potential")) {
    const json& p = root.at("potential");
    expect_keys(p, "potential", {"dim", "entries"});
    if (p.contains("dim")) cfg.potential.dim = static_cast<int>(as_integer(p.at("dim"), "potential.dim"));
    if (cfg.potential.dim < 1 || cfg.potential.dim > 4)
      config_fail("potential.dim", "dimension must be in 1..4");
    if (p.contains("entries")) {
      const json& entries = p.at("entries");
      if (!entries.is_array() || entries.empty())
        config_fail("potential.entries", "must be a nonempty array of [site, value] pairs");
      cfg.potential.entries.clear();
      for (const json& e : entries) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_array())
          config_fail("potential.entries", "each entry must be [[coords...], value]");
        Site site;
        for (const json& c : e[0])
          site.push_back(static_cast<int>(as_integer(c, "potential.entries site coordinate")));
        if (static_cast<int>(site.size()) != cfg.potential.dim)
          config_fail("potential.entries",
                      "site " + site_to_string(site) + " does not match dim " +
                          std::to_string(cfg.potential.dim));
        cfg.potential.entries.emplace_back(std::move(site), as_number(e[1], "potential.entries value"));
      }
      std::sort(cfg.potential.entries.begin(), cfg.potential.entries.end(),
                [](const auto& lhs, const auto& rhs) { return lhs.first < rhs.first; });
    } else {
      cfg.potential.entries = {{Site(static_cast<std::size_t>(cfg.potential.dim), 0), 1.0}};
    }
  }
  const SingleSitePotential u = cfg.potential.make();  // validates

  if (root.contains("density")) {
    const json& d = root.at("density");
    expect_keys(d, "density", {"kind", "a", "b", "breakpoints", "values"});
    if (d.contains("kind")) cfg.density.kind = d.at("kind").get<std::string>();
    if (d.contains("a")) cfg.density.a = as_number(d.at("a"), "density.a");
    if (d.contains("b")) cfg.density.b = as_number(d.at("b"), "density.b");
    if (d.contains("breakpoints")) {
      for (const json& v : d.at("breakpoints"))
        cfg.density.breakpoints.push_back(as_number(v, "density.breakpoints"));
    }
    if (d.contains("values")) {
      for (const json& v : d.at("values"))
        cfg.density.values.push_back(as_number(v, "density.values"));
    }
    if (cfg.density.kind == "piecewise-linear") {
      if (cfg.density.breakpoints.empty() || cfg.density.values.empty())
        config_fail("density", "piecewise-linear needs breakpoints and values");
    } else if (!cfg.density.breakpoints.empty() || !cfg.density.values.empty()) {
      config_fail("density", "breakpoints/values are only valid for kind piecewise-linear");
    }
  }
  const Density rho = cfg.density.make();  // validates
  if (cfg.density.kind == "piecewise-linear") {
    // canonical echo: store support bounds
    cfg.density.a = rho.support_lo();
    cfg.density.b = rho.support_hi();
  }

  const json experiment = root.contains("experiment") ? root.at("experiment") : json::object();
  expect_keys(experiment, "experiment",
              {"samples", "seed", "workers", "wegner", "moments", "decay", "counterexample",
               "krein", "constants"});
  if (experiment.contains("samples"))
    cfg.samples = as_integer(experiment.at("samples"), "experiment.samples");
  if (cfg.samples < 100) config_fail("experiment.samples", "N_mc must be >= 100");
  if (experiment.contains("seed")) {
    const json& s = experiment.at("seed");
    if (!s.is_number_unsigned() && !s.is_number_integer())
      config_fail("experiment.seed", "must be a nonnegative integer");
    const std::int64_t raw = s.get<std::int64_t>();
    if (s.is_number_integer() && !s.is_number_unsigned() && raw < 0)
      config_fail("experiment.seed", "must be a nonnegative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  if (experiment.contains("workers")) {
    cfg.workers = static_cast<int>(as_integer(experiment.at("workers"), "experiment.workers"));
    if (cfg.workers < 0 || cfg.workers > 256)
      config_fail("experiment.workers", "must be in 0..256 (0 = hardware)");
  }

  // --- wegner ---
  if (experiment.contains("wegner")) {
    const json& w = experiment.at("wegner");
    expect_keys(w, "experiment.wegner", {"box_sizes", "energies", "epsilons", "mode"});
    if (w.contains("box_sizes")) {
      cfg.wegner.box_sizes.clear();
      for (const json& v : w.at("box_sizes"))
        cfg.wegner.box_sizes.push_back(
            static_cast<int>(as_integer(v, "experiment.wegner.box_sizes")));
    }
    if (w.contains("energies")) {
      cfg.wegner.energies.clear();
      for (const json& v : w.at("energies"))
        cfg.wegner.energies.push_back(as_number(v, "experiment.wegner.energies"));
    }
    if (w.contains("epsilons")) {
      cfg.wegner.epsilons.clear();
      for (const json& v : w.at("epsilons"))
        cfg.wegner.epsilons.push_back(as_number(v, "experiment.wegner.epsilons"));
    }
    if (w.contains("mode")) cfg.wegner.mode = w.at("mode").get<std::string>();
  }
  if (cfg.wegner.box_sizes.empty()) config_fail("experiment.wegner.box_sizes", "must be nonempty");
  for (int L : cfg.wegner.box_sizes)
    if (L < 1) config_fail("experiment.wegner.box_sizes", "box size L must be >= 1");
  if (cfg.wegner.epsilons.empty()) config_fail("experiment.wegner.epsilons", "must be nonempty");
  for (double e : cfg.wegner.epsilons)
    if (!(e > 0.0)) config_fail("experiment.wegner.epsilons", "eps must be > 0");
  if (!std::is_sorted(cfg.wegner.epsilons.begin(), cfg.wegner.epsilons.end()))
    config_fail("experiment.wegner.epsilons", "must be ascending (nesting check relies on it)");
  if (cfg.wegner.mode != "auto" && cfg.wegner.mode != "thm2" && cfg.wegner.mode != "shapefit")
    config_fail("experiment.wegner.mode", "must be auto, thm2 or shapefit");
  if (cfg.wegner.energies.empty()) {
    const auto [elo, ehi] = spectral_window(u, rho);
    const int points = 9;
    for (int i = 0; i < points; ++i)
      cfg.wegner.energies.push_back(elo + (ehi - elo) * i / (points - 1));
  }

  // --- moments ---
  if (experiment.contains("moments")) {
    const json& m = experiment.at("moments");
    expect_keys(m, "experiment.moments",
                {"box_size", "s", "zs", "pairs", "diag_scan", "diag_scan_s"});
    if (m.contains("box_size"))
      cfg.moments.box_size = static_cast<int>(as_integer(m.at("box_size"), "experiment.moments.box_size"));
    if (m.contains("s")) cfg.moments.s = as_number(m.at("s"), "experiment.moments.s");
    if (m.contains("zs")) {
      cfg.moments.zs.clear();
      for (const json& v : m.at("zs"))
        cfg.moments.zs.push_back(as_complex(v, "experiment.moments.zs"));
    }
    if (m.contains("pairs")) {
      cfg.moments.pairs.clear();
      for (const json& v : m.at("pairs")) {
        if (!v.is_array() || v.size() != 2)
          config_fail("experiment.moments.pairs", "each pair must be [x, y]");
        cfg.moments.pairs.emplace_back(
            static_cast<int>(as_integer(v[0], "experiment.moments.pairs")),
            static_cast<int>(as_integer(v[1], "experiment.moments.pairs")));
      }
    }
    if (m.contains("diag_scan")) {
      if (!m.at("diag_scan").is_boolean())
        config_fail("experiment.moments.diag_scan", "must be a boolean");
      cfg.moments.diag_scan = m.at("diag_scan").get<bool>();
    }
    if (m.contains("diag_scan_s"))
      cfg.moments.diag_scan_s = as_number(m.at("diag_scan_s"), "experiment.moments.diag_scan_s");
  }
  if (cfg.moments.box_size < 2 || cfg.moments.box_size > kMaxBoxSites)
    config_fail("experiment.moments.box_size", "must be in 2.." + std::to_string(kMaxBoxSites));
  detail::require_s(cfg.moments.s, "experiment.moments.s");
  if (warnings && cfg.moments.s > 0.4)
    warnings->push_back("experiment.moments.s = " + std::to_string(cfg.moments.s) +
                        " > 0.4: heavy-tailed |G|^s samples; confidence intervals may be loose");
  if (cfg.moments.zs.empty()) {
    const auto [vlo, vhi] = potential_range(u, rho);
    const double center = 0.5 * (vlo + vhi);
    for (int i = 0; i < 5; ++i)
      cfg.moments.zs.emplace_back(center, std::pow(10.0, -3.0 + 3.0 * i / 4.0));
  }
  for (const auto& z : cfg.moments.zs) detail::require_im(z, "experiment.moments.zs");
  if (cfg.moments.pairs.empty()) {
    const int b = cfg.moments.box_size;
    const int mid = b / 2;
    auto clampi = [&](int v) { return std::clamp(v, 0, b - 1); };
    const std::vector<std::pair<int, int>> raw = {
        {mid, mid},          {b / 5, b / 5},   {4 * b / 5, 4 * b / 5}, {mid, mid + 1},
        {mid, mid + 5},      {mid + 5, mid},   {mid, mid + 10},        {b / 5, 2 * b / 5},
        {b / 10, 9 * b / 10}, {0, b - 1}};
    for (auto [x, y] : raw) cfg.moments.pairs.emplace_back(clampi(x), clampi(y));
  }
  for (const auto& [x, y] : cfg.moments.pairs)
    if (x < 0 || y < 0 || x >= cfg.moments.box_size || y >= cfg.moments.box_size)
      config_fail("experiment.moments.pairs", "site index out of range for box_size");
  if (cfg.moments.diag_scan) {
    const double cap = 1.0 / (4.0 * u.rank());
    if (cfg.moments.diag_scan_s == 0.0) cfg.moments.diag_scan_s = 0.8 * cap;
    if (!(cfg.moments.diag_scan_s > 0.0 && cfg.moments.diag_scan_s < cap))
      config_fail("experiment.moments.diag_scan_s",
                  "must lie in (0, 1/(4n)) = (0, " + std::to_string(cap) + ")");
  }

  // --- decay ---
  if (experiment.contains("decay")) {
    const json& b = experiment.at("decay");
    expect_keys(b, "experiment.decay",
                {"chain_length", "s", "z", "max_bucket", "anchors", "support_widths"});
    if (b.contains("chain_length"))
      cfg.decay.chain_length =
          static_cast<int>(as_integer(b.at("chain_length"), "experiment.decay.chain_length"));
    if (b.contains("s")) cfg.decay.s = as_number(b.at("s"), "experiment.decay.s");
    if (b.contains("z")) cfg.decay.z = as_complex(b.at("z"), "experiment.decay.z");
    else {
      const auto [vlo, vhi] = potential_range(u, rho);
      cfg.decay.z = {0.5 * (vlo + vhi), 0.01};
    }
    if (b.contains("max_bucket"))
      cfg.decay.max_bucket =
          static_cast<int>(as_integer(b.at("max_bucket"), "experiment.decay.max_bucket"));
    if (b.contains("anchors")) {
      cfg.decay.anchors.clear();
      for (const json& v : b.at("anchors"))
        cfg.decay.anchors.push_back(static_cast<int>(as_integer(v, "experiment.decay.anchors")));
    }
    if (b.contains("support_widths")) {
      cfg.decay.support_widths.clear();
      for (const json& v : b.at("support_widths"))
        cfg.decay.support_widths.push_back(as_number(v, "experiment.decay.support_widths"));
    }
  } else {
    const auto [vlo, vhi] = potential_range(u, rho);
    cfg.decay.z = {0.5 * (vlo + vhi), 0.01};
  }
  if (cfg.decay.chain_length < 8 || cfg.decay.chain_length > kMaxBoxSites)
    config_fail("experiment.decay.chain_length", "must be in 8.." + std::to_string(kMaxBoxSites));
  detail::require_s(cfg.decay.s, "experiment.decay.s");
  detail::require_im(cfg.decay.z, "experiment.decay.z");
  if (cfg.decay.max_bucket < 2) config_fail("experiment.decay.max_bucket", "must be >= 2");
  if (cfg.decay.anchors.empty()) {
    const int len = cfg.decay.chain_length;
    cfg.decay.anchors = {3 * len / 10, 9 * len / 20, 3 * len / 5};
  }
  for (int a : cfg.decay.anchors)
    if (a < 0 || a >= cfg.decay.chain_length)
      config_fail("experiment.decay.anchors", "anchor site out of range");
  for (double w : cfg.decay.support_widths)
    if (!(w > 0.0)) config_fail("experiment.decay.support_widths", "widths must be > 0");
  if (warnings && u.ubar() == 0.0 && experiment.contains("decay"))
    warnings->push_back(
        "potential has ubar = 0: explicit count bound unavailable; decay/Wegner runs fall back to "
        "structural checks where applicable");

  // --- counterexample ---
  if (experiment.contains("counterexample")) {
    const json& c = experiment.at("counterexample");
    expect_keys(c, "experiment.counterexample", {"a_values", "epsilons", "raw_samples"});
    if (c.contains("a_values")) {
      cfg.counterexample.a_values.clear();
      for (const json& v : c.at("a_values"))
        cfg.counterexample.a_values.push_back(as_number(v, "experiment.counterexample.a_values"));
    }
    if (c.contains("epsilons")) {
      cfg.counterexample.epsilons.clear();
      for (const json& v : c.at("epsilons"))
        cfg.counterexample.epsilons.push_back(as_number(v, "experiment.counterexample.epsilons"));
    }
    if (c.contains("raw_samples"))
      cfg.counterexample.raw_samples =
          as_integer(c.at("raw_samples"), "experiment.counterexample.raw_samples");
  }
  for (double a : cfg.counterexample.a_values)
    if (!(a > 0.0))
      config_fail("experiment.counterexample.a_values", "the example needs a > 0");
  for (double e : cfg.counterexample.epsilons)
    if (!(e > 0.0)) config_fail("experiment.counterexample.epsilons", "eps must be > 0");
  if (cfg.counterexample.raw_samples < 1000)
    config_fail("experiment.counterexample.raw_samples", "must be >= 1000");

  // --- krein ---
  if (experiment.contains("krein")) {
    const json& k = experiment.at("krein");
    expect_keys(k, "experiment.krein", {"box_size", "instances", "z"});
    if (k.contains("box_size"))
      cfg.krein.box_size = static_cast<int>(as_integer(k.at("box_size"), "experiment.krein.box_size"));
    if (k.contains("instances"))
      cfg.krein.instances =
          static_cast<int>(as_integer(k.at("instances"), "experiment.krein.instances"));
    if (k.contains("z")) cfg.krein.z = as_complex(k.at("z"), "experiment.krein.z");
    else {
      const auto [vlo, vhi] = potential_range(u, rho);
      cfg.krein.z = {0.5 * (vlo + vhi), 0.5};
    }
  } else {
    const auto [vlo, vhi] = potential_range(u, rho);
    cfg.krein.z = {0.5 * (vlo + vhi), 0.5};
  }
  if (cfg.krein.box_size < 1 || cfg.krein.box_size > kMaxBoxSites)
    config_fail("experiment.krein.box_size", "must be in 1.." + std::to_string(kMaxBoxSites));
  if (cfg.krein.instances < 1) config_fail("experiment.krein.instances", "must be >= 1");
  detail::require_im(cfg.krein.z, "experiment.krein.z");

  // --- constants ---
  if (experiment.contains("constants")) {
    const json& c = experiment.at("constants");
    expect_keys(c, "experiment.constants", {"L", "eps", "s"});
    if (c.contains("L"))
      cfg.constants.L = static_cast<int>(as_integer(c.at("L"), "experiment.constants.L"));
    if (c.contains("eps")) cfg.constants.eps = as_number(c.at("eps"), "experiment.constants.eps");
    if (c.contains("s")) cfg.constants.s = as_number(c.at("s"), "experiment.constants.s");
  }
  if (cfg.constants.L < 1) config_fail("experiment.constants.L", "must be >= 1");
  if (!(cfg.constants.eps > 0.0)) config_fail("experiment.constants.eps", "must be > 0");
  detail::require_s(cfg.constants.s, "experiment.constants.s");

  return cfg;
}

// Canonical JSON echo; parse_config_json(config_to_json(cfg)) == cfg.
inline json config_to_json(const ExperimentConfig& cfg) {
  json root;
  json& p = root["potential"];
  p["dim"] = cfg.potential.dim;
  p["entries"] = json::array();
  for (const auto& [site, value] : cfg.potential.entries)
    p["entries"].push_back(json::array({site, value}));

  json& d = root["density"];
  d["kind"] = cfg.density.kind;
  if (cfg.density.kind == "piecewise-linear") {
    d["breakpoints"] = cfg.density.breakpoints;
    d["values"] = cfg.density.values;
  } else {
    d["a"] = cfg.density.a;
    d["b"] = cfg.density.b;
  }

  json& e = root["experiment"];
  e["samples"] = cfg.samples;
  e["seed"] = cfg.seed;
  e["workers"] = cfg.workers;
  e["wegner"] = {{"box_sizes", cfg.wegner.box_sizes},
                 {"energies", cfg.wegner.energies},
                 {"epsilons", cfg.wegner.epsilons},
                 {"mode", cfg.wegner.mode}};
  json zs = json::array();
  for (const auto& z : cfg.moments.zs) zs.push_back(json::array({z.real(), z.imag()}));
  json pairs = json::array();
  for (const auto& [x, y] : cfg.moments.pairs) pairs.push_back(json::array({x, y}));
  e["moments"] = {{"box_size", cfg.moments.box_size}, {"s", cfg.moments.s},
                  {"zs", zs},                         {"pairs", pairs},
                  {"diag_scan", cfg.moments.diag_scan}};
  if (cfg.moments.diag_scan) e["moments"]["diag_scan_s"] = cfg.moments.diag_scan_s;
  e["decay"] = {{"chain_length", cfg.decay.chain_length},
                {"s", cfg.decay.s},
                {"z", json::array({cfg.decay.z.real(), cfg.decay.z.imag()})},
                {"max_bucket", cfg.decay.max_bucket},
                {"anchors", cfg.decay.anchors},
                {"support_widths", cfg.decay.support_widths}};
  e["counterexample"] = {{"a_values", cfg.counterexample.a_values},
                         {"epsilons", cfg.counterexample.epsilons},
                         {"raw_samples", cfg.counterexample.raw_samples}};
  e["krein"] = {{"box_size", cfg.krein.box_size},
                {"instances", cfg.krein.instances},
                {"z", json::array({cfg.krein.z.real(), cfg.krein.z.imag()})}};
  e["constants"] = {{"L", cfg.constants.L}, {"eps", cfg.constants.eps}, {"s", cfg.constants.s}};
  return root;
}

inline bool operator==(const ExperimentConfig& lhs, const ExperimentConfig& rhs) {
  return config_to_json(lhs) == config_to_json(rhs);
}

}  // namespace dalloy
