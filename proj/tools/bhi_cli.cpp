// Command-line driver for the toolkit: named self-check suites, scenario
// runs that emit schema-validated JSON reports plus CSV plot tables, and
// parameter sweeps.
//
// Exit codes: 0 success, 1 failed check or acceptance, 2 config or usage
// error, 3 infeasible scenario (no usable spectral gap).
//
// Determinism: identical config + seed produce byte-identical stdout and
// report files regardless of --jobs.  Nothing time- or host-dependent is
// printed to stdout or written into a report.

#include "bhi/config.hpp"
#include "bhi/pipeline.hpp"
#include "bhi/suites.hpp"
#include "bhi/torus.hpp"

#include <CLI11.hpp>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace bhi;

std::string fmt_residual(double x) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6e", x);
  return buf;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

int cmd_verify(const std::string& suite, std::uint64_t seed, int jobs,
               const std::string& out_dir) {
  const std::vector<std::string> names =
      suite == "all" ? suite_names() : std::vector<std::string>{suite};
  std::vector<SuiteReport> reports;
  reports.reserve(names.size());
  for (const auto& n : names) reports.push_back(run_suite(n, seed, jobs));

  std::printf("%-11s %-32s %-14s %-9s %s\n", "suite", "check", "measured", "threshold",
              "status");
  bool ok = true;
  IndexReport envelope;
  envelope.scenario_id = "verify_" + suite;
  envelope.seed = seed;
  envelope.constants_version = "none";
  for (const auto& r : reports) {
    for (const auto& c : r.checks) {
      std::printf("%-11s %-32s %-14s %-9.1e %s\n", r.suite.c_str(), c.name.c_str(),
                  fmt_residual(c.measured).c_str(), c.threshold, c.pass ? "pass" : "FAIL");
      ok = ok && c.pass;
      envelope.add_value(r.suite + "/" + c.name, c.measured);
      envelope.pass.push_back({r.suite + "/" + c.name, c.measured, c.threshold, c.pass});
    }
  }
  std::printf("verify %s: %s\n", suite.c_str(), ok ? "all checks passed" : "CHECK FAILURES");
  if (!out_dir.empty()) {
    ojson j = envelope.to_json();
    validate_report(j);
    write_text_file(out_dir + "/verify_" + suite + "_report.json", dump_json(j));
  }
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// half-line slab scenario
// ---------------------------------------------------------------------------

SlabModel build_aps_slab(const ScenarioConfig& sc, std::uint64_t seed) {
  const ApsScenario& a = *sc.aps;
  if (a.scheme != sc.calibration.scheme)
    throw config_error(sc.path + ": model.scheme \"" + a.scheme +
                       "\" does not match the calibration constants (measured with \"" +
                       sc.calibration.scheme + "\")");
  const DiffScheme scheme = a.scheme == "balanced" ? DiffScheme::balanced : DiffScheme::forward;
  Rng rng(seed);
  Mat bop = rng.gapped_hermitian(a.boundary_sites, a.boundary_gap);
  auto probe = make_window(-a.margin - a.slab_depth, a.slab_depth / 4, a.boundary_sites, a.margin);
  Mat cap = random_cap_perturbation(rng, *probe, a.cap_depth, a.cap_amplitude);
  SlabModel slab = make_slab_model(bop, scheme, probe->t_lo, probe->t_hi, a.margin, cap);
  const double min_gap = sc.tol("min_boundary_gap", 0.05);
  if (slab.cyl.bnd.gap < min_gap)
    throw infeasible_error("boundary spectral gap " + format_number(slab.cyl.bnd.gap) +
                           " is below the workable minimum " + format_number(min_gap));
  return slab;
}

struct ApsArtifacts {
  IndexReport report;
  CsvTable pairing_u;
  CsvTable integrand_t;
};

ApsArtifacts run_aps_scenario(const ScenarioConfig& sc, std::uint64_t seed) {
  const ApsScenario& a = *sc.aps;
  const CalibrationData& cal = sc.calibration;
  SlabModel slab = build_aps_slab(sc, seed);
  SlabModel pure = pure_slab_like(slab);
  RegularizationData reg{a.regulator_offset};

  ApsReport aps = aps_degree0(slab, pure, a.u_main, reg, cal.kappa_unit, cal.kappa_freeze,
                              1e-9, a.nlam);

  // absolute pairing across the whole u grid (shared spectral data); the
  // costlier relative route runs once, at the headline scale
  const PathQuadrature qp{16, a.path_tol, a.path_max_nodes};
  std::vector<SweepRow> rows =
      pairing_u_sweep(slab, a.u_grid, reg, /*with_relative=*/false, qp, a.nlam, a.horizon_tol);

  double relative = 0.0;
  bool have_rel = false;
  if (a.relative_enabled) {
    const double t_max = flow_horizon(slab.cyl.bnd.gap, a.u_main, a.horizon_tol);
    relative = relative_degree0(slab, a.u_main, reg, t_max, qp, a.nlam).value.real();
    have_rel = true;
  }

  double drift = 0.0;
  for (const auto& r : rows) drift = std::max(drift, std::abs(r.absolute.real() - aps.ind));
  const double rel_vs_abs = have_rel ? std::abs(relative - aps.ind) : 0.0;

  ApsArtifacts art;
  IndexReport& rep = art.report;
  rep.scenario_id = sc.scenario_id;
  rep.seed = seed;
  rep.constants_version = cal.version;

  rep.add_value("absolute", aps.ind);
  if (have_rel) rep.add_value("relative", relative);
  rep.add_value("eta", aps.eta);
  rep.add_value("as_term", aps.as);
  rep.add_value("spectral_asym", aps.spectral_asym);
  rep.add_value("boundary_gap", slab.cyl.bnd.gap);

  rep.add_error("decomposition_gap", aps.decomposition_gap);
  rep.add_error("eta_vs_frozen", aps.eta_vs_frozen);
  rep.add_error("remainder_invariant", aps.absolute.remainder_invariant);
  rep.add_error("tail_bound", aps.absolute.tail_bound);
  rep.add_error("quantization", std::abs(aps.ind - std::round(aps.ind)));
  rep.add_error("pairing_u_drift", drift);
  if (a.relative_enabled) rep.add_error("relative_vs_absolute", rel_vs_abs);

  rep.add_oracle("index_winding", static_cast<double>(aps.ind_oracle));
  rep.add_oracle("sign_sum", aps.spectral_asym);

  rep.add_check("index_vs_oracle", std::abs(aps.ind - static_cast<double>(aps.ind_oracle)),
                sc.tol("index_abs_err", 1e-6));
  rep.add_check("aps_residual", aps.decomposition_gap, sc.tol("aps_residual", 1e-4));
  rep.add_check("eta_vs_frozen", aps.eta_vs_frozen, sc.tol("eta_vs_frozen", 1e-4));
  rep.add_check("pairing_u_drift", drift, sc.tol("u_drift", 1e-6));
  if (a.relative_enabled)
    rep.add_check("relative_vs_absolute", rel_vs_abs, sc.tol("relative_vs_absolute", 1e-6));

  art.pairing_u.header = {"u", "pairing"};
  for (const auto& r : rows) art.pairing_u.rows.push_back({r.u, r.absolute.real()});

  const double t_max = flow_horizon(slab.cyl.bnd.gap, a.u_main, a.horizon_tol);
  const int n = std::max(2, a.integrand_samples);
  std::vector<double> ts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    ts[static_cast<std::size_t>(i)] = 1.0 + (t_max - 1.0) * double(i) / double(n - 1);
  std::vector<cdouble> gi =
      relative_integrand_samples(slab, a.u_main, ts, std::min(a.nlam, 128));
  art.integrand_t.header = {"t", "integrand"};
  for (int i = 0; i < n; ++i)
    art.integrand_t.rows.push_back(
        {ts[static_cast<std::size_t>(i)], gi[static_cast<std::size_t>(i)].real()});
  return art;
}

// ---------------------------------------------------------------------------
// flux-torus scenario
// ---------------------------------------------------------------------------

struct FluxArtifacts {
  IndexReport report;
  CsvTable cases;
};

FluxArtifacts run_flux_scenario(const ScenarioConfig& sc, std::uint64_t seed) {
  const FluxScenario& f = *sc.flux;
  const CalibrationData& cal = sc.calibration;
  if (cal.area_ratio_im == 0.0)
    throw config_error(sc.calibration_path + ": degree2.ratio_im must be nonzero");

  FluxArtifacts art;
  IndexReport& rep = art.report;
  rep.scenario_id = sc.scenario_id;
  rep.seed = seed;
  rep.constants_version = cal.version;
  art.cases.header = {"p", "q", "grid", "pairing_im", "ratio", "chern"};

  const double quant_tol = sc.tol("quantization", 0.005);
  std::vector<double> per_chern;
  for (std::size_t i = 0; i < f.cases.size(); ++i) {
    const FluxCase& fc = f.cases[i];
    FluxTorusModel m;
    m.p = fc.p;
    m.q = fc.q;
    m.t1 = f.t1;
    m.t2 = f.t2;
    BandScan scan = scan_bands(m, f.scan_grid);
    const BandGap& gap = scan.chosen();  // throws infeasible_error when gapless
    FiberFamily fam = fermi_projector_family(m, fc.grid, gap.fermi());
    TorusHoppings h = torus_hoppings(fam, f.drop_tol);
    const cdouble pairing = torus_area_pairing(h);
    const int chern = fhs_chern(m, fc.grid, gap.fermi());
    const int counting =
        static_cast<int>(cal.orientation) * diophantine_chern(fc.p, fc.q, gap.bands_below);
    const double ratio = pairing.imag() / cal.area_ratio_im;

    const std::string k = std::to_string(i);
    rep.add_value("pairing_im_" + k, pairing.imag());
    rep.add_value("ratio_" + k, ratio);
    rep.add_value("gap_width_" + k, gap.width());
    rep.add_error("pairing_re_" + k, std::abs(pairing.real()));
    rep.add_error("hopping_dropped_mass_" + k, h.dropped_mass);
    rep.add_oracle("chern_fhs_" + k, static_cast<double>(chern));
    rep.add_oracle("chern_counting_" + k, static_cast<double>(counting));
    rep.add_oracle("bands_below_" + k, static_cast<double>(gap.bands_below));

    const double denom = std::max(1.0, std::abs(static_cast<double>(chern)));
    rep.add_check("ratio_quantized_" + k,
                  std::abs(ratio - static_cast<double>(chern)) / denom, quant_tol);
    rep.add_exact_check("fhs_matches_counting_" + k, static_cast<double>(chern - counting));

    if (chern != 0) per_chern.push_back(pairing.imag() / static_cast<double>(chern));
    art.cases.rows.push_back({static_cast<double>(fc.p), static_cast<double>(fc.q),
                              static_cast<double>(fc.grid), pairing.imag(), ratio,
                              static_cast<double>(chern)});
  }

  // the per-unit pairing must be one constant across flux and lattice size
  if (per_chern.size() > 1) {
    double spread = 0.0;
    for (double v : per_chern) spread = std::max(spread, std::abs(v - per_chern[0]));
    rep.add_error("ratio_spread", spread);
    rep.add_check("ratio_constant_across_cases", spread / std::abs(cal.area_ratio_im),
                  quant_tol);
  }
  return art;
}

// ---------------------------------------------------------------------------
// run / sweep
// ---------------------------------------------------------------------------

void print_report_summary(const IndexReport& rep) {
  std::printf("scenario %s (seed %" PRIu64 ", constants %s)\n", rep.scenario_id.c_str(),
              rep.seed, rep.constants_version.c_str());
  for (const auto& [k, v] : rep.values) std::printf("  %-28s % .12e\n", k.c_str(), v);
  for (const auto& p : rep.pass)
    std::printf("  check %-28s %-14s < %-9.1e %s\n", p.name.c_str(),
                fmt_residual(p.measured).c_str(), p.threshold, p.pass ? "pass" : "FAIL");
  std::printf("result: %s\n", rep.all_pass() ? "pass" : "FAIL");
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed_flag,
            const std::string& out_dir) {
  ScenarioConfig sc = ScenarioConfig::load(config_path);
  const std::uint64_t seed = seed_flag ? *seed_flag : sc.seed;

  IndexReport rep;
  std::vector<std::pair<std::string, CsvTable>> tables;
  if (sc.kind == "aps_slab_degree0") {
    ApsArtifacts art = run_aps_scenario(sc, seed);
    rep = std::move(art.report);
    tables.emplace_back("pairing_vs_u", std::move(art.pairing_u));
    tables.emplace_back("integrand_vs_t", std::move(art.integrand_t));
  } else {
    FluxArtifacts art = run_flux_scenario(sc, seed);
    rep = std::move(art.report);
    tables.emplace_back("cases", std::move(art.cases));
  }

  const ojson j = rep.to_json();
  validate_report(j);
  const std::string base =
      (out_dir.empty() ? std::string(".") : out_dir) + "/" + sc.scenario_id;
  write_text_file(base + "_report.json", dump_json(j));
  for (const auto& [name, t] : tables) write_csv_file(base + "_" + name + ".csv", t);

  print_report_summary(rep);
  return rep.all_pass() ? 0 : 1;
}

int cmd_sweep(const std::string& config_path, const std::string& param,
              std::vector<double> grid, std::optional<std::uint64_t> seed_flag,
              const std::string& out_dir) {
  ScenarioConfig sc = ScenarioConfig::load(config_path);
  if (sc.kind != "aps_slab_degree0")
    throw config_error("sweep: scenario kind \"" + sc.kind +
                       "\" has no sweepable parameter (supported: aps_slab_degree0)");
  if (param != "u")
    throw config_error("sweep: unknown --param \"" + param + "\" (supported: u)");
  const ApsScenario& a = *sc.aps;
  if (grid.empty()) grid = a.u_grid;
  for (double u : grid)
    if (!(u > 0.0)) throw config_error("sweep: grid values must be positive");

  const std::uint64_t seed = seed_flag ? *seed_flag : sc.seed;
  SlabModel slab = build_aps_slab(sc, seed);
  RegularizationData reg{a.regulator_offset};
  const PathQuadrature qp{16, a.path_tol, a.path_max_nodes};
  std::vector<SweepRow> rows =
      pairing_u_sweep(slab, grid, reg, /*with_relative=*/false, qp, a.nlam, a.horizon_tol);

  CsvTable t;
  t.header = {"u", "pairing"};
  std::printf("%-22s %s\n", "u", "pairing");
  for (const auto& r : rows) {
    t.rows.push_back({r.u, r.absolute.real()});
    std::printf("%-22s %s\n", format_number(r.u).c_str(),
                format_number(r.absolute.real()).c_str());
  }
  const std::string base =
      (out_dir.empty() ? std::string(".") : out_dir) + "/" + sc.scenario_id;
  write_csv_file(base + "_sweep_u.csv", t);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"index-pairing toolkit: self-checks, scenario runs, sweeps"};
  app.require_subcommand(1);

  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  int jobs = static_cast<int>(hw);
  std::uint64_t seed = 1;
  std::string out_dir;
  std::string suite;
  std::string config_path;
  std::string param = "u";
  std::vector<double> grid;

  CLI::App* verify = app.add_subcommand("verify", "run a named self-check suite");
  verify->add_option("suite", suite, "algebra | cocycles | btrace | projectors | all")
      ->required()
      ->check(CLI::IsMember({"algebra", "cocycles", "btrace", "projectors", "all"}));
  verify->add_option("--jobs", jobs, "maximum worker threads");
  verify->add_option("--seed", seed, "base seed for the check generators");
  verify->add_option("--out", out_dir, "directory for the JSON report (optional)");

  CLI::App* run = app.add_subcommand("run", "run a scenario config, emit report + CSV");
  run->add_option("config", config_path, "scenario config file (JSON)")->required();
  run->add_option("--jobs", jobs, "maximum worker threads");
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--out", out_dir, "output directory (default: current)");

  CLI::App* sweep = app.add_subcommand("sweep", "sweep a scenario parameter, emit CSV");
  sweep->add_option("config", config_path, "scenario config file (JSON)")->required();
  sweep->add_option("--param", param, "parameter to sweep (supported: u)");
  sweep->add_option("--grid", grid, "comma-separated grid values")->delimiter(',');
  sweep->add_option("--jobs", jobs, "maximum worker threads");
  sweep->add_option("--seed", seed, "override the config seed");
  sweep->add_option("--out", out_dir, "output directory (default: current)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::fputs(app.help().c_str(), stdout);
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::fputs(app.help("", CLI::AppFormatMode::All).c_str(), stdout);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  }

  try {
    if (verify->parsed()) return cmd_verify(suite, seed, jobs, out_dir);
    if (run->parsed()) {
      std::optional<std::uint64_t> s;
      if (run->count("--seed") > 0) s = seed;
      return cmd_run(config_path, s, out_dir);
    }
    if (sweep->parsed()) {
      std::optional<std::uint64_t> s;
      if (sweep->count("--seed") > 0) s = seed;
      return cmd_sweep(config_path, param, grid, s, out_dir);
    }
    std::fprintf(stderr, "usage error: no subcommand given\n");
    return 2;
  } catch (const config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const infeasible_error& e) {
    std::fprintf(stderr, "infeasible scenario: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
