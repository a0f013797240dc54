// btclab: command-line front end for sweeps, fits and figure pipelines.

#include "btc/csv.hpp"
#include "btc/metrology.hpp"
#include "btc/power_law.hpp"
#include "btc/scaling.hpp"
#include "btc/snapshot.hpp"
#include "btc/spectrum.hpp"
#include "btc/sweep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>

using namespace btc;
using nlohmann::json;

namespace {

struct GlobalFlags {
  std::string config;
  std::optional<int> nmax;
  std::optional<int> workers;
  bool force = false;
  std::string out;
  std::optional<double> delta_omega;
};

struct PointFlags {
  std::vector<int> n;
  std::vector<double> omega;
  std::string initial;
};

SweepConfig build_config(const GlobalFlags& g) {
  SweepConfig c;
  if (!g.config.empty()) c = load_config(g.config);
  if (g.nmax) c.nmax = *g.nmax;
  if (g.workers) c.workers = *g.workers;
  if (g.force) c.force = true;
  if (!g.out.empty()) c.out = g.out;
  if (g.delta_omega) c.delta_omega = *g.delta_omega;
  return c;
}

void write_json(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  std::cout << "wrote " << path.string() << '\n';
}

std::string fmt(double x, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, x);
  return buf;
}

void print_table(const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      std::cout << (i ? "  " : "") << std::string(width[i] - cells[i].size(), ' ') << cells[i];
    }
    std::cout << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
}

void report_failures(const SweepResult& r) {
  for (const auto& f : r.failures) {
    std::cerr << "failed: N=" << f.n_spins << " omega=" << format_number(f.omega_over_kappa) << " "
              << to_string(f.task) << ": " << f.message << '\n';
  }
  std::cout << r.computed << " computed, " << r.cached << " cached, " << r.failures.size()
            << " failed\n";
}

void apply_points(SweepConfig& c, const PointFlags& p) {
  if (!p.n.empty()) c.n_list = p.n;
  if (!p.omega.empty()) c.omega_grid = p.omega;
  if (!p.initial.empty()) c.initial_state = p.initial;
}

std::string key_suffix(int n, double omega) {
  return "N" + std::to_string(n) + "_w" + format_key_number(omega);
}

// --- commands ---------------------------------------------------------------

int cmd_trajectory(const SweepConfig& c, int n, double omega, double t_max, double dt) {
  const ModelParams params{omega * c.kappa, c.kappa, n};
  params.validate();
  if (!(t_max > 0.0) || !(dt > 0.0)) throw ConfigError("--t-max and --dt must be > 0");
  std::vector<double> times;
  for (std::size_t i = 0;; ++i) {
    const double t = static_cast<double>(i) * dt;
    if (t > t_max * (1 + 1e-12)) break;
    times.push_back(t);
  }
  EvolveOptions opts = c.evolve;
  opts.keep_states = false;
  const Trajectory traj = evolve(build_liouvillian(params),
                                 initial_state(CollectiveSpinBasis(n), c.initial_state), times, opts);
  CsvTable t;
  t.header = {"t", "sz_per_n"};
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    t.rows.push_back({format_number(traj.times[i]), format_number(traj.sz_per_n[i])});
  }
  const auto path = c.out / ("trajectory_" + key_suffix(n, omega) + ".csv");
  write_csv(path, t);
  std::cout << "wrote " << path.string() << '\n';
  print_table({"N", "omega/kappa", "t_end", "sz/N(t_end)", "steps", "rejected"},
              {{std::to_string(n), fmt(omega), fmt(traj.times.back()), fmt(traj.sz_per_n.back()),
                std::to_string(traj.steps_accepted), std::to_string(traj.steps_rejected)}});
  return 0;
}

int cmd_spectrum(const SweepConfig& c, int n, double omega, std::size_t k) {
  const ModelParams params{omega * c.kappa, c.kappa, n};
  params.validate();
  SpectrumOptions opts;
  opts.tolerance = c.spectrum_tolerance;
  const Superoperator l = build_liouvillian(params);
  const LiouvillianSpectrum spec = spectrum(l, std::min<std::size_t>(k, l.size()), opts);
  json pairs = json::array();
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i) {
    const Complex e = spec.eigenvalues[i] / c.kappa;
    pairs.push_back({e.real(), e.imag()});
    rows.push_back({std::to_string(i + 1), fmt(e.real(), 10), fmt(e.imag(), 10)});
  }
  write_json(c.out / ("spectrum_" + key_suffix(n, omega) + ".json"), pairs);
  if (c.snapshots) save_spectrum(c.out / "snapshots", spec, params, opts);
  std::cout << "method: " << spec.method << '\n';
  print_table({"j", "Re E_j/kappa", "Im E_j/kappa"}, rows);
  return 0;
}

void print_sweep(const SweepResult& r) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& rec : r.records) {
    rows.push_back({std::to_string(rec.n_spins), fmt(rec.omega_over_kappa),
                    format_optional(rec.sz_ss_per_n), format_optional(rec.qfi),
                    format_optional(rec.cfi_max), format_optional(rec.theta_opt),
                    format_optional(rec.phi_opt), format_optional(rec.e2_abs)});
  }
  if (rows.size() > 40) {
    std::cout << "(" << rows.size() << " rows; see sweep CSV)\n";
    return;
  }
  print_table({"N", "omega/kappa", "sz/N", "qfi", "cfi_max", "theta", "phi", "|E2|"}, rows);
}

void print_peaks(const std::vector<PeakRow>& peaks) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : peaks) {
    rows.push_back({std::to_string(p.n_spins), fmt(p.omega_max, 8), fmt(p.qfi_max, 8),
                    p.interior ? "yes" : "boundary"});
  }
  print_table({"N", "omega_max", "qfi_max", "interior"}, rows);
}

json collapse_json(const CollapseFit& f) {
  const std::string shape = f.kind == ObservableKind::magnetization ? "beta" : "eta";
  json j{{"kind", to_string(f.kind)},
         {"omega_c", f.omega_c},
         {"nu", f.nu},
         {shape, f.shape_exponent},
         {"quality", f.quality},
         {"errors", {{"omega_c", f.uncertainty.omega_c}, {"nu", f.uncertainty.nu}, {shape, f.uncertainty.shape}}},
         {"pinned", {{"omega_c", f.pinned[0]}, {"nu", f.pinned[1]}, {shape, f.pinned[2]}}},
         {"points", f.points},
         {"iterations", f.iterations}};
  if (f.kind == ObservableKind::qfi) j["eta_over_nu"] = f.shape_exponent / f.nu;
  return j;
}

void print_collapse(const CollapseFit& f) {
  const std::string shape = f.kind == ObservableKind::magnetization ? "beta" : "eta";
  print_table({"parameter", "value", "error", "pinned"},
              {{"omega_c", fmt(f.omega_c), fmt(f.uncertainty.omega_c), f.pinned[0] ? "yes" : "no"},
               {"nu", fmt(f.nu), fmt(f.uncertainty.nu), f.pinned[1] ? "yes" : "no"},
               {shape, fmt(f.shape_exponent), fmt(f.uncertainty.shape), f.pinned[2] ? "yes" : "no"}});
  std::cout << "quality " << fmt(f.quality) << " over " << f.points << " points\n";
}

json fit_json(const PowerLawFit& f, const std::string& column) {
  json params = json::object(), errors = json::object();
  for (std::size_t i = 0; i < f.names.size(); ++i) {
    params[f.names[i]] = f.values[i];
    errors[f.names[i]] = f.errors[i];
  }
  json j{{"model", to_string(f.model)}, {"column", column}, {"parameters", params},
         {"errors", errors}, {"r_squared", f.r_squared}, {"residuals", f.residuals}};
  if (f.model == PowerLawModel::pareto) j["kappa"] = f.kappa;
  return j;
}

void print_fit(const PowerLawFit& f) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < f.names.size(); ++i) {
    rows.push_back({f.names[i], fmt(f.values[i]), fmt(f.errors[i])});
  }
  std::cout << "model " << to_string(f.model) << ", r^2 = " << fmt(f.r_squared, 8) << '\n';
  print_table({"parameter", "value", "std.error"}, rows);
}

std::string default_column(PowerLawModel m) {
  switch (m) {
    case PowerLawModel::powerlaw: return "qfi_max";
    case PowerLawModel::pareto: return "omega_max";
    case PowerLawModel::offset: return "e2_abs";
  }
  return "";
}

PowerLawFit fit_file(const std::filesystem::path& input, PowerLawModel model,
                     const std::string& column, double kappa, int nmin,
                     std::string* used_column = nullptr) {
  const CsvTable t = read_csv(input);
  const std::string col = column.empty() ? default_column(model) : column;
  const std::size_t ci = t.column(col), ni = t.column("n");
  std::vector<double> ns, ys;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto n = t.number(i, ni);
    const auto y = t.number(i, ci);
    if (n && y && *n >= nmin) {
      ns.push_back(*n);
      ys.push_back(*y);
    }
  }
  if (used_column) *used_column = col;
  return fit_power_law(ns, ys, model, kappa);
}

int cmd_fit(const SweepConfig& c, const std::string& model_name, std::string input,
            const std::string& column, int nmin) {
  const PowerLawModel model = parse_power_law_model(model_name);
  if (input.empty()) input = (c.out / "peaks.csv").string();
  std::string used;
  const PowerLawFit f = fit_file(input, model, column, c.kappa, nmin, &used);
  write_json(c.out / ("fit_" + to_string(model) + ".json"), fit_json(f, used));
  print_fit(f);
  return 0;
}

int cmd_collapse(const SweepConfig& c, const std::string& kind_name, std::string input, int nmin) {
  const ObservableKind kind = parse_observable_kind(kind_name);
  if (input.empty()) input = (c.out / "sweep.csv").string();
  std::vector<SweepRecord> records;
  for (const auto& r : read_sweep_csv(input)) {
    if (r.n_spins >= nmin && (!c.nmax || r.n_spins <= *c.nmax)) records.push_back(r);
  }
  const CollapseFit f = run_collapse(records, kind, c);
  write_json(c.out / ("collapse_" + to_string(kind) + ".json"), collapse_json(f));
  print_collapse(f);
  return 0;
}

int cmd_bound(const SweepConfig& c, int n, double omega, const std::vector<double>& factors) {
  const std::vector<BoundRow> rows = bound_check({omega * c.kappa, c.kappa, n}, factors, c);
  CsvTable t;
  t.header = {"n", "omega_over_kappa", "t", "qfi", "qfi_per_t", "bound", "pass"};
  std::vector<std::vector<std::string>> table;
  bool ok = true;
  for (const auto& r : rows) {
    ok = ok && r.result.bound_satisfied;
    t.rows.push_back({std::to_string(n), format_number(omega), format_number(r.result.time),
                      format_number(r.result.qfi.value), format_number(r.result.rate),
                      format_number(r.result.bound), r.result.bound_satisfied ? "1" : "0"});
    table.push_back({fmt(r.result.time / r.tau, 3), fmt(r.result.time), fmt(r.result.qfi.value),
                     fmt(r.result.rate), fmt(r.result.bound),
                     r.result.bound_satisfied ? "PASS" : "FAIL"});
  }
  const auto path = c.out / ("bound_" + key_suffix(n, omega) + ".csv");
  write_csv(path, t);
  std::cout << "wrote " << path.string() << '\n';
  print_table({"T/tau", "T", "F_Q(T)", "F_Q/T", "N/(2kappa)", "check"}, table);
  if (!rows.empty()) std::cout << "steady-state F_Q = " << fmt(rows.front().steady_qfi) << '\n';
  std::cout << (ok ? "bound satisfied\n" : "bound VIOLATED\n");
  return ok ? 0 : 1;
}

// --- figure pipelines -------------------------------------------------------

SweepConfig figure_config(const SweepConfig& base, const std::string& fig) {
  SweepConfig c = base;
  c.cache_dir = base.cache_dir.empty() ? base.out : base.cache_dir;
  c.out = base.out / fig;
  return c;
}

int reproduce_fig1(SweepConfig c) {
  int status = 0;
  for (double omega : {0.5, 1.5}) {
    for (int n : {20, 40, 80}) {
      if (c.nmax && n > *c.nmax) continue;
      status |= cmd_trajectory(c, n, omega, 30.0, 0.05);
      status |= cmd_spectrum(c, n, omega, 20);
    }
  }
  return status;
}

int reproduce_fig2(SweepConfig c, bool default_sizes) {
  if (default_sizes) c.n_list = {20, 40, 80, 120, 160, 200};
  c.tasks = {Task::magnetization};
  const SweepResult r = run_sweep(c);
  report_failures(r);
  const CollapseFit f = run_collapse(r.records, ObservableKind::magnetization, c);
  write_json(c.out / "collapse_magnetization.json", collapse_json(f));
  print_collapse(f);
  return r.exit_code();
}

QfiScan scan_peaks(SweepConfig c) {
  c.tasks = {Task::qfi};
  QfiScan scan = qfi_scan(c);
  write_peaks_csv(c.out / "peaks.csv", scan.peaks);
  std::cout << "wrote " << (c.out / "peaks.csv").string() << '\n';
  return scan;
}

int reproduce_fig3(SweepConfig c) {
  const QfiScan scan = scan_peaks(c);
  report_failures(scan.sweep);
  print_peaks(scan.peaks);
  std::vector<double> ns, qmax, wmax;
  for (const auto& p : scan.peaks) {
    ns.push_back(p.n_spins);
    qmax.push_back(p.qfi_max);
    wmax.push_back(p.omega_max);
  }
  const PowerLawFit b = fit_power_law(ns, qmax, PowerLawModel::powerlaw);
  const PowerLawFit drift = fit_power_law(ns, wmax, PowerLawModel::pareto, 1.0);
  write_json(c.out / "fit_powerlaw.json", fit_json(b, "qfi_max"));
  write_json(c.out / "fit_pareto.json", fit_json(drift, "omega_max"));
  print_fit(b);
  print_fit(drift);
  const CollapseFit f = run_collapse(scan.sweep.records, ObservableKind::qfi, c);
  write_json(c.out / "collapse_qfi.json", collapse_json(f));
  print_collapse(f);
  const ConsistencyReport cr = check_exponent_consistency(b, f);
  write_json(c.out / "consistency.json",
             {{"b", cr.b}, {"b_error", cr.b_error}, {"eta_over_nu", cr.eta_over_nu},
              {"eta_over_nu_error", cr.eta_over_nu_error}, {"difference", cr.difference},
              {"combined_error", cr.combined_error}, {"consistent", cr.consistent}});
  std::cout << "b = " << fmt(cr.b) << ", eta/nu = " << fmt(cr.eta_over_nu) << ", |diff| = "
            << fmt(cr.difference) << " vs combined error " << fmt(cr.combined_error) << " -> "
            << (cr.consistent ? "consistent" : "inconsistent") << '\n';
  return scan.sweep.exit_code();
}

int reproduce_fig5(SweepConfig c) {
  const QfiScan scan = scan_peaks(c);
  SweepConfig cc = c;
  cc.tasks = {Task::qfi, Task::cfi};
  cc.points.clear();
  for (const auto& p : scan.peaks) cc.points.emplace_back(p.n_spins, p.omega_max);
  cc.csv_name = "cfi.csv";
  const SweepResult r = run_sweep(cc);
  report_failures(r);
  print_sweep(r);
  std::vector<double> ns, fc;
  for (const auto& rec : r.records) {
    if (rec.cfi_max && rec.qfi) {
      ns.push_back(rec.n_spins);
      fc.push_back(*rec.cfi_max);
      std::cout << "N=" << rec.n_spins << " F_C/F_Q = " << fmt(*rec.cfi_max / *rec.qfi) << '\n';
    }
  }
  const PowerLawFit f = fit_power_law(ns, fc, PowerLawModel::powerlaw);
  write_json(c.out / "fit_powerlaw.json", fit_json(f, "cfi_max"));
  print_fit(f);
  return std::max(scan.sweep.exit_code(), r.exit_code());
}

int reproduce_fig6(SweepConfig c) {
  const QfiScan scan = scan_peaks(c);
  SweepConfig cs = c;
  cs.tasks = {Task::spectrum};
  cs.points.clear();
  for (const auto& p : scan.peaks) {
    if (p.n_spins >= 10) cs.points.emplace_back(p.n_spins, p.omega_max);
  }
  cs.csv_name = "e2.csv";
  const SweepResult r = run_sweep(cs);
  report_failures(r);
  std::vector<double> ns, e2;
  for (const auto& rec : r.records) {
    if (rec.e2_abs) {
      ns.push_back(rec.n_spins);
      e2.push_back(*rec.e2_abs);
    }
  }
  const PowerLawFit f = fit_power_law(ns, e2, PowerLawModel::offset);
  write_json(c.out / "fit_offset.json", fit_json(f, "e2_abs"));
  print_fit(f);
  int status = r.exit_code();
  for (const auto& p : scan.peaks) {
    if (p.n_spins > 100) continue;
    status |= cmd_bound(c, p.n_spins, p.omega_max, {0.5, 1.0, 2.0, 4.0});
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"btclab: boundary time crystal sensing toolkit"};
  app.require_subcommand(1);
  GlobalFlags g;
  app.add_option("--config", g.config, "JSON config file");
  app.add_option("--nmax", g.nmax, "Largest N to include");
  app.add_option("--workers", g.workers, "Worker threads");
  app.add_flag("--force", g.force, "Recompute cached results");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--delta-omega", g.delta_omega, "Finite-difference step in units of kappa");

  PointFlags pf;
  int n = 0;
  double omega = 0.0;
  double t_max = 30.0, dt = 0.05;
  std::size_t k = 10;
  std::string input, model, column, kind = "magnetization", figure;
  int nmin = 0;
  std::vector<double> factors{0.5, 1.0, 2.0, 4.0};

  auto* traj = app.add_subcommand("trajectory", "Sz(t)/N for one (N, omega)");
  traj->add_option("--n", n, "Number of spins")->required();
  traj->add_option("--omega", omega, "omega / kappa")->required();
  traj->add_option("--t-max", t_max, "Final time (units of 1/kappa)");
  traj->add_option("--dt", dt, "Sampling interval");
  traj->add_option("--initial", pf.initial, "down, up or mixed");

  auto* spec = app.add_subcommand("spectrum", "Slowest Liouvillian eigenvalues");
  spec->add_option("--n", n, "Number of spins")->required();
  spec->add_option("--omega", omega, "omega / kappa")->required();
  spec->add_option("--k", k, "Number of eigenvalues");

  auto* mag = app.add_subcommand("magnetization", "Steady-state magnetization sweep");
  auto* qfi = app.add_subcommand("qfi-sweep", "QFI sweep with peak refinement");
  auto* cfi = app.add_subcommand("cfi-sweep", "Optimized CFI at the QFI peaks (or given omegas)");
  for (auto* sc : {mag, qfi, cfi}) {
    sc->add_option("--n", pf.n, "Sizes (overrides config n_list)");
    sc->add_option("--omega", pf.omega, "omega / kappa values (overrides config omega_grid)");
  }

  auto* coll = app.add_subcommand("collapse", "Finite-size-scaling collapse of a sweep CSV");
  coll->add_option("--input", input, "Sweep CSV (default <out>/sweep.csv)");
  coll->add_option("--kind", kind, "magnetization or qfi");
  coll->add_option("--nmin", nmin, "Smallest N to include");

  auto* fit = app.add_subcommand("fit", "Power-law fit of a CSV column against n");
  fit->add_option("--model", model, "powerlaw, pareto or offset")->required();
  fit->add_option("--input", input, "CSV with an n column (default <out>/peaks.csv)");
  fit->add_option("--column", column, "Column to fit (default by model)");
  fit->add_option("--nmin", nmin, "Smallest N to include");

  auto* bound = app.add_subcommand("bound-check", "F_Q(T)/T against N/(2 kappa)");
  bound->add_option("--n", n, "Number of spins")->required();
  bound->add_option("--omega", omega, "omega / kappa")->required();
  bound->add_option("--tau-factors", factors, "T in units of 1/|Re E2|");
  bound->add_option("--initial", pf.initial, "down, up or mixed");

  auto* repro = app.add_subcommand("reproduce", "Full pipeline for one figure");
  repro->add_option("figure", figure, "fig1, fig2, fig3, fig5 or fig6")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2", "fig3", "fig5", "fig6"}));

  for (auto* sc : app.get_subcommands({})) sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    SweepConfig c = build_config(g);
    apply_points(c, pf);
    c.validate();
    std::filesystem::create_directories(c.out);

    if (*traj) return cmd_trajectory(c, n, omega, t_max, dt);
    if (*spec) return cmd_spectrum(c, n, omega, k);
    if (*mag) {
      c.tasks = {Task::magnetization};
      const SweepResult r = run_sweep(c);
      print_sweep(r);
      report_failures(r);
      return r.exit_code();
    }
    if (*qfi) {
      const QfiScan scan = scan_peaks(c);
      report_failures(scan.sweep);
      print_peaks(scan.peaks);
      return scan.sweep.exit_code();
    }
    if (*cfi) {
      SweepConfig cc = c;
      cc.tasks = {Task::qfi, Task::cfi};
      if (pf.omega.empty()) {
        for (const auto& p : scan_peaks(c).peaks) cc.points.emplace_back(p.n_spins, p.omega_max);
        cc.csv_name = "cfi.csv";
      }
      const SweepResult r = run_sweep(cc);
      print_sweep(r);
      report_failures(r);
      return r.exit_code();
    }
    if (*coll) return cmd_collapse(c, kind, input, nmin);
    if (*fit) return cmd_fit(c, model, input, column, nmin);
    if (*bound) return cmd_bound(c, n, omega, factors);
    if (*repro) {
      const SweepConfig fc = figure_config(c, figure);
      if (figure == "fig1") return reproduce_fig1(fc);
      if (figure == "fig2") return reproduce_fig2(fc, fc.n_list == SweepConfig{}.n_list);
      if (figure == "fig3") return reproduce_fig3(fc);
      if (figure == "fig5") return reproduce_fig5(fc);
      if (figure == "fig6") return reproduce_fig6(fc);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage/config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
