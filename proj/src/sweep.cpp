#include "btc/sweep.hpp"

#include "btc/csv.hpp"
#include "btc/snapshot.hpp"
#include "btc/spectrum.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace btc {

using nlohmann::json;

namespace {

const std::vector<std::pair<Task, const char*>> kTaskNames{
    {Task::trajectory, "trajectory"}, {Task::spectrum, "spectrum"},
    {Task::magnetization, "magnetization"}, {Task::qfi, "qfi"},
    {Task::cfi, "cfi"}, {Task::collapse, "collapse"},
    {Task::fits, "fits"}, {Task::bound, "bound"}};

std::string exact(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

Task parse_task(const std::string& label) {
  for (const auto& [task, name] : kTaskNames) {
    if (label == name) return task;
  }
  throw ConfigError("unknown task '" + label + "'");
}

std::string to_string(Task task) {
  for (const auto& [t, name] : kTaskNames) {
    if (t == task) return name;
  }
  return "?";
}

bool is_point_task(Task task) {
  return task == Task::spectrum || task == Task::magnetization || task == Task::qfi ||
         task == Task::cfi;
}

void SweepConfig::validate() const {
  if (points.empty()) {
    if (n_list.empty()) throw ConfigError("n_list must be nonempty");
    if (omega_grid.empty()) throw ConfigError("omega_grid must be nonempty");
  }
  for (int n : n_list) {
    if (n < 1) throw ConfigError("n_list entries must be >= 1");
  }
  for (double w : omega_grid) {
    if (!std::isfinite(w) || w < 0.0) throw ConfigError("omega_grid entries must be finite and >= 0");
  }
  for (const auto& [n, w] : points) {
    if (n < 1 || !std::isfinite(w) || w < 0.0) throw ConfigError("invalid explicit point");
  }
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ConfigError("kappa must be > 0");
  if (!(delta_omega > 0.0) || !std::isfinite(delta_omega)) throw ConfigError("delta_omega must be > 0");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (nmax && *nmax < 1) throw ConfigError("nmax must be >= 1");
  if (theta_points < 1 || phi_points < 1) throw ConfigError("angle grids need at least one point");
  if (!(dy_rel > 0.0)) throw ConfigError("dy_rel must be > 0");
  if (!(window_min < window_max)) throw ConfigError("collapse window must satisfy min < max");
  if (!(steady.residual_tolerance > 0.0) || !(steady.hermiticity_tolerance > 0.0) ||
      !(spectrum_tolerance > 0.0) || !(evolve.tolerance > 0.0)) {
    throw ConfigError("tolerances must be > 0");
  }
  if (initial_state != "down" && initial_state != "up" && initial_state != "mixed") {
    throw ConfigError("initial_state must be down, up or mixed");
  }
  if (out.empty()) throw ConfigError("output directory must be set");
  if (sweep_points().empty()) throw ConfigError("no sweep points left after applying nmax");
}

std::vector<int> SweepConfig::sizes() const {
  std::set<int> s;
  for (int n : n_list) {
    if (!nmax || n <= *nmax) s.insert(n);
  }
  return {s.begin(), s.end()};
}

std::vector<std::pair<int, double>> SweepConfig::sweep_points() const {
  std::set<std::pair<int, double>> s;
  if (!points.empty()) {
    for (const auto& p : points) {
      if (!nmax || p.first <= *nmax) s.insert(p);
    }
  } else {
    for (int n : sizes()) {
      for (double w : omega_grid) s.insert({n, w});
    }
  }
  return {s.begin(), s.end()};
}

bool SweepConfig::wants(Task task) const {
  return std::find(tasks.begin(), tasks.end(), task) != tasks.end();
}

std::string SweepConfig::tolerance_hash(Task task) const {
  std::string text = to_string(task) + "|k=" + exact(kappa);
  switch (task) {
    case Task::magnetization:
      text += "|r=" + exact(steady.residual_tolerance) + "|h=" + exact(steady.hermiticity_tolerance);
      break;
    case Task::qfi:
      text += "|r=" + exact(steady.residual_tolerance) + "|h=" + exact(steady.hermiticity_tolerance) +
              "|d=" + exact(delta_omega);
      break;
    case Task::cfi:
      text += "|r=" + exact(steady.residual_tolerance) + "|h=" + exact(steady.hermiticity_tolerance) +
              "|d=" + exact(delta_omega) + "|t=" + std::to_string(theta_points) +
              "|p=" + std::to_string(phi_points);
      break;
    case Task::spectrum:
      text += "|s=" + exact(spectrum_tolerance);
      break;
    default:
      text += "|e=" + exact(evolve.tolerance) + "|d=" + exact(delta_omega);
      break;
  }
  return fnv1a(text);
}

SweepConfig config_from_json(const std::string& text, SweepConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "n_list") {
        c.n_list = v.get<std::vector<int>>();
      } else if (key == "omega_grid") {
        if (v.is_object()) {
          c.omega_grid = linspace(v.at("min").get<double>(), v.at("max").get<double>(),
                                  v.at("count").get<std::size_t>());
        } else {
          c.omega_grid = v.get<std::vector<double>>();
        }
      } else if (key == "points") {
        c.points.clear();
        for (const auto& p : v) c.points.emplace_back(p.at(0).get<int>(), p.at(1).get<double>());
      } else if (key == "kappa") {
        c.kappa = v.get<double>();
      } else if (key == "tasks") {
        c.tasks.clear();
        for (const auto& t : v) c.tasks.push_back(parse_task(t.get<std::string>()));
      } else if (key == "delta_omega") {
        c.delta_omega = v.get<double>();
      } else if (key == "tolerances") {
        for (const auto& [tk, tv] : v.items()) {
          if (tk == "steady_residual") c.steady.residual_tolerance = tv.get<double>();
          else if (tk == "steady_hermiticity") c.steady.hermiticity_tolerance = tv.get<double>();
          else if (tk == "spectrum") c.spectrum_tolerance = tv.get<double>();
          else if (tk == "evolve") c.evolve.tolerance = tv.get<double>();
          else throw ConfigError("unknown tolerance '" + tk + "'");
        }
      } else if (key == "out") {
        c.out = v.get<std::string>();
      } else if (key == "workers") {
        c.workers = v.get<int>();
      } else if (key == "force") {
        c.force = v.get<bool>();
      } else if (key == "nmax") {
        c.nmax = v.get<int>();
      } else if (key == "theta_points") {
        c.theta_points = v.get<std::size_t>();
      } else if (key == "phi_points") {
        c.phi_points = v.get<std::size_t>();
      } else if (key == "refine_points") {
        c.refine_points = v.get<std::size_t>();
      } else if (key == "dy_rel") {
        c.dy_rel = v.get<double>();
      } else if (key == "window") {
        c.window_min = v.at(0).get<double>();
        c.window_max = v.at(1).get<double>();
      } else if (key == "initial_state") {
        c.initial_state = v.get<std::string>();
      } else if (key == "snapshots") {
        c.snapshots = v.get<bool>();
      } else {
        throw ConfigError("unknown config field '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

SweepConfig load_config(const std::filesystem::path& path, SweepConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str(), std::move(base));
}

DensityMatrix initial_state(const CollectiveSpinBasis& basis, const std::string& label) {
  if (label == "down") return DensityMatrix::dicke_state(basis, basis.dim() - 1);
  if (label == "up") return DensityMatrix::dicke_state(basis, 0);
  if (label == "mixed") return DensityMatrix::maximally_mixed(basis);
  throw ConfigError("initial state must be down, up or mixed");
}

const SweepRecord* SweepResult::find(int n, double omega) const {
  for (const auto& r : records) {
    if (r.n_spins == n && r.omega_over_kappa == omega) return &r;
  }
  return nullptr;
}

namespace {

using Values = std::map<std::string, double>;

struct TaskOutcome {
  Task task;
  bool ok = true;
  Values values;
  std::string message;
};

std::string cache_key(int n, double w, Task task, const std::string& hash) {
  return std::to_string(n) + "|" + exact(w) + "|" + to_string(task) + "|" + hash;
}

std::map<std::string, Values> load_cache(const std::filesystem::path& path) {
  std::map<std::string, Values> cache;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (!j.at("ok").get<bool>()) continue;
      cache[cache_key(j.at("n").get<int>(), j.at("omega").get<double>(),
                      parse_task(j.at("task").get<std::string>()),
                      j.at("hash").get<std::string>())] = j.at("values").get<Values>();
    } catch (const std::exception&) {
      // A torn final line from an interrupted run; the entry is recomputed.
    }
  }
  return cache;
}

void apply(SweepRecord& r, const Values& values) {
  for (const auto& [k, v] : values) {
    if (k == "sz_ss_per_n") r.sz_ss_per_n = v;
    else if (k == "qfi") r.qfi = v;
    else if (k == "cfi_max") r.cfi_max = v;
    else if (k == "theta_opt") r.theta_opt = v;
    else if (k == "phi_opt") r.phi_opt = v;
    else if (k == "e2_abs") r.e2_abs = v;
    else r.diagnostics[k] = v;
  }
}

std::vector<TaskOutcome> compute_point(int n, double w, const std::vector<Task>& tasks,
                                       const SweepConfig& cfg, SteadyStateSolver& solver) {
  const ModelParams params{w * cfg.kappa, cfg.kappa, n};
  std::vector<TaskOutcome> out;
  std::optional<DerivativeStencil> stencil;
  std::string stencil_error;
  const auto need_stencil = [&] {
    if (stencil || !stencil_error.empty()) return;
    try {
      stencil = steady_state_stencil(params, cfg.delta_omega * cfg.kappa, solver);
    } catch (const std::exception& e) {
      stencil_error = e.what();
    }
  };

  for (Task task : tasks) {
    TaskOutcome o{task, true, {}, {}};
    try {
      switch (task) {
        case Task::magnetization: {
          SteadyStateDiagnostics diag;
          const Superoperator l = build_liouvillian(params);
          const DensityMatrix rho = solver.solve(l, &diag);
          o.values["sz_ss_per_n"] =
              expectation(rho, spin_operator(rho.basis(), SpinAxis::z)) / static_cast<double>(n);
          o.values["steady_residual"] = diag.residual;
          if (cfg.snapshots) save_steady_state(cfg.out / "snapshots", rho, params, cfg.steady, diag);
          break;
        }
        case Task::qfi: {
          need_stencil();
          if (!stencil) throw SolverError(stencil_error);
          const FisherResult q = qfi_from_stencil(*stencil);
          require_refined(q, "qfi");
          o.values = {{"qfi", q.value}, {"qfi_coarse", q.coarse_value}, {"qfi_fine", q.fine_value}};
          break;
        }
        case Task::cfi: {
          need_stencil();
          if (!stencil) throw SolverError(stencil_error);
          const CfiOptimum best =
              optimize_cfi_from_stencil(*stencil, linspace(0.0, std::numbers::pi, cfg.theta_points),
                                        linspace(0.0, std::numbers::pi, cfg.phi_points));
          o.values = {{"cfi_max", best.fisher.value},
                      {"theta_opt", best.setting.theta},
                      {"phi_opt", best.setting.phi},
                      {"cfi_coarse", best.fisher.coarse_value},
                      {"cfi_fine", best.fisher.fine_value}};
          break;
        }
        case Task::spectrum: {
          SpectrumOptions opts;
          opts.tolerance = cfg.spectrum_tolerance;
          const DecayRate d = dominant_decay_rate(build_liouvillian(params), opts);
          o.values = {{"e2_abs", d.rate}, {"e2_re", d.eigenvalue.real()}, {"e2_im", d.eigenvalue.imag()}};
          break;
        }
        default:
          break;
      }
    } catch (const std::exception& e) {
      o.ok = false;
      o.message = e.what();
    }
    out.push_back(std::move(o));
  }
  return out;
}

void write_failures(const std::filesystem::path& path, const std::vector<TaskFailure>& failures) {
  if (failures.empty()) {
    std::filesystem::remove(path);
    return;
  }
  CsvTable t;
  t.header = {"n", "omega_over_kappa", "task", "message"};
  for (const auto& f : failures) {
    t.rows.push_back({std::to_string(f.n_spins), format_number(f.omega_over_kappa),
                      to_string(f.task), f.message});
  }
  write_csv(path, t);
}

}  // namespace

SweepResult run_sweep(const SweepConfig& config) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(config.out, ec);
  {
    std::ofstream probe(config.out / ".write_probe");
    if (ec || !probe) throw ConfigError("output directory not writable: " + config.out.string());
  }
  std::filesystem::remove(config.out / ".write_probe");

  std::vector<Task> point_tasks;
  for (Task t : config.tasks) {
    if (is_point_task(t) && std::find(point_tasks.begin(), point_tasks.end(), t) == point_tasks.end()) {
      point_tasks.push_back(t);
    }
  }
  std::map<Task, std::string> hashes;
  for (Task t : point_tasks) hashes[t] = config.tolerance_hash(t);

  const std::filesystem::path cache_dir = config.cache_dir.empty() ? config.out : config.cache_dir;
  std::filesystem::create_directories(cache_dir);
  const auto cache_path = cache_dir / "cache.jsonl";
  const auto csv_path = config.out / config.csv_name;
  const std::map<std::string, Values> cache = config.force ? std::map<std::string, Values>{}
                                                           : load_cache(cache_path);

  const auto points = config.sweep_points();
  SweepResult result;
  result.records.resize(points.size());
  struct Job {
    std::size_t index;
    std::vector<Task> tasks;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto& r = result.records[i];
    r.n_spins = points[i].first;
    r.omega_over_kappa = points[i].second;
    Job job{i, {}};
    for (Task t : point_tasks) {
      const auto it = cache.find(cache_key(r.n_spins, r.omega_over_kappa, t, hashes[t]));
      if (it != cache.end()) {
        apply(r, it->second);
        ++result.cached;
      } else {
        job.tasks.push_back(t);
      }
    }
    if (!job.tasks.empty()) jobs.push_back(std::move(job));
  }

  std::mutex mutex;
  std::ofstream cache_out(cache_path, std::ios::app);
  if (!cache_out) throw ConfigError("cannot write " + cache_path.string());
  if (jobs.empty()) write_sweep_csv(csv_path, result.records);

  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  const auto worker = [&] {
    SteadyStateSolver solver(config.steady);
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const Job& job = jobs[j];
      const auto [n, w] = points[job.index];
      std::vector<TaskOutcome> outcomes = compute_point(n, w, job.tasks, config, solver);

      const std::lock_guard lock(mutex);
      SweepRecord& r = result.records[job.index];
      for (const auto& o : outcomes) {
        json line{{"n", n}, {"omega", w}, {"task", to_string(o.task)},
                  {"hash", hashes[o.task]}, {"ok", o.ok}, {"values", o.values}};
        if (!o.ok) {
          line["message"] = o.message;
          result.failures.push_back({n, w, o.task, o.message});
        } else {
          apply(r, o.values);
        }
        cache_out << line.dump() << '\n';
        ++result.computed;
      }
      cache_out.flush();
      write_sweep_csv(csv_path, result.records);
      ++done;
      if (!config.quiet) {
        std::cerr << "[" << done << "/" << jobs.size() << "] N=" << n
                  << " omega=" << format_number(w);
        for (const auto& o : outcomes) {
          std::cerr << " " << to_string(o.task) << (o.ok ? ":ok" : ":FAILED");
        }
        std::cerr << '\n';
      }
    }
  };
  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(config.workers), jobs.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  std::sort(result.failures.begin(), result.failures.end(), [](const auto& a, const auto& b) {
    return std::tie(a.n_spins, a.omega_over_kappa, a.task) <
           std::tie(b.n_spins, b.omega_over_kappa, b.task);
  });
  write_failures(config.out / "failures.csv", result.failures);
  return result;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRecord>& records) {
  CsvTable t = parse_csv(std::string(kSweepHeader) + "\n");
  std::vector<const SweepRecord*> sorted;
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const SweepRecord* a, const SweepRecord* b) {
    return std::tie(a->n_spins, a->omega_over_kappa) < std::tie(b->n_spins, b->omega_over_kappa);
  });
  for (const SweepRecord* r : sorted) {
    t.rows.push_back({std::to_string(r->n_spins), format_number(r->omega_over_kappa),
                      format_optional(r->sz_ss_per_n), format_optional(r->qfi),
                      format_optional(r->cfi_max), format_optional(r->theta_opt),
                      format_optional(r->phi_opt), format_optional(r->e2_abs)});
  }
  write_csv(path, t);
}

std::vector<SweepRecord> read_sweep_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const auto col = [&](const char* name) { return t.column(name); };
  std::vector<SweepRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    SweepRecord r;
    r.n_spins = static_cast<int>(t.number(i, col("n")).value_or(0));
    r.omega_over_kappa = t.number(i, col("omega_over_kappa")).value_or(0.0);
    r.sz_ss_per_n = t.number(i, col("sz_ss_per_n"));
    r.qfi = t.number(i, col("qfi"));
    r.cfi_max = t.number(i, col("cfi_max"));
    r.theta_opt = t.number(i, col("theta_opt"));
    r.phi_opt = t.number(i, col("phi_opt"));
    r.e2_abs = t.number(i, col("e2_abs"));
    out.push_back(r);
  }
  return out;
}

ScalingDataset dataset_from_records(const std::vector<SweepRecord>& records, ObservableKind kind,
                                    double dy_rel) {
  std::vector<int> ns;
  std::vector<double> xs, ys;
  for (const auto& r : records) {
    const auto& field = kind == ObservableKind::magnetization ? r.sz_ss_per_n : r.qfi;
    if (!field) continue;
    ns.push_back(r.n_spins);
    xs.push_back(r.omega_over_kappa);
    ys.push_back(kind == ObservableKind::magnetization ? std::abs(*field) * r.n_spins : *field);
  }
  return make_dataset(kind, ns, xs, ys, dy_rel);
}

QfiScan qfi_scan(const SweepConfig& config) {
  SweepConfig c = config;
  c.points.clear();
  if (!c.wants(Task::qfi)) c.tasks.push_back(Task::qfi);
  const SweepResult coarse = run_sweep(c);

  const auto grid_points = c.sweep_points();
  std::set<std::pair<int, double>> all(grid_points.begin(), grid_points.end());
  for (int n : c.sizes()) {
    std::vector<std::pair<double, double>> curve;
    for (const auto& r : coarse.records) {
      if (r.n_spins == n && r.qfi) curve.emplace_back(r.omega_over_kappa, *r.qfi);
    }
    if (curve.size() < 3 || c.refine_points == 0) continue;
    std::size_t i = 0;
    for (std::size_t k = 1; k < curve.size(); ++k) {
      if (curve[k].second > curve[i].second) i = k;
    }
    const double lo = curve[i == 0 ? 0 : i - 1].first;
    const double hi = curve[std::min(i + 1, curve.size() - 1)].first;
    for (double w : linspace(lo, hi, c.refine_points)) all.insert({n, w});
  }
  c.points.assign(all.begin(), all.end());

  QfiScan scan;
  scan.sweep = run_sweep(c);
  for (int n : c.sizes()) {
    std::vector<double> x, y;
    for (const auto& r : scan.sweep.records) {
      if (r.n_spins == n && r.qfi) {
        x.push_back(r.omega_over_kappa);
        y.push_back(*r.qfi);
      }
    }
    if (x.size() < 3) continue;
    const Peak p = find_peak(x, y);
    scan.peaks.push_back({n, p.x, p.y, p.interior});
  }
  return scan;
}

void write_peaks_csv(const std::filesystem::path& path, const std::vector<PeakRow>& peaks) {
  CsvTable t;
  t.header = {"n", "omega_max", "qfi_max", "interior"};
  for (const auto& p : peaks) {
    t.rows.push_back({std::to_string(p.n_spins), format_number(p.omega_max),
                      format_number(p.qfi_max), p.interior ? "1" : "0"});
  }
  write_csv(path, t);
}

std::vector<PeakRow> read_peaks_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  std::vector<PeakRow> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    PeakRow p;
    p.n_spins = static_cast<int>(t.number(i, t.column("n")).value_or(0));
    p.omega_max = t.number(i, t.column("omega_max")).value_or(0.0);
    p.qfi_max = t.number(i, t.column("qfi_max")).value_or(0.0);
    if (t.has_column("interior")) p.interior = t.number(i, t.column("interior")).value_or(1) != 0;
    out.push_back(p);
  }
  return out;
}

CollapseDefaults collapse_defaults(ObservableKind kind) {
  if (kind == ObservableKind::magnetization) {
    return {{1.0, 1.5, 0.45}, {0.8, 0.3, 0.0}, {1.2, 4.0, 1.5}};
  }
  return {{1.0, 1.5, 2.0}, {0.8, 0.3, 0.5}, {1.2, 4.0, 4.0}};
}

CollapseFit run_collapse(const std::vector<SweepRecord>& records, ObservableKind kind,
                         const SweepConfig& config) {
  const ScalingDataset data = dataset_from_records(records, kind, config.dy_rel);
  const CollapseDefaults d = collapse_defaults(kind);
  CollapseOptions opts;
  opts.x_min = config.window_min;
  opts.x_max = config.window_max;
  return fit_collapse(data, d.guess, d.lower, d.upper, opts);
}

std::vector<BoundRow> bound_check(const ModelParams& params, const std::vector<double>& tau_factors,
                                  const SweepConfig& config) {
  params.validate();
  SpectrumOptions sopts;
  sopts.tolerance = config.spectrum_tolerance;
  const DecayRate d = dominant_decay_rate(build_liouvillian(params), sopts);
  std::vector<double> factors = tau_factors;
  std::sort(factors.begin(), factors.end());
  factors.erase(std::unique(factors.begin(), factors.end()), factors.end());
  std::vector<double> times;
  for (double f : factors) times.push_back(f * d.tau);

  const DensityMatrix rho0 = initial_state(CollectiveSpinBasis(params.n_spins), config.initial_state);
  const std::vector<TrajectoryQfi> series =
      qfi_rate_series(params, rho0, times, config.delta_omega * params.kappa, config.evolve);
  SteadyStateSolver solver(config.steady);
  const double steady = qfi_fidelity(params, config.delta_omega * params.kappa, solver).value;

  std::vector<BoundRow> out;
  for (const auto& s : series) {
    out.push_back({params.n_spins, params.omega / params.kappa, d.tau, s, steady});
  }
  return out;
}

}  // namespace btc
