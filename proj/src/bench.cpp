#include "fracgm/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <thread>
#include <tuple>

#include "fracgm/error.hpp"

namespace fracgm::bench {

std::string_view to_string(Solver solver) {
  switch (solver) {
    case Solver::kFracGM: return "fracgm";
    case Solver::kGncGM: return "gnc-gm";
    case Solver::kGncTLS: return "gnc-tls";
    case Solver::kClosedForm: return "svd";
  }
  return "unknown";
}

Solver parse_solver(std::string_view name) {
  for (Solver s : {Solver::kFracGM, Solver::kGncGM, Solver::kGncTLS, Solver::kClosedForm}) {
    if (to_string(s) == name) return s;
  }
  raise(ErrorCode::kInvalidArgument, "unknown solver '" + std::string(name) + "'");
}

void BenchOptions::validate() const {
  if (runs < 1) raise(ErrorCode::kInvalidArgument, "runs must be >= 1");
  if (n_points < 3) raise(ErrorCode::kInvalidArgument, "n_points must be >= 3");
  if (outlier_rates.empty()) raise(ErrorCode::kInvalidArgument, "no outlier rates given");
  for (double r : outlier_rates) {
    if (!(r >= 0.0 && r < 1.0)) raise(ErrorCode::kInvalidArgument, "outlier rates must lie in [0, 1)");
  }
  if (!(c > 0.0) || !(noise_bound > 0.0) || !(noise_sigma >= 0.0)) {
    raise(ErrorCode::kInvalidArgument, "c and noise bound must be positive, noise sigma >= 0");
  }
  if (solvers.empty()) raise(ErrorCode::kInvalidArgument, "no solvers selected");
}

std::uint64_t run_seed(std::uint64_t base, std::uint64_t grid, std::uint64_t run) {
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ grid) ^ run);
}

namespace {

using Clock = std::chrono::steady_clock;

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

GncSurrogate surrogate_of(Solver s) {
  return s == Solver::kGncTLS ? GncSurrogate::kTruncatedLeastSquares : GncSurrogate::kGemanMcClure;
}

}  // namespace

SceneConfig scene_config(const BenchOptions& o, double outlier_rate, bool translation,
                         std::uint64_t seed) {
  SceneConfig cfg;
  cfg.n_points = o.n_points;
  cfg.outlier_rate = outlier_rate;
  cfg.noise_sigma = o.noise_sigma;
  cfg.with_translation = translation;
  cfg.noise_bound = o.noise_bound;
  cfg.seed = seed;
  cfg.source = o.source;
  return cfg;
}

namespace {

RunRecord evaluate(const std::string& scenario, Solver solver, const SyntheticScene& scene,
                   int run, const BenchOptions& o) {
  RunRecord rec;
  rec.scenario = scenario;
  rec.solver = solver;
  rec.outlier_rate = scene.config.outlier_rate;
  rec.n_points = scene.config.n_points;
  rec.noise_bound = scene.config.noise_bound;
  rec.run = run;
  rec.seed = scene.config.seed;
  try {
    const auto start = Clock::now();
    SolveOutcome out = run_solver(solver, scene.correspondences, scene.config.with_translation, o.c,
                                  o.check_invariants);
    rec.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
    rec.rotation_error_deg = rotation_error_deg(out.transform.rotation, scene.ground_truth.rotation);
    rec.translation_error_m = translation_error(out.transform.translation, scene.ground_truth.translation);
    rec.iterations = out.iterations;
    rec.converged = out.converged;
    rec.gm_cost = out.gm_cost;
    rec.aux_violations = out.aux_violations;
    rec.min_system_eigen_ratio = out.min_system_eigen_ratio;
  } catch (const Error& e) {
    rec.error = e.what();
    rec.rotation_error_deg = std::numeric_limits<double>::quiet_NaN();
    rec.translation_error_m = std::numeric_limits<double>::quiet_NaN();
  }
  return rec;
}

std::vector<RunRecord> outlier_grid(const std::string& scenario, const BenchOptions& o,
                                    bool translation) {
  o.validate();
  const std::size_t rates = o.outlier_rates.size();
  const std::size_t runs = static_cast<std::size_t>(o.runs);
  const std::size_t solvers = o.solvers.size();
  std::vector<RunRecord> records(rates * runs * solvers);

  parallel_for(rates * runs, o.threads, [&](std::size_t job) {
    const std::size_t g = job / runs;
    const std::size_t r = job % runs;
    const SyntheticScene scene =
        generate_scene(scene_config(o, o.outlier_rates[g], translation, run_seed(o.seed, g, r)));
    for (std::size_t s = 0; s < solvers; ++s) {
      records[(s * rates + g) * runs + r] =
          evaluate(scenario, o.solvers[s], scene, static_cast<int>(r), o);
    }
  });
  return records;
}

Estimate to_estimate(const SolverResult& r, bool translation) {
  Estimate est;
  est.solver = r;
  const RigidTransform relaxed = devectorize(r.x);
  est.transform.rotation = project_to_so3(relaxed.rotation);
  if (translation) est.transform.translation = relaxed.translation;
  return est;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  // Shortest representation that round-trips.
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

SolveOutcome run_solver(Solver solver, const PointCorrespondences& corr, bool with_translation,
                        double c, bool check_invariants, bool record_trace) {
  SolveOutcome out;
  if (solver == Solver::kClosedForm) {
    out.transform = closed_form_alignment(corr, with_translation);
    const GemanMcClureProblem problem = with_translation ? build_registration_terms(corr, c)
                                                         : build_rotation_terms(corr, c);
    out.gm_cost = gm_cost(problem, vectorize(out.transform, problem.dim()));
    out.converged = true;
    return out;
  }

  Estimate est;
  if (solver == Solver::kFracGM) {
    SolverConfig cfg;
    cfg.c = c;
    cfg.check_system_psd = check_invariants;
    cfg.record_trace = record_trace;
    est = with_translation ? solve_registration(corr, cfg) : solve_rotation(corr, cfg);
  } else {
    const RigidTransform init = closed_form_alignment(corr, with_translation);
    const GemanMcClureProblem problem = with_translation ? build_registration_terms(corr, c)
                                                         : build_rotation_terms(corr, c);
    GncConfig cfg;
    cfg.c = c;
    cfg.surrogate = surrogate_of(solver);
    cfg.record_trace = record_trace;
    est = to_estimate(gnc_solve(problem, vectorize(init, problem.dim()), cfg), with_translation);
  }
  out.transform = est.transform;
  out.iterations = est.solver.iterations;
  out.converged = est.solver.converged;
  out.gm_cost = est.solver.final_cost;
  out.aux_violations = est.solver.aux_violations;
  out.min_system_eigen_ratio = est.solver.min_system_eigen_ratio;
  out.cost_trace.reserve(est.solver.trace.size());
  for (const auto& t : est.solver.trace) out.cost_trace.push_back(t.cost);
  return out;
}

std::vector<RunRecord> run_rotation_bench(const BenchOptions& options) {
  return outlier_grid("rotation", options, false);
}

std::vector<RunRecord> run_registration_bench(const BenchOptions& options) {
  return outlier_grid("registration", options, true);
}

std::vector<RunRecord> run_noise_sweep(const BenchOptions& options,
                                       const std::vector<double>& noise_bounds) {
  options.validate();
  if (noise_bounds.empty()) raise(ErrorCode::kInvalidArgument, "no noise bounds given");
  for (double b : noise_bounds) {
    if (!(b > 0.0)) raise(ErrorCode::kInvalidArgument, "noise bounds must be positive");
  }
  const std::size_t bounds = noise_bounds.size();
  const std::size_t runs = static_cast<std::size_t>(options.runs);
  const std::size_t solvers = options.solvers.size();
  std::vector<RunRecord> records(bounds * runs * solvers);

  parallel_for(runs, options.threads, [&](std::size_t r) {
    SyntheticScene scene = generate_scene(
        scene_config(options, options.outlier_rates.front(), true, run_seed(options.seed, 0, r)));
    for (std::size_t b = 0; b < bounds; ++b) {
      scene.config.noise_bound = noise_bounds[b];
      scene.correspondences.noise_bounds.setConstant(noise_bounds[b]);
      for (std::size_t s = 0; s < solvers; ++s) {
        records[(s * bounds + b) * runs + r] =
            evaluate("noise-sweep", options.solvers[s], scene, static_cast<int>(r), options);
      }
    }
  });
  return records;
}

ConvergenceReport run_convergence(const BenchOptions& options) {
  options.validate();
  std::vector<Solver> iterative;
  for (Solver s : options.solvers) {
    if (s != Solver::kClosedForm) iterative.push_back(s);
  }
  if (iterative.empty()) raise(ErrorCode::kInvalidArgument, "convergence needs an iterative solver");

  const std::size_t runs = static_cast<std::size_t>(options.runs);
  std::vector<std::vector<SolveOutcome>> outcomes(runs);
  std::vector<SyntheticScene> scenes(runs);
  parallel_for(runs, options.threads, [&](std::size_t r) {
    scenes[r] = generate_scene(
        scene_config(options, options.outlier_rates.front(), false, run_seed(options.seed, 0, r)));
    for (Solver s : iterative) {
      outcomes[r].push_back(
          run_solver(s, scenes[r].correspondences, false, options.c, options.check_invariants, true));
    }
  });

  ConvergenceReport report;
  for (std::size_t k = 0; k < iterative.size(); ++k) {
    for (std::size_t r = 0; r < runs; ++r) {
      const SolveOutcome& out = outcomes[r][k];
      ConvergenceSummary sum;
      sum.solver = iterative[k];
      sum.run = static_cast<int>(r);
      sum.seed = scenes[r].config.seed;
      sum.iterations = out.iterations;
      sum.final_cost = out.gm_cost;
      sum.rotation_error_deg = rotation_error_deg(out.transform.rotation, scenes[r].ground_truth.rotation);
      sum.iterations_to_1pct = out.iterations;
      sum.aux_violations = out.aux_violations;
      sum.min_system_eigen_ratio = out.min_system_eigen_ratio;
      for (std::size_t i = 0; i < out.cost_trace.size(); ++i) {
        report.traces.push_back({iterative[k], sum.run, sum.seed, static_cast<int>(i + 1), out.cost_trace[i]});
      }
      for (std::size_t i = 0; i < out.cost_trace.size(); ++i) {
        if (std::abs(out.cost_trace[i] - out.gm_cost) <= 0.01 * std::abs(out.gm_cost)) {
          sum.iterations_to_1pct = static_cast<int>(i + 1);
          break;
        }
      }
      report.summaries.push_back(sum);
    }
  }
  return report;
}

std::vector<TimingRecord> run_timing(const BenchOptions& options, const std::vector<int>& sizes) {
  options.validate();
  if (sizes.empty()) raise(ErrorCode::kInvalidArgument, "no problem sizes given");
  std::vector<TimingRecord> records;
  SolverConfig cfg;
  cfg.c = options.c;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    if (sizes[g] < 3) raise(ErrorCode::kInvalidArgument, "problem sizes must be >= 3");
    BenchOptions sized = options;
    sized.n_points = sizes[g];
    for (int r = 0; r < options.runs; ++r) {
      const SyntheticScene scene = generate_scene(
          scene_config(sized, options.outlier_rates.front(), true, run_seed(options.seed, g, r)));
      const auto start = Clock::now();
      const Estimate est = solve_registration(scene.correspondences, cfg);
      const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
      records.push_back({sizes[g], r, scene.config.seed, elapsed, est.solver.iterations});
    }
  }
  return records;
}

double fit_scaling_exponent(const std::vector<TimingRecord>& records) {
  std::map<int, std::pair<double, int>> by_n;
  for (const auto& r : records) {
    by_n[r.n_points].first += r.wall_time_s;
    by_n[r.n_points].second += 1;
  }
  if (by_n.size() < 2) raise(ErrorCode::kInvalidArgument, "need at least two problem sizes");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(by_n.size());
  for (const auto& [size, acc] : by_n) {
    const double x = std::log(static_cast<double>(size));
    const double y = std::log(acc.first / acc.second);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
  struct Key {
    std::string scenario;
    Solver solver;
    double grid;
    bool operator<(const Key& o) const {
      return std::tie(scenario, solver, grid) < std::tie(o.scenario, o.solver, o.grid);
    }
  };
  std::map<Key, std::vector<const RunRecord*>> groups;
  for (const auto& r : records) {
    const double grid = r.scenario == "noise-sweep" ? r.noise_bound : r.outlier_rate;
    groups[{r.scenario, r.solver, grid}].push_back(&r);
  }

  std::vector<SummaryRow> rows;
  for (const auto& [key, group] : groups) {
    const bool translation = key.scenario != "rotation";
    for (int m = 0; m < (translation ? 2 : 1); ++m) {
      SummaryRow row;
      row.scenario = key.scenario;
      row.solver = key.solver;
      row.grid_value = key.grid;
      row.metric = m == 0 ? "rotation_error_deg" : "translation_error_m";
      row.threshold = m == 0 ? 1.0 : 0.1;
      std::vector<double> values;
      int within = 0;
      for (const RunRecord* r : group) {
        ++row.count;
        if (!r->error.empty()) {
          ++row.failures;
          continue;
        }
        const double v = m == 0 ? r->rotation_error_deg : r->translation_error_m;
        values.push_back(v);
        if (v < row.threshold) ++within;
      }
      double total = 0.0;
      for (double v : values) total += v;
      row.mean = values.empty() ? std::numeric_limits<double>::quiet_NaN() : total / values.size();
      row.p25 = quantile(values, 0.25);
      row.median = quantile(values, 0.5);
      row.p75 = quantile(values, 0.75);
      row.p95 = quantile(values, 0.95);
      row.fraction_within = static_cast<double>(within) / row.count;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char ch : value) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

void write_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << "scenario,solver,outlier_rate,n_points,noise_bound,run,seed,rotation_error_deg,"
         "translation_error_m,iterations,wall_time_s,converged,gm_cost,error\r\n";
  for (const auto& r : records) {
    out << csv_field(r.scenario) << ',' << to_string(r.solver) << ',' << fmt(r.outlier_rate) << ','
        << r.n_points << ',' << fmt(r.noise_bound) << ',' << r.run << ',' << r.seed << ','
        << fmt(r.rotation_error_deg) << ',' << fmt(r.translation_error_m) << ',' << r.iterations
        << ',' << fmt(r.wall_time_s) << ',' << (r.converged ? "true" : "false") << ','
        << fmt(r.gm_cost) << ',' << csv_field(r.error) << "\r\n";
  }
}

void write_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "scenario,solver,metric,grid_value,count,failures,mean,p25,median,p75,p95,threshold,"
         "fraction_within\r\n";
  for (const auto& r : rows) {
    out << csv_field(r.scenario) << ',' << to_string(r.solver) << ',' << r.metric << ','
        << fmt(r.grid_value) << ',' << r.count << ',' << r.failures << ',' << fmt(r.mean) << ','
        << fmt(r.p25) << ',' << fmt(r.median) << ',' << fmt(r.p75) << ',' << fmt(r.p95) << ','
        << fmt(r.threshold) << ',' << fmt(r.fraction_within) << "\r\n";
  }
}

void write_csv(std::ostream& out, const std::vector<ConvergenceRecord>& records) {
  out << "solver,run,seed,iteration,gm_cost\r\n";
  for (const auto& r : records) {
    out << to_string(r.solver) << ',' << r.run << ',' << r.seed << ',' << r.iteration << ','
        << fmt(r.gm_cost) << "\r\n";
  }
}

void write_csv(std::ostream& out, const std::vector<ConvergenceSummary>& rows) {
  out << "solver,run,seed,iterations,iterations_to_1pct,final_cost,rotation_error_deg\r\n";
  for (const auto& r : rows) {
    out << to_string(r.solver) << ',' << r.run << ',' << r.seed << ',' << r.iterations << ','
        << r.iterations_to_1pct << ',' << fmt(r.final_cost) << ',' << fmt(r.rotation_error_deg)
        << "\r\n";
  }
}

void write_csv(std::ostream& out, const std::vector<TimingRecord>& records) {
  out << "n_points,run,seed,wall_time_s,iterations\r\n";
  for (const auto& r : records) {
    out << r.n_points << ',' << r.run << ',' << r.seed << ',' << fmt(r.wall_time_s) << ','
        << r.iterations << "\r\n";
  }
}

}  // namespace fracgm::bench
