#pragma once

// Monte-Carlo harness over synthetic scenes. Every record carries the seed
// of its scene, so a single row can be regenerated with generate_scene.
// Runs are spread over a worker pool; records are stored by (grid point,
// run) index, so results do not depend on thread scheduling.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fracgm/baselines.hpp"
#include "fracgm/geometry.hpp"
#include "fracgm/synthetic.hpp"

namespace fracgm::bench {

enum class Solver { kFracGM, kGncGM, kGncTLS, kClosedForm };

std::string_view to_string(Solver solver);
/// "fracgm", "gnc-gm", "gnc-tls", "svd". Throws kInvalidArgument otherwise.
Solver parse_solver(std::string_view name);

struct BenchOptions {
  std::vector<double> outlier_rates{0.2, 0.4, 0.6, 0.8};
  int n_points = 50;
  int runs = 40;
  std::uint64_t seed = 1;
  double noise_sigma = 0.01;
  double noise_bound = 0.1;
  double c = 1.0;
  std::vector<Solver> solvers{Solver::kFracGM, Solver::kGncGM, Solver::kGncTLS,
                              Solver::kClosedForm};
  PointSource source = RandomCube{};
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
  /// Enables SolverConfig::check_system_psd on FracGM solves.
  bool check_invariants = false;

  void validate() const;
};

/// Seed of run `run` at grid point `grid` (splitmix64 mixing of the base seed).
std::uint64_t run_seed(std::uint64_t base, std::uint64_t grid, std::uint64_t run);

/// Scene settings the harness uses for one run; feed to generate_scene to
/// reproduce a CSV row.
SceneConfig scene_config(const BenchOptions& options, double outlier_rate, bool with_translation,
                         std::uint64_t seed);

struct SolveOutcome {
  RigidTransform transform;
  int iterations = 0;
  bool converged = false;
  double gm_cost = 0.0;
  std::size_t aux_violations = 0;
  std::optional<double> min_system_eigen_ratio;
  std::vector<double> cost_trace;
};

/// One solver on one correspondence set; GNC and FracGM share the Horn
/// initial guess and the same homogenized problem.
SolveOutcome run_solver(Solver solver, const PointCorrespondences& corr, bool with_translation,
                        double c, bool check_invariants = false, bool record_trace = false);

struct RunRecord {
  std::string scenario;
  Solver solver = Solver::kFracGM;
  double outlier_rate = 0.0;
  int n_points = 0;
  double noise_bound = 0.0;
  int run = 0;
  std::uint64_t seed = 0;
  double rotation_error_deg = 0.0;
  double translation_error_m = 0.0;
  int iterations = 0;
  double wall_time_s = 0.0;
  bool converged = false;
  double gm_cost = 0.0;
  std::size_t aux_violations = 0;
  std::optional<double> min_system_eigen_ratio;
  /// Non-empty when the solver threw; errors are then NaN.
  std::string error;
};

/// Rotation-only scenes over options.outlier_rates.
std::vector<RunRecord> run_rotation_bench(const BenchOptions& options);

/// Registration scenes (random translation, ||t|| <= 1) over options.outlier_rates.
std::vector<RunRecord> run_registration_bench(const BenchOptions& options);

/// Registration at outlier_rates.front() with the same scenes re-solved under
/// each noise bound.
std::vector<RunRecord> run_noise_sweep(const BenchOptions& options,
                                       const std::vector<double>& noise_bounds);

struct ConvergenceRecord {
  Solver solver = Solver::kFracGM;
  int run = 0;
  std::uint64_t seed = 0;
  int iteration = 0;
  double gm_cost = 0.0;
};

struct ConvergenceSummary {
  Solver solver = Solver::kFracGM;
  int run = 0;
  std::uint64_t seed = 0;
  int iterations = 0;
  /// First iteration whose cost is within 1% of the final cost.
  int iterations_to_1pct = 0;
  double final_cost = 0.0;
  double rotation_error_deg = 0.0;
  std::size_t aux_violations = 0;
  std::optional<double> min_system_eigen_ratio;
};

struct ConvergenceReport {
  std::vector<ConvergenceRecord> traces;
  std::vector<ConvergenceSummary> summaries;
};

/// Rotation scenes at outlier_rates.front(); per-iteration GM cost for the
/// iterative solvers (FracGM, GNC-GM, GNC-TLS) in options.solvers.
ConvergenceReport run_convergence(const BenchOptions& options);

struct TimingRecord {
  int n_points = 0;
  int run = 0;
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
  int iterations = 0;
};

/// Wall time of solve_registration alone (scene generation excluded), run
/// serially so each solve is single threaded and uncontended.
std::vector<TimingRecord> run_timing(const BenchOptions& options, const std::vector<int>& sizes);

/// Least-squares slope of log(mean time) against log(N).
double fit_scaling_exponent(const std::vector<TimingRecord>& records);

struct SummaryRow {
  std::string scenario;
  Solver solver = Solver::kFracGM;
  std::string metric;
  double grid_value = 0.0;
  int count = 0;
  int failures = 0;
  double mean = 0.0;
  double p25 = 0.0;
  double median = 0.0;
  double p75 = 0.0;
  double p95 = 0.0;
  /// Performance profile entry: fraction of all runs with error below threshold.
  double fraction_within = 0.0;
  double threshold = 0.0;
};

/// Per (solver, grid value) statistics of rotation error (threshold 1 deg) and,
/// for registration-style scenarios, translation error (threshold 0.1 m). The
/// grid value is the outlier rate, or the noise bound for noise-sweep.
std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);

// CSV output (RFC 4180, header row).
void write_csv(std::ostream& out, const std::vector<RunRecord>& records);
void write_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_csv(std::ostream& out, const std::vector<ConvergenceRecord>& records);
void write_csv(std::ostream& out, const std::vector<ConvergenceSummary>& rows);
void write_csv(std::ostream& out, const std::vector<TimingRecord>& records);

/// Quotes a field when it contains a comma, quote, CR or LF.
std::string csv_field(std::string_view value);

}  // namespace fracgm::bench
