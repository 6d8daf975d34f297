// Synthetic benchmark driver: rotation, registration, convergence,
// noise-sweep and timing scenarios, written as CSV.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fracgm/bench.hpp"
#include "fracgm/error.hpp"

namespace fs = std::filesystem;
using namespace fracgm;

namespace {

struct Args {
  std::vector<double> outlier_rates;
  std::vector<int> n_points;
  int runs = 40;
  std::uint64_t seed = 1;
  std::vector<double> noise_bounds;
  double noise_sigma = 0.01;
  double c = 1.0;
  std::vector<std::string> solvers{"fracgm", "gnc-gm", "gnc-tls", "svd"};
  std::string out;
  std::string bunny;
  unsigned threads = 0;
};

template <typename Rows>
void write_file(const fs::path& path, const Rows& rows) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) raise(ErrorCode::kIo, "cannot write " + path.string());
  bench::write_csv(f, rows);
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p.replace_filename(out.stem().string() + suffix + out.extension().string());
  return p;
}

void print_summary(const std::vector<bench::SummaryRow>& rows) {
  std::printf("%-13s %-8s %-20s %8s %10s %10s %10s %8s\n", "scenario", "solver", "metric", "grid",
              "mean", "median", "p95", "within");
  for (const auto& r : rows) {
    std::printf("%-13s %-8s %-20s %8.3g %10.4g %10.4g %10.4g %8.3f\n", r.scenario.c_str(),
                std::string(bench::to_string(r.solver)).c_str(), r.metric.c_str(), r.grid_value,
                r.mean, r.median, r.p95, r.fraction_within);
  }
}

bench::BenchOptions make_options(const Args& a, double default_rate, int default_n,
                                 double default_bound) {
  bench::BenchOptions o;
  o.outlier_rates = a.outlier_rates.empty() ? std::vector<double>{default_rate} : a.outlier_rates;
  o.n_points = a.n_points.empty() ? default_n : a.n_points.front();
  o.runs = a.runs;
  o.seed = a.seed;
  o.noise_sigma = a.noise_sigma;
  o.noise_bound = a.noise_bounds.empty() ? default_bound : a.noise_bounds.front();
  o.c = a.c;
  o.threads = a.threads;
  o.solvers.clear();
  for (const auto& s : a.solvers) o.solvers.push_back(bench::parse_solver(s));
  if (!a.bunny.empty()) o.source = PlyFileSource{a.bunny};
  o.validate();
  return o;
}

void run_outlier_bench(const Args& a, bool registration) {
  bench::BenchOptions o = make_options(a, 0.5, registration ? 500 : 50, 0.1);
  if (a.outlier_rates.empty()) o.outlier_rates = {0.2, 0.4, 0.6, 0.8};
  const auto records = registration ? bench::run_registration_bench(o) : bench::run_rotation_bench(o);
  const auto summary = bench::summarize(records);
  const fs::path out = a.out.empty() ? fs::path(registration ? "registration.csv" : "rotation.csv")
                                     : fs::path(a.out);
  write_file(out, records);
  write_file(sibling(out, "_summary"), summary);
  print_summary(summary);
}

void run_noise_sweep(const Args& a) {
  bench::BenchOptions o = make_options(a, 0.5, 500, 0.1);
  const std::vector<double> bounds =
      a.noise_bounds.empty() ? std::vector<double>{0.01, 0.05, 0.1, 0.5, 1.0} : a.noise_bounds;
  const auto records = bench::run_noise_sweep(o, bounds);
  const auto summary = bench::summarize(records);
  const fs::path out = a.out.empty() ? fs::path("noise_sweep.csv") : fs::path(a.out);
  write_file(out, records);
  write_file(sibling(out, "_summary"), summary);
  print_summary(summary);
}

void run_convergence(const Args& a) {
  bench::BenchOptions o = make_options(a, 0.5, 50, 0.1);
  const auto report = bench::run_convergence(o);
  const fs::path out = a.out.empty() ? fs::path("convergence.csv") : fs::path(a.out);
  write_file(out, report.traces);
  write_file(sibling(out, "_summary"), report.summaries);
  std::map<bench::Solver, std::pair<double, int>> mean_iters;
  for (const auto& s : report.summaries) {
    mean_iters[s.solver].first += s.iterations_to_1pct;
    mean_iters[s.solver].second += 1;
  }
  for (const auto& [solver, acc] : mean_iters) {
    std::printf("%-8s mean iterations to within 1%% of final cost: %.2f\n",
                std::string(bench::to_string(solver)).c_str(), acc.first / acc.second);
  }
}

void run_timing(const Args& a) {
  bench::BenchOptions o = make_options(a, 0.5, 100, 0.1);
  o.threads = 1;
  const std::vector<int> sizes =
      a.n_points.empty() ? std::vector<int>{100, 500, 1000, 2000, 5000} : a.n_points;
  const auto records = bench::run_timing(o, sizes);
  const fs::path out = a.out.empty() ? fs::path("timing.csv") : fs::path(a.out);
  write_file(out, records);
  std::map<int, std::pair<double, int>> mean;
  for (const auto& r : records) {
    mean[r.n_points].first += r.wall_time_s;
    mean[r.n_points].second += 1;
  }
  for (const auto& [n, acc] : mean) std::printf("N=%-6d mean %.6f s\n", n, acc.first / acc.second);
  if (sizes.size() >= 2) {
    std::printf("log-log scaling exponent: %.3f\n", bench::fit_scaling_exponent(records));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FracGM synthetic benchmarks"};
  app.require_subcommand(1);
  Args args;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--outlier-rates", args.outlier_rates, "Outlier rates in [0,1)")->delimiter(',');
    sub->add_option("--n-points", args.n_points, "Correspondence count (timing: list of sizes)")
        ->delimiter(',');
    sub->add_option("--runs", args.runs, "Monte-Carlo runs per grid point")->check(CLI::PositiveNumber);
    sub->add_option("--seed", args.seed, "Base seed");
    sub->add_option("--noise-bound", args.noise_bounds, "Noise bound sigma_i (noise-sweep: list)")
        ->delimiter(',');
    sub->add_option("--noise-sigma", args.noise_sigma, "True noise standard deviation");
    sub->add_option("--c", args.c, "Geman-McClure threshold")->check(CLI::PositiveNumber);
    sub->add_option("--solvers", args.solvers, "fracgm,gnc-gm,gnc-tls,svd")->delimiter(',');
    sub->add_option("--out", args.out, "Output CSV path");
    sub->add_option("--bunny", args.bunny, "ASCII PLY point cloud used instead of the unit cube");
    sub->add_option("--threads", args.threads, "Worker threads (0 = hardware)");
  };

  auto* rotation = app.add_subcommand("rotation", "Rotation error vs. outlier rate");
  auto* registration = app.add_subcommand("registration", "Registration error vs. outlier rate");
  auto* convergence = app.add_subcommand("convergence", "Per-iteration GM cost traces");
  auto* sweep = app.add_subcommand("noise-sweep", "Registration error vs. noise bound");
  auto* timing = app.add_subcommand("timing", "Registration solve time vs. N");
  for (auto* sub : {rotation, registration, convergence, sweep, timing}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*rotation) run_outlier_bench(args, false);
    if (*registration) run_outlier_bench(args, true);
    if (*convergence) run_convergence(args);
    if (*sweep) run_noise_sweep(args);
    if (*timing) run_timing(args);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
  return 0;
}
