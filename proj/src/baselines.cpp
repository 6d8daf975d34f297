#include "fracgm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fracgm/error.hpp"

namespace fracgm {

void GncConfig::validate() const {
  if (!(c > 0.0) || !(schedule_factor > 1.0) || max_iterations <= 0 || !(weight_tolerance > 0.0)) {
    raise(ErrorCode::kInvalidArgument, "invalid GNC configuration");
  }
}

Eigen::VectorXd weighted_ls_solve(const GemanMcClureProblem& problem, const Eigen::VectorXd& weights) {
  if (weights.size() != static_cast<Eigen::Index>(problem.size())) {
    raise(ErrorCode::kInvalidArgument, "weight vector length does not match term count");
  }
  if (!weights.allFinite() || weights.minCoeff() < 0.0 || !(weights.maxCoeff() > 0.0)) {
    raise(ErrorCode::kInvalidArgument, "weights must be finite, non-negative and not all zero");
  }
  return solve_homogenized_system(problem, weights);
}

Eigen::VectorXd gnc_weights(GncSurrogate surrogate, const Eigen::VectorXd& squared_residuals,
                            double c_squared, double mu) {
  const Eigen::ArrayXd s = squared_residuals.array();
  if (surrogate == GncSurrogate::kGemanMcClure) {
    return (mu * c_squared / (s + mu * c_squared)).square().matrix();
  }

  Eigen::VectorXd w(s.size());
  const double lower = mu / (mu + 1.0) * c_squared;
  const double upper = (mu + 1.0) / mu * c_squared;
  const double c = std::sqrt(c_squared);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] >= upper) {
      w[i] = 0.0;
    } else if (s[i] <= lower) {
      w[i] = 1.0;
    } else {
      w[i] = std::clamp(c * std::sqrt(mu * (mu + 1.0) / s[i]) - mu, 0.0, 1.0);
    }
  }
  return w;
}

namespace {

bool is_binary(const Eigen::VectorXd& w, double tol) {
  return ((w.array() <= tol) || (w.array() >= 1.0 - tol)).all();
}

}  // namespace

SolverResult gnc_solve(const GemanMcClureProblem& problem, const Eigen::VectorXd& x0,
                       const GncConfig& config) {
  config.validate();
  if (x0.size() != problem.dim() || x0[problem.homog_index()] != 1.0) {
    raise(ErrorCode::kInvalidArgument, "initial guess has wrong size or is not homogenized");
  }
  const bool gm = config.surrogate == GncSurrogate::kGemanMcClure;
  const double c2 = problem.c_squared();

  SolverResult result;
  result.x = x0;
  result.final_psi_norm = std::numeric_limits<double>::quiet_NaN();

  Eigen::VectorXd s = problem.squared_residuals(x0);
  const double s_max = s.maxCoeff();
  double mu = 0.0;
  bool schedule_done = false;
  if (gm) {
    mu = std::max(1.0, 2.0 * s_max / c2);
    schedule_done = mu == 1.0;
  } else if (2.0 * s_max > c2) {
    mu = c2 / (2.0 * s_max - c2);
  } else {
    // Everything already inside the threshold: TLS is plain least squares.
    mu = std::numeric_limits<double>::infinity();
    schedule_done = true;
  }
  Eigen::VectorXd w = std::isinf(mu) ? Eigen::VectorXd::Ones(s.size()) : gnc_weights(config.surrogate, s, c2, mu);

  for (int k = 1; k <= config.max_iterations; ++k) {
    if (!(w.maxCoeff() > 0.0)) {
      raise(ErrorCode::kDegenerateProblem, "GNC rejected every measurement");
    }
    result.x = solve_homogenized_system(problem, w);
    result.iterations = k;
    s = problem.squared_residuals(result.x);

    if (gm) {
      mu = std::max(1.0, mu / config.schedule_factor);
    } else if (!std::isinf(mu)) {
      mu *= config.schedule_factor;
    }
    const Eigen::VectorXd next = std::isinf(mu) ? Eigen::VectorXd::Ones(s.size())
                                                : gnc_weights(config.surrogate, s, c2, mu);
    const double change = (next - w).cwiseAbs().maxCoeff();
    w = next;

    if (config.record_trace) result.trace.push_back({gm_cost(problem, result.x), change});

    schedule_done = schedule_done || (gm ? mu == 1.0 : is_binary(w, config.weight_tolerance));
    if (schedule_done && change < config.weight_tolerance) {
      result.converged = true;
      break;
    }
  }

  result.final_cost = gm_cost(problem, result.x);
  return result;
}

}  // namespace fracgm
