#pragma once

#include <Eigen/Core>

#include "fracgm/core.hpp"

namespace fracgm {

enum class GncSurrogate { kGemanMcClure, kTruncatedLeastSquares };

struct GncConfig {
  double c = 1.0;
  GncSurrogate surrogate = GncSurrogate::kGemanMcClure;
  /// Control parameter is divided (GM) or multiplied (TLS) by this each step.
  double schedule_factor = 1.4;
  int max_iterations = 100;
  double weight_tolerance = 1e-6;
  bool record_trace = false;

  void validate() const;
};

/// argmin sum_i w_i x' M_i x  s.t.  x[homog] = 1.
Eigen::VectorXd weighted_ls_solve(const GemanMcClureProblem& problem, const Eigen::VectorXd& weights);

/// Closed-form GNC weights for squared residuals s at control parameter mu.
Eigen::VectorXd gnc_weights(GncSurrogate surrogate, const Eigen::VectorXd& squared_residuals,
                            double c_squared, double mu);

/// Graduated non-convexity (Black-Rangarajan duality). The problem's c is
/// used for the surrogate and for the reported GM cost. final_psi_norm is
/// NaN since there is no psi system here; trace psi entries hold the
/// per-iteration max weight change instead.
SolverResult gnc_solve(const GemanMcClureProblem& problem, const Eigen::VectorXd& x0,
                       const GncConfig& config);

}  // namespace fracgm
