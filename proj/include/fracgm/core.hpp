#pragma once

// Fractional-programming solver for Geman-McClure robust estimation with
// quadratic squared residuals r_i^2(x) = x' M_i x and one homogenization
// constraint e' x = 1 on the last coordinate.
//
// The problem  min_x sum_i c^2 s_i / (s_i + c^2)  is treated as a sum of
// ratios f_i / h_i with f_i = c^2 s_i and h_i = s_i + c^2. Each iteration
// fixes auxiliary variables (beta, mu) in closed form from the current x,
// then minimizes the convex surrogate sum_i mu_i (f_i - beta_i h_i) over the
// hyperplane, which reduces to one symmetric linear solve of size d.
//
// Global optimality of a fixed point holds when psi(alpha, x_alpha) has a
// unique root, e.g. when psi is differentiable and Lipschitz continuous in
// alpha. That condition is data dependent and is not checked at runtime.

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace fracgm {

/// One weighted residual matrix; the 1/sigma^2 weight is already folded in.
struct QuadraticTerm {
  Eigen::MatrixXd matrix;

  /// x' M x
  double evaluate(const Eigen::VectorXd& x) const { return x.dot(matrix * x); }
};

/// Symmetric to 1e-9 relative and PSD to -1e-9 * trace. Costs one
/// eigendecomposition, so it is meant for tests and input checks, not the
/// solve loop.
bool is_valid_term(const QuadraticTerm& term);

class GemanMcClureProblem {
 public:
  /// Throws kInvalidArgument if terms is empty, c <= 0, or any term is not
  /// dim x dim and symmetric.
  GemanMcClureProblem(std::vector<QuadraticTerm> terms, double c, Eigen::Index dim);

  const std::vector<QuadraticTerm>& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  double c() const noexcept { return c_; }
  double c_squared() const noexcept { return c_ * c_; }
  Eigen::Index dim() const noexcept { return dim_; }
  Eigen::Index homog_index() const noexcept { return dim_ - 1; }

  /// s_i = x' M_i x for every term.
  Eigen::VectorXd squared_residuals(const Eigen::VectorXd& x) const;

 private:
  std::vector<QuadraticTerm> terms_;
  double c_;
  Eigen::Index dim_;
};

/// beta_i = f_i / h_i, mu_i = 1 / h_i. Valid when mu > 0 and 0 <= beta < c^2.
struct AuxiliaryVariables {
  Eigen::VectorXd beta;
  Eigen::VectorXd mu;

  /// Number of indices violating mu_i > 0 or 0 <= beta_i < c^2.
  std::size_t count_violations(double c_squared) const;
};

struct SolverConfig {
  double c = 1.0;
  int max_iterations = 100;
  /// Threshold on the normalized max-norm of psi.
  double tolerance = 1e-7;
  /// Record (cost, psi) after every iteration.
  bool record_trace = false;
  /// Eigendecompose the weighted system matrix every iteration and keep the
  /// worst ratio lambda_min / trace in the result.
  bool check_system_psd = false;

  void validate() const;
};

struct TraceEntry {
  double cost;
  double psi_norm;
};

struct SolverResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
  double final_psi_norm = 0.0;
  double final_cost = 0.0;
  std::vector<TraceEntry> trace;

  /// Auxiliary-variable constraint violations summed over all iterations.
  std::size_t aux_violations = 0;
  /// min over iterations of lambda_min(A) / trace(A); empty unless
  /// SolverConfig::check_system_psd was set.
  std::optional<double> min_system_eigen_ratio;
};

/// sum_i c^2 s_i / (s_i + c^2), in [0, N c^2).
double gm_cost(const GemanMcClureProblem& problem, const Eigen::VectorXd& x);

AuxiliaryVariables update_auxiliary(const GemanMcClureProblem& problem, const Eigen::VectorXd& x);

/// Minimizes sum_i w_i x' M_i x subject to x[homog] = 1 via
/// x = A^{-1} e / (e' A^{-1} e), A = sum_i w_i M_i. A receives a Tikhonov
/// shift of 1e-12 * trace(A) / d before an LDL' factorization. Throws
/// kDegenerateProblem when the factorization fails or e' A^{-1} e vanishes.
Eigen::VectorXd solve_homogenized_system(const GemanMcClureProblem& problem,
                                         const Eigen::VectorXd& weights,
                                         std::optional<double>* eigen_ratio = nullptr);

/// Convex surrogate minimizer for fixed auxiliary variables; the weights are
/// mu_i (c^2 - beta_i).
Eigen::VectorXd solve_weighted_quadratic(const GemanMcClureProblem& problem,
                                         const AuxiliaryVariables& aux);

/// max_i max(|-f_i + beta_i h_i| / h_i, |-1 + mu_i h_i|)
double psi_norm(const GemanMcClureProblem& problem, const AuxiliaryVariables& aux,
                const Eigen::VectorXd& x);

/// Alternates update_auxiliary and solve_weighted_quadratic from x0 until
/// psi_norm <= tolerance or max_iterations.
SolverResult fracgm_solve(const GemanMcClureProblem& problem, const Eigen::VectorXd& x0,
                          const SolverConfig& config);

}  // namespace fracgm
