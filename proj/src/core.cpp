#include "fracgm/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "fracgm/error.hpp"

namespace fracgm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInsufficientData: return "insufficient-data";
    case ErrorCode::kDegenerateProblem: return "degenerate-problem";
    case ErrorCode::kDegenerateGeometry: return "degenerate-geometry";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void raise(ErrorCode code, const std::string& message) { throw Error(code, message); }

namespace {

bool is_symmetric(const Eigen::MatrixXd& m) {
  const double scale = std::max(1.0, m.cwiseAbs().rowwise().sum().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale;
}

void check_point(const GemanMcClureProblem& problem, const Eigen::VectorXd& x) {
  if (x.size() != problem.dim()) {
    raise(ErrorCode::kInvalidArgument, "vector has length " + std::to_string(x.size()) +
                                           ", expected " + std::to_string(problem.dim()));
  }
}

}  // namespace

bool is_valid_term(const QuadraticTerm& term) {
  const auto& m = term.matrix;
  if (m.rows() != m.cols() || !m.allFinite() || !is_symmetric(m)) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() >= -1e-9 * std::max(m.trace(), 0.0);
}

GemanMcClureProblem::GemanMcClureProblem(std::vector<QuadraticTerm> terms, double c,
                                         Eigen::Index dim)
    : terms_(std::move(terms)), c_(c), dim_(dim) {
  if (terms_.empty()) raise(ErrorCode::kInvalidArgument, "problem needs at least one term");
  if (!(c_ > 0.0) || !std::isfinite(c_)) raise(ErrorCode::kInvalidArgument, "c must be positive");
  if (dim_ < 2) raise(ErrorCode::kInvalidArgument, "dimension must be at least 2");
  for (const auto& t : terms_) {
    if (t.matrix.rows() != dim_ || t.matrix.cols() != dim_) {
      raise(ErrorCode::kInvalidArgument, "term is not " + std::to_string(dim_) + "x" +
                                             std::to_string(dim_));
    }
    if (!t.matrix.allFinite() || !is_symmetric(t.matrix)) {
      raise(ErrorCode::kInvalidArgument, "term is not a finite symmetric matrix");
    }
  }
}

Eigen::VectorXd GemanMcClureProblem::squared_residuals(const Eigen::VectorXd& x) const {
  Eigen::VectorXd s(static_cast<Eigen::Index>(terms_.size()));
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    // PSD terms; clamp roundoff below zero.
    s[static_cast<Eigen::Index>(i)] = std::max(0.0, terms_[i].evaluate(x));
  }
  return s;
}

std::size_t AuxiliaryVariables::count_violations(double c_squared) const {
  std::size_t bad = 0;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    if (!(mu[i] > 0.0) || !(beta[i] >= 0.0) || !(beta[i] < c_squared)) ++bad;
  }
  return bad;
}

void SolverConfig::validate() const {
  if (!(c > 0.0) || max_iterations <= 0 || !(tolerance > 0.0)) {
    raise(ErrorCode::kInvalidArgument, "solver config fields must be strictly positive");
  }
}

double gm_cost(const GemanMcClureProblem& problem, const Eigen::VectorXd& x) {
  check_point(problem, x);
  const double c2 = problem.c_squared();
  const Eigen::ArrayXd s = problem.squared_residuals(x).array();
  return (c2 * s / (s + c2)).sum();
}

AuxiliaryVariables update_auxiliary(const GemanMcClureProblem& problem, const Eigen::VectorXd& x) {
  check_point(problem, x);
  const double c2 = problem.c_squared();
  const Eigen::ArrayXd s = problem.squared_residuals(x).array();
  const Eigen::ArrayXd h = s + c2;
  return {(c2 * s / h).matrix(), h.inverse().matrix()};
}

Eigen::VectorXd solve_homogenized_system(const GemanMcClureProblem& problem,
                                         const Eigen::VectorXd& weights,
                                         std::optional<double>* eigen_ratio) {
  const Eigen::Index d = problem.dim();
  if (weights.size() != static_cast<Eigen::Index>(problem.size())) {
    raise(ErrorCode::kInvalidArgument, "weight vector length does not match term count");
  }

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < problem.size(); ++i) {
    a.noalias() += weights[static_cast<Eigen::Index>(i)] * problem.terms()[i].matrix;
  }
  const double tr = a.trace();
  if (!(tr > 0.0) || !std::isfinite(tr)) {
    raise(ErrorCode::kDegenerateProblem, "weighted system matrix has no positive mass");
  }

  if (eigen_ratio != nullptr) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
    const double ratio = eig.eigenvalues().minCoeff() / tr;
    *eigen_ratio = eigen_ratio->has_value() ? std::min(**eigen_ratio, ratio) : ratio;
  }

  a.diagonal().array() += 1e-12 * tr / static_cast<double>(d);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) {
    raise(ErrorCode::kDegenerateProblem, "factorization of the weighted system failed");
  }

  const Eigen::VectorXd e = Eigen::VectorXd::Unit(d, problem.homog_index());
  Eigen::VectorXd y = ldlt.solve(e);
  const double denom = y[problem.homog_index()];
  if (!y.allFinite() || !std::isfinite(denom) || std::abs(denom) < 1e-12 * y.norm()) {
    raise(ErrorCode::kDegenerateProblem,
          "homogenized solve is ill-posed (too few or collinear correspondences?)");
  }
  y /= denom;
  y[problem.homog_index()] = 1.0;
  return y;
}

Eigen::VectorXd solve_weighted_quadratic(const GemanMcClureProblem& problem,
                                         const AuxiliaryVariables& aux) {
  const Eigen::VectorXd w = (aux.mu.array() * (problem.c_squared() - aux.beta.array())).matrix();
  return solve_homogenized_system(problem, w);
}

double psi_norm(const GemanMcClureProblem& problem, const AuxiliaryVariables& aux,
                const Eigen::VectorXd& x) {
  check_point(problem, x);
  const double c2 = problem.c_squared();
  const Eigen::ArrayXd s = problem.squared_residuals(x).array();
  const Eigen::ArrayXd h = s + c2;
  const Eigen::ArrayXd f = c2 * s;
  const double ratio_rows = ((-f + aux.beta.array() * h).abs() / h).maxCoeff();
  const double inverse_rows = (aux.mu.array() * h - 1.0).abs().maxCoeff();
  return std::max(ratio_rows, inverse_rows);
}

SolverResult fracgm_solve(const GemanMcClureProblem& problem, const Eigen::VectorXd& x0,
                          const SolverConfig& config) {
  config.validate();
  check_point(problem, x0);
  if (x0[problem.homog_index()] != 1.0) {
    raise(ErrorCode::kInvalidArgument, "initial guess is not homogenized");
  }

  const double c2 = problem.c_squared();
  SolverResult result;
  result.x = x0;
  result.final_psi_norm = std::numeric_limits<double>::infinity();
  if (config.record_trace) result.trace.reserve(static_cast<std::size_t>(config.max_iterations));

  std::optional<double>* ratio_sink = config.check_system_psd ? &result.min_system_eigen_ratio
                                                              : nullptr;

  for (int k = 1; k <= config.max_iterations; ++k) {
    const AuxiliaryVariables aux = update_auxiliary(problem, result.x);
    result.aux_violations += aux.count_violations(c2);

    const Eigen::VectorXd w = (aux.mu.array() * (c2 - aux.beta.array())).matrix();
    result.x = solve_homogenized_system(problem, w, ratio_sink);
    result.iterations = k;
    result.final_psi_norm = psi_norm(problem, aux, result.x);

    if (config.record_trace) {
      result.trace.push_back({gm_cost(problem, result.x), result.final_psi_norm});
    }
    if (result.final_psi_norm <= config.tolerance) {
      result.converged = true;
      break;
    }
  }

  result.final_cost = gm_cost(problem, result.x);
  return result;
}

}  // namespace fracgm
