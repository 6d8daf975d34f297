#include "fracgm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "fracgm/error.hpp"

namespace fracgm {

PointCorrespondences PointCorrespondences::with_uniform_bound(Eigen::Matrix3Xd source,
                                                              Eigen::Matrix3Xd target,
                                                              double noise_bound) {
  PointCorrespondences corr;
  corr.noise_bounds = Eigen::VectorXd::Constant(source.cols(), noise_bound);
  corr.source = std::move(source);
  corr.target = std::move(target);
  return corr;
}

void PointCorrespondences::validate() const {
  if (source.cols() != target.cols() || source.cols() != noise_bounds.size()) {
    raise(ErrorCode::kInvalidArgument, "source, target and noise bounds differ in length");
  }
  if (source.cols() < 3) {
    raise(ErrorCode::kInsufficientData,
          "need at least 3 correspondences, got " + std::to_string(source.cols()));
  }
  if (!source.allFinite() || !target.allFinite()) {
    raise(ErrorCode::kInvalidArgument, "non-finite point coordinates");
  }
  if (!noise_bounds.allFinite() || !(noise_bounds.minCoeff() > 0.0)) {
    raise(ErrorCode::kInvalidArgument, "noise bounds must be positive");
  }
}

bool RigidTransform::has_valid_rotation(double tol) const {
  const double ortho =
      (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

Eigen::VectorXd vectorize(const RigidTransform& transform, Eigen::Index dim) {
  if (dim != kRotationDim && dim != kRegistrationDim) {
    raise(ErrorCode::kInvalidArgument, "vectorize supports d = 10 or d = 13");
  }
  Eigen::VectorXd x(dim);
  x.head<9>() = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(transform.rotation.data());
  if (dim == kRegistrationDim) x.segment<3>(9) = transform.translation;
  x[dim - 1] = 1.0;
  return x;
}

RigidTransform devectorize(const Eigen::VectorXd& x) {
  if (x.size() != kRotationDim && x.size() != kRegistrationDim) {
    raise(ErrorCode::kInvalidArgument, "devectorize supports d = 10 or d = 13");
  }
  RigidTransform t;
  t.rotation = Eigen::Map<const Eigen::Matrix3d>(x.data());
  if (x.size() == kRegistrationDim) t.translation = x.segment<3>(9);
  return t;
}

namespace {

GemanMcClureProblem build_terms(const PointCorrespondences& corr, double c, bool translation) {
  corr.validate();
  const Eigen::Index d = translation ? kRegistrationDim : kRotationDim;
  std::vector<QuadraticTerm> terms;
  terms.reserve(static_cast<std::size_t>(corr.size()));

  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(3, d);
  if (translation) b.block<3, 3>(0, 9).setIdentity();
  for (Eigen::Index i = 0; i < corr.size(); ++i) {
    const Eigen::Vector3d a = corr.source.col(i);
    for (int j = 0; j < 3; ++j) b.block<3, 3>(0, 3 * j) = a[j] * Eigen::Matrix3d::Identity();
    b.col(d - 1) = -corr.target.col(i);
    const double sigma = corr.noise_bounds[i];
    terms.push_back({(b.transpose() * b) / (sigma * sigma)});
  }
  return GemanMcClureProblem(std::move(terms), c, d);
}

Eigen::VectorXd normalized_weights(const PointCorrespondences& corr) {
  return corr.noise_bounds.array().square().inverse().matrix();
}

}  // namespace

GemanMcClureProblem build_rotation_terms(const PointCorrespondences& corr, double c) {
  return build_terms(corr, c, false);
}

GemanMcClureProblem build_registration_terms(const PointCorrespondences& corr, double c) {
  return build_terms(corr, c, true);
}

SO3Projection project_to_so3_checked(const Eigen::Matrix3d& m) {
  if (!m.allFinite() || m.isZero(0.0)) {
    raise(ErrorCode::kInvalidArgument, "cannot project a non-finite or zero matrix to SO(3)");
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d& u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  const double det = (u * v.transpose()).determinant();

  SO3Projection out;
  Eigen::Vector3d diag(1.0, 1.0, det < 0.0 ? -1.0 : 1.0);
  out.rotation = u * diag.asDiagonal() * v.transpose();
  const Eigen::Vector3d& s = svd.singularValues();
  out.ambiguous = det < 0.0 && (s[1] - s[2]) <= 1e-12 * s[0];
  return out;
}

Eigen::Matrix3d project_to_so3(const Eigen::Matrix3d& m) { return project_to_so3_checked(m).rotation; }

RigidTransform closed_form_alignment(const PointCorrespondences& corr, bool with_translation) {
  corr.validate();
  const Eigen::VectorXd w = normalized_weights(corr);
  const double total = w.sum();

  Eigen::Vector3d src_mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d dst_mean = Eigen::Vector3d::Zero();
  if (with_translation) {
    src_mean = corr.source * w / total;
    dst_mean = corr.target * w / total;
  }
  const Eigen::Matrix3Xd src = corr.source.colwise() - src_mean;
  const Eigen::Matrix3Xd dst = corr.target.colwise() - dst_mean;

  // H = sum w_i a_i b_i'; the rotation maximizing tr(R' H') is the projection of H'.
  const Eigen::Matrix3d h = src * w.asDiagonal() * dst.transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h);
  const Eigen::Vector3d& s = svd.singularValues();
  if (!(s[0] > 0.0) || s[1] <= 1e-12 * s[0]) {
    raise(ErrorCode::kDegenerateGeometry, "cross-covariance has rank < 2 (collinear points?)");
  }

  RigidTransform t;
  t.rotation = project_to_so3(h.transpose());
  if (with_translation) t.translation = dst_mean - t.rotation * src_mean;
  return t;
}

namespace {

Estimate solve_pipeline(const PointCorrespondences& corr, const SolverConfig& config,
                        bool translation) {
  config.validate();
  const RigidTransform init = closed_form_alignment(corr, translation);
  const GemanMcClureProblem problem =
      translation ? build_registration_terms(corr, config.c) : build_rotation_terms(corr, config.c);

  Estimate est;
  est.solver = fracgm_solve(problem, vectorize(init, problem.dim()), config);
  const RigidTransform relaxed = devectorize(est.solver.x);
  est.transform.rotation = project_to_so3(relaxed.rotation);
  est.transform.translation = relaxed.translation;
  return est;
}

}  // namespace

Estimate solve_rotation(const PointCorrespondences& corr, const SolverConfig& config) {
  return solve_pipeline(corr, config, false);
}

Estimate solve_registration(const PointCorrespondences& corr, const SolverConfig& config) {
  return solve_pipeline(corr, config, true);
}

double rotation_error_deg(const Eigen::Matrix3d& estimate, const Eigen::Matrix3d& truth) {
  // Same angle as arccos((tr(R'R_est) - 1) / 2), but atan2 keeps full
  // precision near 0 where arccos bottoms out around 1e-6 degrees.
  const Eigen::Matrix3d rel = truth.transpose() * estimate;
  const double cos_angle = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
  const Eigen::Vector3d axis(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0), rel(1, 0) - rel(0, 1));
  return std::atan2(axis.norm() / 2.0, cos_angle) * 180.0 / std::numbers::pi;
}

double translation_error(const Eigen::Vector3d& estimate, const Eigen::Vector3d& truth) {
  return (estimate - truth).norm();
}

}  // namespace fracgm
