#pragma once

#include <Eigen/Core>

#include "fracgm/core.hpp"

namespace fracgm {

/// Putative matches b_i ~ R a_i + t, one noise bound sigma_i per pair.
struct PointCorrespondences {
  Eigen::Matrix3Xd source;
  Eigen::Matrix3Xd target;
  Eigen::VectorXd noise_bounds;

  /// Every pair shares the same noise bound.
  static PointCorrespondences with_uniform_bound(Eigen::Matrix3Xd source, Eigen::Matrix3Xd target,
                                                 double noise_bound);

  Eigen::Index size() const noexcept { return source.cols(); }

  /// Throws kInsufficientData for fewer than 3 pairs and kInvalidArgument for
  /// mismatched sizes, non-positive bounds or non-finite coordinates.
  void validate() const;
};

struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  /// ||R'R - I||_inf <= tol and |det R - 1| <= tol.
  bool has_valid_rotation(double tol = 1e-9) const;
};

inline constexpr Eigen::Index kRotationDim = 10;
inline constexpr Eigen::Index kRegistrationDim = 13;

/// x = [vec(R); 1] (d = 10) or [vec(R); t; 1] (d = 13), vec column-major so
/// that (a' kron I3) vec(R) = R a.
Eigen::VectorXd vectorize(const RigidTransform& transform, Eigen::Index dim);

/// Inverse of vectorize. Reads the 3x3 block verbatim; no projection.
RigidTransform devectorize(const Eigen::VectorXd& x);

/// B_i = [a_i' kron I3, -b_i], M_i = B_i' B_i / sigma_i^2.
GemanMcClureProblem build_rotation_terms(const PointCorrespondences& corr, double c);

/// B_i = [a_i' kron I3, I3, -b_i], M_i = B_i' B_i / sigma_i^2.
GemanMcClureProblem build_registration_terms(const PointCorrespondences& corr, double c);

struct SO3Projection {
  Eigen::Matrix3d rotation;
  /// Two smallest singular values coincide while a reflection had to be
  /// removed, so the nearest rotation is not unique.
  bool ambiguous = false;
};

/// Nearest rotation in Frobenius norm: U diag(1, 1, det(UV')) V'.
SO3Projection project_to_so3_checked(const Eigen::Matrix3d& m);
Eigen::Matrix3d project_to_so3(const Eigen::Matrix3d& m);

/// Weighted (1/sigma^2) least-squares alignment (Horn / Kabsch). With
/// with_translation = false the rotation is fit about the origin and t = 0.
/// Throws kDegenerateGeometry when the cross-covariance has rank < 2.
RigidTransform closed_form_alignment(const PointCorrespondences& corr, bool with_translation);

struct Estimate {
  RigidTransform transform;
  SolverResult solver;
};

/// Horn initial guess, FracGM on the 10-dim homogenized problem, reshape,
/// then SVD projection to SO(3). translation is zero.
Estimate solve_rotation(const PointCorrespondences& corr, const SolverConfig& config);

/// Same pipeline on the 13-dim problem. The translation is read verbatim
/// from the solution and is not refit after the rotation is projected.
Estimate solve_registration(const PointCorrespondences& corr, const SolverConfig& config);

/// Geodesic angle between two rotations, in degrees.
double rotation_error_deg(const Eigen::Matrix3d& estimate, const Eigen::Matrix3d& truth);
double translation_error(const Eigen::Vector3d& estimate, const Eigen::Vector3d& truth);

}  // namespace fracgm
