#include <random>

#include <gtest/gtest.h>

#include "fracgm/baselines.hpp"
#include "fracgm/error.hpp"
#include "fracgm/geometry.hpp"
#include "fracgm/synthetic.hpp"
#include "oracles.hpp"

namespace fracgm {
namespace {

SyntheticScene rotation_scene(std::uint64_t seed, double outlier_rate, double sigma = 0.01) {
  SceneConfig cfg;
  cfg.n_points = 50;
  cfg.outlier_rate = outlier_rate;
  cfg.noise_sigma = sigma;
  cfg.noise_bound = 0.1;
  cfg.seed = seed;
  return generate_scene(cfg);
}

TEST(WeightedLs, UniformWeightsRecoverNoiseFreeTruth) {
  const auto scene = rotation_scene(1, 0.0, 0.0);
  const auto p = build_rotation_terms(scene.correspondences, 1.0);
  const Eigen::VectorXd x = weighted_ls_solve(p, Eigen::VectorXd::Ones(50));
  EXPECT_LE((x - vectorize(scene.ground_truth, kRotationDim)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(WeightedLs, MatchesWeightedQuadraticForFracgmWeights) {
  std::mt19937_64 rng(2);
  const auto p = testing::random_problem(rng, 6, 9, 0.8);
  const auto aux = update_auxiliary(p, testing::random_homogenized(rng, 6));
  const Eigen::VectorXd w = (aux.mu.array() * (p.c_squared() - aux.beta.array())).matrix();
  EXPECT_EQ(weighted_ls_solve(p, w), solve_weighted_quadratic(p, aux));
}

TEST(WeightedLs, MatchesProjectedGradientOracle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = testing::random_problem(rng, 5, 6);
    Eigen::VectorXd w(6);
    for (auto& v : w) v = u(rng);
    const Eigen::VectorXd x = weighted_ls_solve(p, w);
    const Eigen::VectorXd ref = testing::projected_gradient_minimizer(p, w);
    EXPECT_LE((x - ref).norm() / ref.norm(), 1e-6);
  }
}

TEST(WeightedLs, RejectsBadWeights) {
  std::mt19937_64 rng(4);
  const auto p = testing::random_problem(rng, 4, 3);
  EXPECT_THROW(weighted_ls_solve(p, Eigen::VectorXd::Zero(3)), Error);
  EXPECT_THROW(weighted_ls_solve(p, Eigen::Vector3d(1, -1, 1)), Error);
  EXPECT_THROW(weighted_ls_solve(p, Eigen::Vector2d(1, 1)), Error);
}

TEST(WeightedLs, UniformWeightsAgreeWithClosedFormOnExactData) {
  const auto scene = rotation_scene(5, 0.0, 0.0);
  const auto p = build_rotation_terms(scene.correspondences, 1.0);
  const Eigen::Matrix3d relaxed =
      project_to_so3(devectorize(weighted_ls_solve(p, Eigen::VectorXd::Ones(50))).rotation);
  const Eigen::Matrix3d horn = closed_form_alignment(scene.correspondences, false).rotation;
  EXPECT_LE((relaxed - horn).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(GncWeights, StayInUnitInterval) {
  std::mt19937_64 rng(6);
  std::exponential_distribution<double> e(0.1);
  Eigen::VectorXd s(500);
  for (auto& v : s) v = e(rng);
  for (auto surrogate : {GncSurrogate::kGemanMcClure, GncSurrogate::kTruncatedLeastSquares}) {
    for (double mu : {1e-3, 0.5, 1.0, 3.0, 1e4}) {
      const Eigen::VectorXd w = gnc_weights(surrogate, s, 1.0, mu);
      EXPECT_GE(w.minCoeff(), 0.0);
      EXPECT_LE(w.maxCoeff(), 1.0);
    }
  }
}

TEST(GncWeights, TlsLimitsAreBinary) {
  const Eigen::Vector3d s(0.1, 0.9, 4.0);
  const Eigen::VectorXd w = gnc_weights(GncSurrogate::kTruncatedLeastSquares, s, 1.0, 1e6);
  EXPECT_EQ(w[0], 1.0);
  EXPECT_NEAR(w[1], 1.0, 1e-6);
  EXPECT_EQ(w[2], 0.0);
}

TEST(GncWeights, GmAtUnitControlIsIrlsWeight) {
  const Eigen::Vector2d s(0.0, 3.0);
  const Eigen::VectorXd w = gnc_weights(GncSurrogate::kGemanMcClure, s, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(w[0], 1.0);
  EXPECT_DOUBLE_EQ(w[1], 1.0 / 16.0);
}

TEST(GncSolve, NoiseFreeRecoveryBothSurrogates) {
  const auto scene = rotation_scene(7, 0.0, 0.0);
  const auto p = build_rotation_terms(scene.correspondences, 1.0);
  const auto horn = closed_form_alignment(scene.correspondences, false);
  for (auto surrogate : {GncSurrogate::kGemanMcClure, GncSurrogate::kTruncatedLeastSquares}) {
    GncConfig cfg;
    cfg.surrogate = surrogate;
    const auto res = gnc_solve(p, vectorize(horn, kRotationDim), cfg);
    const Eigen::Matrix3d r = project_to_so3(devectorize(res.x).rotation);
    EXPECT_LT(rotation_error_deg(r, scene.ground_truth.rotation), 1e-6);
    EXPECT_TRUE(res.converged);
  }
}

TEST(GncSolve, ControlScheduleIsMonotone) {
  // The weight change recorded per iteration must eventually drop below the
  // tolerance once the GM schedule reaches mu = 1.
  const auto scene = rotation_scene(8, 0.5);
  const auto p = build_rotation_terms(scene.correspondences, 1.0);
  GncConfig cfg;
  cfg.record_trace = true;
  const auto res = gnc_solve(p, vectorize(closed_form_alignment(scene.correspondences, false), kRotationDim), cfg);
  ASSERT_TRUE(res.converged);
  EXPECT_LT(res.trace.back().psi_norm, cfg.weight_tolerance);
  EXPECT_DOUBLE_EQ(res.trace.back().cost, res.final_cost);
}

TEST(GncSolve, CostCloseToFracgmOnHalfOutliers) {
  int close = 0;
  for (int run = 0; run < 40; ++run) {
    const auto scene = rotation_scene(100 + run, 0.5);
    const auto p = build_rotation_terms(scene.correspondences, 1.0);
    const Eigen::VectorXd x0 = vectorize(closed_form_alignment(scene.correspondences, false), kRotationDim);
    const double frac = fracgm_solve(p, x0, SolverConfig{}).final_cost;
    const double gnc = gnc_solve(p, x0, GncConfig{}).final_cost;
    if (std::abs(gnc - frac) <= 0.1 * frac) ++close;
  }
  EXPECT_GE(close, 20);
}

TEST(GncSolve, RejectsBadInput) {
  std::mt19937_64 rng(9);
  const auto p = testing::random_problem(rng, 4, 4);
  GncConfig bad;
  bad.schedule_factor = 1.0;
  EXPECT_THROW(gnc_solve(p, Eigen::Vector4d(0, 0, 0, 1), bad), Error);
  EXPECT_THROW(gnc_solve(p, Eigen::Vector4d(0, 0, 0, 3), GncConfig{}), Error);
}

}  // namespace
}  // namespace fracgm
