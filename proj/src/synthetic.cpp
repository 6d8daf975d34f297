#include "fracgm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Geometry>

#include "fracgm/error.hpp"
#include "fracgm/ply.hpp"

namespace fracgm {

void SceneConfig::validate() const {
  if (n_points <= 0) raise(ErrorCode::kInvalidArgument, "n_points must be positive");
  if (!(outlier_rate >= 0.0 && outlier_rate < 1.0)) {
    raise(ErrorCode::kInvalidArgument, "outlier_rate must lie in [0, 1)");
  }
  if (!(noise_sigma >= 0.0)) raise(ErrorCode::kInvalidArgument, "noise_sigma must be >= 0");
  if (!(outlier_radius > 0.0) || !(max_translation_norm > 0.0) || !(noise_bound > 0.0)) {
    raise(ErrorCode::kInvalidArgument, "radius, translation norm and noise bound must be positive");
  }
}

int SceneConfig::outlier_count() const {
  return static_cast<int>(std::lround(outlier_rate * n_points));
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::Quaterniond q;
  do {
    q.coeffs() << normal(rng), normal(rng), normal(rng), normal(rng);
  } while (q.norm() < 1e-12);
  return q.normalized().toRotationMatrix();
}

namespace {

Eigen::Vector3d uniform_in_ball(std::mt19937_64& rng, double radius) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  Eigen::Vector3d dir;
  do {
    dir << normal(rng), normal(rng), normal(rng);
  } while (dir.norm() < 1e-12);
  return dir.normalized() * radius * std::cbrt(uniform(rng));
}

Eigen::Matrix3Xd sample_source(const SceneConfig& config, std::mt19937_64& rng) {
  const int n = config.n_points;
  if (std::holds_alternative<RandomCube>(config.source)) {
    std::uniform_real_distribution<double> uniform;
    Eigen::Matrix3Xd pts(3, n);
    for (int i = 0; i < n; ++i) pts.col(i) << uniform(rng), uniform(rng), uniform(rng);
    return pts;
  }

  const auto& file = std::get<PlyFileSource>(config.source);
  const Eigen::Matrix3Xd cloud = read_ply_vertices(file.path);
  if (cloud.cols() < n) {
    raise(ErrorCode::kIo, file.path.string() + " has " + std::to_string(cloud.cols()) +
                              " vertices, fewer than the requested " + std::to_string(n));
  }
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(cloud.cols()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::shuffle(idx.begin(), idx.end(), rng);

  const Eigen::Vector3d lo = cloud.rowwise().minCoeff();
  const double extent = (cloud.rowwise().maxCoeff() - lo).maxCoeff();
  const double scale = extent > 0.0 ? 1.0 / extent : 1.0;
  Eigen::Matrix3Xd pts(3, n);
  for (int i = 0; i < n; ++i) pts.col(i) = (cloud.col(idx[static_cast<std::size_t>(i)]) - lo) * scale;
  return pts;
}

}  // namespace

SyntheticScene generate_scene(const SceneConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  const int n = config.n_points;

  SyntheticScene scene;
  scene.config = config;
  const Eigen::Matrix3Xd source = sample_source(config, rng);

  scene.ground_truth.rotation = random_rotation(rng);
  if (config.with_translation) {
    scene.ground_truth.translation = uniform_in_ball(rng, config.max_translation_norm);
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::Matrix3Xd target =
      (scene.ground_truth.rotation * source).colwise() + scene.ground_truth.translation;
  if (config.noise_sigma > 0.0) {
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector3d eps(noise(rng), noise(rng), noise(rng));
      target.col(i) += config.noise_sigma * eps;
    }
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  scene.outlier_mask.assign(static_cast<std::size_t>(n), false);
  for (int k = 0; k < config.outlier_count(); ++k) {
    const int i = order[static_cast<std::size_t>(k)];
    scene.outlier_mask[static_cast<std::size_t>(i)] = true;
    target.col(i) = uniform_in_ball(rng, config.outlier_radius);
  }

  scene.correspondences =
      PointCorrespondences::with_uniform_bound(source, std::move(target), config.noise_bound);
  return scene;
}

}  // namespace fracgm
