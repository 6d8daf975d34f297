#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <variant>
#include <vector>

#include "fracgm/geometry.hpp"

namespace fracgm {

/// Points uniform in the unit cube [0, 1]^3.
struct RandomCube {};

/// Vertices of an ASCII PLY file, randomly subsampled to n_points and
/// rescaled isotropically into [0, 1]^3.
struct PlyFileSource {
  std::filesystem::path path;
};

using PointSource = std::variant<RandomCube, PlyFileSource>;

struct SceneConfig {
  int n_points = 100;
  double outlier_rate = 0.0;
  double noise_sigma = 0.01;
  /// Outlier targets are uniform in the origin-centered ball of this radius.
  double outlier_radius = 2.0;
  bool with_translation = false;
  double max_translation_norm = 1.0;
  /// Written into every correspondence's sigma_i.
  double noise_bound = 0.01;
  std::uint64_t seed = 0;
  PointSource source = RandomCube{};

  void validate() const;
  int outlier_count() const;
};

struct SyntheticScene {
  PointCorrespondences correspondences;
  RigidTransform ground_truth;
  std::vector<bool> outlier_mask;
  SceneConfig config;
};

/// Deterministic for a fixed seed.
SyntheticScene generate_scene(const SceneConfig& config);

/// Uniform on SO(3) via a normalized Gaussian quaternion.
Eigen::Matrix3d random_rotation(std::mt19937_64& rng);

}  // namespace fracgm
