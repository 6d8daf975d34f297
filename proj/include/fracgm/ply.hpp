#pragma once

#include <filesystem>

#include <Eigen/Core>

namespace fracgm {

/// Reads the x/y/z properties of the "vertex" element from an ASCII PLY
/// file. Other properties and elements are skipped. Throws kIo on missing
/// files, binary encodings or malformed bodies.
Eigen::Matrix3Xd read_ply_vertices(const std::filesystem::path& path);

}  // namespace fracgm
