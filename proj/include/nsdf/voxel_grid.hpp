#pragma once

#include <string>
#include <vector>

#include "nsdf/common.hpp"

namespace nsdf {

// Dense scalar grid. Storage order: x fastest, then y, then z.
struct VoxelGrid {
  enum class Payload : uint32_t { kOccupancy = 0, kSquaredDist = 1, kSignedDist = 2 };

  Vec3d origin = Vec3d::Zero();   // world position of the grid corner
  double voxel_size = 0.07;
  Eigen::Vector3i dims = Eigen::Vector3i::Zero();
  Payload payload = Payload::kOccupancy;
  std::vector<double> data;
  std::vector<uint8_t> observed;  // optional per-voxel mask (empty = all)

  static VoxelGrid create(const Vec3d& origin, double voxel_size,
                          const Eigen::Vector3i& dims, Payload payload,
                          double fill = 0.0);
  // Grid covering [min, max] expanded by `margin`.
  static VoxelGrid covering(const Vec3d& min, const Vec3d& max, double margin,
                            double voxel_size, Payload payload,
                            double fill = 0.0);

  Eigen::Index count() const {
    return static_cast<Eigen::Index>(dims.x()) * dims.y() * dims.z();
  }
  Eigen::Index index(int ix, int iy, int iz) const {
    return (static_cast<Eigen::Index>(iz) * dims.y() + iy) * dims.x() + ix;
  }
  double& at(int ix, int iy, int iz) { return data[static_cast<size_t>(index(ix, iy, iz))]; }
  double at(int ix, int iy, int iz) const {
    return data[static_cast<size_t>(index(ix, iy, iz))];
  }
  Vec3d center(int ix, int iy, int iz) const {
    return origin + voxel_size * Vec3d(ix + 0.5, iy + 0.5, iz + 0.5);
  }
  bool in_bounds(const Vec3d& x) const;

  struct Query {
    double value = 0;
    bool out_of_bounds = false;
    bool observed = true;  // false when the interpolation support is unmapped
  };
  // Trilinear interpolation of the 8 surrounding voxel centers; out-of-bounds
  // points are clamped to the valid support and flagged.
  Query query(const Vec3d& x) const;
  // Central differences of the interpolated field, step = voxel_size.
  Vec3d query_gradient(const Vec3d& x) const;

  void save(const std::string& path) const;
  static VoxelGrid load(const std::string& path);
};

}  // namespace nsdf
