#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nsdf/scene.hpp"

namespace nsdf {

struct TriMesh {
  std::vector<Vec3d> vertices;
  std::vector<Eigen::Vector3i> triangles;

  bool empty() const { return triangles.empty(); }
};

using ScalarField = std::function<double(const Vec3d&)>;

// Marching cubes over a regular sampling of `field` inside `bounds` with
// linear edge interpolation. Corners with value < 0 count as inside.
// Ambiguous faces always cut off the negative corners, which keeps the
// segments on a shared face identical for both incident cells, so meshes are
// crack-free and closed whenever the zero crossing stays inside the bounds.
// Triangles wind so their normals point along +grad(field).
TriMesh marching_cubes(const ScalarField& field, const Aabb& bounds,
                       double resolution);

void write_ply(const std::string& path, const TriMesh& mesh);
TriMesh read_ply(const std::string& path);

struct ManifoldReport {
  bool closed = false;          // every edge shared by exactly two triangles
  Eigen::Index boundary_edges = 0;
  Eigen::Index nonmanifold_edges = 0;
  Eigen::Index euler_characteristic = 0;  // V - E + F
};
ManifoldReport analyze_manifold(const TriMesh& mesh);

}  // namespace nsdf
