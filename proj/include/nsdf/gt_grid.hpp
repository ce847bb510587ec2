#pragma once

#include "nsdf/edt.hpp"
#include "nsdf/mesh.hpp"
#include "nsdf/scene.hpp"
#include "nsdf/voxel_grid.hpp"

namespace nsdf {

// Ground-truth SDF grid from the analytic scene: exact values at voxel
// centers over the scene bounds.
VoxelGrid gt_sdf_grid(const Scene& scene, double resolution = 0.01);

// Ground-truth SDF grid from a triangle mesh: parity-test voxelization into
// occupancy, then occupancy / inverse-occupancy EDT subtraction. Rows whose
// ray-crossing parity is inconsistent (non-watertight input) are marked
// unobserved in the result so only free-space values are trusted.
VoxelGrid gt_sdf_grid(const TriMesh& mesh, const Aabb& bounds,
                      double resolution = 0.01);

// Voxel centers inside the mesh by ray parity along +x.
VoxelGrid voxelize_mesh(const TriMesh& mesh, const Aabb& bounds,
                        double resolution, std::vector<uint8_t>* row_valid = nullptr);

}  // namespace nsdf
