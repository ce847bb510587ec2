#pragma once

#include <span>
#include <vector>

#include "nsdf/voxel_grid.hpp"

namespace nsdf {

// Squared-distance sentinel for unseeded cells. Real squared distances in
// voxel units stay far below it, so envelope comparisons remain exact.
inline constexpr double kEdtInf = 1e18;

// Exact 1-D squared Euclidean distance transform (lower envelope of
// parabolas), O(n). Input and output are squared distances in cell units;
// kEdtInf marks "no seed".
void edt_1d(std::span<const double> f, std::span<double> out);
std::vector<double> edt_1d(const std::vector<double>& f);

// Separable 3-D squared EDT over a seed grid (payload kOccupancy, nonzero =
// seed). Output payload kSquaredDist in voxel^2 units.
VoxelGrid edt_3d_squared(const VoxelGrid& seeds);

// Euclidean distances in metres; +inf everywhere when the grid has no seeds.
VoxelGrid edt_3d(const VoxelGrid& seeds);

// Signed distance: distance-to-occupied minus distance-to-free, metres.
// Throws on degenerate (all-occupied or all-free) grids.
VoxelGrid signed_field(const VoxelGrid& occupancy);

}  // namespace nsdf
