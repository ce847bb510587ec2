#include "nsdf/gt_grid.hpp"

#include <algorithm>

namespace nsdf {

VoxelGrid gt_sdf_grid(const Scene& scene, double resolution) {
  VoxelGrid g = VoxelGrid::covering(scene.bounds.min, scene.bounds.max, 0.0,
                                    resolution, VoxelGrid::Payload::kSignedDist);
  for (int iz = 0; iz < g.dims.z(); ++iz)
    for (int iy = 0; iy < g.dims.y(); ++iy)
      for (int ix = 0; ix < g.dims.x(); ++ix)
        g.at(ix, iy, iz) = scene_distance(scene, g.center(ix, iy, iz));
  return g;
}

VoxelGrid voxelize_mesh(const TriMesh& mesh, const Aabb& bounds,
                        double resolution, std::vector<uint8_t>* row_valid) {
  VoxelGrid occ = VoxelGrid::covering(bounds.min, bounds.max, 0.0, resolution,
                                      VoxelGrid::Payload::kOccupancy, 0.0);
  if (row_valid)
    row_valid->assign(static_cast<size_t>(occ.dims.y()) * occ.dims.z(), 1);

  // Per-triangle projected bounding boxes cut the candidate set per row.
  std::vector<Eigen::Vector4d> tri_box(mesh.triangles.size());
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Vec3d& a = mesh.vertices[static_cast<size_t>(mesh.triangles[t].x())];
    const Vec3d& b = mesh.vertices[static_cast<size_t>(mesh.triangles[t].y())];
    const Vec3d& c = mesh.vertices[static_cast<size_t>(mesh.triangles[t].z())];
    tri_box[t] = Eigen::Vector4d(std::min({a.y(), b.y(), c.y()}),
                                 std::max({a.y(), b.y(), c.y()}),
                                 std::min({a.z(), b.z(), c.z()}),
                                 std::max({a.z(), b.z(), c.z()}));
  }

  // Sub-resolution ray jitter avoids exact ray-through-edge degeneracies that
  // would double-count crossings.
  const double jy = 1.2345678e-7 * resolution;
  const double jz = 0.9876543e-7 * resolution;

  // For each (y, z) row of voxel centers, collect the x positions where a ray
  // along +x crosses the mesh, then mark centers with odd crossing parity.
  for (int iz = 0; iz < occ.dims.z(); ++iz) {
    for (int iy = 0; iy < occ.dims.y(); ++iy) {
      const Vec3d c0 = occ.center(0, iy, iz);
      const double ry = c0.y() + jy, rz = c0.z() + jz;
      std::vector<double> crossings;
      for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        if (ry < tri_box[t][0] || ry > tri_box[t][1] || rz < tri_box[t][2] ||
            rz > tri_box[t][3])
          continue;
        const auto& tri = mesh.triangles[t];
        const Vec3d& a = mesh.vertices[static_cast<size_t>(tri.x())];
        const Vec3d& b = mesh.vertices[static_cast<size_t>(tri.y())];
        const Vec3d& c = mesh.vertices[static_cast<size_t>(tri.z())];
        // Intersection of the triangle with the line y=ry, z=rz.
        const double d1 = (b.y() - ry) * (c.z() - rz) - (b.z() - rz) * (c.y() - ry);
        const double d2 = (c.y() - ry) * (a.z() - rz) - (c.z() - rz) * (a.y() - ry);
        const double d3 = (a.y() - ry) * (b.z() - rz) - (a.z() - rz) * (b.y() - ry);
        const bool has_neg = (d1 < 0) || (d2 < 0) || (d3 < 0);
        const bool has_pos = (d1 > 0) || (d2 > 0) || (d3 > 0);
        if (has_neg && has_pos) continue;  // line misses the triangle
        const double denom = d1 + d2 + d3;
        if (denom == 0) continue;  // degenerate / coplanar with the ray
        const double x = (d1 * a.x() + d2 * b.x() + d3 * c.x()) / denom;
        crossings.push_back(x);
      }
      std::sort(crossings.begin(), crossings.end());
      const bool consistent = crossings.size() % 2 == 0;
      if (!consistent && row_valid)
        (*row_valid)[static_cast<size_t>(iz) * occ.dims.y() + iy] = 0;
      if (!consistent) continue;
      for (int ix = 0; ix < occ.dims.x(); ++ix) {
        const double x = occ.center(ix, iy, iz).x();
        const size_t below =
            static_cast<size_t>(std::lower_bound(crossings.begin(),
                                                 crossings.end(), x) -
                                crossings.begin());
        if (below % 2 == 1) occ.at(ix, iy, iz) = 1.0;
      }
    }
  }
  return occ;
}

VoxelGrid gt_sdf_grid(const TriMesh& mesh, const Aabb& bounds,
                      double resolution) {
  std::vector<uint8_t> row_valid;
  VoxelGrid occ = voxelize_mesh(mesh, bounds, resolution, &row_valid);
  VoxelGrid sdf = signed_field(occ);
  bool any_bad = false;
  for (uint8_t v : row_valid) any_bad |= (v == 0);
  if (any_bad) {
    sdf.observed.assign(static_cast<size_t>(sdf.count()), 1);
    for (int iz = 0; iz < sdf.dims.z(); ++iz)
      for (int iy = 0; iy < sdf.dims.y(); ++iy)
        if (!row_valid[static_cast<size_t>(iz) * sdf.dims.y() + iy])
          for (int ix = 0; ix < sdf.dims.x(); ++ix)
            sdf.observed[static_cast<size_t>(sdf.index(ix, iy, iz))] = 0;
  }
  return sdf;
}

}  // namespace nsdf
