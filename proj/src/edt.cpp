#include "nsdf/edt.hpp"

#include <stdexcept>

namespace nsdf {

void edt_1d(std::span<const double> f, std::span<double> out) {
  const int n = static_cast<int>(f.size());
  if (n == 0) return;
  if (out.size() != f.size())
    throw std::invalid_argument("edt_1d: output size mismatch");

  std::vector<int> v(static_cast<size_t>(n));
  std::vector<double> z(static_cast<size_t>(n) + 1);
  int k = 0;
  v[0] = 0;
  z[0] = -kEdtInf;
  z[1] = kEdtInf;
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) /
               (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) /
          (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kEdtInf;
  }

  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = double(q) - v[k];
    out[q] = std::min(dq * dq + f[v[k]], kEdtInf);
  }
}

std::vector<double> edt_1d(const std::vector<double>& f) {
  std::vector<double> out(f.size());
  edt_1d(std::span<const double>(f), std::span<double>(out));
  return out;
}

VoxelGrid edt_3d_squared(const VoxelGrid& seeds) {
  VoxelGrid g = seeds;
  g.payload = VoxelGrid::Payload::kSquaredDist;
  const int nx = g.dims.x(), ny = g.dims.y(), nz = g.dims.z();
  for (Eigen::Index i = 0; i < g.count(); ++i)
    g.data[static_cast<size_t>(i)] =
        seeds.data[static_cast<size_t>(i)] != 0 ? 0.0 : kEdtInf;

  std::vector<double> row(static_cast<size_t>(std::max({nx, ny, nz})));
  std::vector<double> rowOut(row.size());

  // x pass
  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < ny; ++y) {
      double* base = &g.at(0, y, z);
      edt_1d(std::span<const double>(base, static_cast<size_t>(nx)),
             std::span<double>(rowOut.data(), static_cast<size_t>(nx)));
      std::copy_n(rowOut.data(), nx, base);
    }
  // y pass
  for (int z = 0; z < nz; ++z)
    for (int x = 0; x < nx; ++x) {
      for (int y = 0; y < ny; ++y) row[static_cast<size_t>(y)] = g.at(x, y, z);
      edt_1d(std::span<const double>(row.data(), static_cast<size_t>(ny)),
             std::span<double>(rowOut.data(), static_cast<size_t>(ny)));
      for (int y = 0; y < ny; ++y) g.at(x, y, z) = rowOut[static_cast<size_t>(y)];
    }
  // z pass
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      for (int z = 0; z < nz; ++z) row[static_cast<size_t>(z)] = g.at(x, y, z);
      edt_1d(std::span<const double>(row.data(), static_cast<size_t>(nz)),
             std::span<double>(rowOut.data(), static_cast<size_t>(nz)));
      for (int z = 0; z < nz; ++z) g.at(x, y, z) = rowOut[static_cast<size_t>(z)];
    }
  return g;
}

VoxelGrid edt_3d(const VoxelGrid& seeds) {
  VoxelGrid g = edt_3d_squared(seeds);
  for (double& v : g.data)
    v = v >= kEdtInf * 0.5 ? std::numeric_limits<double>::infinity()
                           : std::sqrt(v) * g.voxel_size;
  g.payload = VoxelGrid::Payload::kSignedDist;
  return g;
}

VoxelGrid signed_field(const VoxelGrid& occupancy) {
  bool any_occ = false, any_free = false;
  for (double v : occupancy.data) (v != 0 ? any_occ : any_free) = true;
  if (!any_occ || !any_free)
    throw std::invalid_argument(
        "signed_field: degenerate occupancy grid (all voxels " +
        std::string(any_occ ? "occupied" : "free") + ")");

  VoxelGrid inverse = occupancy;
  for (double& v : inverse.data) v = (v != 0) ? 0.0 : 1.0;

  const VoxelGrid d_occ = edt_3d_squared(occupancy);
  const VoxelGrid d_free = edt_3d_squared(inverse);

  VoxelGrid out = occupancy;
  out.payload = VoxelGrid::Payload::kSignedDist;
  for (size_t i = 0; i < out.data.size(); ++i)
    out.data[i] =
        (std::sqrt(d_occ.data[i]) - std::sqrt(d_free.data[i])) * out.voxel_size;
  return out;
}

}  // namespace nsdf
