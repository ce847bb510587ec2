#include "nsdf/voxel_grid.hpp"

#include <cstring>
#include <fstream>

namespace nsdf {

VoxelGrid VoxelGrid::create(const Vec3d& origin, double voxel_size,
                            const Eigen::Vector3i& dims, Payload payload,
                            double fill) {
  if ((dims.array() <= 0).any())
    throw std::invalid_argument("voxel grid: dims must be positive");
  if (voxel_size <= 0)
    throw std::invalid_argument("voxel grid: voxel size must be positive");
  VoxelGrid g;
  g.origin = origin;
  g.voxel_size = voxel_size;
  g.dims = dims;
  g.payload = payload;
  g.data.assign(static_cast<size_t>(g.count()), fill);
  return g;
}

VoxelGrid VoxelGrid::covering(const Vec3d& min, const Vec3d& max, double margin,
                              double voxel_size, Payload payload, double fill) {
  const Vec3d lo = min.array() - margin;
  const Vec3d hi = max.array() + margin;
  Eigen::Vector3i dims;
  for (int i = 0; i < 3; ++i)
    dims[i] = std::max(1, static_cast<int>(std::ceil((hi[i] - lo[i]) / voxel_size)));
  return create(lo, voxel_size, dims, payload, fill);
}

bool VoxelGrid::in_bounds(const Vec3d& x) const {
  const Vec3d rel = (x - origin) / voxel_size;
  return (rel.array() >= 0).all() &&
         (rel.array() <= dims.cast<double>().array()).all();
}

VoxelGrid::Query VoxelGrid::query(const Vec3d& x) const {
  Query q;
  q.out_of_bounds = !in_bounds(x);
  const Vec3d g = (x - origin) / voxel_size - Vec3d::Constant(0.5);
  int i0[3];
  double f[3];
  for (int k = 0; k < 3; ++k) {
    const double c = std::clamp(g[k], 0.0, static_cast<double>(dims[k] - 1));
    i0[k] = std::min(static_cast<int>(c), dims[k] - 2 >= 0 ? dims[k] - 2 : 0);
    f[k] = std::clamp(c - i0[k], 0.0, 1.0);
    if (dims[k] == 1) {
      i0[k] = 0;
      f[k] = 0;
    }
  }
  double acc = 0;
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        const int ix = std::min(i0[0] + dx, dims.x() - 1);
        const int iy = std::min(i0[1] + dy, dims.y() - 1);
        const int iz = std::min(i0[2] + dz, dims.z() - 1);
        const double w = (dx ? f[0] : 1 - f[0]) * (dy ? f[1] : 1 - f[1]) *
                         (dz ? f[2] : 1 - f[2]);
        acc += w * at(ix, iy, iz);
        if (!observed.empty() && w > 0 &&
            !observed[static_cast<size_t>(index(ix, iy, iz))])
          q.observed = false;
      }
  q.value = acc;
  return q;
}

Vec3d VoxelGrid::query_gradient(const Vec3d& x) const {
  Vec3d g;
  const double h = voxel_size;
  for (int k = 0; k < 3; ++k) {
    Vec3d xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    g[k] = (query(xp).value - query(xm).value) / (2 * h);
  }
  return g;
}

namespace {
constexpr char kGridMagic[8] = {'N', 'S', 'D', 'F', 'G', 'R', 'I', 'D'};
}

void VoxelGrid::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open grid file for write: " + path);
  os.write(kGridMagic, 8);
  const uint32_t version = 1;
  const uint32_t kind = static_cast<uint32_t>(payload);
  const uint32_t has_mask = observed.empty() ? 0 : 1;
  os.write(reinterpret_cast<const char*>(&version), 4);
  os.write(reinterpret_cast<const char*>(&kind), 4);
  os.write(reinterpret_cast<const char*>(&has_mask), 4);
  for (int k = 0; k < 3; ++k) {
    const int32_t d = dims[k];
    os.write(reinterpret_cast<const char*>(&d), 4);
  }
  for (int k = 0; k < 3; ++k)
    os.write(reinterpret_cast<const char*>(&origin[k]), 8);
  os.write(reinterpret_cast<const char*>(&voxel_size), 8);
  os.write(reinterpret_cast<const char*>(data.data()),
           static_cast<std::streamsize>(data.size() * 8));
  if (has_mask)
    os.write(reinterpret_cast<const char*>(observed.data()),
             static_cast<std::streamsize>(observed.size()));
  if (!os) throw std::runtime_error("grid write failed: " + path);
}

VoxelGrid VoxelGrid::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open grid file: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kGridMagic, 8) != 0)
    throw std::runtime_error("not a voxel grid file: " + path);
  uint32_t version = 0, kind = 0, has_mask = 0;
  is.read(reinterpret_cast<char*>(&version), 4);
  is.read(reinterpret_cast<char*>(&kind), 4);
  is.read(reinterpret_cast<char*>(&has_mask), 4);
  if (version != 1)
    throw std::runtime_error("unsupported grid version " + std::to_string(version));
  VoxelGrid g;
  g.payload = static_cast<Payload>(kind);
  for (int k = 0; k < 3; ++k) {
    int32_t d = 0;
    is.read(reinterpret_cast<char*>(&d), 4);
    g.dims[k] = d;
  }
  for (int k = 0; k < 3; ++k) is.read(reinterpret_cast<char*>(&g.origin[k]), 8);
  is.read(reinterpret_cast<char*>(&g.voxel_size), 8);
  if ((g.dims.array() <= 0).any() || g.voxel_size <= 0)
    throw std::runtime_error("corrupt grid header: " + path);
  g.data.resize(static_cast<size_t>(g.count()));
  is.read(reinterpret_cast<char*>(g.data.data()),
          static_cast<std::streamsize>(g.data.size() * 8));
  if (has_mask) {
    g.observed.resize(static_cast<size_t>(g.count()));
    is.read(reinterpret_cast<char*>(g.observed.data()),
            static_cast<std::streamsize>(g.observed.size()));
  }
  if (!is) throw std::runtime_error("truncated grid file: " + path);
  return g;
}

}  // namespace nsdf
