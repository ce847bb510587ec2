#include "nsdf/fusion.hpp"

namespace nsdf {

OccupancyFusion::OccupancyFusion(const Vec3d& bounds_min, const Vec3d& bounds_max,
                                 const FusionConfig& cfg)
    : cfg_(cfg),
      occ_(VoxelGrid::covering(bounds_min, bounds_max, cfg.margin,
                               cfg.voxel_size, VoxelGrid::Payload::kOccupancy,
                               0.0)) {
  occ_.observed.assign(static_cast<size_t>(occ_.count()), 0);
}

void OccupancyFusion::fuse_frame(const DepthFrame& frame) {
  frame.validate();
  const Intrinsics& intr = frame.intrinsics;
  const Mat3d r_cw = frame.pose.rotation.transpose();
  const Vec3d t = frame.pose.translation;
  const double h = cfg_.half_band();

  for (int iz = 0; iz < occ_.dims.z(); ++iz)
    for (int iy = 0; iy < occ_.dims.y(); ++iy)
      for (int ix = 0; ix < occ_.dims.x(); ++ix) {
        const Vec3d pc = r_cw * (occ_.center(ix, iy, iz) - t);
        if (pc.z() <= 0) continue;
        const int u = static_cast<int>(std::lround(intr.fx * pc.x() / pc.z() + intr.cx));
        const int v = static_cast<int>(std::lround(intr.fy * pc.y() / pc.z() + intr.cy));
        if (u < 0 || u >= intr.width || v < 0 || v >= intr.height) continue;
        const double depth = frame.depth(v, u);
        if (!(std::isfinite(depth) && depth > 0)) continue;

        const size_t idx = static_cast<size_t>(occ_.index(ix, iy, iz));
        const double dz = pc.z() - depth;
        if (std::abs(dz) <= h) {
          if (cfg_.log_odds)
            occ_.data[idx] += cfg_.log_odds_hit;
          else
            occ_.data[idx] = 1.0;
          occ_.observed[idx] = 1;
        } else if (dz < -h) {
          if (cfg_.log_odds)
            occ_.data[idx] += cfg_.log_odds_miss;
          else
            occ_.data[idx] = 0.0;
          occ_.observed[idx] = 1;
        }
        // Voxels behind the surface stay at their previous state.
      }
  ++frames_fused_;
}

VoxelGrid OccupancyFusion::binary_occupancy() const {
  VoxelGrid g = occ_;
  if (cfg_.log_odds)
    for (double& v : g.data) v = v > 0 ? 1.0 : 0.0;
  return g;
}

VoxelGrid OccupancyFusion::signed_distance() const {
  VoxelGrid sdf = signed_field(binary_occupancy());
  sdf.observed = occ_.observed;
  return sdf;
}

}  // namespace nsdf
