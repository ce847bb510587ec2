#pragma once

#include "nsdf/camera.hpp"
#include "nsdf/edt.hpp"
#include "nsdf/voxel_grid.hpp"

namespace nsdf {

struct FusionConfig {
  double voxel_size = 0.07;
  double margin = 0.5;        // metres added around the scene bounds
  double band = 0.0;          // occupancy half-band h; 0 = voxel_size
  bool log_odds = false;      // accumulate evidence instead of last-write-wins
  double log_odds_hit = 0.85;
  double log_odds_miss = -0.4;

  double half_band() const { return band > 0 ? band : voxel_size; }
};

// Projective occupancy fusion over a fixed grid initialised unoccupied.
// Voxels project into each frame; a voxel within the half-band of the
// measured depth becomes occupied, a voxel in front of it becomes free, and
// voxels behind the surface keep their previous state.
class OccupancyFusion {
 public:
  OccupancyFusion(const Vec3d& bounds_min, const Vec3d& bounds_max,
                  const FusionConfig& cfg);

  void fuse_frame(const DepthFrame& frame);

  const VoxelGrid& occupancy() const { return occ_; }
  // Occupancy with log-odds evidence thresholded at zero (log-odds mode).
  VoxelGrid binary_occupancy() const;
  // Signed distance grid carrying the observed mask for unmapped queries.
  VoxelGrid signed_distance() const;

  Eigen::Index frames_fused() const { return frames_fused_; }

 private:
  FusionConfig cfg_;
  VoxelGrid occ_;          // binary occupancy or log-odds evidence
  Eigen::Index frames_fused_ = 0;
};

}  // namespace nsdf
