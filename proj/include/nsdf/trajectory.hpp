#pragma once

#include <vector>

#include "nsdf/camera.hpp"
#include "nsdf/scene.hpp"

namespace nsdf {

enum class TrajectoryKind { kOrbit, kNav, kApproach };

TrajectoryKind parse_trajectory_kind(const std::string& name);

struct TrajectoryConfig {
  TrajectoryKind kind = TrajectoryKind::kOrbit;
  int n_frames = 60;
  double height = 1.3;        // camera height (orbit, nav)
  double orbit_radius = 0.0;  // 0 = derived from scene bounds
  int n_waypoints = 5;        // nav
  int approach_target = 0;    // primitive index (approach)
  double clearance = 0.1;     // minimum free-space distance at camera centres
};

// Camera looking from `eye` toward `target`, +z up. Camera frame follows the
// pinhole convention: x right, y down, z forward.
Pose look_at(const Vec3d& eye, const Vec3d& target);

// All returned poses sit in free space (scene sdf > clearance) and the
// positions are C1-continuous in the frame index.
std::vector<Pose> generate_trajectory(const TrajectoryConfig& cfg,
                                      const Scene& scene, Rng& rng);

}  // namespace nsdf
