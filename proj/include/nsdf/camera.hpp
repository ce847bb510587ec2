#pragma once

#include <memory>
#include <vector>

#include "nsdf/common.hpp"

namespace nsdf {

struct Intrinsics {
  double fx = 0, fy = 0;  // focal lengths, pixels
  double cx = 0, cy = 0;  // principal point, pixels
  int width = 0, height = 0;

  void validate() const;
};

// Camera-to-world transform T_WC.
struct Pose {
  Mat3d rotation = Mat3d::Identity();
  Vec3d translation = Vec3d::Zero();

  void validate(double tol = 1e-9) const;

  Vec3d apply(const Vec3d& p_cam) const { return rotation * p_cam + translation; }
  Vec3d inverse_apply(const Vec3d& p_world) const {
    return rotation.transpose() * (p_world - translation);
  }

  Mat4d matrix() const;
  static Pose from_matrix(const Mat4d& m);
};

// Depth image with pose and intrinsics; invalid pixels hold NaN.
struct DepthFrame {
  Eigen::MatrixXd depth;  // height x width, z-depth in metres
  Pose pose;
  Intrinsics intrinsics;
  int frame_id = 0;
  double timestamp = 0;

  bool valid_at(int u, int v) const {
    const double d = depth(v, u);
    return std::isfinite(d) && d > 0;
  }
  void validate() const;
};

struct Ray {
  Vec3d cam;         // camera-frame direction with unit z-component
  Vec3d world_unit;  // world-frame unit direction
};

// Back-projects pixel (u, v): the camera ray has unit z so that the point at
// z-depth d is pose * (d * ray.cam). Throws on out-of-bounds pixels.
Ray backproject(const Intrinsics& intr, const Pose& pose, double u, double v);

// World point at z-depth d along the pixel ray.
Vec3d backproject_point(const Intrinsics& intr, const Pose& pose, double u,
                        double v, double d);

struct PixelDepth {
  double u = 0, v = 0, d = 0;
  bool in_front = false;  // z > 0 in the camera frame
};

// Projects a world point into the image; in_front is false behind the camera.
PixelDepth project(const Intrinsics& intr, const Pose& pose, const Vec3d& x);

}  // namespace nsdf
