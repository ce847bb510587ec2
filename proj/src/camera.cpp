#include "nsdf/camera.hpp"

#include <stdexcept>

namespace nsdf {

void Intrinsics::validate() const {
  if (fx <= 0 || fy <= 0) throw std::invalid_argument("intrinsics: fx, fy must be positive");
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("intrinsics: image dimensions must be positive");
  if (cx < 0 || cx >= width || cy < 0 || cy >= height)
    throw std::invalid_argument("intrinsics: principal point outside image");
}

void Pose::validate(double tol) const {
  const Mat3d rtr = rotation.transpose() * rotation;
  if ((rtr - Mat3d::Identity()).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("pose: rotation is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > tol)
    throw std::invalid_argument("pose: rotation determinant is not +1");
  if (!translation.allFinite())
    throw std::invalid_argument("pose: non-finite translation");
}

Mat4d Pose::matrix() const {
  Mat4d m = Mat4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Pose Pose::from_matrix(const Mat4d& m) {
  Pose p;
  p.rotation = m.topLeftCorner<3, 3>();
  p.translation = m.topRightCorner<3, 1>();
  return p;
}

void DepthFrame::validate() const {
  intrinsics.validate();
  pose.validate();
  if (depth.rows() != intrinsics.height || depth.cols() != intrinsics.width)
    throw std::invalid_argument("depth frame: image dimensions do not match intrinsics");
  for (Eigen::Index i = 0; i < depth.size(); ++i) {
    const double d = depth.data()[i];
    if (std::isfinite(d) && d < 0)
      throw std::invalid_argument("depth frame: negative depth value");
  }
}

Ray backproject(const Intrinsics& intr, const Pose& pose, double u, double v) {
  if (u < 0 || u >= intr.width || v < 0 || v >= intr.height)
    throw std::out_of_range("backproject: pixel outside image bounds");
  Ray r;
  r.cam = Vec3d((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0);
  r.world_unit = (pose.rotation * r.cam).normalized();
  return r;
}

Vec3d backproject_point(const Intrinsics& intr, const Pose& pose, double u,
                        double v, double d) {
  const Ray r = backproject(intr, pose, u, v);
  return pose.apply(d * r.cam);
}

PixelDepth project(const Intrinsics& intr, const Pose& pose, const Vec3d& x) {
  const Vec3d pc = pose.inverse_apply(x);
  PixelDepth out;
  out.in_front = pc.z() > 0;
  out.d = pc.z();
  if (out.in_front) {
    out.u = intr.fx * pc.x() / pc.z() + intr.cx;
    out.v = intr.fy * pc.y() / pc.z() + intr.cy;
  }
  return out;
}

}  // namespace nsdf
