#include "nsdf/render.hpp"

namespace nsdf {

DepthFrame render_depth(const Scene& scene, const Pose& pose,
                        const Intrinsics& intr, const RenderConfig& cfg) {
  intr.validate();
  pose.validate();
  DepthFrame frame;
  frame.pose = pose;
  frame.intrinsics = intr;
  frame.depth.setConstant(intr.height, intr.width,
                          std::numeric_limits<double>::quiet_NaN());

  const Vec3d origin = pose.translation;
  const bool origin_free = scene_distance(scene, origin) > 0;

  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      if (!origin_free) continue;
      const Vec3d ray_cam((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0);
      const double ray_len = ray_cam.norm();
      const Vec3d dir = (pose.rotation * ray_cam) / ray_len;

      double t = 0.0;
      bool hit = false;
      for (int step = 0; step < cfg.max_steps; ++step) {
        const Vec3d p = origin + t * dir;
        const double d = scene_distance(scene, p);
        if (d < -cfg.hit_eps) break;  // marched into geometry
        if (std::abs(d) < cfg.hit_eps) {
          hit = true;
          break;
        }
        t += d;
        if (t > cfg.max_range) break;
      }
      if (hit) frame.depth(v, u) = t / ray_len;  // Euclidean t to z-depth
    }
  }
  return frame;
}

DepthFrame add_depth_noise(const DepthFrame& frame, const NoiseParams& params,
                           Rng& rng) {
  DepthFrame out = frame;
  const double q = params.quantization;
  for (Eigen::Index v = 0; v < out.depth.rows(); ++v) {
    for (Eigen::Index u = 0; u < out.depth.cols(); ++u) {
      const double d = out.depth(v, u);
      if (!(std::isfinite(d) && d > 0)) continue;
      double dn = d;
      const double sigma = params.sigma0 + params.sigma2 * d * d;
      if (sigma > 0) dn += sigma * rng.normal();
      if (q > 0) dn = std::round(dn / q) * q;
      out.depth(v, u) = dn > 0 ? dn : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

}  // namespace nsdf
