#pragma once

#include "nsdf/camera.hpp"
#include "nsdf/scene.hpp"

namespace nsdf {

struct RenderConfig {
  double hit_eps = 1e-4;   // stop when |sdf| falls below this
  double max_range = 10.0; // metres along the ray; beyond = invalid
  int max_steps = 512;
};

// Depth rendering by sphere tracing the analytic scene SDF. Pixels whose ray
// starts inside geometry, leaves the range, or fails to converge are invalid.
DepthFrame render_depth(const Scene& scene, const Pose& pose,
                        const Intrinsics& intr,
                        const RenderConfig& cfg = RenderConfig());

struct NoiseParams {
  double sigma0 = 0.002;     // metres
  double sigma2 = 0.00125;   // metres^-1, scales depth^2
  double quantization = 0.001;  // metres
};

// Depth-dependent Gaussian noise followed by quantization. Invalid pixels are
// left untouched; samples driven to zero or below become invalid.
DepthFrame add_depth_noise(const DepthFrame& frame, const NoiseParams& params,
                           Rng& rng);

}  // namespace nsdf
