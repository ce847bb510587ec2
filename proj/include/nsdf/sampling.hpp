#pragma once

#include <optional>
#include <vector>

#include "nsdf/camera.hpp"

namespace nsdf {

struct DepthSampleConfig {
  int n_stratified = 20;  // N
  int n_gaussian = 8;     // M
  double d_min = 0.07;    // metres
  double delta = 0.10;    // sampling margin behind the surface
  double sigma = 0.10;    // std of the Gaussian surface samples
};

// Uniform over pixels with valid depth; throws if the frame has none.
std::vector<Vec2i> sample_pixels(const DepthFrame& frame, int n, Rng& rng);

struct DepthSample {
  double d = 0;
  bool is_surface = false;
};

// N stratified depths in [d_min, D + delta] (one jittered draw per bin,
// ascending), M Gaussian draws around D clamped into the same interval, and
// finally the surface sample at exactly D. Returns nothing when D <= d_min
// (the caller skips the ray).
std::optional<std::vector<DepthSample>> sample_depths(
    double depth_uv, const DepthSampleConfig& cfg, Rng& rng);

// Per-pixel world-frame surface normals from central differences of
// back-projected points, oriented toward the camera. Pixels at the border,
// near invalid depth, or across depth discontinuities are invalid (NaN).
struct NormalMap {
  int width = 0, height = 0;
  Mat3X<double> normals;  // column v * width + u

  bool valid(int u, int v) const {
    return std::isfinite(normals(0, static_cast<Eigen::Index>(v) * width + u));
  }
  Vec3d at(int u, int v) const {
    return normals.col(static_cast<Eigen::Index>(v) * width + u);
  }
};

struct NormalConfig {
  double max_depth_jump = 0.10;  // metres; invalidate across discontinuities
};

NormalMap surface_normals(const DepthFrame& frame,
                          const NormalConfig& cfg = NormalConfig());

// Flat per-sample arrays for one training iteration.
struct SampleBatch {
  Mat3X<double> x;        // world query points
  Mat3X<double> p_ray;    // ray-surface intersection of the sample's pixel
  Mat3X<double> ray_unit; // world unit viewing direction
  Mat3X<double> normal;   // pixel surface normal (NaN when invalid)
  VecX<double> d;         // sample z-depth
  VecX<double> depth;     // measured D[u,v]
  std::vector<int> frame_id;
  std::vector<Vec2i> pixel;
  std::vector<uint8_t> is_surface;

  // Filled by the supervision stage.
  VecX<double> bound;
  Mat3X<double> g;
  std::vector<uint8_t> g_valid;

  Eigen::Index size() const { return x.cols(); }
  void resize(Eigen::Index n);
};

// Samples `pixels_per_frame` rays from each frame and expands them into
// depth samples. Normals may be null when not needed by the bound method.
SampleBatch build_sample_batch(
    const std::vector<const DepthFrame*>& frames,
    const std::vector<const NormalMap*>& normals, int pixels_per_frame,
    const DepthSampleConfig& cfg, Rng& rng);

}  // namespace nsdf
