#pragma once

#include "nsdf/losses.hpp"
#include "nsdf/sampling.hpp"

namespace nsdf {

// Signed ray bound: sgn(D - d) times the Euclidean distance from the sample
// to its own ray-surface intersection.
double ray_bound(const Vec3d& x, const Vec3d& p_ray, double depth, double d);

// Normal-corrected bound: the ray bound scaled by the cosine between the
// viewing direction and the (camera-facing) surface normal. Applies only
// within `max_dist` of the ray-surface intersection and with a valid normal;
// falls back to the ray bound otherwise.
double normal_bound(const Vec3d& x, const Vec3d& p_ray, const Vec3d& ray_unit,
                    const Vec3d& normal, double depth, double d,
                    double max_dist = 0.30);

// Batch-distance bound: sgn(D - d) times the distance to the nearest surface
// sample in the batch. Returns the bound and the index of the winning point
// (ties break to the lowest index).
struct BatchBoundResult {
  double bound = 0;
  Eigen::Index nearest = -1;
};
BatchBoundResult batch_bound(const Vec3d& x, double depth, double d,
                             const Eigen::Ref<const Mat3X<double>>& surface_points);

// Approximate SDF gradient target: sgn(D - d)(x - p) for the chosen nearby
// surface point p.
Vec3d approx_gradient(const Vec3d& x, const Vec3d& nearest_p, double depth,
                      double d);

struct BoundDiagnostics {
  Eigen::Index n_normal_fallback = 0;  // invalid normals degraded to ray
  Eigen::Index n_grad_invalid = 0;     // samples excluded from the grad loss
  Eigen::Index n_surface_points = 0;
};

// Fills batch.bound / batch.g / batch.g_valid for the configured method.
// Surface samples take the depth-image normal as their gradient target.
BoundDiagnostics compute_bounds(SampleBatch& batch, const LossConfig& cfg);

}  // namespace nsdf
