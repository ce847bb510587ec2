#include "nsdf/bounds.hpp"

namespace nsdf {

namespace {

inline double sign_of(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

}  // namespace

double ray_bound(const Vec3d& x, const Vec3d& p_ray, double depth, double d) {
  return sign_of(depth - d) * (x - p_ray).norm();
}

double normal_bound(const Vec3d& x, const Vec3d& p_ray, const Vec3d& ray_unit,
                    const Vec3d& normal, double depth, double d,
                    double max_dist) {
  const double rb = ray_bound(x, p_ray, depth, d);
  if (!normal.allFinite()) return rb;
  if ((x - p_ray).norm() >= max_dist) return rb;
  const double cosine = std::clamp(-ray_unit.dot(normal), 0.0, 1.0);
  return cosine * rb;
}

BatchBoundResult batch_bound(
    const Vec3d& x, double depth, double d,
    const Eigen::Ref<const Mat3X<double>>& surface_points) {
  if (surface_points.cols() == 0)
    throw std::invalid_argument("batch_bound: empty surface point set");
  BatchBoundResult out;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < surface_points.cols(); ++j) {
    const double d2 = (surface_points.col(j) - x).squaredNorm();
    if (d2 < best) {
      best = d2;
      out.nearest = j;
    }
  }
  out.bound = sign_of(depth - d) * std::sqrt(best);
  return out;
}

Vec3d approx_gradient(const Vec3d& x, const Vec3d& nearest_p, double depth,
                      double d) {
  return sign_of(depth - d) * (x - nearest_p);
}

BoundDiagnostics compute_bounds(SampleBatch& batch, const LossConfig& cfg) {
  BoundDiagnostics diag;
  const Eigen::Index n = batch.size();

  Mat3X<double> surface_points;
  if (cfg.bound_method == BoundMethod::kBatch) {
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (batch.is_surface[static_cast<size_t>(i)]) ++count;
    surface_points.resize(3, count);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (batch.is_surface[static_cast<size_t>(i)])
        surface_points.col(k++) = batch.x.col(i);
    diag.n_surface_points = count;
    if (count == 0)
      throw std::runtime_error("compute_bounds: batch has no surface samples");
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3d x = batch.x.col(i);
    const Vec3d p_ray = batch.p_ray.col(i);
    const double D = batch.depth[i];
    const double d = batch.d[i];
    const Vec3d normal = batch.normal.col(i);
    const bool has_normal = normal.allFinite();

    Vec3d nearest_p = p_ray;
    switch (cfg.bound_method) {
      case BoundMethod::kRay:
        batch.bound[i] = ray_bound(x, p_ray, D, d);
        break;
      case BoundMethod::kNormal:
        if (!has_normal && (x - p_ray).norm() < cfg.normal_max_dist)
          ++diag.n_normal_fallback;
        batch.bound[i] =
            normal_bound(x, p_ray, batch.ray_unit.col(i), normal, D, d,
                         cfg.normal_max_dist);
        break;
      case BoundMethod::kBatch: {
        const BatchBoundResult r = batch_bound(x, D, d, surface_points);
        batch.bound[i] = r.bound;
        nearest_p = surface_points.col(r.nearest);
        break;
      }
    }

    if (batch.is_surface[static_cast<size_t>(i)]) {
      // Surface samples take the depth-image normal as gradient target.
      if (has_normal) {
        batch.g.col(i) = normal;
        batch.g_valid[static_cast<size_t>(i)] = 1;
      } else {
        batch.g.col(i).setZero();
        batch.g_valid[static_cast<size_t>(i)] = 0;
        ++diag.n_grad_invalid;
      }
    } else {
      const Vec3d g = approx_gradient(x, nearest_p, D, d);
      if (g.norm() > 0) {
        batch.g.col(i) = g;
        batch.g_valid[static_cast<size_t>(i)] = 1;
      } else {
        batch.g.col(i).setZero();
        batch.g_valid[static_cast<size_t>(i)] = 0;
        ++diag.n_grad_invalid;
      }
    }
  }
  return diag;
}

}  // namespace nsdf
