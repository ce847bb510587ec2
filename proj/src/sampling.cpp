#include "nsdf/sampling.hpp"

#include <stdexcept>

namespace nsdf {

std::vector<Vec2i> sample_pixels(const DepthFrame& frame, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_pixels: n must be >= 1");
  std::vector<Vec2i> valid;
  valid.reserve(static_cast<size_t>(frame.depth.size()));
  for (int v = 0; v < frame.intrinsics.height; ++v)
    for (int u = 0; u < frame.intrinsics.width; ++u)
      if (frame.valid_at(u, v)) valid.emplace_back(u, v);
  if (valid.empty())
    throw std::runtime_error("sample_pixels: frame " +
                             std::to_string(frame.frame_id) +
                             " has no valid depth pixels");
  std::vector<Vec2i> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = valid[rng.uniform_index(valid.size())];
  return out;
}

std::optional<std::vector<DepthSample>> sample_depths(
    double depth_uv, const DepthSampleConfig& cfg, Rng& rng) {
  if (!(std::isfinite(depth_uv) && depth_uv > 0))
    throw std::invalid_argument("sample_depths: invalid measured depth");
  if (depth_uv <= cfg.d_min) return std::nullopt;  // degenerate near-camera ray

  std::vector<DepthSample> out;
  out.reserve(static_cast<size_t>(cfg.n_stratified + cfg.n_gaussian + 1));
  const double lo = cfg.d_min;
  const double hi = depth_uv + cfg.delta;
  const double w = (hi - lo) / cfg.n_stratified;
  for (int k = 0; k < cfg.n_stratified; ++k)
    out.push_back({lo + (k + rng.uniform01()) * w, false});
  for (int k = 0; k < cfg.n_gaussian; ++k) {
    const double d = rng.normal(depth_uv, cfg.sigma);
    out.push_back({std::clamp(d, lo, hi), false});
  }
  out.push_back({depth_uv, true});
  return out;
}

NormalMap surface_normals(const DepthFrame& frame, const NormalConfig& cfg) {
  const Intrinsics& intr = frame.intrinsics;
  NormalMap map;
  map.width = intr.width;
  map.height = intr.height;
  map.normals.setConstant(3, static_cast<Eigen::Index>(intr.width) * intr.height,
                          std::numeric_limits<double>::quiet_NaN());

  auto point = [&](int u, int v) {
    const Vec3d ray((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0);
    return frame.pose.apply(frame.depth(v, u) * ray);
  };

  for (int v = 1; v + 1 < intr.height; ++v) {
    for (int u = 1; u + 1 < intr.width; ++u) {
      if (!frame.valid_at(u, v)) continue;
      const double d0 = frame.depth(v, u);
      bool ok = true;
      for (const auto& [du, dv] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
        if (!frame.valid_at(u + du, v + dv) ||
            std::abs(frame.depth(v + dv, u + du) - d0) > cfg.max_depth_jump) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      const Vec3d dpdu = point(u + 1, v) - point(u - 1, v);
      const Vec3d dpdv = point(u, v + 1) - point(u, v - 1);
      Vec3d n = dpdu.cross(dpdv);
      const double len = n.norm();
      if (len < 1e-12) continue;
      n /= len;
      const Vec3d view = point(u, v) - frame.pose.translation;
      if (n.dot(view) > 0) n = -n;
      map.normals.col(static_cast<Eigen::Index>(v) * intr.width + u) = n;
    }
  }
  return map;
}

void SampleBatch::resize(Eigen::Index n) {
  x.resize(3, n);
  p_ray.resize(3, n);
  ray_unit.resize(3, n);
  normal.setConstant(3, n, std::numeric_limits<double>::quiet_NaN());
  d.resize(n);
  depth.resize(n);
  frame_id.assign(static_cast<size_t>(n), 0);
  pixel.assign(static_cast<size_t>(n), Vec2i::Zero());
  is_surface.assign(static_cast<size_t>(n), 0);
  bound.setZero(n);
  g.setZero(3, n);
  g_valid.assign(static_cast<size_t>(n), 0);
}

SampleBatch build_sample_batch(const std::vector<const DepthFrame*>& frames,
                               const std::vector<const NormalMap*>& normals,
                               int pixels_per_frame,
                               const DepthSampleConfig& cfg, Rng& rng) {
  struct Row {
    Vec3d x, p_ray, ray_unit, normal;
    double d, depth;
    int frame_id;
    Vec2i pixel;
    bool is_surface;
  };
  std::vector<Row> rows;
  rows.reserve(frames.size() * static_cast<size_t>(pixels_per_frame) *
               static_cast<size_t>(cfg.n_stratified + cfg.n_gaussian + 1));

  for (size_t fi = 0; fi < frames.size(); ++fi) {
    const DepthFrame& frame = *frames[fi];
    const NormalMap* nmap =
        fi < normals.size() ? normals[fi] : nullptr;
    const std::vector<Vec2i> pixels = sample_pixels(frame, pixels_per_frame, rng);
    for (const Vec2i& px : pixels) {
      const double D = frame.depth(px.y(), px.x());
      const auto depths = sample_depths(D, cfg, rng);
      if (!depths) continue;
      const Vec3d ray_cam((px.x() - frame.intrinsics.cx) / frame.intrinsics.fx,
                          (px.y() - frame.intrinsics.cy) / frame.intrinsics.fy,
                          1.0);
      const Vec3d dir_world = frame.pose.rotation * ray_cam;
      const Vec3d ray_unit = dir_world.normalized();
      const Vec3d p_surface = frame.pose.apply(D * ray_cam);
      Vec3d normal = Vec3d::Constant(std::numeric_limits<double>::quiet_NaN());
      if (nmap && nmap->valid(px.x(), px.y())) normal = nmap->at(px.x(), px.y());
      for (const DepthSample& ds : *depths) {
        Row r;
        r.x = frame.pose.translation + ds.d * dir_world;
        r.p_ray = p_surface;
        r.ray_unit = ray_unit;
        r.normal = normal;
        r.d = ds.d;
        r.depth = D;
        r.frame_id = frame.frame_id;
        r.pixel = px;
        r.is_surface = ds.is_surface;
        rows.push_back(r);
      }
    }
  }

  SampleBatch batch;
  batch.resize(static_cast<Eigen::Index>(rows.size()));
  for (Eigen::Index i = 0; i < batch.size(); ++i) {
    const Row& r = rows[static_cast<size_t>(i)];
    batch.x.col(i) = r.x;
    batch.p_ray.col(i) = r.p_ray;
    batch.ray_unit.col(i) = r.ray_unit;
    batch.normal.col(i) = r.normal;
    batch.d[i] = r.d;
    batch.depth[i] = r.depth;
    batch.frame_id[static_cast<size_t>(i)] = r.frame_id;
    batch.pixel[static_cast<size_t>(i)] = r.pixel;
    batch.is_surface[static_cast<size_t>(i)] = r.is_surface;
  }
  return batch;
}

}  // namespace nsdf
