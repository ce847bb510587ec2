#include "nsdf/trajectory.hpp"

#include <stdexcept>

namespace nsdf {

TrajectoryKind parse_trajectory_kind(const std::string& name) {
  if (name == "orbit") return TrajectoryKind::kOrbit;
  if (name == "nav") return TrajectoryKind::kNav;
  if (name == "approach") return TrajectoryKind::kApproach;
  throw std::invalid_argument("unknown trajectory kind: " + name);
}

Pose look_at(const Vec3d& eye, const Vec3d& target) {
  Vec3d forward = target - eye;
  const double n = forward.norm();
  if (n < 1e-12) throw std::invalid_argument("look_at: eye equals target");
  forward /= n;
  Vec3d down(0, 0, -1);
  if (std::abs(forward.dot(down)) > 0.999) down = Vec3d(1, 0, 0);
  const Vec3d right = down.cross(forward).normalized();
  const Vec3d down_ortho = forward.cross(right);
  Pose p;
  p.rotation.col(0) = right;
  p.rotation.col(1) = down_ortho;
  p.rotation.col(2) = forward;
  p.translation = eye;
  return p;
}

namespace {

Vec3d primitive_center(const Primitive& prim) {
  return std::visit(
      [](const auto& p) -> Vec3d {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Plane>)
          return p.normal * p.offset;
        else
          return p.center;
      },
      prim);
}

void check_clearance(const Scene& scene, const Vec3d& pos, double clearance) {
  if (scene_distance(scene, pos) <= clearance)
    throw std::runtime_error("trajectory: camera position outside free space");
}

Vec3d catmull_rom(const std::vector<Vec3d>& pts, double s) {
  const int n = static_cast<int>(pts.size());
  const double u = s * (n - 1);
  int i = std::min(n - 2, static_cast<int>(u));
  const double t = u - i;
  const Vec3d& p0 = pts[std::max(0, i - 1)];
  const Vec3d& p1 = pts[i];
  const Vec3d& p2 = pts[i + 1];
  const Vec3d& p3 = pts[std::min(n - 1, i + 2)];
  const double t2 = t * t, t3 = t2 * t;
  return 0.5 * ((2.0 * p1) + (-p0 + p2) * t +
                (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2 +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t3);
}

std::vector<Pose> make_orbit(const TrajectoryConfig& cfg, const Scene& scene) {
  const Vec3d c = scene.bounds.center();
  const Vec3d ext = scene.bounds.extent();
  const double r = cfg.orbit_radius > 0
                       ? cfg.orbit_radius
                       : 0.45 * std::min(ext.x(), ext.y());
  const Vec3d target(c.x(), c.y(), scene.bounds.min.z() + 0.45 * ext.z());
  std::vector<Pose> out;
  for (int i = 0; i < cfg.n_frames; ++i) {
    const double th = 2.0 * M_PI * i / cfg.n_frames;
    const Vec3d eye(c.x() + r * std::cos(th), c.y() + r * std::sin(th),
                    scene.bounds.min.z() + cfg.height);
    check_clearance(scene, eye, cfg.clearance);
    out.push_back(look_at(eye, target));
  }
  return out;
}

std::vector<Pose> make_nav(const TrajectoryConfig& cfg, const Scene& scene,
                           Rng& rng) {
  const double z = scene.bounds.min.z() + cfg.height;

  // The spline can overshoot near obstacles; redraw the waypoints until the
  // whole sampled path stays in free space.
  for (int attempt = 0; attempt < 50; ++attempt) {
    std::vector<Vec3d> waypoints;
    bool ok = true;
    for (int w = 0; w < cfg.n_waypoints && ok; ++w) {
      ok = false;
      for (int draw = 0; draw < 200; ++draw) {
        Vec3d p(rng.uniform(scene.bounds.min.x(), scene.bounds.max.x()),
                rng.uniform(scene.bounds.min.y(), scene.bounds.max.y()), z);
        if (scene_distance(scene, p) > 3.0 * cfg.clearance) {
          waypoints.push_back(p);
          ok = true;
          break;
        }
      }
    }
    if (!ok) continue;

    std::vector<Pose> out;
    Vec3d prev_dir(1, 0, 0);
    for (int i = 0; i < cfg.n_frames && ok; ++i) {
      const double s = cfg.n_frames == 1 ? 0.0 : double(i) / (cfg.n_frames - 1);
      const Vec3d pos = catmull_rom(waypoints, s);
      if (scene_distance(scene, pos) <= cfg.clearance) {
        ok = false;
        break;
      }
      const double ds = 0.5 / std::max(1, cfg.n_frames - 1);
      const Vec3d ahead = catmull_rom(waypoints, std::min(1.0, s + ds));
      Vec3d dir = ahead - pos;
      dir.z() = 0;
      if (dir.norm() < 1e-9) dir = prev_dir;
      dir.normalize();
      prev_dir = dir;
      out.push_back(look_at(pos, pos + dir - Vec3d(0, 0, 0.15)));
    }
    if (ok) return out;
  }
  throw std::runtime_error(
      "trajectory: could not place a collision-free nav path");
}

std::vector<Pose> make_approach(const TrajectoryConfig& cfg, const Scene& scene) {
  if (cfg.approach_target < 0 ||
      cfg.approach_target >= static_cast<int>(scene.primitives.size()))
    throw std::invalid_argument("trajectory: approach target index out of range");
  const Primitive& prim = scene.primitives[static_cast<size_t>(cfg.approach_target)];
  const Vec3d c = primitive_center(prim);
  Vec3d away = scene.bounds.center() - c;
  away.z() = 0;
  if (away.norm() < 1e-9) away = Vec3d(1, 0, 0);
  away.normalize();

  // Walk out from the surface along `away` to find start / end camera spots.
  auto at_surface_distance = [&](double want) {
    double lo = 0.0, hi = 3.0;
    Vec3d best = c + away * hi;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      const Vec3d p = c + away * mid + Vec3d(0, 0, cfg.height * 0.5);
      if (primitive_sdf(prim, p).dist < want)
        lo = mid;
      else {
        hi = mid;
        best = p;
      }
    }
    return best;
  };

  const Vec3d start = at_surface_distance(1.5);
  const Vec3d end = at_surface_distance(0.35);
  std::vector<Pose> out;
  for (int i = 0; i < cfg.n_frames; ++i) {
    const double s = cfg.n_frames == 1 ? 1.0 : double(i) / (cfg.n_frames - 1);
    const double e = s * s * (3.0 - 2.0 * s);  // smoothstep
    const Vec3d pos = start + (end - start) * e;
    check_clearance(scene, pos, cfg.clearance);
    out.push_back(look_at(pos, c));
  }
  return out;
}

}  // namespace

std::vector<Pose> generate_trajectory(const TrajectoryConfig& cfg,
                                      const Scene& scene, Rng& rng) {
  if (cfg.n_frames < 1)
    throw std::invalid_argument("trajectory: need at least one frame");
  switch (cfg.kind) {
    case TrajectoryKind::kOrbit: return make_orbit(cfg, scene);
    case TrajectoryKind::kNav: return make_nav(cfg, scene, rng);
    case TrajectoryKind::kApproach: return make_approach(cfg, scene);
  }
  throw std::logic_error("unknown trajectory kind");
}

}  // namespace nsdf
