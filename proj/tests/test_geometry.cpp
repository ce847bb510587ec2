#include <doctest.h>

#include "nsdf/bounds.hpp"
#include "nsdf/camera.hpp"
#include "nsdf/losses.hpp"
#include "nsdf/render.hpp"
#include "nsdf/sampling.hpp"

using namespace nsdf;

namespace {

Intrinsics test_intrinsics(int w = 64, int h = 48) {
  Intrinsics intr;
  intr.width = w;
  intr.height = h;
  intr.fx = intr.fy = 55.4;
  intr.cx = (w - 1) / 2.0;
  intr.cy = (h - 1) / 2.0;
  return intr;
}

DepthFrame constant_frame(double depth, int w = 64, int h = 48) {
  DepthFrame f;
  f.intrinsics = test_intrinsics(w, h);
  f.depth.setConstant(h, w, depth);
  f.frame_id = 7;
  return f;
}

}  // namespace

TEST_CASE("backproject at the principal point and ray conventions") {
  const Intrinsics intr = test_intrinsics();
  Pose pose;  // identity
  const Ray r = backproject(intr, pose, intr.cx, intr.cy);
  CHECK(r.cam.x() == doctest::Approx(0).epsilon(1e-15));
  CHECK(r.cam.y() == doctest::Approx(0).epsilon(1e-15));
  CHECK(r.cam.z() == 1.0);
  const Vec3d p = backproject_point(intr, pose, intr.cx, intr.cy, 1.7);
  CHECK((p - Vec3d(0, 0, 1.7)).norm() < 1e-12);

  for (double u : {0.0, 13.0, 63.0})
    for (double v : {0.0, 21.0, 47.0})
      CHECK(backproject(intr, pose, u, v).cam.z() == 1.0);

  Pose trans;
  trans.translation = Vec3d(1, -2, 3);
  const Ray rt = backproject(intr, trans, 10, 20);
  const Vec3d pt = backproject_point(intr, trans, 10, 20, 2.0);
  CHECK((pt - (trans.translation + 2.0 * rt.cam)).norm() < 1e-12);

  CHECK_THROWS_AS(backproject(intr, pose, -1, 0), std::out_of_range);
  CHECK_THROWS_AS(backproject(intr, pose, 0, intr.height), std::out_of_range);
}

TEST_CASE("projection round-trips backprojection") {
  const Intrinsics intr = test_intrinsics();
  Rng rng(11);
  Pose pose;
  pose.rotation = Eigen::AngleAxisd(0.7, Vec3d(1, 2, 3).normalized()).toRotationMatrix();
  pose.translation = Vec3d(0.4, -1.1, 2.0);
  for (int i = 0; i < 200; ++i) {
    const double u = rng.uniform(0, intr.width - 1);
    const double v = rng.uniform(0, intr.height - 1);
    const double d = rng.uniform(0.3, 8.0);
    const Vec3d x = backproject_point(intr, pose, u, v, d);
    const PixelDepth pd = project(intr, pose, x);
    CHECK(pd.in_front);
    CHECK(std::abs(pd.u - u) < 1e-6);
    CHECK(std::abs(pd.v - v) < 1e-6);
    CHECK(std::abs(pd.d - d) < 1e-6);
  }
}

TEST_CASE("pixel sampling is uniform over valid pixels and seeded") {
  DepthFrame f = constant_frame(2.0);
  f.depth(10, 20) = std::numeric_limits<double>::quiet_NaN();
  f.depth(11, 21) = 0.0;  // invalid encoding

  Rng rng1(5), rng2(5), rng3(6);
  const auto a = sample_pixels(f, 200, rng1);
  const auto b = sample_pixels(f, 200, rng2);
  const auto c = sample_pixels(f, 200, rng3);
  CHECK(a.size() == 200);
  bool identical = true, differs = false;
  for (size_t i = 0; i < a.size(); ++i) {
    identical &= (a[i] == b[i]);
    differs |= (a[i] != c[i]);
    CHECK(f.valid_at(a[i].x(), a[i].y()));
  }
  CHECK(identical);
  CHECK(differs);

  DepthFrame empty = constant_frame(0.0);
  Rng rng4(1);
  CHECK_THROWS_WITH_AS(sample_pixels(empty, 10, rng4),
                       doctest::Contains("no valid depth"), std::runtime_error);
}

TEST_CASE("depth sampling layout, surface inclusion and stratification") {
  DepthSampleConfig cfg;
  Rng rng(77);
  const double D = 2.37;
  const auto samples = sample_depths(D, cfg, rng);
  REQUIRE(samples.has_value());
  CHECK(samples->size() == 29);  // N + M + 1

  int n_surface = 0;
  for (const auto& s : *samples)
    if (s.is_surface) {
      ++n_surface;
      CHECK(s.d == D);  // bit-exact inclusion
    }
  CHECK(n_surface == 1);
  CHECK(samples->back().is_surface);

  // Stratified bins: sample k lies in [d_min + k w, d_min + (k+1) w).
  const double w = (D + cfg.delta - cfg.d_min) / cfg.n_stratified;
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = sample_depths(D, cfg, rng);
    for (int k = 0; k < cfg.n_stratified; ++k) {
      const double d = (*s)[static_cast<size_t>(k)].d;
      CHECK(d >= cfg.d_min + k * w);
      CHECK(d < cfg.d_min + (k + 1) * w);
    }
    for (int k = cfg.n_stratified; k < cfg.n_stratified + cfg.n_gaussian; ++k) {
      const double d = (*s)[static_cast<size_t>(k)].d;
      CHECK(d >= cfg.d_min);
      CHECK(d <= D + cfg.delta);
    }
  }

  CHECK_FALSE(sample_depths(0.05, cfg, rng).has_value());  // D <= d_min
  CHECK_THROWS_AS(sample_depths(-1.0, cfg, rng), std::invalid_argument);
}

TEST_CASE("normals of a fronto-parallel plane point at the camera") {
  DepthFrame f = constant_frame(2.0);
  const NormalMap nm = surface_normals(f);
  int checked = 0;
  for (int v = 1; v + 1 < f.intrinsics.height; ++v)
    for (int u = 1; u + 1 < f.intrinsics.width; ++u) {
      REQUIRE(nm.valid(u, v));
      const Vec3d n = nm.at(u, v);
      CHECK(std::abs(n.norm() - 1.0) < 1e-6);
      CHECK((n - Vec3d(0, 0, -1)).norm() < 1e-6);
      ++checked;
    }
  CHECK(checked > 1000);
  CHECK_FALSE(nm.valid(0, 0));  // border pixels invalid
}

TEST_CASE("normals invalidate across depth discontinuities") {
  DepthFrame f = constant_frame(2.0);
  for (int v = 0; v < f.intrinsics.height; ++v)
    for (int u = 32; u < f.intrinsics.width; ++u) f.depth(v, u) = 3.0;  // step edge
  const NormalMap nm = surface_normals(f);
  for (int v = 1; v + 1 < f.intrinsics.height; ++v) {
    CHECK_FALSE(nm.valid(31, v));
    CHECK_FALSE(nm.valid(32, v));
    CHECK(nm.valid(20, v));
  }
}

TEST_CASE("rendered sphere normals match the analytic normals") {
  Scene scene;
  scene.bounds.min = Vec3d(-3, -3, -3);
  scene.bounds.max = Vec3d(3, 3, 3);
  scene.primitives.emplace_back(Sphere{Vec3d(0, 0, 2.0), 1.0});

  Intrinsics intr;
  intr.width = 320;
  intr.height = 240;
  intr.fx = intr.fy = 277.0;
  intr.cx = 159.5;
  intr.cy = 119.5;
  const DepthFrame frame = render_depth(scene, Pose{}, intr);
  const NormalMap nm = surface_normals(frame);

  std::vector<double> errs;
  for (int v = 1; v + 1 < intr.height; ++v)
    for (int u = 1; u + 1 < intr.width; ++u) {
      if (!nm.valid(u, v)) continue;
      const Vec3d p = backproject_point(intr, Pose{}, u, v, frame.depth(v, u));
      const Vec3d analytic = scene_sdf(scene, p).grad;
      const double cosang = std::clamp(nm.at(u, v).dot(-analytic), -1.0, 1.0);
      errs.push_back(std::acos(std::abs(cosang)) * 180.0 / M_PI);
    }
  REQUIRE(errs.size() > 5000);
  std::nth_element(errs.begin(), errs.begin() + errs.size() / 2, errs.end());
  CHECK(errs[errs.size() / 2] <= 2.0);  // median angular error
}

TEST_CASE("ray bound on principal-axis rays") {
  const Vec3d p_ray(0, 0, 2.0);
  CHECK(ray_bound(Vec3d(0, 0, 1.5), p_ray, 2.0, 1.5) == doctest::Approx(0.5));
  CHECK(ray_bound(Vec3d(0, 0, 2.0), p_ray, 2.0, 2.0) == 0.0);
  CHECK(ray_bound(Vec3d(0, 0, 2.05), p_ray, 2.0, 2.05) == doctest::Approx(-0.05));
}

TEST_CASE("normal bound cosine correction and fallback") {
  const Vec3d x(0, 0, 1.5), p_ray(0, 0, 2.0);
  const Vec3d ray_unit(0, 0, 1);
  const double rb = ray_bound(x, p_ray, 2.0, 1.5);

  CHECK(normal_bound(Vec3d(0, 0, 1.8), p_ray, ray_unit, Vec3d(0, 0, -1), 2.0, 1.8) ==
        doctest::Approx(ray_bound(Vec3d(0, 0, 1.8), p_ray, 2.0, 1.8)));
  // Normal at 60 degrees from the reverse viewing direction halves the bound
  // (inside the 30 cm correction zone).
  const Vec3d n60(std::sin(M_PI / 3), 0, -std::cos(M_PI / 3));
  const Vec3d xn(0, 0, 1.8);
  CHECK(normal_bound(xn, p_ray, ray_unit, n60, 2.0, 1.8) ==
        doctest::Approx(0.5 * ray_bound(xn, p_ray, 2.0, 1.8)));
  // Far from the intersection the ray bound applies regardless of the normal.
  const Vec3d xf(0, 0, 1.5 - 0.5);
  CHECK(normal_bound(xf, p_ray, ray_unit, n60, 2.0, 1.0) ==
        doctest::Approx(ray_bound(xf, p_ray, 2.0, 1.0)));
  CHECK(normal_bound(x, p_ray, ray_unit, n60, 2.0, 1.5) == doctest::Approx(rb));
  // Invalid normal falls back inside the zone too.
  const Vec3d bad = Vec3d::Constant(std::numeric_limits<double>::quiet_NaN());
  CHECK(normal_bound(xn, p_ray, ray_unit, bad, 2.0, 1.8) ==
        doctest::Approx(ray_bound(xn, p_ray, 2.0, 1.8)));
}

TEST_CASE("batch bound equals a brute-force scan and tightens the ray bound") {
  Rng rng(300);
  for (int trial = 0; trial < 30; ++trial) {
    const int np = 1 + static_cast<int>(rng.uniform_index(40));
    Mat3X<double> P(3, np);
    for (int j = 0; j < np; ++j)
      P.col(j) = Vec3d(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    const Vec3d x(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    const double D = rng.uniform(0.5, 3.0);
    const double d = rng.uniform(0.1, 3.5);

    const BatchBoundResult r = batch_bound(x, D, d, P);
    // Independent all-pairs scan.
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index best_j = -1;
    for (Eigen::Index j = 0; j < np; ++j) {
      const double dist = (P.col(j) - x).norm();
      if (dist < best) {
        best = dist;
        best_j = j;
      }
    }
    CHECK(r.nearest == best_j);
    const double sgn = D > d ? 1.0 : (D < d ? -1.0 : 0.0);
    CHECK(r.bound == sgn * std::sqrt((P.col(best_j) - x).squaredNorm()));
  }

  // Single-point set containing the ray-surface point reduces to the ray bound.
  Mat3X<double> single(3, 1);
  single.col(0) = Vec3d(0, 0, 2);
  const BatchBoundResult r = batch_bound(Vec3d(0, 0, 1.2), 2.0, 1.2, single);
  CHECK(r.bound == doctest::Approx(ray_bound(Vec3d(0, 0, 1.2), single.col(0), 2.0, 1.2)));
}

TEST_CASE("approximate gradient directions and surface replacement") {
  // Free-space sample in front of the surface: g points from p toward x.
  const Vec3d x(0, 0, 1.0), p(0, 0, 2.0);
  const Vec3d g = approx_gradient(x, p, 2.0, 1.0);
  CHECK(g.dot(x - p) > 0);
  CHECK((g - (x - p)).norm() < 1e-15);
  // Behind the surface the sign flips.
  const Vec3d xb(0, 0, 2.1);
  const Vec3d gb = approx_gradient(xb, p, 2.0, 2.1);
  CHECK((gb + (xb - p)).norm() < 1e-15);
}

TEST_CASE("compute_bounds on a rendered plane frame") {
  Scene scene;
  scene.bounds.min = Vec3d(-5, -5, -1);
  scene.bounds.max = Vec3d(5, 5, 3);
  scene.primitives.emplace_back(Plane{Vec3d(0, 0, -1), -2.0});  // z = 2 wall

  Intrinsics intr = test_intrinsics(80, 60);
  const DepthFrame frame = render_depth(scene, Pose{}, intr);
  const NormalMap nm = surface_normals(frame);

  for (BoundMethod method :
       {BoundMethod::kRay, BoundMethod::kNormal, BoundMethod::kBatch}) {
    LossConfig cfg;
    cfg.bound_method = method;
    Rng rng(42);
    SampleBatch batch = build_sample_batch({&frame}, {&nm}, 50,
                                           DepthSampleConfig{}, rng);
    compute_bounds(batch, cfg);

    LossConfig ray_cfg;
    ray_cfg.bound_method = BoundMethod::kRay;
    Rng rng2(42);
    SampleBatch ray_batch = build_sample_batch({&frame}, {&nm}, 50,
                                               DepthSampleConfig{}, rng2);
    compute_bounds(ray_batch, ray_cfg);

    REQUIRE(batch.size() == ray_batch.size());
    for (Eigen::Index i = 0; i < batch.size(); ++i) {
      // Bound magnitudes never exceed the ray bound.
      CHECK(std::abs(batch.bound[i]) <= std::abs(ray_batch.bound[i]) + 1e-12);
      // Soundness against the analytic field (noiseless plane render).
      const double s = scene_distance(scene, batch.x.col(i));
      CHECK(std::abs(s) <= std::abs(batch.bound[i]) + 0.01);
      // Surface samples carry the depth normal as gradient target.
      if (batch.is_surface[static_cast<size_t>(i)] &&
          batch.g_valid[static_cast<size_t>(i)])
        CHECK((batch.g.col(i) - Vec3d(0, 0, -1)).norm() < 0.01);
    }
  }
}

TEST_CASE("free-space loss branches and continuity") {
  CHECK(free_space_loss(0.5, 1.0, 5.0) == 0.0);
  CHECK(free_space_loss(1.5, 1.0, 5.0) == doctest::Approx(0.5));
  CHECK(free_space_loss(-0.1, 1.0, 5.0) == doctest::Approx(std::expm1(0.5)));
  // Continuity at f = 0 and f = b.
  const double eps = 1e-9;
  CHECK(std::abs(free_space_loss(eps, 1.0, 5.0) - free_space_loss(-eps, 1.0, 5.0)) < 1e-7);
  CHECK(std::abs(free_space_loss(1.0 + eps, 1.0, 5.0) -
                 free_space_loss(1.0 - eps, 1.0, 5.0)) < 1e-7);
}

TEST_CASE("near-surface, sdf branch, gradient and eikonal losses") {
  CHECK(near_surface_loss(0.3, 0.3) == 0.0);
  CHECK(near_surface_loss(0.02, -0.01) == doctest::Approx(0.03));
  CHECK(near_surface_loss(0.5, 0.1) == near_surface_loss(0.1, 0.5));

  LossConfig cfg;
  CHECK(sdf_loss(0.3, 0.3, 0.0, cfg) == 0.0);
  // Inclusive truncation boundary selects the near-surface branch.
  CHECK(sdf_loss(0.0, 0.1, cfg.trunc, cfg) ==
        doctest::Approx(cfg.lambda_surf * 0.1));
  CHECK(sdf_loss(0.2, 0.5, 0.5, cfg) == 0.0);  // inside the free-space band

  const Vec3<double> a(1, 0, 0);
  CHECK(grad_loss<double>(a, Vec3<double>(2, 0, 0)) == doctest::Approx(0.0));
  CHECK(grad_loss<double>(a, Vec3<double>(-3, 0, 0)) == doctest::Approx(2.0));
  CHECK(grad_loss<double>(a, Vec3<double>(0, 5, 0)) == doctest::Approx(1.0));

  CHECK(eik_loss(Vec3<double>(0, 1, 0), 0.5, 0.1) == 0.0);
  CHECK(eik_loss(Vec3<double>(0, 1.3, 0), 0.05, 0.1) == 0.0);  // masked off
  CHECK(eik_loss(Vec3<double>(0, 1.3, 0), 0.2, 0.1) == doctest::Approx(0.3));
}

TEST_CASE("total loss reductions and weight linearity") {
  LossConfig cfg;
  SupervisionBatch<double> batch;
  batch.resize(4);
  batch.x.setZero();
  VecX<double> f(4);
  Mat3X<double> G(3, 4);
  // Two near-surface samples hitting their bound, two free-space inside band,
  // aligned gradients, unit norms where the eikonal mask applies.
  batch.abs_dd << 0.0, 0.05, 0.3, 0.4;
  batch.bound << 0.0, -0.02, 1.0, 1.2;
  f << 0.0, -0.02, 0.5, 0.7;
  for (int i = 0; i < 4; ++i) {
    batch.g_valid[static_cast<size_t>(i)] = 1;
    batch.g.col(i) = Vec3d(0, 0, 2.0);
    G.col(i) = Vec3d(0, 0, 1.0);
  }
  const auto perfect = evaluate_losses<double>(batch, f, G, cfg);
  CHECK(perfect.total == 0.0);

  // Perturb so every term is nonzero, then check the weighting.
  f[2] = 1.5;
  G.col(3) = Vec3d(0, 0.3, 1.2);
  const auto bd = evaluate_losses<double>(batch, f, G, cfg);
  CHECK(bd.sdf > 0);
  CHECK(bd.grad > 0);
  CHECK(bd.eik > 0);

  LossConfig cfg0 = cfg;
  cfg0.lambda_grad = 0;
  cfg0.lambda_eik = 0;
  const auto only_sdf = evaluate_losses<double>(batch, f, G, cfg0);
  CHECK(only_sdf.total == doctest::Approx(bd.sdf).epsilon(1e-15));

  LossConfig cfg2 = cfg;
  cfg2.lambda_grad = 2 * cfg.lambda_grad;
  const auto bd2 = evaluate_losses<double>(batch, f, G, cfg2);
  CHECK(bd2.total - bd.total ==
        doctest::Approx(cfg.lambda_grad * bd.grad).epsilon(1e-12));

  SupervisionBatch<double> empty;
  CHECK_THROWS_AS(evaluate_losses<double>(empty, VecX<double>(), Mat3X<double>(), cfg),
                  std::invalid_argument);
}

TEST_CASE("loss config validation") {
  LossConfig cfg;
  CHECK_NOTHROW(cfg.validate(0.10));
  cfg.trunc = 0.2;
  CHECK_THROWS_AS(cfg.validate(0.10), std::invalid_argument);
  cfg.trunc = -1;
  CHECK_THROWS_AS(cfg.validate(0.10), std::invalid_argument);
}
