#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "nsdf/adam.hpp"
#include "nsdf/checkpoint.hpp"
#include "nsdf/embedding.hpp"
#include "nsdf/network.hpp"

using namespace nsdf;

namespace {

Mat3X<double> random_points(Rng& rng, int n, double extent = 2.0) {
  Mat3X<double> x(3, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) x(j, i) = rng.uniform(-extent, extent);
  return x;
}

// Batch with every loss branch active and predictions kept away from the
// non-differentiable loci so finite differences stay clean.
SupervisionBatch<double> make_fd_batch(const SdfNetwork<double>& net, int n,
                                       uint64_t seed, const LossConfig& cfg) {
  Rng rng(seed);
  SupervisionBatch<double> batch;
  batch.resize(n);
  batch.x = random_points(rng, n);
  MlpWorkspace<double> ws;
  const VecX<double>& f = net.forward_batch(batch.x, ws);
  for (int i = 0; i < n; ++i) {
    const bool near = (i % 2) == 0;
    batch.abs_dd[i] = near ? 0.05 : 0.5;  // t = 0.1 splits the branches
    if (near) {
      batch.bound[i] = f[i] + (i % 4 == 0 ? 0.3 : -0.3);
    } else {
      // Free space: keep f away from 0 and from b.
      batch.bound[i] = f[i] > 0 ? f[i] + 0.4 : 1.0;
    }
    batch.g_valid[i] = 1;
    Vec3d g(rng.normal(), rng.normal(), rng.normal());
    while (g.norm() < 0.1) g = Vec3d(rng.normal(), rng.normal(), rng.normal());
    batch.g.col(i) = g;
  }
  (void)cfg;
  return batch;
}

}  // namespace

TEST_CASE("embedding basis has 21 unit, pairwise distinct axes") {
  const EmbeddingBasis basis = build_embedding_basis();
  CHECK(basis.rows() == 21);
  CHECK(basis.output_dim() == 252);
  for (int i = 0; i < basis.rows(); ++i)
    CHECK(std::abs(basis.dirs.row(i).norm() - 1.0) < 1e-9);
  // Exhaustive pairwise dot-product table.
  for (int i = 0; i < basis.rows(); ++i)
    for (int j = 0; j < basis.rows(); ++j) {
      if (i == j) continue;
      const double d = std::abs(basis.dirs.row(i).dot(basis.dirs.row(j)));
      CHECK(d < 1.0 - 1e-6);
    }
}

TEST_CASE("embedding of the origin and component bounds") {
  const EmbeddingBasis basis = build_embedding_basis();
  VecX<double> e0 = embed<double>(basis, Vec3d::Zero());
  REQUIRE(e0.size() == 252);
  const int r = basis.rows();
  for (int k = 0; k <= basis.octaves; ++k) {
    for (int i = 0; i < r; ++i) {
      CHECK(e0[k * 2 * r + i] == 0.0);       // sin block
      CHECK(e0[k * 2 * r + r + i] == 1.0);   // cos block
    }
  }
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Vec3d x(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50));
    VecX<double> e = embed<double>(basis, x);
    CHECK(e.minCoeff() >= -1.0 - 1e-12);
    CHECK(e.maxCoeff() <= 1.0 + 1e-12);
  }
}

TEST_CASE("forward is pure and the zero network maps everything to zero") {
  const EmbeddingBasis basis = build_embedding_basis();
  SdfNetwork<double> net(basis, 42);
  const Vec3d x(0.3, -1.2, 0.8);
  const double a = net.forward(x);
  const double b = net.forward(x);
  CHECK(a == b);

  SdfNetwork<double> zero(basis, 0);
  zero.params().setZero();
  CHECK(zero.forward(x) == 0.0);
  CHECK(zero.forward(Vec3d(5, 5, 5)) == 0.0);
}

TEST_CASE("parameter count matches the fixed architecture") {
  const EmbeddingBasis basis = build_embedding_basis();
  SdfNetwork<float> net(basis, 1);
  const Eigen::Index expected = 256 * (252 + 1) + 256 * (256 + 1) +
                                256 * (508 + 1) + 256 * (256 + 1) + (256 + 1);
  CHECK(net.param_count() == expected);
  CHECK(net.param_count() == 326913);
  // 4 bytes per scalar stays within the compactness budget.
  CHECK(net.param_count() * 4 <= 1.5 * 1024 * 1024);
}

TEST_CASE("input gradient matches central finite differences") {
  const EmbeddingBasis basis = build_embedding_basis();
  Rng rng(123);
  const double h = 1e-4;
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    SdfNetwork<double> net(basis, 1000 + trial);
    Vec3d x(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    const Vec3d g = net.input_gradient(x);
    Vec3d fd;
    for (int j = 0; j < 3; ++j) {
      Vec3d xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      fd[j] = (net.forward(xp) - net.forward(xm)) / (2 * h);
    }
    const double rel = (g - fd).norm() / std::max(fd.norm(), 1e-12);
    worst = std::max(worst, rel);
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("input gradient of constant and shifted networks") {
  const EmbeddingBasis basis = build_embedding_basis();
  SdfNetwork<double> net(basis, 9);
  net.params().W(4).setZero();  // constant function
  const Vec3d g = net.input_gradient(Vec3d(0.4, 0.1, -0.7));
  CHECK(g.x() == 0.0);
  CHECK(g.y() == 0.0);
  CHECK(g.z() == 0.0);

  SdfNetwork<double> base(basis, 10);
  SdfNetwork<double> shifted(basis, 10);
  shifted.params().b(4)[0] += 3.25;
  const Vec3d x(1.1, -0.2, 0.5);
  CHECK(shifted.forward(x) == doctest::Approx(base.forward(x) + 3.25));
  CHECK((base.input_gradient(x) - shifted.input_gradient(x)).norm() == 0.0);
}

TEST_CASE("local Lipschitz bound from the input gradient") {
  const EmbeddingBasis basis = build_embedding_basis();
  SdfNetwork<double> net(basis, 77);
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Vec3d x(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const double delta = 1e-3;
    Vec3d xp = x;
    xp[0] += delta;
    double lip = 0;
    for (int s = 0; s <= 4; ++s)
      lip = std::max(lip, net.input_gradient(x + (xp - x) * (s / 4.0)).norm());
    const double df = std::abs(net.forward(xp) - net.forward(x));
    CHECK(df <= lip * delta * 1.01 + 1e-12);
  }
}

TEST_CASE("backward matches finite differences of the total loss") {
  const EmbeddingBasis basis = build_embedding_basis();
  SdfNetwork<double> net(basis, 2024);
  LossConfig cfg;
  SupervisionBatch<double> batch = make_fd_batch(net, 120, 55, cfg);

  MlpWorkspace<double> ws;
  MlpParams<double> grad(net.params().dims);
  const LossBreakdown<double> bd = net.backward(batch, cfg, ws, grad);
  CHECK(bd.total > 0);
  CHECK(bd.n_grad > 0);
  CHECK(bd.n_eik > 0);

  Rng rng(99);
  const double h = 1e-4;
  double worst = 0;
  for (int k = 0; k < 50; ++k) {
    const Eigen::Index idx =
        static_cast<Eigen::Index>(rng.uniform_index(net.param_count()));
    SdfNetwork<double> plus = net, minus = net;
    plus.params().data[idx] += h;
    minus.params().data[idx] -= h;
    MlpWorkspace<double> w2;
    const double lp = plus.evaluate(batch, cfg, w2).total;
    const double lm = minus.evaluate(batch, cfg, w2).total;
    const double fd = (lp - lm) / (2 * h);
    const double an = grad.data[idx];
    const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-7});
    worst = std::max(worst, rel);
  }
  CHECK(worst <= 1e-3);
}

TEST_CASE("zero-loss batch produces a zero parameter gradient") {
  const EmbeddingBasis basis = build_embedding_basis();
  SdfNetwork<double> net(basis, 31);
  LossConfig cfg;
  cfg.eik_cutoff = 0.5;  // mask the eikonal term off for these samples

  SupervisionBatch<double> batch;
  const int n = 40;
  batch.resize(n);
  Rng rng(3);
  batch.x = random_points(rng, n);
  MlpWorkspace<double> ws;
  VecX<double> f = net.forward_batch(batch.x, ws);
  const double shift = std::max(0.0, 0.01 - f.minCoeff());
  net.params().b(4)[0] += shift;
  f.array() += shift;
  for (int i = 0; i < n; ++i) {
    batch.abs_dd[i] = 0.2;       // free space branch, below the eik cutoff
    batch.bound[i] = f[i] + 0.5; // prediction strictly inside (0, b)
    batch.g_valid[i] = 0;
    batch.g.col(i).setZero();
  }

  MlpParams<double> grad(net.params().dims);
  const LossBreakdown<double> bd = net.backward(batch, cfg, ws, grad);
  CHECK(bd.total == 0.0);
  CHECK(grad.data.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("duplicating the batch leaves the mean-reduced gradient unchanged") {
  const EmbeddingBasis basis = build_embedding_basis();
  SdfNetwork<double> net(basis, 8);
  LossConfig cfg;
  SupervisionBatch<double> batch = make_fd_batch(net, 60, 17, cfg);

  SupervisionBatch<double> doubled;
  const int n = static_cast<int>(batch.size());
  doubled.resize(2 * n);
  doubled.x << batch.x, batch.x;
  doubled.bound << batch.bound, batch.bound;
  doubled.g << batch.g, batch.g;
  doubled.abs_dd << batch.abs_dd, batch.abs_dd;
  for (int i = 0; i < n; ++i)
    doubled.g_valid[i] = doubled.g_valid[n + i] = batch.g_valid[i];

  MlpWorkspace<double> ws;
  MlpParams<double> g1(net.params().dims), g2(net.params().dims);
  net.backward(batch, cfg, ws, g1);
  net.backward(doubled, cfg, ws, g2);
  CHECK((g1.data - g2.data).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("backward rejects non-finite values with a loss-term diagnostic") {
  const EmbeddingBasis basis = build_embedding_basis();
  SdfNetwork<double> net(basis, 4);
  LossConfig cfg;
  SupervisionBatch<double> batch = make_fd_batch(net, 10, 2, cfg);
  batch.bound[2] = std::numeric_limits<double>::quiet_NaN();  // near-surface sample
  MlpWorkspace<double> ws;
  MlpParams<double> grad(net.params().dims);
  CHECK_THROWS_WITH_AS(net.backward(batch, cfg, ws, grad),
                       doctest::Contains("sdf loss"), std::runtime_error);
}

TEST_CASE("adam fixed point and decoupled weight decay") {
  const EmbeddingBasis basis = build_embedding_basis();
  SdfNetwork<double> net(basis, 12);
  MlpParams<double> zero_grad(net.params().dims);
  AdamState<double> st(net.param_count());

  SUBCASE("zero gradient, zero decay leaves parameters unchanged") {
    st.weight_decay = 0;
    const VecX<double> before = net.params().data;
    adam_step(net.params(), zero_grad, st);
    CHECK((net.params().data - before).cwiseAbs().maxCoeff() == 0.0);
    CHECK(st.step == 1);
  }

  SUBCASE("zero gradient with decay scales every parameter") {
    const VecX<double> before = net.params().data;
    adam_step(net.params(), zero_grad, st);
    const double scale = 1.0 - st.lr * st.weight_decay;
    CHECK((net.params().data - before * scale).cwiseAbs().maxCoeff() <= 1e-15);
  }

  SUBCASE("first step moves by -lr * sign(g)") {
    st.weight_decay = 0;
    MlpParams<double> grad(net.params().dims);
    Rng rng(6);
    for (Eigen::Index i = 0; i < grad.size(); ++i)
      grad.data[i] = rng.uniform(-1.0, 1.0);
    const VecX<double> before = net.params().data;
    adam_step(net.params(), grad, st);
    for (Eigen::Index i = 0; i < 1000; ++i) {
      if (std::abs(grad.data[i]) < 1e-3) continue;
      const double delta = net.params().data[i] - before[i];
      const double expect = -st.lr * (grad.data[i] > 0 ? 1.0 : -1.0);
      CHECK(delta == doctest::Approx(expect).epsilon(1e-3));
    }
  }

  SUBCASE("non-finite gradients are rejected") {
    MlpParams<double> grad(net.params().dims);
    grad.data[100] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(adam_step(net.params(), grad, st), std::invalid_argument);
  }
}

TEST_CASE("checkpoint round-trips bit-exactly and validates the descriptor") {
  namespace fs = std::filesystem;
  const EmbeddingBasis basis = build_embedding_basis();
  const fs::path dir = fs::temp_directory_path() / "nsdf_ckpt_test";
  fs::create_directories(dir);

  SdfNetwork<float> netf(basis, 555);
  const fs::path pf = dir / "net_f32.ckpt";
  save_checkpoint(pf.string(), netf);
  SdfNetwork<float> back = load_checkpoint<float>(pf.string());
  REQUIRE(back.param_count() == netf.param_count());
  CHECK(std::memcmp(back.params().data.data(), netf.params().data.data(),
                    sizeof(float) * netf.param_count()) == 0);
  CHECK(back.octaves() == basis.octaves);

  SdfNetwork<double> netd(basis, 556);
  const fs::path pd = dir / "net_f64.ckpt";
  save_checkpoint(pd.string(), netd);
  SdfNetwork<double> backd = load_checkpoint<double>(pd.string());
  CHECK(std::memcmp(backd.params().data.data(), netd.params().data.data(),
                    sizeof(double) * netd.param_count()) == 0);

  CHECK_THROWS_WITH_AS(load_checkpoint<double>(pf.string()),
                       doctest::Contains("scalar width"), std::runtime_error);

  const fs::path bogus = dir / "bogus.ckpt";
  {
    std::ofstream os(bogus, std::ios::binary);
    os << "not a checkpoint at all";
  }
  CHECK_THROWS_AS(load_checkpoint<float>(bogus.string()), std::runtime_error);

  // Truncated file fails descriptor-consistent but incomplete reads.
  {
    std::ifstream is(pf, std::ios::binary);
    std::vector<char> head(200);
    is.read(head.data(), 200);
    std::ofstream os(dir / "trunc.ckpt", std::ios::binary);
    os.write(head.data(), 200);
  }
  CHECK_THROWS_AS(load_checkpoint<float>((dir / "trunc.ckpt").string()),
                  std::runtime_error);
}

TEST_CASE("float and double networks agree to single precision") {
  const EmbeddingBasis basis = build_embedding_basis();
  SdfNetwork<float> netf(basis, 31337);
  SdfNetwork<double> netd(
      basis.dirs, basis.octaves,
      [&] {
        MlpParams<double> p(netf.params().dims);
        p.data = netf.params().data.cast<double>();
        return p;
      }());
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    Vec3d x(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    const double fd = netd.forward(x);
    const float ff = netf.forward(x.cast<float>());
    CHECK(std::abs(fd - ff) <= 1e-3 * std::max(1.0, std::abs(fd)));
  }
}
