#pragma once

#include <array>
#include <cstdint>

#include "nsdf/common.hpp"
#include "nsdf/embedding.hpp"
#include "nsdf/losses.hpp"

namespace nsdf {

// Fixed SDF MLP: four hidden layers of 256 units with softplus activations
// and a linear scalar output. The positional embedding feeds the first layer
// and is concatenated again to the input of hidden layer 3.
struct MlpDims {
  int embed_dim = 252;
  static constexpr int kLayers = 5;
  static constexpr int kHidden = 256;
  static constexpr int kSkipLayer = 2;  // layer whose input is [h2; gamma]
  std::array<int, kLayers> in{};
  std::array<int, kLayers> out{};
  std::array<Eigen::Index, kLayers> w_offset{};
  std::array<Eigen::Index, kLayers> b_offset{};
  Eigen::Index total = 0;

  static MlpDims standard(int embed_dim) {
    MlpDims d;
    d.embed_dim = embed_dim;
    d.in = {embed_dim, kHidden, kHidden + embed_dim, kHidden, kHidden};
    d.out = {kHidden, kHidden, kHidden, kHidden, 1};
    Eigen::Index off = 0;
    for (int i = 0; i < kLayers; ++i) {
      d.w_offset[i] = off;
      off += static_cast<Eigen::Index>(d.out[i]) * d.in[i];
      d.b_offset[i] = off;
      off += d.out[i];
    }
    d.total = off;
    return d;
  }

  bool operator==(const MlpDims& o) const {
    return embed_dim == o.embed_dim && in == o.in && out == o.out;
  }
};

// All weights and biases in one flat vector (column-major per weight matrix,
// layer-ordered W0 b0 W1 b1 ...). The flat layout keeps the optimiser and
// serialization to simple vector ops.
template <class S>
struct MlpParams {
  MlpDims dims;
  VecX<S> data;

  explicit MlpParams(const MlpDims& d = MlpDims::standard(252)) : dims(d) {
    data.setZero(d.total);
  }

  Eigen::Index size() const { return data.size(); }

  Eigen::Map<MatX<S>> W(int i) {
    return {data.data() + dims.w_offset[i], dims.out[i], dims.in[i]};
  }
  Eigen::Map<const MatX<S>> W(int i) const {
    return {data.data() + dims.w_offset[i], dims.out[i], dims.in[i]};
  }
  Eigen::Map<VecX<S>> b(int i) {
    return {data.data() + dims.b_offset[i], dims.out[i]};
  }
  Eigen::Map<const VecX<S>> b(int i) const {
    return {data.data() + dims.b_offset[i], dims.out[i]};
  }

  void setZero() { data.setZero(); }

  // He-style uniform fan-in initialisation, seedable.
  static MlpParams random(const MlpDims& d, uint64_t seed) {
    MlpParams p(d);
    Rng rng(seed);
    for (int i = 0; i < MlpDims::kLayers; ++i) {
      const S limit = std::sqrt(S(6) / static_cast<S>(d.in[i]));
      auto w = p.W(i);
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        for (Eigen::Index r = 0; r < w.rows(); ++r)
          w(r, c) = static_cast<S>(rng.uniform(-limit, limit));
      p.b(i).setZero();
    }
    return p;
  }
};

// Reusable batch buffers. Forward caches stay valid until the next forward
// call and are consumed by the gradient passes.
template <class S>
struct MlpWorkspace {
  MatX<S> gamma;                 // E x B embedding (sin/cos cache)
  MatX<S> z, e;                  // scratch pre-activation + exp buffer
  std::array<MatX<S>, 4> h;      // hidden activations
  std::array<MatX<S>, 4> sp;     // logistic(z_k) = softplus'
  std::array<MatX<S>, 3> a;      // t-chain pre-hadamard products
  std::array<MatX<S>, 4> t;      // input-gradient chain
  MatX<S> tgamma;                // E x B adjoint of gamma in the t-chain
  Mat3X<S> grad_x;               // 3 x B input gradients
  VecX<S> f;                     // predictions
  // backward scratch
  std::array<MatX<S>, 4> zbar;
  MatX<S> tbar_gamma, tbar, tbar_a, hbar, m21;
  VecX<S> df;
  Mat3X<S> dG;
};

namespace detail {

// Stable softplus(z) and logistic(z); the logistic goes through tanh to stay
// branch-free and vectorized.
template <class S>
void stable_softplus_batch(const MatX<S>& z, MatX<S>& scratch, MatX<S>& h,
                           MatX<S>& sp) {
  scratch = (-z.array().abs()).exp().matrix();
  h = (z.array().max(S(0)) + scratch.array().log1p()).matrix();
  sp = (S(0.5) + S(0.5) * (S(0.5) * z.array()).tanh()).matrix();
}

}  // namespace detail

template <class S>
class SdfNetwork {
 public:
  SdfNetwork(const EmbeddingBasis& basis, uint64_t seed)
      : dirs_(basis.dirs.template cast<S>()),
        octaves_(basis.octaves),
        params_(MlpParams<S>::random(MlpDims::standard(basis.output_dim()), seed)) {}

  SdfNetwork(Eigen::Matrix<S, Eigen::Dynamic, 3> dirs, int octaves,
             MlpParams<S> params)
      : dirs_(std::move(dirs)), octaves_(octaves), params_(std::move(params)) {}

  const MlpParams<S>& params() const { return params_; }
  MlpParams<S>& params() { return params_; }
  const Eigen::Matrix<S, Eigen::Dynamic, 3>& basis_dirs() const { return dirs_; }
  int octaves() const { return octaves_; }
  Eigen::Index param_count() const { return params_.size(); }

  // Predictions for a batch of points (columns). Fills the workspace caches.
  const VecX<S>& forward_batch(const Eigen::Ref<const Mat3X<S>>& x,
                               MlpWorkspace<S>& ws) const {
    const auto& p = params_;
    embed_batch<S>(dirs_, octaves_, x, ws.gamma);

    ws.z.noalias() = p.W(0) * ws.gamma;
    ws.z.colwise() += p.b(0);
    detail::stable_softplus_batch(ws.z, ws.e, ws.h[0], ws.sp[0]);

    ws.z.noalias() = p.W(1) * ws.h[0];
    ws.z.colwise() += p.b(1);
    detail::stable_softplus_batch(ws.z, ws.e, ws.h[1], ws.sp[1]);

    const int H = MlpDims::kHidden;
    const int E = p.dims.embed_dim;
    ws.z.noalias() = p.W(2).leftCols(H) * ws.h[1];
    ws.z.noalias() += p.W(2).rightCols(E) * ws.gamma;
    ws.z.colwise() += p.b(2);
    detail::stable_softplus_batch(ws.z, ws.e, ws.h[2], ws.sp[2]);

    ws.z.noalias() = p.W(3) * ws.h[2];
    ws.z.colwise() += p.b(3);
    detail::stable_softplus_batch(ws.z, ws.e, ws.h[3], ws.sp[3]);

    ws.f = (p.W(4) * ws.h[3]).transpose();
    ws.f.array() += p.b(4)[0];
    return ws.f;
  }

  // Analytic d f / d x for the batch of the preceding forward_batch call.
  const Mat3X<S>& input_gradient_batch(MlpWorkspace<S>& ws) const {
    const auto& p = params_;
    const int H = MlpDims::kHidden;
    const int E = p.dims.embed_dim;
    const VecX<S> w5 = p.W(4).transpose();  // H x 1

    ws.t[3] = (ws.sp[3].array().colwise() * w5.array()).matrix();
    ws.a[2].noalias() = p.W(3).transpose() * ws.t[3];
    ws.t[2] = (ws.sp[2].array() * ws.a[2].array()).matrix();
    ws.a[1].noalias() = p.W(2).leftCols(H).transpose() * ws.t[2];
    ws.t[1] = (ws.sp[1].array() * ws.a[1].array()).matrix();
    ws.a[0].noalias() = p.W(1).transpose() * ws.t[1];
    ws.t[0] = (ws.sp[0].array() * ws.a[0].array()).matrix();

    ws.tgamma.noalias() = p.W(0).transpose() * ws.t[0];
    ws.tgamma.noalias() += p.W(2).rightCols(E).transpose() * ws.t[2];

    embed_jacobian_contract(ws.gamma, ws.tgamma, ws.m21, ws.grad_x);
    return ws.grad_x;
  }

  S forward(const Vec3<S>& x) const {
    MlpWorkspace<S> ws;
    Mat3X<S> xm(3, 1);
    xm.col(0) = x;
    return forward_batch(xm, ws)[0];
  }

  Vec3<S> input_gradient(const Vec3<S>& x) const {
    MlpWorkspace<S> ws;
    Mat3X<S> xm(3, 1);
    xm.col(0) = x;
    forward_batch(xm, ws);
    return input_gradient_batch(ws).col(0);
  }

  // Total loss over the batch plus d(loss)/d(params), including the
  // second-order contributions through the predicted input gradients.
  // Accumulation order is fixed by the batch ordering.
  LossBreakdown<S> backward(const SupervisionBatch<S>& batch,
                            const LossConfig& cfg, MlpWorkspace<S>& ws,
                            MlpParams<S>& grad) const {
    forward_batch(batch.x, ws);
    input_gradient_batch(ws);
    return backward_cached(batch, cfg, ws, grad);
  }

  // Same, reusing the caches of a preceding forward_batch +
  // input_gradient_batch pair over batch.x.
  LossBreakdown<S> backward_cached(const SupervisionBatch<S>& batch,
                                   const LossConfig& cfg, MlpWorkspace<S>& ws,
                                   MlpParams<S>& grad) const {
    const auto& p = params_;
    const int H = MlpDims::kHidden;
    const int E = p.dims.embed_dim;

    LossBreakdown<S> breakdown =
        evaluate_losses<S>(batch, ws.f, ws.grad_x, cfg, &ws.df, &ws.dG);

    grad.setZero();
    auto W1g = grad.W(0);
    auto W2g = grad.W(1);
    auto W3g = grad.W(2);
    auto W4g = grad.W(3);
    auto W5g = grad.W(4);

    // Reverse pass over the input-gradient chain (seeds dG).
    embed_jacobian_adjoint(ws.gamma, ws.dG, ws.tbar_gamma);

    W1g.noalias() += ws.t[0] * ws.tbar_gamma.transpose();
    ws.tbar.noalias() = p.W(0) * ws.tbar_gamma;
    W3g.rightCols(E).noalias() += ws.t[2] * ws.tbar_gamma.transpose();

    ws.tbar_a = (ws.sp[0].array() * ws.tbar.array()).matrix();
    ws.zbar[0] = (ws.sp[0].array() * (S(1) - ws.sp[0].array()) *
                  ws.a[0].array() * ws.tbar.array())
                     .matrix();
    W2g.noalias() += ws.t[1] * ws.tbar_a.transpose();
    ws.tbar.noalias() = p.W(1) * ws.tbar_a;  // adjoint of t[1]

    ws.tbar_a = (ws.sp[1].array() * ws.tbar.array()).matrix();
    ws.zbar[1] = (ws.sp[1].array() * (S(1) - ws.sp[1].array()) *
                  ws.a[1].array() * ws.tbar.array())
                     .matrix();
    W3g.leftCols(H).noalias() += ws.t[2] * ws.tbar_a.transpose();
    ws.tbar.noalias() = p.W(2).leftCols(H) * ws.tbar_a;       // adjoint of t[2]
    ws.tbar.noalias() += p.W(2).rightCols(E) * ws.tbar_gamma;

    ws.tbar_a = (ws.sp[2].array() * ws.tbar.array()).matrix();
    ws.zbar[2] = (ws.sp[2].array() * (S(1) - ws.sp[2].array()) *
                  ws.a[2].array() * ws.tbar.array())
                     .matrix();
    W4g.noalias() += ws.t[3] * ws.tbar_a.transpose();
    ws.tbar.noalias() = p.W(3) * ws.tbar_a;  // adjoint of t[3]

    // sp'' . w5 = (1 - sp) . t[3]
    ws.zbar[3] =
        ((S(1) - ws.sp[3].array()) * ws.t[3].array() * ws.tbar.array()).matrix();
    W5g.noalias() +=
        ((ws.sp[3].array() * ws.tbar.array()).matrix().rowwise().sum()).transpose();

    // Reverse pass over the forward chain (seeds df), folding in the zbar
    // contributions accumulated above.
    const VecX<S> w5 = p.W(4).transpose();
    ws.hbar.noalias() = w5 * ws.df.transpose();
    W5g.noalias() += (ws.h[3] * ws.df).transpose();
    grad.b(4)[0] += ws.df.sum();

    ws.zbar[3].array() += ws.sp[3].array() * ws.hbar.array();
    W4g.noalias() += ws.zbar[3] * ws.h[2].transpose();
    grad.b(3).noalias() += ws.zbar[3].rowwise().sum();
    ws.hbar.noalias() = p.W(3).transpose() * ws.zbar[3];

    ws.zbar[2].array() += ws.sp[2].array() * ws.hbar.array();
    W3g.leftCols(H).noalias() += ws.zbar[2] * ws.h[1].transpose();
    W3g.rightCols(E).noalias() += ws.zbar[2] * ws.gamma.transpose();
    grad.b(2).noalias() += ws.zbar[2].rowwise().sum();
    ws.hbar.noalias() = p.W(2).leftCols(H).transpose() * ws.zbar[2];

    ws.zbar[1].array() += ws.sp[1].array() * ws.hbar.array();
    W2g.noalias() += ws.zbar[1] * ws.h[0].transpose();
    grad.b(1).noalias() += ws.zbar[1].rowwise().sum();
    ws.hbar.noalias() = p.W(1).transpose() * ws.zbar[1];

    ws.zbar[0].array() += ws.sp[0].array() * ws.hbar.array();
    W1g.noalias() += ws.zbar[0] * ws.gamma.transpose();
    grad.b(0).noalias() += ws.zbar[0].rowwise().sum();

    return breakdown;
  }

  // Loss evaluation without parameter gradients.
  LossBreakdown<S> evaluate(const SupervisionBatch<S>& batch,
                            const LossConfig& cfg, MlpWorkspace<S>& ws) const {
    forward_batch(batch.x, ws);
    input_gradient_batch(ws);
    return evaluate_losses<S>(batch, ws.f, ws.grad_x, cfg);
  }

 private:
  // grad_x = (d gamma / d x)^T tgamma, using the cached sin/cos blocks.
  void embed_jacobian_contract(const MatX<S>& gamma, const MatX<S>& tgamma,
                               MatX<S>& m21, Mat3X<S>& grad_x) const {
    const int r = static_cast<int>(dirs_.rows());
    m21.resize(r, gamma.cols());
    m21.setZero();
    for (int k = 0; k <= octaves_; ++k) {
      const S scale = static_cast<S>(1 << k);
      const auto sin_k = gamma.middleRows(k * 2 * r, r).array();
      const auto cos_k = gamma.middleRows(k * 2 * r + r, r).array();
      const auto tg_sin = tgamma.middleRows(k * 2 * r, r).array();
      const auto tg_cos = tgamma.middleRows(k * 2 * r + r, r).array();
      m21.array() += scale * (cos_k * tg_sin - sin_k * tg_cos);
    }
    grad_x.noalias() = dirs_.transpose() * m21;
  }

  // tbar_gamma = (d gamma / d x) applied to the 3 x B adjoint.
  void embed_jacobian_adjoint(const MatX<S>& gamma,
                              const Eigen::Ref<const Mat3X<S>>& gbar,
                              MatX<S>& tbar_gamma) const {
    const int r = static_cast<int>(dirs_.rows());
    MatX<S> q = dirs_ * gbar;  // r x B
    tbar_gamma.resize(gamma.rows(), gamma.cols());
    for (int k = 0; k <= octaves_; ++k) {
      const S scale = static_cast<S>(1 << k);
      const auto sin_k = gamma.middleRows(k * 2 * r, r).array();
      const auto cos_k = gamma.middleRows(k * 2 * r + r, r).array();
      tbar_gamma.middleRows(k * 2 * r, r) = (scale * cos_k * q.array()).matrix();
      tbar_gamma.middleRows(k * 2 * r + r, r) = (-scale * sin_k * q.array()).matrix();
    }
  }

  Eigen::Matrix<S, Eigen::Dynamic, 3> dirs_;
  int octaves_;
  MlpParams<S> params_;
};

}  // namespace nsdf
