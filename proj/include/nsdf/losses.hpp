#pragma once

#include <cstdint>
#include <stdexcept>

#include "nsdf/common.hpp"

namespace nsdf {

enum class BoundMethod { kRay, kNormal, kBatch };

inline const char* bound_method_name(BoundMethod m) {
  switch (m) {
    case BoundMethod::kRay: return "ray";
    case BoundMethod::kNormal: return "normal";
    case BoundMethod::kBatch: return "batch";
  }
  return "?";
}

struct LossConfig {
  double beta = 5.0;          // free-space exponential sharpness
  double trunc = 0.10;        // near-surface band t (metres)
  double eik_cutoff = 0.10;   // a: regularise only |D - d| >= a
  double lambda_surf = 5.0;
  double lambda_grad = 0.02;
  double lambda_eik = 0.25;
  BoundMethod bound_method = BoundMethod::kBatch;
  double normal_max_dist = 0.30;  // normal correction zone (metres)

  void validate(double delta_behind_surface = 0.10) const {
    if (beta <= 0 || trunc <= 0 || eik_cutoff <= 0 || lambda_surf <= 0 ||
        lambda_grad <= 0 || lambda_eik <= 0 || normal_max_dist <= 0)
      throw std::invalid_argument("LossConfig: all constants must be positive");
    if (trunc > delta_behind_surface + 1e-12)
      throw std::invalid_argument(
          "LossConfig: truncation band t must not exceed the behind-surface "
          "sampling margin delta");
  }
};

// Free-space loss: max(0, e^{-beta f} - 1, f - b). Zero iff 0 <= f <= b.
template <class S>
S free_space_loss(S f, S b, S beta) {
  const S expb = std::expm1(-beta * f);
  const S lin = f - b;
  return std::max(S(0), std::max(expb, lin));
}

// Derivative of free_space_loss w.r.t. f. Ties resolve to the linear branch.
template <class S>
S free_space_loss_df(S f, S b, S beta) {
  const S expb = std::expm1(-beta * f);
  const S lin = f - b;
  if (lin >= expb && lin > S(0)) return S(1);
  if (expb > S(0)) return -beta * std::exp(-beta * f);
  return S(0);
}

template <class S>
S near_surface_loss(S f, S b) {
  return std::abs(f - b);
}

template <class S>
S near_surface_loss_df(S f, S b) {
  if (f > b) return S(1);
  if (f < b) return S(-1);
  return S(0);
}

// Near-surface branch (scaled by lambda_surf) when |D - d| <= t, free-space
// branch otherwise.
template <class S>
S sdf_loss(S f, S b, S abs_D_minus_d, const LossConfig& cfg) {
  if (abs_D_minus_d <= static_cast<S>(cfg.trunc))
    return static_cast<S>(cfg.lambda_surf) * near_surface_loss(f, b);
  return free_space_loss(f, b, static_cast<S>(cfg.beta));
}

// Cosine distance between the predicted gradient and the target direction.
template <class S>
S grad_loss(const Vec3<S>& grad_pred, const Vec3<S>& g_target) {
  const S np = grad_pred.norm();
  const S ng = g_target.norm();
  return S(1) - grad_pred.dot(g_target) / (np * ng);
}

// Eikonal residual, masked to samples at least `a` from the surface along
// the ray.
template <class S>
S eik_loss(const Vec3<S>& grad_pred, S abs_D_minus_d, S a) {
  if (abs_D_minus_d < a) return S(0);
  return std::abs(grad_pred.norm() - S(1));
}

// Per-sample supervision data consumed by the loss. Bounds, target gradients
// and masks are constants with respect to the network parameters.
template <class S>
struct SupervisionBatch {
  Mat3X<S> x;          // query points (world, metres)
  VecX<S> bound;       // signed bound b
  Mat3X<S> g;          // approximate gradient target (unnormalised)
  VecX<S> abs_dd;      // |D[u,v] - d| per sample (z-depth difference)
  std::vector<uint8_t> g_valid;  // 1 if the grad loss applies to this sample

  Eigen::Index size() const { return x.cols(); }

  void resize(Eigen::Index n) {
    x.resize(3, n);
    bound.resize(n);
    g.resize(3, n);
    abs_dd.resize(n);
    g_valid.assign(static_cast<size_t>(n), 0);
  }
};

template <class S>
struct LossBreakdown {
  S total = 0, sdf = 0, grad = 0, eik = 0;
  Eigen::Index n_samples = 0;
  Eigen::Index n_grad = 0;      // samples contributing to the grad term
  Eigen::Index n_eik = 0;       // samples contributing to the eikonal term
  Eigen::Index n_grad_skipped = 0;  // zero-norm predictions skipped
};

// Evaluates the total loss over a batch given predictions f (1 x B) and
// predicted input gradients G (3 x B). Each term is the unweighted mean over
// its contributing samples; the total is sdf + lambda_grad * grad +
// lambda_eik * eik. When df/dG are non-null they receive d(total)/df and
// d(total)/dG.
template <class S>
LossBreakdown<S> evaluate_losses(const SupervisionBatch<S>& batch,
                                 const Eigen::Ref<const VecX<S>>& f,
                                 const Eigen::Ref<const Mat3X<S>>& G,
                                 const LossConfig& cfg, VecX<S>* df = nullptr,
                                 Mat3X<S>* dG = nullptr) {
  const Eigen::Index n = batch.size();
  if (n == 0) throw std::invalid_argument("evaluate_losses: empty batch");

  LossBreakdown<S> out;
  out.n_samples = n;

  const S t = static_cast<S>(cfg.trunc);
  const S a = static_cast<S>(cfg.eik_cutoff);
  const S beta = static_cast<S>(cfg.beta);
  const S lsurf = static_cast<S>(cfg.lambda_surf);

  if (df) df->setZero(n);
  if (dG) dG->setZero(3, n);

  // First pass for the contributing-sample counts of the mean reductions.
  for (Eigen::Index i = 0; i < n; ++i) {
    if (batch.g_valid[static_cast<size_t>(i)] && G.col(i).norm() > S(0))
      ++out.n_grad;
    else if (batch.g_valid[static_cast<size_t>(i)])
      ++out.n_grad_skipped;
    if (batch.abs_dd[i] >= a) ++out.n_eik;
  }

  const S inv_n = S(1) / static_cast<S>(n);
  const S inv_ng = out.n_grad > 0 ? S(1) / static_cast<S>(out.n_grad) : S(0);
  const S inv_ne = out.n_eik > 0 ? S(1) / static_cast<S>(out.n_eik) : S(0);

  for (Eigen::Index i = 0; i < n; ++i) {
    const S fi = f[i];
    const S bi = batch.bound[i];
    const S dd = batch.abs_dd[i];

    S l_sdf, dl_df;
    if (dd <= t) {
      l_sdf = lsurf * near_surface_loss(fi, bi);
      dl_df = lsurf * near_surface_loss_df(fi, bi);
    } else {
      l_sdf = free_space_loss(fi, bi, beta);
      dl_df = free_space_loss_df(fi, bi, beta);
    }
    if (!std::isfinite(l_sdf))
      throw std::runtime_error("non-finite value in sdf loss at sample " +
                               std::to_string(i));
    out.sdf += l_sdf * inv_n;
    if (df) (*df)[i] += dl_df * inv_n;

    const Vec3<S> gp = G.col(i);
    const S np = gp.norm();

    if (batch.g_valid[static_cast<size_t>(i)] && np > S(0)) {
      const Vec3<S> gt = batch.g.col(i);
      const S ng = gt.norm();
      const Vec3<S> ghat = gt / ng;
      const S cosv = gp.dot(ghat) / np;
      const S l_grad = S(1) - cosv;
      if (!std::isfinite(l_grad))
        throw std::runtime_error("non-finite value in grad loss at sample " +
                                 std::to_string(i));
      out.grad += l_grad * inv_ng;
      if (dG) {
        const Vec3<S> d = (ghat - cosv * gp / np) / np;
        dG->col(i) += -static_cast<S>(cfg.lambda_grad) * inv_ng * d;
      }
    }

    if (dd >= a) {
      const S l_eik = std::abs(np - S(1));
      if (!std::isfinite(l_eik))
        throw std::runtime_error("non-finite value in eikonal loss at sample " +
                                 std::to_string(i));
      out.eik += l_eik * inv_ne;
      if (dG && np > S(0)) {
        const S sgn = np > S(1) ? S(1) : (np < S(1) ? S(-1) : S(0));
        dG->col(i) += static_cast<S>(cfg.lambda_eik) * inv_ne * sgn * gp / np;
      }
    }
  }

  out.total = out.sdf + static_cast<S>(cfg.lambda_grad) * out.grad +
              static_cast<S>(cfg.lambda_eik) * out.eik;
  return out;
}

// Per-sample weighted loss values (no mean reduction): the sdf term plus the
// lambda-weighted gradient and eikonal contributions of each sample. Used for
// keyframe bookkeeping and information-gain probes.
template <class S>
void per_sample_losses(const SupervisionBatch<S>& batch,
                       const Eigen::Ref<const VecX<S>>& f,
                       const Eigen::Ref<const Mat3X<S>>& G,
                       const LossConfig& cfg, VecX<S>& sdf_out,
                       VecX<S>& total_out) {
  const Eigen::Index n = batch.size();
  sdf_out.resize(n);
  total_out.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const S l_sdf = sdf_loss<S>(f[i], batch.bound[i], batch.abs_dd[i], cfg);
    S l = l_sdf;
    const Vec3<S> gp = G.col(i);
    if (batch.g_valid[static_cast<size_t>(i)] && gp.norm() > S(0))
      l += static_cast<S>(cfg.lambda_grad) * grad_loss<S>(gp, batch.g.col(i));
    l += static_cast<S>(cfg.lambda_eik) *
         eik_loss<S>(gp, batch.abs_dd[i], static_cast<S>(cfg.eik_cutoff));
    sdf_out[i] = l_sdf;
    total_out[i] = l;
  }
}

}  // namespace nsdf
