#pragma once

#include "nsdf/network.hpp"

namespace nsdf {

template <class S>
struct AdamState {
  VecX<S> m, v;
  int64_t step = 0;
  S lr = S(0.0013);
  S weight_decay = S(0.012);
  S beta1 = S(0.9);
  S beta2 = S(0.999);
  S eps = S(1e-8);

  explicit AdamState(Eigen::Index n = 0) {
    m.setZero(n);
    v.setZero(n);
  }
};

// Adam with decoupled weight decay: the decay shrinks the parameters
// directly before the bias-corrected Adam delta is applied, so the decay
// never enters the moment accumulators.
template <class S>
void adam_step(MlpParams<S>& params, const MlpParams<S>& grads,
               AdamState<S>& state) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  if (!grads.data.allFinite())
    throw std::invalid_argument("adam_step: non-finite gradient");

  auto& theta = params.data;
  const auto& g = grads.data;

  theta *= (S(1) - state.lr * state.weight_decay);

  state.step += 1;
  state.m = state.beta1 * state.m + (S(1) - state.beta1) * g;
  state.v.array() =
      state.beta2 * state.v.array() + (S(1) - state.beta2) * g.array().square();

  const S bc1 = S(1) - std::pow(state.beta1, static_cast<S>(state.step));
  const S bc2 = S(1) - std::pow(state.beta2, static_cast<S>(state.step));
  theta.array() -= state.lr * (state.m.array() / bc1) /
                   ((state.v.array() / bc2).sqrt() + state.eps);
}

}  // namespace nsdf
