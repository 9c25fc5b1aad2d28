// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "inlg/numcore/params.hpp"

INLG_NAMESPACE_BEGIN

struct AdamWConfig {
  Real beta1 = Real(0.9);
  Real beta2 = Real(0.999);
  Real eps = Real(1e-8);
  Real weight_decay = Real(0.01);
};

/// Adaptive-moment state with decoupled weight decay. Moments are created
/// lazily the first time a parameter is updated and always mirror the
/// parameter's shape. Each slot keeps its own bias-correction step count.
struct OptimizerState {
  struct Slot {
    Tensor m;
    Tensor v;
    std::uint64_t step = 0;
  };
  AdamWConfig config;
  std::uint64_t step = 0;
  std::map<std::string, Slot> slots;
};

/// One update over the parameters named in `names` (all of them when
/// empty). Per parameter:
///   w <- w - lr*wd*w
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
///   w <- w - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
/// With lr == 0 the moments advance but parameters stay bit-identical.
void optimizer_step(OptimizerState& state, ParamStore& params,
                    const std::map<std::string, Tensor>& grads, Real lr,
                    const std::set<std::string>& names);

/// Scales the listed gradients in place so their global L2 norm is at most
/// max_norm. Returns the norm before clipping.
Real clip_grad_norm(std::map<std::string, Tensor>& grads, const std::set<std::string>& names,
                    Real max_norm);

/// Linear warmup from 0 to base_lr over warmup_steps, constant afterwards.
struct LRSchedule {
  Real base_lr = Real(1e-3);
  std::uint64_t warmup_steps = 0;

  Real lr_at(std::uint64_t step) const;
};

INLG_NAMESPACE_END
