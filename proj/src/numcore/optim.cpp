// SPDX-License-Identifier: Apache-2.0
#include "inlg/numcore/optim.hpp"

#include <cmath>

INLG_NAMESPACE_BEGIN

void optimizer_step(OptimizerState& state, ParamStore& params,
                    const std::map<std::string, Tensor>& grads, Real lr,
                    const std::set<std::string>& names) {
  if (lr < Real(0)) throw ContractViolation("optimizer_step: negative learning rate");
  const AdamWConfig& c = state.config;
  std::set<std::string> all;
  if (names.empty()) {
    for (const auto& [name, t] : params) all.insert(name);
  }
  const std::set<std::string>& targets = names.empty() ? all : names;

  for (const std::string& name : targets) {
    auto pit = params.find(name);
    auto git = grads.find(name);
    if (pit == params.end()) throw ContractViolation("optimizer_step: unknown parameter " + name);
    if (git == grads.end()) throw ContractViolation("optimizer_step: no gradient for " + name);
    Tensor& w = pit->second;
    const Tensor& grad = git->second;
    if (!w.same_shape(grad)) {
      throw ContractViolation("optimizer_step: gradient shape " + shape_str(grad.shape()) +
                              " != parameter shape " + shape_str(w.shape()) + " for " + name);
    }
    auto& slot = state.slots[name];
    if (slot.m.empty()) {
      slot.m = Tensor::zeros_like(w);
      slot.v = Tensor::zeros_like(w);
    } else if (!slot.m.same_shape(w)) {
      throw ContractViolation("optimizer_step: moment shape mismatch for " + name);
    }
    slot.step += 1;
    const double t = static_cast<double>(slot.step);
    const Real bc1 = Real(1.0 - std::pow(double(c.beta1), t));
    const Real bc2 = Real(1.0 - std::pow(double(c.beta2), t));
    for (std::size_t i = 0; i < w.size(); ++i) {
      const Real gi = grad[i];
      slot.m[i] = c.beta1 * slot.m[i] + (Real(1) - c.beta1) * gi;
      slot.v[i] = c.beta2 * slot.v[i] + (Real(1) - c.beta2) * gi * gi;
    }
    if (lr == Real(0)) continue;
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] -= lr * c.weight_decay * w[i];
      const Real mhat = slot.m[i] / bc1;
      const Real vhat = slot.v[i] / bc2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + c.eps);
    }
  }
  state.step += 1;
}

Real clip_grad_norm(std::map<std::string, Tensor>& grads, const std::set<std::string>& names,
                    Real max_norm) {
  double sq = 0;
  for (const std::string& name : names) {
    for (Real v : grads.at(name).data()) sq += double(v) * double(v);
  }
  const Real norm = Real(std::sqrt(sq));
  if (max_norm > Real(0) && norm > max_norm) {
    const Real s = max_norm / (norm + Real(1e-6));
    for (const std::string& name : names) {
      for (Real& v : grads.at(name).storage()) v *= s;
    }
  }
  return norm;
}

Real LRSchedule::lr_at(std::uint64_t step) const {
  if (warmup_steps > 0 && step < warmup_steps) {
    return Real(double(base_lr) * double(step) / double(warmup_steps));
  }
  return base_lr;
}

INLG_NAMESPACE_END
