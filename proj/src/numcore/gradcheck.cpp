// SPDX-License-Identifier: Apache-2.0
#include "inlg/numcore/gradcheck.hpp"

#include <cmath>

INLG_NAMESPACE_BEGIN

GradCheckResult grad_check(const ScalarFn& f, const GradFn& grad, std::vector<Tensor> params,
                           Real eps) {
  if (!(eps > Real(0))) throw ContractViolation("grad_check: eps must be positive");
  const std::vector<Tensor> analytic = grad(params);
  if (analytic.size() != params.size()) {
    throw ContractViolation("grad_check: gradient list size mismatch");
  }
  GradCheckResult res;
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!analytic[p].same_shape(params[p])) {
      throw ContractViolation("grad_check: gradient shape mismatch");
    }
    for (std::size_t i = 0; i < params[p].size(); ++i) {
      const Real orig = params[p][i];
      params[p][i] = orig + eps;
      const Real fp = f(params);
      params[p][i] = orig - eps;
      const Real fm = f(params);
      params[p][i] = orig;
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        throw NumericFault("grad_check: non-finite loss at perturbed point", p);
      }
      const double numeric = (double(fp) - double(fm)) / (2.0 * double(eps));
      const double a = analytic[p][i];
      const double err = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
      ++res.entries;
      if (res.entries == 1 || err > res.max_relative_error) {
        res.max_relative_error = err;
        res.worst_param = p;
        res.worst_index = i;
        res.worst_analytic = a;
        res.worst_numeric = numeric;
      }
    }
  }
  return res;
}

GradCheckResult grad_check(const LossBuilder& build, std::vector<Tensor> params, Real eps) {
  auto run = [&](const std::vector<Tensor>& ps, bool with_grad) {
    Graph g(with_grad);
    std::vector<NodeId> leaves;
    for (const Tensor& t : ps) leaves.push_back(g.leaf(t));
    const NodeId loss = build(g, leaves);
    std::vector<Tensor> grads;
    if (with_grad) {
      g.backward(loss);
      for (NodeId id : leaves) {
        grads.push_back(g.has_grad(id) ? g.grad(id) : Tensor::zeros_like(g.value(id)));
      }
    }
    return std::pair{g.value(loss).item(), grads};
  };
  return grad_check([&](const std::vector<Tensor>& ps) { return run(ps, false).first; },
                    [&](const std::vector<Tensor>& ps) { return run(ps, true).second; },
                    std::move(params), eps);
}

GradCheckResult grad_check_store(const StoreLossBuilder& build, const ParamStore& params,
                                 Real eps) {
  std::vector<std::string> names;
  std::vector<Tensor> flat;
  for (const auto& [name, t] : params) {
    names.push_back(name);
    flat.push_back(t);
  }
  auto to_store = [&](const std::vector<Tensor>& ps) {
    ParamStore store;
    for (std::size_t i = 0; i < ps.size(); ++i) store.emplace(names[i], ps[i]);
    return store;
  };
  auto f = [&](const std::vector<Tensor>& ps) {
    const ParamStore store = to_store(ps);
    Graph g(store, nullptr, false);
    return g.value(build(g)).item();
  };
  auto grad = [&](const std::vector<Tensor>& ps) {
    const ParamStore store = to_store(ps);
    Graph g(store, nullptr, true);
    GradResult r = g.backward(build(g));
    std::vector<Tensor> out;
    for (const std::string& n : names) out.push_back(r.grads.at(n));
    return out;
  };
  return grad_check(f, grad, std::move(flat), eps);
}

INLG_NAMESPACE_END
