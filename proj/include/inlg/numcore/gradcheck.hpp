// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "inlg/numcore/graph.hpp"

INLG_NAMESPACE_BEGIN

struct GradCheckResult {
  double max_relative_error = 0;
  std::size_t entries = 0;
  // location of the worst entry
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0;
  double worst_numeric = 0;
};

using ScalarFn = std::function<Real(const std::vector<Tensor>&)>;
using GradFn = std::function<std::vector<Tensor>(const std::vector<Tensor>&)>;

/// Central finite differences against an analytic gradient. Reports
///   max over entries of |a - fd| / max(1e-8, |a| + |fd|).
/// Throws NumericFault when f is non-finite at a perturbed point.
GradCheckResult grad_check(const ScalarFn& f, const GradFn& grad, std::vector<Tensor> params,
                           Real eps);

/// Builds the loss on a fresh graph whose leaves hold `params`.
using LossBuilder = std::function<NodeId(Graph&, const std::vector<NodeId>&)>;
GradCheckResult grad_check(const LossBuilder& build, std::vector<Tensor> params, Real eps);

/// Same check over a parameter store; the builder receives a graph bound
/// to a perturbed copy of the store.
using StoreLossBuilder = std::function<NodeId(Graph&)>;
GradCheckResult grad_check_store(const StoreLossBuilder& build, const ParamStore& params,
                                 Real eps);

INLG_NAMESPACE_END
