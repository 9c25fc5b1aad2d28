// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "inlg/numcore/params.hpp"
#include "inlg/numcore/rng.hpp"
#include "inlg/numcore/tensor.hpp"

INLG_NAMESPACE_BEGIN

using NodeId = std::size_t;

/// Gradients returned by Graph::backward. `grads` has an entry for every
/// parameter in the bound store (zero when the loss does not reach it);
/// `reached` names the trainable parameters the loss actually depends on.
struct GradResult {
  std::map<std::string, Tensor> grads;
  std::set<std::string> reached;
};

/// Tape of primitive operations. Nodes are appended in evaluation order, so
/// creation order is a valid topological order and backward() is a single
/// reverse sweep.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, NodeId)>;
  using TrainablePredicate = std::function<bool(const std::string&)>;

  /// Graph without bound parameters; use leaf() for differentiable inputs.
  explicit Graph(bool grad_enabled = true);
  /// Graph reading parameters from `params`. Parameters for which
  /// `trainable` returns false are treated as constants.
  Graph(const ParamStore& params, TrainablePredicate trainable, bool grad_enabled = true);

  NodeId constant(Tensor value);
  NodeId leaf(Tensor value);
  /// Node for a named parameter; repeated calls return the same node, so
  /// tied weights accumulate one gradient.
  NodeId param(const std::string& name);

  NodeId add_node(std::string op, Tensor value, std::vector<NodeId> inputs, BackwardFn backward);

  const Tensor& value(NodeId id) const { return nodes_.at(id).value; }
  const std::string& op(NodeId id) const { return nodes_.at(id).op; }
  const std::vector<NodeId>& inputs(NodeId id) const { return nodes_.at(id).inputs; }
  bool requires_grad(NodeId id) const { return nodes_.at(id).requires_grad; }
  bool grad_enabled() const { return grad_enabled_; }
  std::size_t size() const { return nodes_.size(); }

  /// Gradient buffer of a node, zero-initialized on first access.
  Tensor& grad(NodeId id);
  bool has_grad(NodeId id) const { return !nodes_.at(id).grad.empty(); }

  /// Reverse sweep from a scalar loss. Throws ContractViolation for a
  /// non-scalar loss and NumericFault (with the node id) on NaN/Inf.
  GradResult backward(NodeId loss);

 private:
  struct Node {
    std::string op;
    Tensor value;
    Tensor grad;
    std::vector<NodeId> inputs;
    BackwardFn backward;
    bool requires_grad = false;
    std::string param_name;
  };

  std::vector<Node> nodes_;
  const ParamStore* params_ = nullptr;
  TrainablePredicate trainable_;
  std::unordered_map<std::string, NodeId> param_nodes_;
  bool grad_enabled_ = true;
};

/// Primitive operations. All matrices are handled through their 2-D view
/// (Tensor::rows() x Tensor::cols()).
namespace ops {

NodeId matmul(Graph& g, NodeId a, NodeId b);     // [M,K] x [K,N]
NodeId matmul_nt(Graph& g, NodeId a, NodeId b);  // [M,K] x [N,K]^T
NodeId add(Graph& g, NodeId a, NodeId b);
NodeId add_bias(Graph& g, NodeId x, NodeId bias);  // row broadcast of [N]
NodeId mul(Graph& g, NodeId a, NodeId b);
NodeId scale(Graph& g, NodeId x, Real factor);
NodeId gelu(Graph& g, NodeId x);
NodeId tanh(Graph& g, NodeId x);
NodeId relu(Graph& g, NodeId x);
NodeId softmax_rows(Graph& g, NodeId x);
NodeId layer_norm(Graph& g, NodeId x, NodeId gamma, NodeId beta, Real eps = Real(1e-5));
NodeId embedding(Graph& g, NodeId table, std::span<const std::int32_t> ids);
NodeId gather_rows(Graph& g, NodeId x, std::span<const std::size_t> rows);
/// Copy of `base` whose rows `rows[i]` are replaced by row i of `src`.
/// Row indices must be distinct.
NodeId scatter_rows(Graph& g, NodeId base, NodeId src, std::span<const std::size_t> rows);
NodeId reshape(Graph& g, NodeId x, Shape shape);
/// Multi-head self-attention over `batch` sequences of `seq` rows each.
/// `qkv` is [batch*seq, 3*d] laid out as [q | k | v]; returns [batch*seq, d].
NodeId attention(Graph& g, NodeId qkv, std::size_t batch, std::size_t seq, std::size_t heads,
                 bool causal);
NodeId dropout(Graph& g, NodeId x, Real p, Rng& rng);
NodeId l2_normalize_rows(Graph& g, NodeId x);
/// sum_r weights[r] * -log softmax(logits[r])[targets[r]]; rows with weight
/// zero are skipped entirely.
NodeId cross_entropy(Graph& g, NodeId logits, std::span<const std::int32_t> targets,
                     std::span<const Real> weights);
/// Mean over rows i of -log( exp(s_ii) / sum_{j in D_i} exp(s_ij) ) where D_i
/// is every column, or every column except i when exclude_positive is set.
NodeId info_nce(Graph& g, NodeId logits, bool exclude_positive);
NodeId sum(Graph& g, NodeId x);
NodeId mean(Graph& g, NodeId x);
/// sum(x * w) for a constant weight tensor of the same shape.
NodeId weighted_sum(Graph& g, NodeId x, const Tensor& weights);

}  // namespace ops

INLG_NAMESPACE_END
