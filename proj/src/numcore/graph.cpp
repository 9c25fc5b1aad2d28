// SPDX-License-Identifier: Apache-2.0
#include "inlg/numcore/graph.hpp"

INLG_NAMESPACE_BEGIN

Graph::Graph(bool grad_enabled) : grad_enabled_(grad_enabled) {}

Graph::Graph(const ParamStore& params, TrainablePredicate trainable, bool grad_enabled)
    : params_(&params), trainable_(std::move(trainable)), grad_enabled_(grad_enabled) {}

NodeId Graph::constant(Tensor value) {
  Node n;
  n.op = "constant";
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

NodeId Graph::leaf(Tensor value) {
  Node n;
  n.op = "leaf";
  n.value = std::move(value);
  n.requires_grad = grad_enabled_;
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

NodeId Graph::param(const std::string& name) {
  if (auto it = param_nodes_.find(name); it != param_nodes_.end()) return it->second;
  if (params_ == nullptr) throw ContractViolation("graph has no parameter store");
  auto it = params_->find(name);
  if (it == params_->end()) throw ContractViolation("unknown parameter: " + name);
  Node n;
  n.op = "param";
  n.value = it->second;
  n.param_name = name;
  n.requires_grad = grad_enabled_ && (!trainable_ || trainable_(name));
  nodes_.push_back(std::move(n));
  const NodeId id = nodes_.size() - 1;
  param_nodes_.emplace(name, id);
  return id;
}

NodeId Graph::add_node(std::string op, Tensor value, std::vector<NodeId> inputs,
                       BackwardFn backward) {
  Node n;
  n.op = std::move(op);
  n.value = std::move(value);
  for (NodeId in : inputs) {
    if (in >= nodes_.size()) throw ContractViolation("node input refers to a later node");
    n.requires_grad = n.requires_grad || nodes_[in].requires_grad;
  }
  n.inputs = std::move(inputs);
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

Tensor& Graph::grad(NodeId id) {
  Node& n = nodes_.at(id);
  if (n.grad.empty()) n.grad = Tensor::zeros_like(n.value);
  return n.grad;
}

GradResult Graph::backward(NodeId loss) {
  if (loss >= nodes_.size()) throw ContractViolation("loss node out of range");
  if (nodes_[loss].value.size() != 1) {
    throw ContractViolation("backward() needs a scalar loss, got shape " +
                            shape_str(nodes_[loss].value.shape()));
  }
  nodes_[loss].value.check_finite("loss value", loss);

  GradResult result;
  if (params_ != nullptr) {
    for (const auto& [name, t] : *params_) result.grads.emplace(name, Tensor::zeros_like(t));
  }
  if (!nodes_[loss].requires_grad) return result;

  grad(loss).fill(Real(1));
  for (NodeId id = loss + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.empty()) continue;
    n.grad.check_finite("gradient of node '" + n.op + "' #" + std::to_string(id), id);
    if (n.backward) n.backward(*this, id);
  }

  for (const auto& [name, id] : param_nodes_) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.empty()) continue;
    result.grads[name] = n.grad;
    result.reached.insert(name);
  }
  return result;
}

INLG_NAMESPACE_END
