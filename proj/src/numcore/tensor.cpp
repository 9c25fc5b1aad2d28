// SPDX-License-Identifier: Apache-2.0
#include "inlg/numcore/tensor.hpp"

#include <cmath>
#include <sstream>

INLG_NAMESPACE_BEGIN

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ')';
  return os.str();
}

static void validate_shape(const Shape& shape) {
  if (shape.empty()) throw ContractViolation("tensor shape must have rank >= 1");
  for (std::size_t d : shape) {
    if (d == 0) throw ContractViolation("tensor dimension must be positive: " + shape_str(shape));
  }
}

Tensor::Tensor(Shape shape, Real fill) : shape_(std::move(shape)) {
  validate_shape(shape_);
  data_.assign(shape_numel(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<Real> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  validate_shape(shape_);
  if (data_.size() != shape_numel(shape_)) {
    throw ContractViolation("tensor data length " + std::to_string(data_.size()) +
                            " does not match shape " + shape_str(shape_));
  }
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::initializer_list<Real> values) {
  return Tensor({rows, cols}, std::vector<Real>(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) throw ContractViolation("axis out of range");
  return shape_[axis];
}

std::size_t Tensor::rows() const {
  if (shape_.empty()) return 0;
  return data_.size() / shape_.back();
}

std::size_t Tensor::cols() const { return shape_.empty() ? 0 : shape_.back(); }

Real Tensor::item() const {
  if (data_.size() != 1) {
    throw ContractViolation("item() on non-scalar tensor " + shape_str(shape_));
  }
  return data_[0];
}

bool Tensor::all_finite() const {
  for (Real v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::check_finite(const std::string& what, std::size_t node_id) const {
  if (!all_finite()) throw NumericFault("non-finite value in " + what, node_id);
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_numel(shape) != data_.size()) {
    throw ContractViolation("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
  }
  return Tensor(std::move(shape), data_);
}

void Tensor::fill(Real value) {
  for (Real& v : data_) v = value;
}

INLG_NAMESPACE_END
