// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "inlg/real.hpp"

INLG_NAMESPACE_BEGIN

/// Caller broke a documented precondition (shapes, sizes, empty masks).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// NaN or Inf showed up during a forward, backward or finite-difference pass.
class NumericFault : public std::runtime_error {
 public:
  NumericFault(const std::string& what, std::size_t node_id)
      : std::runtime_error(what), node_id_(node_id) {}
  std::size_t node_id() const { return node_id_; }

 private:
  std::size_t node_id_;
};

/// Malformed binary file (bad magic, unknown version, truncated payload).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed corpus line or dangling feature reference.
class IngestError : public std::runtime_error {
 public:
  IngestError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Sequence does not fit into the model's positional table.
class LengthError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration key or value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

INLG_NAMESPACE_END
