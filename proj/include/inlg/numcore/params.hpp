// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>

#include "inlg/numcore/tensor.hpp"

INLG_NAMESPACE_BEGIN

/// Named parameter tensors, ordered by name so that iteration (and thus
/// serialization and optimizer traversal) is deterministic.
using ParamStore = std::map<std::string, Tensor>;

std::size_t param_count(const ParamStore& params);
bool starts_with(const std::string& s, const std::string& prefix);

INLG_NAMESPACE_END
