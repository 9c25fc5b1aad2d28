// SPDX-License-Identifier: Apache-2.0
#include "inlg/numcore/params.hpp"

INLG_NAMESPACE_BEGIN

std::size_t param_count(const ParamStore& params) {
  std::size_t n = 0;
  for (const auto& [name, t] : params) n += t.size();
  return n;
}

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.size() >= prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

INLG_NAMESPACE_END
