// SPDX-License-Identifier: Apache-2.0
#pragma once

// The library is compiled once per scalar type. The float build is the
// production build; the double build exists so that finite-difference
// gradient verification is not swamped by f32 round-off. Each build lives
// in its own inline namespace so both can be linked into one binary.
#ifdef INLG_REAL_DOUBLE
#define INLG_REAL_NS f64
#else
#define INLG_REAL_NS f32
#endif

#define INLG_NAMESPACE_BEGIN \
  namespace inlg {           \
  inline namespace INLG_REAL_NS {
#define INLG_NAMESPACE_END \
  }                        \
  }

INLG_NAMESPACE_BEGIN
#ifdef INLG_REAL_DOUBLE
using Real = double;
#else
using Real = float;
#endif
INLG_NAMESPACE_END

#include <charconv>
#include <cstdlib>

INLG_NAMESPACE_BEGIN
/// The double whose shortest decimal form equals that of `v`, so logs
/// print 0.0001 rather than the widened 0.00010000000474974513.
inline double printable(Real v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf - 1, v);
  *res.ptr = '\0';
  return std::strtod(buf, nullptr);
}
INLG_NAMESPACE_END
