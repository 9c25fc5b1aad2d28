// SPDX-License-Identifier: Apache-2.0
#include "gradcheck_cmd.hpp"

#include <chrono>
#include <iomanip>
#include <ostream>

#include "inlg/diagnostics.hpp"

double run_tiny_gradcheck(std::uint64_t seed, double eps, const std::string& mapping,
                          std::ostream& out) {
  namespace in = inlg::f64;
  const auto t0 = std::chrono::steady_clock::now();
  const in::TinyCheckReport rep =
      in::check_tiny_model(seed, eps, in::parse_mapping_variant(mapping));
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& [name, r] : rep.checks) {
    out << std::left << std::setw(22) << name << " max_rel_err=" << std::scientific
        << std::setprecision(3) << r.max_relative_error << " entries=" << r.entries << "\n";
  }
  out << "max_relative_error " << std::scientific << std::setprecision(3)
      << rep.max_relative_error() << std::defaultfloat << " (" << std::fixed
      << std::setprecision(1) << secs << " s)\n";
  return rep.max_relative_error();
}
