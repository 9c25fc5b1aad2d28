// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "inlg/model/model.hpp"
#include "inlg/numcore/gradcheck.hpp"
#include "inlg/objectives.hpp"

INLG_NAMESPACE_BEGIN

/// A small model and one batch for finite-difference checks: d_model=16,
/// 2 layers, vocabulary of 20, prefix length 4, batch of 4.
struct TinySetup {
  Model model;
  std::vector<Example> examples;
  Batch batch;
};
TinySetup make_tiny_setup(std::uint64_t seed, MappingVariant mapping = MappingVariant::mlp);

struct TinyCheckReport {
  std::vector<std::pair<std::string, GradCheckResult>> checks;
  double max_relative_error() const;
};

/// Gradient checks of the teacher loss and of the contrastive loss in both
/// denominator modes, over every parameter of the tiny model.
TinyCheckReport check_tiny_model(std::uint64_t seed = 0, Real eps = Real(1e-4),
                                 MappingVariant mapping = MappingVariant::mlp);

INLG_NAMESPACE_END
