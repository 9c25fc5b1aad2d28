// SPDX-License-Identifier: Apache-2.0
#include "inlg/objectives.hpp"

#include <cmath>

INLG_NAMESPACE_BEGIN

DenominatorMode parse_denominator_mode(const std::string& s) {
  if (s == "standard") return DenominatorMode::standard;
  if (s == "paper") return DenominatorMode::paper;
  throw ConfigError("contrastive denominator must be 'standard' or 'paper', got '" + s + "'");
}

std::string to_string(DenominatorMode m) {
  return m == DenominatorMode::standard ? "standard" : "paper";
}

LossReduction parse_loss_reduction(const std::string& s) {
  if (s == "mean") return LossReduction::mean;
  if (s == "sum") return LossReduction::sum;
  throw ConfigError("loss reduction must be 'mean' or 'sum', got '" + s + "'");
}

std::string to_string(LossReduction r) { return r == LossReduction::mean ? "mean" : "sum"; }

void ContrastiveConfig::validate() const {
  if (!(tau > Real(0))) throw ConfigError("tau must be > 0");
  if (!(lambda >= Real(0))) throw ConfigError("lambda must be >= 0");
}

NodeId teacher_loss(Graph& g, NodeId logits, std::span<const std::int32_t> targets,
                    std::span<const std::uint8_t> mask, LossReduction reduction) {
  if (mask.size() != targets.size()) throw ContractViolation("teacher_loss: mask size mismatch");
  std::size_t count = 0;
  for (auto m : mask) count += m != 0;
  if (count == 0) throw ContractViolation("teacher_loss: mask selects no target positions");
  const Real w = reduction == LossReduction::mean ? Real(1) / Real(count) : Real(1);
  std::vector<Real> weights(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) weights[i] = mask[i] ? w : Real(0);
  return ops::cross_entropy(g, logits, targets, weights);
}

std::optional<NodeId> contrastive_loss(Graph& g, NodeId features, NodeId reps,
                                       const ContrastiveConfig& cfg) {
  cfg.validate();
  const Tensor& fv = g.value(features);
  const Tensor& rv = g.value(reps);
  if (!fv.same_shape(rv)) {
    throw ContractViolation("contrastive_loss: features " + shape_str(fv.shape()) +
                            " vs representations " + shape_str(rv.shape()));
  }
  if (fv.rows() < 2) return std::nullopt;
  const NodeId sim = ops::matmul_nt(g, ops::l2_normalize_rows(g, features),
                                    ops::l2_normalize_rows(g, reps));
  return ops::info_nce(g, ops::scale(g, sim, Real(1) / cfg.tau),
                       cfg.denominator == DenominatorMode::paper);
}

std::optional<Real> contrastive_loss(const Tensor& features, const Tensor& reps,
                                     const ContrastiveConfig& cfg) {
  Graph g(false);
  auto loss = contrastive_loss(g, g.constant(features), g.constant(reps), cfg);
  if (!loss) return std::nullopt;
  return g.value(*loss).item();
}

bool contrastive_phase(std::size_t epoch, const ContrastiveConfig& cfg) {
  return epoch >= cfg.n_no_contra;
}

Real lambda_effective(std::size_t epoch, const ContrastiveConfig& cfg) {
  return contrastive_phase(epoch, cfg) ? cfg.lambda : Real(0);
}

LossBreakdown combined_loss(Real teacher, std::optional<Real> contrastive, std::size_t epoch,
                            const ContrastiveConfig& cfg) {
  LossBreakdown r;
  r.teacher = teacher;
  r.lambda_effective = lambda_effective(epoch, cfg);
  r.total = teacher;
  if (contrastive_phase(epoch, cfg)) {
    if (contrastive) {
      r.contrastive = contrastive;
      r.total = teacher + r.lambda_effective * *contrastive;
    } else {
      r.contrastive_skipped = true;
    }
  }
  return r;
}

AlignmentStats alignment(const Tensor& features, const Tensor& reps) {
  if (!features.same_shape(reps)) throw ContractViolation("alignment: shape mismatch");
  const std::size_t B = features.rows(), D = features.cols();
  auto cosine = [&](std::size_t i, std::size_t j) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t c = 0; c < D; ++c) {
      const double a = features.at(i, c), b = reps.at(j, c);
      dot += a * b;
      na += a * a;
      nb += b * b;
    }
    return dot / std::sqrt(na * nb);
  };
  AlignmentStats s;
  std::size_t nneg = 0;
  for (std::size_t i = 0; i < B; ++i) {
    for (std::size_t j = 0; j < B; ++j) {
      if (i == j) {
        s.positive += cosine(i, j);
      } else {
        s.negative += cosine(i, j);
        ++nneg;
      }
    }
  }
  s.positive /= double(B);
  if (nneg > 0) s.negative /= double(nneg);
  return s;
}

INLG_NAMESPACE_END
