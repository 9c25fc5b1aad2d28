// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>

#include "inlg/numcore/graph.hpp"

INLG_NAMESPACE_BEGIN

/// standard: the positive pair is part of the denominator (usual InfoNCE).
/// paper: the denominator sums over j != i only.
enum class DenominatorMode { standard, paper };
enum class LossReduction { mean, sum };

DenominatorMode parse_denominator_mode(const std::string& s);
std::string to_string(DenominatorMode m);
LossReduction parse_loss_reduction(const std::string& s);
std::string to_string(LossReduction r);

struct ContrastiveConfig {
  Real tau = Real(0.1);
  DenominatorMode denominator = DenominatorMode::standard;
  Real lambda = Real(1);
  std::size_t n_no_contra = 10;

  void validate() const;
};

struct LossBreakdown {
  Real teacher = 0;
  /// Empty when the contrastive term was not evaluated (teacher-only epoch)
  /// or skipped because the batch had fewer than two samples.
  std::optional<Real> contrastive;
  Real lambda_effective = 0;
  Real total = 0;
  std::size_t batch_size = 0;
  bool contrastive_skipped = false;
};

/// Negative log-likelihood of `targets` under `logits`, restricted to rows
/// with mask != 0. mean: averaged over all selected tokens of the batch;
/// sum: summed. Throws ContractViolation when the mask selects nothing.
NodeId teacher_loss(Graph& g, NodeId logits, std::span<const std::int32_t> targets,
                    std::span<const std::uint8_t> mask, LossReduction reduction);

/// InfoNCE over cosine similarities between features [B, d] and sentence
/// representations [B, d], divided by tau. Returns nullopt when B < 2.
std::optional<NodeId> contrastive_loss(Graph& g, NodeId features, NodeId reps,
                                       const ContrastiveConfig& cfg);
std::optional<Real> contrastive_loss(const Tensor& features, const Tensor& reps,
                                     const ContrastiveConfig& cfg);

/// 0 for epochs before n_no_contra, lambda from then on (the boundary
/// epoch belongs to the contrastive phase).
Real lambda_effective(std::size_t epoch, const ContrastiveConfig& cfg);
bool contrastive_phase(std::size_t epoch, const ContrastiveConfig& cfg);

LossBreakdown combined_loss(Real teacher, std::optional<Real> contrastive, std::size_t epoch,
                            const ContrastiveConfig& cfg);

/// Mean cosine of matched pairs minus mean cosine of mismatched pairs.
struct AlignmentStats {
  double positive = 0;
  double negative = 0;
  double margin() const { return positive - negative; }
};
AlignmentStats alignment(const Tensor& features, const Tensor& reps);

INLG_NAMESPACE_END
