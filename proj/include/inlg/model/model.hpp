// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "inlg/model/config.hpp"
#include "inlg/numcore/checkpoint.hpp"
#include "inlg/numcore/graph.hpp"
#include "inlg/textdata/batching.hpp"
#include "inlg/textdata/vocab.hpp"

INLG_NAMESPACE_BEGIN

/// Parameter groups, by name prefix: "lm." decoder LM, "map." mapping
/// network, "head." contrastive projection head.
enum class ParamGroup { lm, map, head };
ParamGroup param_group(const std::string& name);

/// Decoder LM + mapping network + projection head, with the vocabulary the
/// LM was built for.
struct Model {
  ModelConfig config;
  ParamStore params;
  Vocab vocab;
  VocabMode vocab_mode = VocabMode::word;

  /// Deterministic init: each parameter draws from its own stream derived
  /// from (seed, parameter name). LN gains are 1, biases 0.
  static Model init(const ModelConfig& config, const Vocab& vocab, VocabMode mode,
                    std::uint64_t seed);

  Checkpoint to_checkpoint() const;
  static Model from_checkpoint(const Checkpoint& ckpt);
};

/// Creates (or re-creates) the parameters of one group.
void init_group(ParamStore& params, const ModelConfig& config, ParamGroup group,
                std::uint64_t seed);

struct ForwardOptions {
  bool train = false;
  Rng* dropout_rng = nullptr;
  /// When set, logits are produced only for these rows (in this order).
  std::optional<std::vector<std::size_t>> logit_rows;
};

struct ForwardResult {
  NodeId logits = 0;  // [rows, vocab]
  NodeId hidden = 0;  // [batch*seq, d_model], final-layer-norm output
  std::optional<NodeId> prefix;  // [batch*l, d_model]
};

/// Mapping network F: [B, d_v] features -> [B*l, d_model] prefix rows.
NodeId map_features(Graph& g, const ModelConfig& cfg, NodeId features,
                    const ForwardOptions& opts = {});

/// LM over [prefix; BOS; context; target inputs] for every example of the
/// batch. Throws LengthError naming the example when a sequence exceeds
/// max_positions.
ForwardResult lm_forward(Graph& g, const ModelConfig& cfg, const Batch& batch,
                         const ForwardOptions& opts = {});

/// Pools final hidden states over each example's target rows (mean, or the
/// last target row) and applies the projection head: [B, d_v].
NodeId sentence_rep(Graph& g, const ModelConfig& cfg, NodeId hidden, const Batch& batch);

/// Rows of the batch whose labels are target tokens, in row order.
std::vector<std::size_t> target_rows(const Batch& batch);

/// Eager helpers (no gradient) over a model's parameters.
Tensor eval_prefix(const Model& model, std::span<const Real> feature);
Tensor eval_logits(const Model& model, const Batch& batch);

INLG_NAMESPACE_END
