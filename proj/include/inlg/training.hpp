// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "inlg/model/model.hpp"
#include "inlg/numcore/optim.hpp"
#include "inlg/objectives.hpp"
#include "inlg/textdata/corpus.hpp"

INLG_NAMESPACE_BEGIN

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 8;
  Real lr = Real(1e-3);
  Real weight_decay = Real(0.01);
  std::size_t warmup_steps = 400;
  Real grad_clip = Real(1);  // global-norm clip; 0 disables
  ContrastiveConfig contrastive;
  LossReduction reduction = LossReduction::mean;
  std::uint64_t seed = 0;
  bool drop_last = false;
  // Which parameter groups move. The projection head trains whenever
  // either the LM or the mapping network does.
  bool tune_lm = true;
  bool pretrain_map = false;
  bool tune_map = true;
  /// Keep the LM frozen until the contrastive phase starts.
  bool lm_phase2_only = false;

  void validate() const;
};

struct PretrainConfig {
  std::size_t epochs = 5;
  std::size_t batch_size = 128;
  Real lr = Real(1e-3);
  Real weight_decay = Real(0.01);
  std::size_t warmup_steps = 5000;
  Real grad_clip = Real(1);
  LossReduction reduction = LossReduction::mean;
  std::uint64_t seed = 0;
  /// Train the LM jointly with the mapping network (otherwise it is frozen).
  bool tune_lm = true;

  void validate() const;
};

/// One optimizer step, as written to train.log.jsonl.
struct StepRecord {
  std::uint64_t step = 0;
  std::size_t epoch = 0;
  Real teacher = 0;
  std::optional<Real> contrastive;
  Real lambda_effective = 0;
  Real lr = 0;
};
std::string to_json_line(const StepRecord& r);

struct EpochSummary {
  std::size_t epoch = 0;
  double train_teacher = 0;  // mean of per-step teacher losses
  std::optional<double> val_ce;
};

struct TrainResult {
  std::vector<StepRecord> log;
  std::vector<EpochSummary> epochs;
  std::optional<std::size_t> best_epoch;  // lowest validation CE
  std::uint64_t steps = 0;
};

/// Called after every epoch with the current parameters.
using EpochCallback = std::function<void(const EpochSummary&, const Model&)>;
/// Called after every optimizer step.
using StepCallback = std::function<void(const StepRecord&)>;

struct TrainHooks {
  EpochCallback on_epoch;
  StepCallback on_step;
};

/// Mapping-network pretraining in a captioning formulation: teacher
/// forcing only, the prefix as the sole conditioning, no contrastive term.
TrainResult pretrain_mapping(Model& model, const std::vector<Example>& pairs,
                             const PretrainConfig& cfg, const TrainHooks& hooks = {});

/// Downstream finetuning. Epochs before n_no_contra use the teacher loss
/// only (the contrastive branch is not built); later epochs add
/// lambda * InfoNCE. Groups whose tune flag is off are never updated.
TrainResult finetune(Model& model, const std::vector<Example>& train,
                     const std::vector<Example>* val, const TrainConfig& cfg,
                     const TrainHooks& hooks = {});

/// Fresh model for finetuning. The LM (and head) come from `base` when
/// given; the mapping network comes from `mapping` when pretrain_map is
/// set (a missing mapping checkpoint is a ConfigError) and is freshly
/// initialized otherwise.
Model prepare_finetune_model(const ModelConfig& config, const Vocab& vocab, VocabMode mode,
                             std::uint64_t seed, const Model* base, const Model* mapping,
                             bool pretrain_map);

struct PerplexityReport {
  double mean_ce = 0;
  double perplexity = 0;
  std::size_t tokens = 0;
};

/// Token-weighted teacher-forcing cross-entropy over the target positions.
PerplexityReport evaluate_perplexity(const Model& model, const std::vector<Example>& examples,
                                     std::size_t batch_size = 32);

/// Cosine alignment between features and sentence representations over
/// the given examples, evaluated as one batch.
AlignmentStats evaluate_alignment(const Model& model, const std::vector<Example>& examples);

INLG_NAMESPACE_END
