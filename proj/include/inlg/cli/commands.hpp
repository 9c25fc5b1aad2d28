// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "inlg/cli/run_config.hpp"
#include "inlg/metrics.hpp"
#include "inlg/textdata/synthetic.hpp"

INLG_NAMESPACE_BEGIN

/// Bad invocation that is not a config problem (empty input, missing
/// required path).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes <run_dir>/config.snapshot and creates <run_dir>/ckpt.
void prepare_run_dir(const RunConfig& rc);

/// Mapping pretraining on a caption corpus (key "train"). Writes
/// train.log.jsonl, ckpt/epNNN.inlgckpt and mapping.inlgckpt.
TrainResult run_pretrain(const RunConfig& rc);

/// Downstream finetuning. Writes train.log.jsonl, epochs.jsonl,
/// ckpt/epNNN.inlgckpt and best.inlgckpt (lowest validation CE). When
/// init_ckpt is set its model hyperparameters and vocabulary are used.
TrainResult run_train(const RunConfig& rc);

struct GenerateJob {
  std::string ckpt;
  std::string in;
  std::string out;
  std::size_t threads = 1;
};

/// Returns the number of per-example error records.
std::size_t run_generate(const RunConfig& rc, const GenerateJob& job);

struct MetricsJob {
  std::string in;
  std::string out;
  std::string csv;  // optional per-text table
  VocabMode mode = VocabMode::word;
  DistinctDenominator denominator = DistinctDenominator::tokens;
};

/// Throws UsageError on an input with no texts; nothing is written then.
MetricsReport run_eval_metrics(const MetricsJob& job);

/// Human-readable header and tensor listing.
std::string describe_checkpoint(const std::string& path);

INLG_NAMESPACE_END
