// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "inlg/model/model.hpp"
#include "inlg/textdata/features.hpp"

INLG_NAMESPACE_BEGIN

struct DecodeConfig {
  std::size_t beam_width = 10;
  std::size_t max_output_len = 100;
  Real alpha = 0;  // length normalization exponent; 0 scores by raw log-prob
  TokenId eos_id = Vocab::kEos;

  void validate() const;
};

struct Hypothesis {
  std::vector<TokenId> tokens;  // generated tokens, EOS included when finished by EOS
  Real logprob = 0;
  bool finished = false;  // ended in EOS (false: stopped by the length cap)
  Real score = 0;
};

/// Source of next-token log-probabilities for a batch of partial outputs
/// that share one prompt.
class StepScorer {
 public:
  virtual ~StepScorer() = default;
  virtual std::size_t vocab_size() const = 0;
  /// Returns one row of vocab_size() log-probabilities per hypothesis.
  virtual std::vector<std::vector<Real>> next_logprobs(
      const std::vector<std::vector<TokenId>>& hyps) = 0;
};

/// Scores continuations of (prefix(feature), BOS, context) with a Model.
/// Each call runs one batched forward over all hypotheses.
class ModelScorer : public StepScorer {
 public:
  ModelScorer(const Model& model, std::vector<Real> feature, std::vector<TokenId> context);
  std::size_t vocab_size() const override;
  std::vector<std::vector<Real>> next_logprobs(
      const std::vector<std::vector<TokenId>>& hyps) override;

 private:
  const Model& model_;
  std::vector<Real> feature_;
  std::vector<TokenId> context_;
};

Real hypothesis_score(Real logprob, std::size_t length, Real alpha);

/// Returns up to beam_width hypotheses, best first. Live beams are ranked
/// by log-prob with ties broken by token id, then by parent order.
std::vector<Hypothesis> beam_search(StepScorer& scorer, const DecodeConfig& cfg);

/// Argmax rollout (lowest token id on ties).
Hypothesis greedy(StepScorer& scorer, const DecodeConfig& cfg);

/// Model-level entry points. Throws LengthError when
/// l + m + max_output_len exceeds the model's max_positions.
std::vector<Hypothesis> beam_search(const Model& model, const std::vector<Real>& feature,
                                    const std::vector<TokenId>& context,
                                    const DecodeConfig& cfg);
Hypothesis greedy(const Model& model, const std::vector<Real>& feature,
                  const std::vector<TokenId>& context, const DecodeConfig& cfg);

struct GenerationInput {
  std::string id;
  std::vector<TokenId> context_ids;
  std::optional<std::vector<Real>> feature;
  std::string error;  // set when the input could not be resolved
};

struct GenerationRecord {
  std::string id;
  std::string text;
  Real logprob = 0;
  bool finished = false;
  std::optional<std::string> error;
};
std::string to_json_line(const GenerationRecord& r);

/// Parses {"id","context","feature_id"|"feature"} lines. Unresolvable
/// features become per-example errors rather than exceptions.
std::vector<GenerationInput> parse_generation_inputs(const std::string& jsonl, const Vocab& vocab,
                                                     VocabMode mode,
                                                     const FeatureTable* features);

/// Decodes every input independently and returns records in input order.
std::vector<GenerationRecord> generate(const Model& model,
                                       const std::vector<GenerationInput>& inputs,
                                       const DecodeConfig& cfg, std::size_t threads = 1);

INLG_NAMESPACE_END
