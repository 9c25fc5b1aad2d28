// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "inlg/textdata/features.hpp"
#include "inlg/textdata/vocab.hpp"

INLG_NAMESPACE_BEGIN

/// One (context, target) pair joined to its visual feature vector.
/// target_ids always ends with EOS; it is empty only for generation-only
/// corpora loaded without targets.
struct Example {
  std::string id;
  std::vector<TokenId> context_ids;
  std::vector<TokenId> target_ids;
  std::vector<Real> feature;
};

struct Corpus {
  std::vector<Example> examples;
  Vocab vocab;
  VocabMode mode = VocabMode::word;
  std::size_t feature_dim = 0;
};

class DanglingReference : public IngestError {
 public:
  using IngestError::IngestError;
};

struct LoadOptions {
  VocabMode mode = VocabMode::word;
  /// Resolves "feature_id" references; inline "feature" arrays need none.
  const FeatureTable* features = nullptr;
  /// Encode against this vocabulary (OOV -> UNK) instead of building one.
  const Vocab* vocab = nullptr;
  /// Generation corpora may omit "target".
  bool require_target = true;
};

/// Parses JSONL lines {"id","context","target","feature_id"} or with an
/// inline "feature" array. Without a supplied vocabulary one is built from
/// this file in first-appearance order.
Corpus load_corpus(const std::string& path, const LoadOptions& opts);
Corpus parse_corpus(const std::string& jsonl, const LoadOptions& opts);

INLG_NAMESPACE_END
