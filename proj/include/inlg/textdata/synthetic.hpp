// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "inlg/textdata/features.hpp"
#include "inlg/textdata/vocab.hpp"

INLG_NAMESPACE_BEGIN

/// A grounded toy world: every example has a hidden set of attributes.
/// The feature vector encodes the set; the target sentence names it; the
/// context is a constant prompt that carries no information about it.
struct SyntheticWorldSpec {
  std::size_t num_attributes = 8;
  std::size_t feature_dim = 16;
  std::size_t max_attributes = 3;  // per example, at least one
  double noise_std = 0.05;
  std::string context = "describe the picture :";
  std::string target_lead = "i see a";   // attributes follow, then target_tail
  std::string target_tail = "thing .";
  std::string caption_tail = "thing .";  // captions: attributes + caption_tail
  std::size_t train_examples = 512;
  std::size_t val_examples = 128;
  std::size_t test_examples = 0;
  std::size_t caption_examples = 512;

  void validate() const;
  std::vector<std::string> attribute_words() const;
};

struct SyntheticRecord {
  std::string id;
  std::string context;
  std::string target;
  std::string feature_id;
  std::vector<std::size_t> attributes;  // sorted ascending
};

struct SyntheticWorld {
  std::vector<SyntheticRecord> train, val, test, captions;
  FeatureTable features;
  Vocab vocab;
};

SyntheticWorld gen_synthetic(const SyntheticWorldSpec& spec, std::uint64_t seed);

/// Writes train/val/test/captions .jsonl, features.inlgfeat, vocab.txt and
/// world.txt into `dir` (created if needed).
void write_synthetic(const SyntheticWorld& world, const SyntheticWorldSpec& spec,
                     const std::string& dir);

/// Feature-only oracle: reads the attribute set back from a feature vector
/// (coordinate above 0.5) and renders the target sentence it implies.
std::string oracle_target_from_feature(const SyntheticWorldSpec& spec,
                                       const std::vector<Real>& feature);

INLG_NAMESPACE_END
