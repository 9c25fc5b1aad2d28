// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "inlg/numcore/tensor.hpp"
#include "inlg/textdata/corpus.hpp"

INLG_NAMESPACE_BEGIN

/// Role of a row, by what the row is trained to predict. Every row of a
/// batch has exactly one role, so the four masks partition the batch.
enum class RowRole : std::uint8_t { prefix, context, target, pad };

/// Right-padded batch in the LM's row layout. Example b occupies rows
/// [b*seq_len, (b+1)*seq_len):
///   rows 0..l-1          visual prefix slots (input id is PAD, never used)
///   row  l               BOS
///   rows l+1..l+m        context tokens
///   rows l+m+1..l+m+n-1  target tokens y_1..y_{n-1} (teacher forcing)
///   remaining rows       PAD
/// Row r predicts the token at row r+1, so rows l..l+m-1 predict context
/// and rows l+m..l+m+n-1 predict the n target tokens.
struct Batch {
  std::vector<std::size_t> indices;  // into the source example list
  std::vector<std::string> ids;
  std::size_t size = 0;
  std::size_t seq_len = 0;
  std::size_t prefix_len = 0;
  std::vector<TokenId> input_ids;   // size*seq_len
  std::vector<TokenId> labels;      // next-token label per row (PAD if none)
  std::vector<RowRole> roles;       // size*seq_len
  std::vector<std::size_t> lengths; // l+m+n per example
  Tensor features;                  // [size, d_v]

  bool is_target(std::size_t row) const { return roles[row] == RowRole::target; }
  std::size_t count(RowRole role) const;
};

/// Builds the row layout for a group of examples. Examples without
/// targets (generation) lay out prefix + BOS + context only.
Batch collate(const std::vector<Example>& examples, const std::vector<std::size_t>& indices,
              std::size_t prefix_len);

/// Example order for one epoch: a seeded Fisher-Yates shuffle of the
/// indices, split into chunks of batch_size.
std::vector<std::vector<std::size_t>> plan_batches(std::size_t num_examples,
                                                   std::size_t batch_size, std::uint64_t seed,
                                                   bool drop_last, bool shuffle = true);

std::vector<Batch> make_batches(const std::vector<Example>& examples, std::size_t batch_size,
                                std::uint64_t seed, bool drop_last, std::size_t prefix_len,
                                bool shuffle = true);

INLG_NAMESPACE_END
