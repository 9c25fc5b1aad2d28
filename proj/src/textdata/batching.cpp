// SPDX-License-Identifier: Apache-2.0
#include "inlg/textdata/batching.hpp"

#include <algorithm>
#include <numeric>

#include "inlg/numcore/rng.hpp"

INLG_NAMESPACE_BEGIN

std::size_t Batch::count(RowRole role) const {
  return static_cast<std::size_t>(std::count(roles.begin(), roles.end(), role));
}

Batch collate(const std::vector<Example>& examples, const std::vector<std::size_t>& indices,
              std::size_t prefix_len) {
  if (indices.empty()) throw ContractViolation("collate: empty batch");
  Batch b;
  b.indices = indices;
  b.size = indices.size();
  b.prefix_len = prefix_len;
  const std::size_t dv = examples.at(indices[0]).feature.size();
  for (std::size_t i : indices) {
    const Example& ex = examples.at(i);
    // prefix + BOS + context + target inputs (target minus its final EOS)
    const std::size_t n = ex.target_ids.size();
    const std::size_t len = prefix_len + 1 + ex.context_ids.size() + (n > 0 ? n - 1 : 0);
    b.lengths.push_back(len);
    b.ids.push_back(ex.id);
    if (ex.feature.size() != dv) throw ContractViolation("collate: mixed feature dims");
  }
  b.seq_len = *std::max_element(b.lengths.begin(), b.lengths.end());
  const std::size_t total = b.size * b.seq_len;
  b.input_ids.assign(total, Vocab::kPad);
  b.labels.assign(total, Vocab::kPad);
  b.roles.assign(total, RowRole::pad);
  b.features = Tensor({b.size, dv});

  for (std::size_t k = 0; k < b.size; ++k) {
    const Example& ex = examples[indices[k]];
    const std::size_t base = k * b.seq_len;
    std::vector<TokenId> stream;  // BOS, context, full target
    stream.push_back(Vocab::kBos);
    stream.insert(stream.end(), ex.context_ids.begin(), ex.context_ids.end());
    stream.insert(stream.end(), ex.target_ids.begin(), ex.target_ids.end());
    const std::size_t m = ex.context_ids.size();
    const std::size_t inputs = b.lengths[k] - prefix_len;
    for (std::size_t p = 0; p < prefix_len; ++p) b.roles[base + p] = RowRole::prefix;
    for (std::size_t s = 0; s < inputs; ++s) {
      const std::size_t row = base + prefix_len + s;
      b.input_ids[row] = stream[s];
      // The last row of a generation-only example has no label; it keeps
      // the pad role.
      if (s + 1 < stream.size()) {
        b.labels[row] = stream[s + 1];
        b.roles[row] = (s < m) ? RowRole::context : RowRole::target;
      }
    }
    std::copy(ex.feature.begin(), ex.feature.end(), b.features.row(k).begin());
  }
  return b;
}

std::vector<std::vector<std::size_t>> plan_batches(std::size_t num_examples,
                                                   std::size_t batch_size, std::uint64_t seed,
                                                   bool drop_last, bool shuffle) {
  if (batch_size == 0) throw ContractViolation("batch_size must be >= 1");
  std::vector<std::size_t> order(num_examples);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) {
    Rng rng(seed);
    rng.shuffle(order);
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < num_examples; start += batch_size) {
    const std::size_t end = std::min(num_examples, start + batch_size);
    if (drop_last && end - start < batch_size) break;
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

std::vector<Batch> make_batches(const std::vector<Example>& examples, std::size_t batch_size,
                                std::uint64_t seed, bool drop_last, std::size_t prefix_len,
                                bool shuffle) {
  std::vector<Batch> out;
  for (const auto& idx : plan_batches(examples.size(), batch_size, seed, drop_last, shuffle)) {
    out.push_back(collate(examples, idx, prefix_len));
  }
  return out;
}

INLG_NAMESPACE_END
