// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "inlg/numcore/rng.hpp"
#include "inlg/numcore/tensor.hpp"
#include "inlg/textdata/corpus.hpp"
#include "inlg/textdata/synthetic.hpp"

namespace testing {

using namespace inlg;

inline Tensor random_tensor(Rng& rng, Shape shape, double scale = 1.0) {
  Tensor t(shape);
  for (auto& v : t.data()) v = Real(rng.normal() * scale);
  return t;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("inlg-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline bool bit_equal(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::memcmp(a.data().data() + i, b.data().data() + i, sizeof(Real)) != 0) return false;
  }
  return true;
}

inline std::vector<Example> world_examples(const SyntheticWorld& w,
                                           const std::vector<SyntheticRecord>& recs) {
  std::vector<Example> out;
  for (const auto& r : recs) {
    Example e;
    e.id = r.id;
    e.context_ids = w.vocab.encode(tokenize(r.context, VocabMode::word));
    e.target_ids = w.vocab.encode(tokenize(r.target, VocabMode::word));
    e.target_ids.push_back(Vocab::kEos);
    e.feature = w.features.at(r.feature_id);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace testing
