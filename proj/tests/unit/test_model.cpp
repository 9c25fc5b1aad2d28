// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"
#include "helpers.hpp"
#include "inlg/model/model.hpp"

using namespace inlg;
using testing::bit_equal;

namespace {

Vocab small_vocab() {
  Vocab v;
  for (int i = 0; i < 12; ++i) v.add("w" + std::to_string(i));
  return v;
}

ModelConfig small_config(std::size_t l, MappingVariant mv = MappingVariant::transformer) {
  ModelConfig c;
  c.d_model = 16;
  c.n_layers = 2;
  c.vocab_size = 16;
  c.n_heads = 2;
  c.d_ff = 32;
  c.max_positions = 48;
  c.prefix_len = l;
  c.feature_dim = 6;
  c.mapping = mv;
  c.mapping_layers = 2;
  c.init_std = 0.2f;
  return c;
}

Example make_example(std::string id, std::vector<TokenId> ctx, std::vector<TokenId> tgt,
                     std::vector<Real> feat) {
  Example e;
  e.id = std::move(id);
  e.context_ids = std::move(ctx);
  e.target_ids = std::move(tgt);
  e.target_ids.push_back(Vocab::kEos);
  e.feature = std::move(feat);
  return e;
}

std::vector<Example> examples() {
  return {make_example("a", {4, 5, 6}, {7, 8, 9}, {1, 0, 0, 0.5f, 0, 0}),
          make_example("b", {4}, {10, 11, 12, 13, 14}, {0, 1, 0, 0, 0, -1}),
          make_example("c", {}, {15}, {0, 0, 1, 0, 0.2f, 0})};
}

Model make_model(std::size_t l, MappingVariant mv = MappingVariant::transformer) {
  ModelConfig c = small_config(l, mv);
  return Model::init(c, small_vocab(), VocabMode::word, 5);
}

Tensor logits_of(const Model& m, const std::vector<Example>& ex, std::vector<std::size_t> idx) {
  return eval_logits(m, collate(ex, idx, m.config.prefix_len));
}

}  // namespace

TEST_CASE("parameter naming and groups") {
  Model m = make_model(4, MappingVariant::mlp);
  CHECK(m.params.contains("lm.tok_emb"));
  CHECK(m.params.contains("map.fc1.w"));
  CHECK(m.params.contains("head.w"));
  CHECK(param_group("lm.blocks.0.attn.qkv.w") == ParamGroup::lm);
  CHECK(param_group("map.fc2.b") == ParamGroup::map);
  CHECK(param_group("head.b") == ParamGroup::head);
  // output projection is tied to the token embedding
  for (const auto& [name, t] : m.params) CHECK(name.find("out_proj") == std::string::npos);
  CHECK(m.params.at("head.w").shape() == Shape{16, 6});
  CHECK(m.config.resolved_mapping_hidden() == 4 * 16 / 2);

  Model text_only = make_model(0);
  for (const auto& [name, t] : text_only.params) CHECK(param_group(name) != ParamGroup::map);
}

TEST_CASE("initialization is deterministic per seed") {
  ModelConfig c = small_config(4);
  Model a = Model::init(c, small_vocab(), VocabMode::word, 1);
  Model b = Model::init(c, small_vocab(), VocabMode::word, 1);
  Model d = Model::init(c, small_vocab(), VocabMode::word, 2);
  for (const auto& [n, t] : a.params) CHECK(bit_equal(t, b.params.at(n)));
  CHECK_FALSE(bit_equal(a.params.at("lm.tok_emb"), d.params.at("lm.tok_emb")));
  CHECK(a.params.at("lm.ln_f.g")[0] == 1);
  CHECK(a.params.at("lm.ln_f.b")[0] == 0);
}

TEST_CASE("mapping network output shape and behavior") {
  ModelConfig c = small_config(20, MappingVariant::mlp);
  c.d_model = 64;
  c.n_heads = 4;
  c.d_ff = 128;
  c.max_positions = 64;
  Model m = Model::init(c, small_vocab(), VocabMode::word, 3);
  std::vector<Real> v1{1, 2, 3, 4, 5, 6}, v2{-1, 0, 2, 0, 1, 1};
  Tensor p1 = eval_prefix(m, v1);
  CHECK(p1.shape() == Shape{20, 64});
  CHECK_FALSE(p1 == eval_prefix(m, v2));
  CHECK(bit_equal(p1, eval_prefix(m, v1)));
  for (auto& [name, t] : m.params)
    if (param_group(name) == ParamGroup::map) t.fill(0);
  Tensor z = eval_prefix(m, v1);
  for (Real x : z.data()) CHECK(x == 0);

  Model tm = make_model(4);
  Tensor q = eval_prefix(tm, v1);
  CHECK(q.shape() == Shape{4, 16});
  CHECK_FALSE(q == eval_prefix(tm, v2));
  std::vector<Real> short_v{1, 2};
  CHECK_THROWS_AS(eval_prefix(tm, short_v), ContractViolation);
}

TEST_CASE("logits: one row per input position") {
  Model m = make_model(3);
  auto ex = examples();
  Batch b = collate(ex, {0, 1, 2}, 3);
  Tensor lg = eval_logits(m, b);
  CHECK(lg.shape() == Shape{b.size * b.seq_len, m.vocab.size()});
}

TEST_CASE("the feature moves target logits only through the prefix") {
  auto ex = examples();
  auto moved = ex;
  moved[0].feature = {0, 0, 0, 0, 3, 3};
  Model m = make_model(3);
  CHECK_FALSE(logits_of(m, ex, {0}) == logits_of(m, moved, {0}));
  Model text = make_model(0);
  CHECK(bit_equal(logits_of(text, ex, {0}), logits_of(text, moved, {0})));
}

TEST_CASE("causality") {
  Model m = make_model(2);
  auto ex = examples();
  auto changed = ex;
  changed[1].target_ids[2] = 4;  // input row l+1+m+2
  Tensor a = logits_of(m, ex, {1}), b = logits_of(m, changed, {1});
  const std::size_t j = 2 + 1 + 1 + 2;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    bool same = true;
    for (std::size_t c = 0; c < a.cols(); ++c) same = same && a.at(r, c) == b.at(r, c);
    if (r < j) CHECK(same);
    else if (r == j) CHECK_FALSE(same);
  }
}

TEST_CASE("an example's logits do not depend on its batch") {
  for (auto mv : {MappingVariant::mlp, MappingVariant::transformer}) {
    Model m = make_model(3, mv);
    auto ex = examples();
    Tensor alone = logits_of(m, ex, {1});
    Tensor batch = logits_of(m, ex, {2, 1, 0});
    Batch bb = collate(ex, {2, 1, 0}, 3);
    const std::size_t len = collate(ex, {1}, 3).seq_len;
    for (std::size_t r = 0; r < len; ++r)
      for (std::size_t c = 0; c < alone.cols(); ++c)
        CHECK(alone.at(r, c) == batch.at(bb.seq_len + r, c));
  }
}

TEST_CASE("sentence representation pools target rows") {
  Model m = make_model(2);
  auto ex = examples();
  Batch b = collate(ex, {0, 2}, 2);
  Graph g(m.params, nullptr, false);
  ForwardResult fwd = lm_forward(g, m.config, b);
  const Tensor reps = g.value(sentence_rep(g, m.config, fwd.hidden, b));
  const Tensor& h = g.value(fwd.hidden);
  const Tensor& w = m.params.at("head.w");
  const Tensor& bias = m.params.at("head.b");
  for (std::size_t k = 0; k < 2; ++k) {
    std::vector<double> pooled(16, 0.0);
    std::size_t n = 0;
    for (std::size_t t = 0; t < b.seq_len; ++t) {
      if (!b.is_target(k * b.seq_len + t)) continue;
      ++n;
      for (std::size_t c = 0; c < 16; ++c) pooled[c] += h.at(k * b.seq_len + t, c);
    }
    CHECK(n == ex[b.indices[k]].target_ids.size());
    for (std::size_t o = 0; o < 6; ++o) {
      double want = bias[o];
      for (std::size_t c = 0; c < 16; ++c) want += pooled[c] / double(n) * w.at(c, o);
      CHECK(reps.at(k, o) == doctest::Approx(want).epsilon(1e-4));
    }
  }
  Example gen;
  gen.id = "gen";
  gen.context_ids = {4};
  gen.feature = ex[0].feature;
  Batch gb = collate({gen}, {0}, 2);
  Graph g2(m.params, nullptr, false);
  ForwardResult f2 = lm_forward(g2, m.config, gb);
  CHECK_THROWS_AS(sentence_rep(g2, m.config, f2.hidden, gb), ContractViolation);
}

TEST_CASE("length overflow names the example") {
  Model m = make_model(3);
  Example longer = make_example("too-long", std::vector<TokenId>(40, 4), {5, 6, 7, 8, 9, 10}, {1, 0, 0, 0, 0, 0});
  try {
    eval_logits(m, collate({longer}, {0}, 3));
    FAIL("expected LengthError");
  } catch (const LengthError& e) {
    CHECK(std::string(e.what()).find("too-long") != std::string::npos);
  }
}

TEST_CASE("dropout-free forward is pure and checkpoints round-trip") {
  Model m = make_model(3, MappingVariant::mlp);
  auto ex = examples();
  CHECK(bit_equal(logits_of(m, ex, {0, 1}), logits_of(m, ex, {0, 1})));
  Checkpoint ck = m.to_checkpoint();
  Model back = Model::from_checkpoint(decode_checkpoint(encode_checkpoint(ck)));
  CHECK(back.config.to_header() == m.config.to_header());
  CHECK(back.vocab == m.vocab);
  CHECK(back.vocab_mode == m.vocab_mode);
  for (const auto& [n, t] : m.params) CHECK(bit_equal(t, back.params.at(n)));
  CHECK(bit_equal(logits_of(back, ex, {0, 1}), logits_of(m, ex, {0, 1})));
}

TEST_CASE("config validation") {
  ModelConfig c = small_config(4);
  c.n_heads = 3;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  ModelConfig d = small_config(4);
  d.max_positions = 3;
  CHECK_THROWS_AS(d.validate(), ConfigError);
  CHECK(small_config(4, MappingVariant::mlp).resolved_mapping_layers() == 2);
  ModelConfig e = small_config(4);
  e.mapping_layers = 0;
  CHECK(e.resolved_mapping_layers() == 8);
}
