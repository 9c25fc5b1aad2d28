// SPDX-License-Identifier: Apache-2.0
#include "inlg/model/model.hpp"

#include <numeric>

INLG_NAMESPACE_BEGIN

ParamGroup param_group(const std::string& name) {
  if (starts_with(name, "lm.")) return ParamGroup::lm;
  if (starts_with(name, "map.")) return ParamGroup::map;
  if (starts_with(name, "head.")) return ParamGroup::head;
  throw ContractViolation("parameter outside any group: " + name);
}

namespace {

struct Initializer {
  ParamStore& params;
  std::uint64_t seed;
  Real std;

  void normal(const std::string& name, Shape shape) {
    Tensor t(std::move(shape));
    Rng rng = Rng::for_stream(seed, "init/" + name);
    for (Real& v : t.storage()) v = static_cast<Real>(double(std) * rng.normal());
    params[name] = std::move(t);
  }
  void constant(const std::string& name, Shape shape, Real value) {
    params[name] = Tensor(std::move(shape), value);
  }
  void linear(const std::string& prefix, std::size_t in, std::size_t out) {
    normal(prefix + ".w", {in, out});
    constant(prefix + ".b", {out}, Real(0));
  }
  void layer_norm(const std::string& prefix, std::size_t d) {
    constant(prefix + ".g", {d}, Real(1));
    constant(prefix + ".b", {d}, Real(0));
  }
  void block(const std::string& prefix, std::size_t d, std::size_t d_ff) {
    layer_norm(prefix + ".ln1", d);
    linear(prefix + ".attn.qkv", d, 3 * d);
    linear(prefix + ".attn.out", d, d);
    layer_norm(prefix + ".ln2", d);
    linear(prefix + ".mlp.fc", d, d_ff);
    linear(prefix + ".mlp.proj", d_ff, d);
  }
};

}  // namespace

void init_group(ParamStore& params, const ModelConfig& cfg, ParamGroup group,
                std::uint64_t seed) {
  const std::string prefix = group == ParamGroup::lm ? "lm." : group == ParamGroup::map ? "map." : "head.";
  for (auto it = params.begin(); it != params.end();) {
    it = starts_with(it->first, prefix) ? params.erase(it) : std::next(it);
  }
  Initializer init{params, seed, cfg.init_std};
  const std::size_t d = cfg.d_model;
  switch (group) {
    case ParamGroup::lm:
      init.normal("lm.tok_emb", {cfg.vocab_size, d});
      init.normal("lm.pos_emb", {cfg.max_positions, d});
      for (std::size_t i = 0; i < cfg.n_layers; ++i) {
        init.block("lm.blocks." + std::to_string(i), d, cfg.d_ff);
      }
      init.layer_norm("lm.ln_f", d);
      break;
    case ParamGroup::map:
      if (cfg.prefix_len == 0) break;
      if (cfg.mapping == MappingVariant::mlp) {
        init.linear("map.fc1", cfg.feature_dim, cfg.resolved_mapping_hidden());
        init.linear("map.fc2", cfg.resolved_mapping_hidden(), cfg.prefix_len * d);
      } else {
        init.linear("map.in", cfg.feature_dim, cfg.prefix_len * d);
        init.normal("map.const", {cfg.prefix_len, d});
        for (std::size_t i = 0; i < cfg.resolved_mapping_layers(); ++i) {
          init.block("map.blocks." + std::to_string(i), d, cfg.d_ff);
        }
      }
      break;
    case ParamGroup::head:
      init.linear("head", d, cfg.feature_dim);
      break;
  }
}

Model Model::init(const ModelConfig& config, const Vocab& vocab, VocabMode mode,
                  std::uint64_t seed) {
  Model m;
  m.config = config;
  m.config.vocab_size = vocab.size();
  m.config.validate();
  m.vocab = vocab;
  m.vocab_mode = mode;
  for (ParamGroup g : {ParamGroup::lm, ParamGroup::map, ParamGroup::head}) {
    init_group(m.params, m.config, g, seed);
  }
  return m;
}

Checkpoint Model::to_checkpoint() const {
  Checkpoint c;
  c.header = config.to_header();
  c.header["vocab"] = vocab.to_json();
  c.header["vocab_mode"] = to_string(vocab_mode);
  c.params = params;
  return c;
}

Model Model::from_checkpoint(const Checkpoint& ckpt) {
  Model m;
  m.config = ModelConfig::from_header(ckpt.header);
  auto vit = ckpt.header.find("vocab");
  if (vit == ckpt.header.end()) throw FormatError("checkpoint header lacks vocab");
  m.vocab = Vocab::from_json(vit->second);
  auto mit = ckpt.header.find("vocab_mode");
  m.vocab_mode = mit == ckpt.header.end() ? VocabMode::word : parse_vocab_mode(mit->second);
  if (m.vocab.size() != m.config.vocab_size) {
    throw FormatError("checkpoint vocab size does not match model.vocab_size");
  }
  m.config.validate();
  m.params = ckpt.params;
  return m;
}

namespace {

NodeId linear(Graph& g, const std::string& prefix, NodeId x) {
  return ops::add_bias(g, ops::matmul(g, x, g.param(prefix + ".w")), g.param(prefix + ".b"));
}

NodeId layer_norm(Graph& g, const std::string& prefix, NodeId x) {
  return ops::layer_norm(g, x, g.param(prefix + ".g"), g.param(prefix + ".b"));
}

NodeId maybe_dropout(Graph& g, NodeId x, const ModelConfig& cfg, const ForwardOptions& opts) {
  if (!opts.train || cfg.dropout == Real(0)) return x;
  if (opts.dropout_rng == nullptr) throw ContractViolation("dropout needs an rng stream");
  return ops::dropout(g, x, cfg.dropout, *opts.dropout_rng);
}

// Pre-LN transformer block over `batch` sequences of `seq` rows.
NodeId block(Graph& g, const std::string& p, NodeId x, std::size_t batch, std::size_t seq,
             bool causal, const ModelConfig& cfg, const ForwardOptions& opts) {
  NodeId h = layer_norm(g, p + ".ln1", x);
  h = ops::attention(g, linear(g, p + ".attn.qkv", h), batch, seq, cfg.n_heads, causal);
  h = maybe_dropout(g, linear(g, p + ".attn.out", h), cfg, opts);
  x = ops::add(g, x, h);
  h = layer_norm(g, p + ".ln2", x);
  h = ops::gelu(g, linear(g, p + ".mlp.fc", h));
  h = maybe_dropout(g, linear(g, p + ".mlp.proj", h), cfg, opts);
  return ops::add(g, x, h);
}

}  // namespace

NodeId map_features(Graph& g, const ModelConfig& cfg, NodeId features, const ForwardOptions& opts) {
  const Tensor& fv = g.value(features);
  if (cfg.prefix_len == 0) throw ContractViolation("map_features: prefix is disabled (l=0)");
  if (fv.cols() != cfg.feature_dim) {
    throw ContractViolation("map_features: feature dim " + std::to_string(fv.cols()) +
                            " != model feature_dim " + std::to_string(cfg.feature_dim));
  }
  const std::size_t B = fv.rows(), l = cfg.prefix_len, d = cfg.d_model;
  if (cfg.mapping == MappingVariant::mlp) {
    NodeId h = ops::tanh(g, linear(g, "map.fc1", features));
    return ops::reshape(g, linear(g, "map.fc2", h), {B * l, d});
  }
  // v is expanded to l slots; l learned constant vectors follow them.
  const NodeId slots = ops::reshape(g, linear(g, "map.in", features), {B * l, d});
  std::vector<std::size_t> const_idx, slot_rows, const_rows, out_rows;
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t i = 0; i < l; ++i) {
      const_idx.push_back(i);
      slot_rows.push_back(b * 2 * l + i);
      const_rows.push_back(b * 2 * l + l + i);
    }
  }
  const NodeId consts = ops::gather_rows(g, g.param("map.const"), const_idx);
  NodeId x = g.constant(Tensor({B * 2 * l, d}));
  x = ops::scatter_rows(g, x, slots, slot_rows);
  x = ops::scatter_rows(g, x, consts, const_rows);
  for (std::size_t i = 0; i < cfg.resolved_mapping_layers(); ++i) {
    x = block(g, "map.blocks." + std::to_string(i), x, B, 2 * l, false, cfg, opts);
  }
  return ops::gather_rows(g, x, slot_rows);
}

ForwardResult lm_forward(Graph& g, const ModelConfig& cfg, const Batch& batch,
                         const ForwardOptions& opts) {
  if (batch.prefix_len != cfg.prefix_len) {
    throw ContractViolation("lm_forward: batch laid out for prefix length " +
                            std::to_string(batch.prefix_len) + ", model uses " +
                            std::to_string(cfg.prefix_len));
  }
  for (std::size_t b = 0; b < batch.size; ++b) {
    if (batch.lengths[b] > cfg.max_positions) {
      throw LengthError("example '" + batch.ids[b] + "' needs " + std::to_string(batch.lengths[b]) +
                        " positions, model has " + std::to_string(cfg.max_positions));
    }
  }
  const std::size_t B = batch.size, T = batch.seq_len, l = cfg.prefix_len;
  ForwardResult res;
  NodeId x = ops::embedding(g, g.param("lm.tok_emb"), batch.input_ids);
  if (l > 0) {
    const NodeId prefix = map_features(g, cfg, g.constant(batch.features), opts);
    std::vector<std::size_t> rows;
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t p = 0; p < l; ++p) rows.push_back(b * T + p);
    }
    x = ops::scatter_rows(g, x, prefix, rows);
    res.prefix = prefix;
  }
  std::vector<std::int32_t> positions(B * T);
  for (std::size_t r = 0; r < B * T; ++r) positions[r] = static_cast<std::int32_t>(r % T);
  x = ops::add(g, x, ops::embedding(g, g.param("lm.pos_emb"), positions));
  x = maybe_dropout(g, x, cfg, opts);
  for (std::size_t i = 0; i < cfg.n_layers; ++i) {
    x = block(g, "lm.blocks." + std::to_string(i), x, B, T, true, cfg, opts);
  }
  res.hidden = layer_norm(g, "lm.ln_f", x);
  const NodeId head_in = opts.logit_rows ? ops::gather_rows(g, res.hidden, *opts.logit_rows)
                                         : res.hidden;
  res.logits = ops::matmul_nt(g, head_in, g.param("lm.tok_emb"));
  return res;
}

std::vector<std::size_t> target_rows(const Batch& batch) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < batch.roles.size(); ++r) {
    if (batch.roles[r] == RowRole::target) rows.push_back(r);
  }
  return rows;
}

NodeId sentence_rep(Graph& g, const ModelConfig& cfg, NodeId hidden, const Batch& batch) {
  const std::size_t B = batch.size, T = batch.seq_len;
  Tensor pool({B, B * T});
  for (std::size_t b = 0; b < B; ++b) {
    std::vector<std::size_t> rows;
    for (std::size_t t = 0; t < T; ++t) {
      if (batch.roles[b * T + t] == RowRole::target) rows.push_back(b * T + t);
    }
    if (rows.empty()) {
      throw ContractViolation("sentence_rep: example '" + batch.ids[b] + "' has no target rows");
    }
    if (cfg.pooling == Pooling::mean) {
      for (std::size_t r : rows) pool.at(b, r) = Real(1) / Real(rows.size());
    } else {
      pool.at(b, rows.back()) = Real(1);
    }
  }
  const NodeId pooled = ops::matmul(g, g.constant(std::move(pool)), hidden);
  return linear(g, "head", pooled);
}

Tensor eval_prefix(const Model& model, std::span<const Real> feature) {
  Graph g(model.params, nullptr, false);
  const NodeId f = g.constant(
      Tensor({1, feature.size()}, std::vector<Real>(feature.begin(), feature.end())));
  return g.value(map_features(g, model.config, f)).reshaped({model.config.prefix_len,
                                                              model.config.d_model});
}

Tensor eval_logits(const Model& model, const Batch& batch) {
  Graph g(model.params, nullptr, false);
  return g.value(lm_forward(g, model.config, batch).logits);
}

INLG_NAMESPACE_END
