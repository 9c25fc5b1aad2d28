// SPDX-License-Identifier: Apache-2.0
#include "inlg/diagnostics.hpp"

#include <algorithm>

INLG_NAMESPACE_BEGIN

TinySetup make_tiny_setup(std::uint64_t seed, MappingVariant mapping) {
  Vocab vocab;
  for (int i = 0; i < 16; ++i) vocab.add("w" + std::to_string(i));
  ModelConfig cfg;
  cfg.d_model = 16;
  cfg.n_layers = 2;
  cfg.n_heads = 2;
  cfg.d_ff = 32;
  cfg.max_positions = 32;
  cfg.prefix_len = 4;
  cfg.feature_dim = 8;
  cfg.mapping = mapping;
  if (mapping == MappingVariant::transformer) cfg.mapping_layers = 1;
  // larger than the default so activations are far from linear
  cfg.init_std = Real(0.3);
  TinySetup s{Model::init(cfg, vocab, VocabMode::word, seed), {}, {}};

  Rng rng = Rng::for_stream(seed, "tiny-data");
  auto word = [&] { return TokenId(Vocab::kReserved + rng.below(16)); };
  for (std::size_t b = 0; b < 4; ++b) {
    Example ex;
    ex.id = "tiny" + std::to_string(b);
    for (std::size_t i = 0, m = 1 + rng.below(3); i < m; ++i) ex.context_ids.push_back(word());
    for (std::size_t i = 0, n = 2 + rng.below(3); i < n; ++i) ex.target_ids.push_back(word());
    ex.target_ids.push_back(Vocab::kEos);
    for (std::size_t i = 0; i < cfg.feature_dim; ++i) ex.feature.push_back(Real(rng.normal()));
    s.examples.push_back(std::move(ex));
  }
  s.batch = collate(s.examples, {0, 1, 2, 3}, cfg.prefix_len);
  return s;
}

double TinyCheckReport::max_relative_error() const {
  double m = 0;
  for (const auto& [name, r] : checks) m = std::max(m, r.max_relative_error);
  return m;
}

TinyCheckReport check_tiny_model(std::uint64_t seed, Real eps, MappingVariant mapping) {
  const TinySetup s = make_tiny_setup(seed, mapping);
  const ModelConfig& cfg = s.model.config;
  const Batch& batch = s.batch;
  auto teacher = [&](Graph& g) {
    ForwardOptions fo;
    fo.logit_rows = target_rows(batch);
    const ForwardResult fwd = lm_forward(g, cfg, batch, fo);
    std::vector<std::int32_t> labels;
    for (std::size_t r : *fo.logit_rows) labels.push_back(batch.labels[r]);
    const std::vector<std::uint8_t> mask(labels.size(), 1);
    return teacher_loss(g, fwd.logits, labels, mask, LossReduction::mean);
  };
  auto contrastive = [&](DenominatorMode mode) {
    return [&, mode](Graph& g) {
      const ForwardResult fwd = lm_forward(g, cfg, batch);
      const NodeId reps = sentence_rep(g, cfg, fwd.hidden, batch);
      ContrastiveConfig cc;
      cc.tau = Real(0.5);
      cc.denominator = mode;
      return *contrastive_loss(g, g.constant(batch.features), reps, cc);
    };
  };
  TinyCheckReport rep;
  rep.checks.emplace_back("teacher", grad_check_store(teacher, s.model.params, eps));
  rep.checks.emplace_back("contrastive/standard",
                          grad_check_store(contrastive(DenominatorMode::standard),
                                           s.model.params, eps));
  rep.checks.emplace_back("contrastive/paper",
                          grad_check_store(contrastive(DenominatorMode::paper),
                                           s.model.params, eps));
  return rep;
}

INLG_NAMESPACE_END
