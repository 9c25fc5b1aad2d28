// SPDX-License-Identifier: Apache-2.0
#include "inlg/training.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"

INLG_NAMESPACE_BEGIN

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(lr >= Real(0))) throw ConfigError("lr must be >= 0");
  contrastive.validate();
}

void PretrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(lr >= Real(0))) throw ConfigError("lr must be >= 0");
}

std::string to_json_line(const StepRecord& r) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["ep"] = r.epoch;
  j["teacher"] = printable(r.teacher);
  j["contrastive"] = r.contrastive ? nlohmann::ordered_json(printable(*r.contrastive)) : nullptr;
  j["lambda_effective"] = printable(r.lambda_effective);
  j["lr"] = printable(r.lr);
  return j.dump();
}

namespace {

struct LoopSettings {
  std::size_t epochs;
  std::size_t batch_size;
  Real grad_clip;
  LossReduction reduction;
  std::uint64_t seed;
  bool drop_last;
  LRSchedule schedule;
  AdamWConfig adam;
  std::optional<ContrastiveConfig> contrastive;  // nullopt: teacher forcing only
  Graph::TrainablePredicate trainable;
  Graph::TrainablePredicate phase1_trainable;  // overrides trainable before phase 2
};

std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) {
  Rng rng = Rng::for_stream(seed, "data/epoch" + std::to_string(epoch));
  return rng.next_u64();
}

std::vector<std::int32_t> labels_at(const Batch& batch, const std::vector<std::size_t>& rows) {
  std::vector<std::int32_t> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(batch.labels[r]);
  return out;
}

TrainResult train_loop(Model& model, const std::vector<Example>& train,
                       const std::vector<Example>* val, const LoopSettings& s,
                       const TrainHooks& hooks) {
  const ModelConfig& cfg = model.config;
  for (const auto& ex : train) {
    if (ex.feature.size() != cfg.feature_dim) {
      throw ContractViolation("example '" + ex.id + "' has feature dim " +
                              std::to_string(ex.feature.size()) + ", model expects " +
                              std::to_string(cfg.feature_dim));
    }
    if (ex.target_ids.empty()) throw ContractViolation("example '" + ex.id + "' has no target");
  }
  TrainResult result;
  OptimizerState opt;
  opt.config = s.adam;
  Rng dropout_rng = Rng::for_stream(s.seed, "dropout");
  double best = std::numeric_limits<double>::infinity();

  for (std::size_t ep = 0; ep < s.epochs; ++ep) {
    const bool contrastive_on = s.contrastive && contrastive_phase(ep, *s.contrastive);
    const Real lam = s.contrastive ? lambda_effective(ep, *s.contrastive) : Real(0);
    double teacher_sum = 0;
    std::size_t steps_this_epoch = 0;
    for (const auto& idx :
         plan_batches(train.size(), s.batch_size, epoch_seed(s.seed, ep), s.drop_last)) {
      const Batch batch = collate(train, idx, cfg.prefix_len);
      const bool phase1 = s.contrastive && !contrastive_phase(ep, *s.contrastive);
      Graph g(model.params, phase1 && s.phase1_trainable ? s.phase1_trainable : s.trainable);
      ForwardOptions fo;
      fo.train = true;
      fo.dropout_rng = &dropout_rng;
      fo.logit_rows = target_rows(batch);
      const ForwardResult fwd = lm_forward(g, cfg, batch, fo);
      const auto labels = labels_at(batch, *fo.logit_rows);
      const std::vector<std::uint8_t> mask(labels.size(), 1);
      const NodeId teacher = teacher_loss(g, fwd.logits, labels, mask, s.reduction);

      StepRecord rec;
      rec.step = result.steps;
      rec.epoch = ep;
      rec.teacher = g.value(teacher).item();
      rec.lambda_effective = lam;
      NodeId loss = teacher;
      if (contrastive_on) {
        const NodeId reps = sentence_rep(g, cfg, fwd.hidden, batch);
        if (auto c = contrastive_loss(g, g.constant(batch.features), reps, *s.contrastive)) {
          rec.contrastive = g.value(*c).item();
          if (lam > Real(0)) loss = ops::add(g, teacher, ops::scale(g, *c, lam));
        }
      }
      GradResult grads;
      try {
        grads = g.backward(loss);
      } catch (const NumericFault& e) {
        throw NumericFault("step " + std::to_string(result.steps) + " (epoch " +
                               std::to_string(ep) + "): " + e.what(),
                           e.node_id());
      }
      if (s.grad_clip > Real(0)) clip_grad_norm(grads.grads, grads.reached, s.grad_clip);
      rec.lr = s.schedule.lr_at(result.steps);
      if (!grads.reached.empty()) {
        optimizer_step(opt, model.params, grads.grads, rec.lr, grads.reached);
      }
      teacher_sum += double(rec.teacher);
      ++steps_this_epoch;
      ++result.steps;
      result.log.push_back(rec);
      if (hooks.on_step) hooks.on_step(rec);
    }
    EpochSummary summary;
    summary.epoch = ep;
    summary.train_teacher = steps_this_epoch ? teacher_sum / double(steps_this_epoch) : 0.0;
    if (val != nullptr && !val->empty()) {
      summary.val_ce = evaluate_perplexity(model, *val).mean_ce;
      if (*summary.val_ce < best) {
        best = *summary.val_ce;
        result.best_epoch = ep;
      }
    }
    result.epochs.push_back(summary);
    if (hooks.on_epoch) hooks.on_epoch(summary, model);
  }
  return result;
}

}  // namespace

TrainResult pretrain_mapping(Model& model, const std::vector<Example>& pairs,
                             const PretrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  if (model.config.prefix_len == 0) {
    throw ContractViolation("pretrain_mapping: model has no visual prefix (prefix_len=0)");
  }
  LoopSettings s{cfg.epochs,     cfg.batch_size, cfg.grad_clip, cfg.reduction,
                 cfg.seed,       false,          {cfg.lr, cfg.warmup_steps},
                 {},             std::nullopt,   nullptr, nullptr};
  s.adam.weight_decay = cfg.weight_decay;
  const bool tune_lm = cfg.tune_lm;
  s.trainable = [tune_lm](const std::string& name) {
    const ParamGroup grp = param_group(name);
    return grp == ParamGroup::map || (grp == ParamGroup::lm && tune_lm);
  };
  // captioning formulation: the prefix is the only conditioning
  std::vector<Example> captions = pairs;
  for (auto& ex : captions) ex.context_ids.clear();
  return train_loop(model, captions, nullptr, s, hooks);
}

TrainResult finetune(Model& model, const std::vector<Example>& train,
                     const std::vector<Example>* val, const TrainConfig& cfg,
                     const TrainHooks& hooks) {
  cfg.validate();
  LoopSettings s{cfg.epochs,   cfg.batch_size, cfg.grad_clip, cfg.reduction,
                 cfg.seed,     cfg.drop_last,  {cfg.lr, cfg.warmup_steps},
                 {},           cfg.contrastive, nullptr, nullptr};
  s.adam.weight_decay = cfg.weight_decay;
  const bool tune_lm = cfg.tune_lm, tune_map = cfg.tune_map;
  s.trainable = [tune_lm, tune_map](const std::string& name) {
    switch (param_group(name)) {
      case ParamGroup::lm: return tune_lm;
      case ParamGroup::map: return tune_map;
      case ParamGroup::head: return tune_lm || tune_map;
    }
    return false;
  };
  if (cfg.lm_phase2_only) {
    s.phase1_trainable = [tune_map](const std::string& name) {
      return param_group(name) == ParamGroup::map && tune_map;
    };
  }
  return train_loop(model, train, val, s, hooks);
}

Model prepare_finetune_model(const ModelConfig& config, const Vocab& vocab, VocabMode mode,
                             std::uint64_t seed, const Model* base, const Model* mapping,
                             bool pretrain_map) {
  if (pretrain_map && mapping == nullptr) {
    throw ConfigError("pretrain_map is set but no mapping checkpoint was supplied");
  }
  Model m = Model::init(config, vocab, mode, seed);
  auto copy_group = [&](const Model& src, ParamGroup grp, const char* what) {
    for (auto& [name, t] : m.params) {
      if (param_group(name) != grp) continue;
      auto it = src.params.find(name);
      if (it == src.params.end() || !it->second.same_shape(t)) {
        throw ConfigError(std::string(what) + " checkpoint is incompatible: parameter '" + name +
                          "' missing or mis-shaped");
      }
      t = it->second;
    }
  };
  if (base != nullptr) {
    if (!(base->vocab == vocab)) throw ConfigError("base checkpoint vocabulary differs");
    copy_group(*base, ParamGroup::lm, "base");
    bool has_head = base->params.contains("head.w");
    if (has_head) copy_group(*base, ParamGroup::head, "base");
  }
  if (pretrain_map) copy_group(*mapping, ParamGroup::map, "mapping");
  return m;
}

PerplexityReport evaluate_perplexity(const Model& model, const std::vector<Example>& examples,
                                     std::size_t batch_size) {
  if (examples.empty()) throw ContractViolation("evaluate_perplexity: empty corpus");
  double total = 0;
  std::size_t tokens = 0;
  for (const auto& idx : plan_batches(examples.size(), batch_size, 0, false, false)) {
    const Batch batch = collate(examples, idx, model.config.prefix_len);
    Graph g(model.params, nullptr, false);
    ForwardOptions fo;
    fo.logit_rows = target_rows(batch);
    const ForwardResult fwd = lm_forward(g, model.config, batch, fo);
    const auto labels = labels_at(batch, *fo.logit_rows);
    const std::vector<std::uint8_t> mask(labels.size(), 1);
    total += double(g.value(teacher_loss(g, fwd.logits, labels, mask, LossReduction::sum)).item());
    tokens += labels.size();
  }
  PerplexityReport r;
  r.tokens = tokens;
  r.mean_ce = total / double(tokens);
  r.perplexity = std::exp(r.mean_ce);
  return r;
}

AlignmentStats evaluate_alignment(const Model& model, const std::vector<Example>& examples) {
  std::vector<std::size_t> idx(examples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const Batch batch = collate(examples, idx, model.config.prefix_len);
  Graph g(model.params, nullptr, false);
  const ForwardResult fwd = lm_forward(g, model.config, batch);
  const NodeId reps = sentence_rep(g, model.config, fwd.hidden, batch);
  return alignment(batch.features, g.value(reps));
}

INLG_NAMESPACE_END
