// SPDX-License-Identifier: Apache-2.0
#include "inlg/decoding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "json.hpp"

INLG_NAMESPACE_BEGIN

void DecodeConfig::validate() const {
  if (beam_width == 0) throw ConfigError("beam_width must be >= 1");
  if (max_output_len == 0) throw ConfigError("max_output_len must be >= 1");
  if (!(alpha >= Real(0))) throw ConfigError("alpha must be >= 0");
}

Real hypothesis_score(Real logprob, std::size_t length, Real alpha) {
  if (alpha > Real(0) && length > 0) return logprob / std::pow(Real(length), alpha);
  return logprob;
}

ModelScorer::ModelScorer(const Model& model, std::vector<Real> feature,
                         std::vector<TokenId> context)
    : model_(model), feature_(std::move(feature)), context_(std::move(context)) {}

std::size_t ModelScorer::vocab_size() const { return model_.config.vocab_size; }

std::vector<std::vector<Real>> ModelScorer::next_logprobs(
    const std::vector<std::vector<TokenId>>& hyps) {
  std::vector<Example> examples(hyps.size());
  std::vector<std::size_t> idx(hyps.size());
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    examples[i].id = "hyp" + std::to_string(i);
    examples[i].context_ids = context_;
    examples[i].target_ids = hyps[i];
    examples[i].target_ids.push_back(Vocab::kPad);  // placeholder for the predicted slot
    examples[i].feature = feature_;
    idx[i] = i;
  }
  const Batch batch = collate(examples, idx, model_.config.prefix_len);
  std::vector<std::size_t> rows(hyps.size());
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    rows[i] = i * batch.seq_len + batch.lengths[i] - 1;
  }
  Graph g(model_.params, nullptr, false);
  ForwardOptions fo;
  fo.logit_rows = rows;
  const Tensor& logits = g.value(lm_forward(g, model_.config, batch, fo).logits);
  std::vector<std::vector<Real>> out(hyps.size());
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    auto row = logits.row(i);
    Real mx = *std::max_element(row.begin(), row.end());
    double z = 0;
    for (Real v : row) z += std::exp(double(v - mx));
    const Real lz = mx + Real(std::log(z));
    out[i].resize(row.size());
    for (std::size_t t = 0; t < row.size(); ++t) out[i][t] = row[t] - lz;
  }
  return out;
}

namespace {

struct Candidate {
  Real logprob;
  TokenId token;
  std::size_t parent;
};

struct Ranked {
  Hypothesis hyp;
  std::size_t order;
};

}  // namespace

std::vector<Hypothesis> beam_search(StepScorer& scorer, const DecodeConfig& cfg) {
  cfg.validate();
  const std::size_t w = cfg.beam_width;
  std::vector<Hypothesis> live(1);
  std::vector<Ranked> done;
  std::size_t serial = 0;
  auto nth_best_done = [&](std::size_t n) {
    std::vector<Real> s;
    for (const auto& r : done) s.push_back(r.hyp.score);
    std::nth_element(s.begin(), s.begin() + (n - 1), s.end(), std::greater<>());
    return s[n - 1];
  };

  for (std::size_t step = 0; step < cfg.max_output_len && !live.empty(); ++step) {
    std::vector<std::vector<TokenId>> prefixes;
    for (const auto& h : live) prefixes.push_back(h.tokens);
    const auto lp = scorer.next_logprobs(prefixes);
    std::vector<Candidate> cands;
    cands.reserve(live.size() * scorer.vocab_size());
    for (std::size_t i = 0; i < live.size(); ++i) {
      for (std::size_t t = 0; t < lp[i].size(); ++t) {
        cands.push_back({live[i].logprob + lp[i][t], TokenId(t), i});
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      if (a.logprob != b.logprob) return a.logprob > b.logprob;
      if (a.token != b.token) return a.token < b.token;
      return a.parent < b.parent;
    });
    const bool last = step + 1 == cfg.max_output_len;
    std::vector<Hypothesis> next;
    std::size_t kept = 0;  // live beams plus forced finishes on the last step
    for (const auto& c : cands) {
      if (kept == w || !std::isfinite(c.logprob)) break;
      Hypothesis h;
      h.tokens = live[c.parent].tokens;
      h.tokens.push_back(c.token);
      h.logprob = c.logprob;
      if (c.token == cfg.eos_id || last) {
        h.finished = c.token == cfg.eos_id;
        h.score = hypothesis_score(h.logprob, h.tokens.size(), cfg.alpha);
        if (!h.finished) ++kept;
        done.push_back({std::move(h), serial++});
      } else {
        next.push_back(std::move(h));
        ++kept;
      }
    }
    if (last) break;
    live = std::move(next);
    // with raw log-prob scoring, extensions can only lose probability
    if (cfg.alpha == Real(0) && done.size() >= w && !live.empty()) {
      Real best_live = live.front().logprob;
      for (const auto& h : live) best_live = std::max(best_live, h.logprob);
      if (nth_best_done(w) >= best_live) break;
    }
  }
  std::sort(done.begin(), done.end(), [](const Ranked& a, const Ranked& b) {
    if (a.hyp.score != b.hyp.score) return a.hyp.score > b.hyp.score;
    return a.order < b.order;
  });
  std::vector<Hypothesis> out;
  for (std::size_t i = 0; i < done.size() && i < w; ++i) out.push_back(std::move(done[i].hyp));
  return out;
}

Hypothesis greedy(StepScorer& scorer, const DecodeConfig& cfg) {
  cfg.validate();
  Hypothesis h;
  while (h.tokens.size() < cfg.max_output_len) {
    const auto lp = scorer.next_logprobs({h.tokens}).front();
    const auto best = std::max_element(lp.begin(), lp.end());  // first max: lowest id
    h.tokens.push_back(TokenId(best - lp.begin()));
    h.logprob += *best;
    if (h.tokens.back() == cfg.eos_id) {
      h.finished = true;
      break;
    }
  }
  h.score = hypothesis_score(h.logprob, h.tokens.size(), cfg.alpha);
  return h;
}

namespace {

void check_lengths(const Model& model, const std::vector<Real>& feature,
                   const std::vector<TokenId>& context, const DecodeConfig& cfg) {
  const auto& mc = model.config;
  if (feature.size() != mc.feature_dim) {
    throw ContractViolation("feature dim " + std::to_string(feature.size()) +
                            " != model feature_dim " + std::to_string(mc.feature_dim));
  }
  const std::size_t need = mc.prefix_len + context.size() + cfg.max_output_len;
  if (need > mc.max_positions) {
    throw LengthError("prefix (" + std::to_string(mc.prefix_len) + ") + context (" +
                      std::to_string(context.size()) + ") + max_output_len (" +
                      std::to_string(cfg.max_output_len) + ") = " + std::to_string(need) +
                      " exceeds max_positions " + std::to_string(mc.max_positions));
  }
}

}  // namespace

std::vector<Hypothesis> beam_search(const Model& model, const std::vector<Real>& feature,
                                    const std::vector<TokenId>& context,
                                    const DecodeConfig& cfg) {
  check_lengths(model, feature, context, cfg);
  ModelScorer scorer(model, feature, context);
  return beam_search(scorer, cfg);
}

Hypothesis greedy(const Model& model, const std::vector<Real>& feature,
                  const std::vector<TokenId>& context, const DecodeConfig& cfg) {
  check_lengths(model, feature, context, cfg);
  ModelScorer scorer(model, feature, context);
  return greedy(scorer, cfg);
}

std::string to_json_line(const GenerationRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  if (r.error) {
    j["error"] = *r.error;
  } else {
    j["text"] = r.text;
    j["logprob"] = printable(r.logprob);
    j["finished"] = r.finished;
  }
  return j.dump();
}

std::vector<GenerationInput> parse_generation_inputs(const std::string& jsonl, const Vocab& vocab,
                                                     VocabMode mode,
                                                     const FeatureTable* features) {
  std::vector<GenerationInput> out;
  std::istringstream in(jsonl);
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& msg) {
      return IngestError("line " + std::to_string(line_no) + ": " + msg, line_no);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw fail(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) {
      throw fail("expected an object with a string 'id'");
    }
    GenerationInput g;
    g.id = j["id"].get<std::string>();
    if (j.contains("context")) {
      if (!j["context"].is_string()) throw fail("'context' must be a string");
      g.context_ids = vocab.encode(tokenize(j["context"].get<std::string>(), mode));
    }
    if (j.contains("feature") && j["feature"].is_array()) {
      std::vector<Real> f;
      for (const auto& v : j["feature"]) f.push_back(v.get<Real>());
      g.feature = std::move(f);
    } else if (j.contains("feature_id") && j["feature_id"].is_string()) {
      const std::string fid = j["feature_id"].get<std::string>();
      if (features != nullptr && features->contains(fid)) {
        g.feature = features->at(fid);
      } else {
        g.error = "feature_id '" + fid + "' not found";
      }
    } else {
      g.error = "no feature or feature_id";
    }
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<GenerationRecord> generate(const Model& model,
                                       const std::vector<GenerationInput>& inputs,
                                       const DecodeConfig& cfg, std::size_t threads) {
  cfg.validate();
  std::vector<GenerationRecord> out(inputs.size());
  auto run_one = [&](std::size_t i) {
    const auto& in = inputs[i];
    GenerationRecord& r = out[i];
    r.id = in.id;
    if (!in.error.empty() || !in.feature) {
      r.error = in.error.empty() ? "no feature" : in.error;
      return;
    }
    try {
      const auto hyps = beam_search(model, *in.feature, in.context_ids, cfg);
      const Hypothesis& best = hyps.front();
      r.text = detokenize(model.vocab.decode(best.tokens), model.vocab_mode);
      r.logprob = best.logprob;
      r.finished = best.finished;
    } catch (const ContractViolation& e) {
      r.error = e.what();
    } catch (const LengthError& e) {
      r.error = e.what();
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, inputs.size()));
  if (threads == 1) {
    for (std::size_t i = 0; i < inputs.size(); ++i) run_one(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < inputs.size(); i = next++) run_one(i);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

INLG_NAMESPACE_END
