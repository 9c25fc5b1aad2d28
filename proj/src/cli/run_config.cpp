// SPDX-License-Identifier: Apache-2.0
#include "inlg/cli/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

INLG_NAMESPACE_BEGIN

std::string to_string(Source s) {
  switch (s) {
    case Source::default_value: return "default";
    case Source::file: return "file";
    case Source::flag: return "flag";
  }
  return "?";
}

const std::vector<KeySpec>& config_keys() {
  using K = KeyType;
  static const std::vector<KeySpec> keys = {
      {"seed", K::integer, "root seed (required for training)"},
      {"task_preset", K::text, "completion | story | concept"},
      {"paper_hparams", K::boolean, "apply the paper's few-shot hyperparameters"},
      // data
      {"train", K::text, "training JSONL"},
      {"val", K::text, "validation JSONL"},
      {"features", K::text, "feature file (.inlgfeat)"},
      {"vocab_file", K::text, "vocabulary file, one token per line"},
      {"vocab_mode", K::text, "word | char"},
      {"init_ckpt", K::text, "checkpoint supplying the LM"},
      {"map_ckpt", K::text, "checkpoint supplying the pretrained mapping network"},
      {"run_dir", K::text, "output directory for the run"},
      // model
      {"d_model", K::integer, "model width"},
      {"n_layers", K::integer, "decoder layers"},
      {"n_heads", K::integer, "attention heads"},
      {"d_ff", K::integer, "feed-forward width"},
      {"max_positions", K::integer, "longest sequence the LM accepts"},
      {"prefix_len", K::integer, "visual prefix length l (0 = text only)"},
      {"mapping", K::text, "mlp | transformer"},
      {"mapping_layers", K::integer, "mapping depth (0 = variant default)"},
      {"mapping_hidden", K::integer, "MLP hidden width (0 = l*d/2)"},
      {"dropout", K::real, "dropout probability"},
      {"pooling", K::text, "sentence pooling: mean | last"},
      {"init_std", K::real, "initialization std"},
      // optimization
      {"epochs", K::integer, "training epochs"},
      {"batch_size", K::integer, "examples per step"},
      {"lr", K::real, "peak learning rate"},
      {"weight_decay", K::real, "decoupled weight decay"},
      {"warmup_steps", K::integer, "linear warmup steps"},
      {"grad_clip", K::real, "global gradient norm clip (0 = off)"},
      {"loss_reduction", K::text, "mean | sum over target tokens"},
      {"drop_last", K::boolean, "drop the last partial batch"},
      {"tune_lm", K::boolean, "update the LM"},
      {"tune_map", K::boolean, "update the mapping network"},
      {"pretrain_map", K::boolean, "start from the pretrained mapping network"},
      {"lm_phase2_only", K::boolean, "freeze the LM until the contrastive phase"},
      // objective
      {"tau", K::real, "InfoNCE temperature"},
      {"lambda", K::real, "contrastive weight"},
      {"n_no_contra", K::integer, "teacher-only epochs before the contrastive term"},
      {"contrastive_denominator", K::text, "standard | paper"},
      // decoding
      {"beam", K::integer, "beam width"},
      {"max_len", K::integer, "maximum output tokens"},
      {"alpha", K::real, "length normalization exponent"},
  };
  return keys;
}

const KeySpec* find_key(const std::string& name) {
  for (const auto& k : config_keys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

std::string flag_name(const std::string& key) {
  std::string f = key;
  std::replace(f.begin(), f.end(), '_', '-');
  return f;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<bool> parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  return std::nullopt;
}

void check_value(const KeySpec& k, const std::string& v) {
  auto bad = [&](const char* what) {
    return ConfigError("key '" + k.name + "': '" + v + "' is not " + what);
  };
  switch (k.type) {
    case KeyType::integer: {
      if (v.empty() && k.name == "seed") return;
      std::uint64_t x = 0;
      auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
      if (ec != std::errc() || p != v.data() + v.size()) throw bad("a non-negative integer");
      return;
    }
    case KeyType::real: {
      double x = 0;
      auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
      if (ec != std::errc() || p != v.data() + v.size()) throw bad("a number");
      return;
    }
    case KeyType::boolean:
      if (!parse_bool(v)) throw bad("a boolean");
      return;
    case KeyType::text: return;
  }
}

KeyValues defaults_for(Command cmd) {
  KeyValues d = {
      {"seed", ""},          {"task_preset", ""},        {"paper_hparams", "false"},
      {"train", ""},         {"val", ""},                {"features", ""},
      {"vocab_file", ""},    {"vocab_mode", "word"},     {"init_ckpt", ""},
      {"map_ckpt", ""},      {"run_dir", ""},            {"d_model", "64"},
      {"n_layers", "2"},     {"n_heads", "4"},           {"d_ff", "256"},
      {"max_positions", "256"}, {"prefix_len", "20"},    {"mapping", "transformer"},
      {"mapping_layers", "0"}, {"mapping_hidden", "0"},  {"dropout", "0"},
      {"pooling", "mean"},   {"init_std", "0.02"},       {"epochs", "20"},
      {"batch_size", "8"},   {"lr", "0.001"},            {"weight_decay", "0.01"},
      {"warmup_steps", "400"}, {"grad_clip", "1"},       {"loss_reduction", "mean"},
      {"drop_last", "false"}, {"tune_lm", "true"},       {"tune_map", "true"},
      {"pretrain_map", "false"}, {"lm_phase2_only", "false"}, {"tau", "0.1"},
      {"lambda", "1"},       {"n_no_contra", "10"},      {"contrastive_denominator", "standard"},
      {"beam", "10"},        {"max_len", "100"},         {"alpha", "0"},
  };
  if (cmd == Command::pretrain) {
    // desk-scale mapping pretraining
    for (auto& [k, v] : d) {
      if (k == "epochs") v = "5";
      if (k == "batch_size") v = "16";
      if (k == "warmup_steps") v = "50";
    }
  }
  return d;
}

}  // namespace

KeyValues parse_config_text(const std::string& text) {
  KeyValues out;
  std::istringstream in(text);
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '#' && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (find_key(key) == nullptr) {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    out.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return out;
}

KeyValues task_preset_values(const std::string& preset) {
  if (preset == "completion") return {{"n_no_contra", "10"}, {"lambda", "1"}, {"max_len", "100"}};
  if (preset == "story") return {{"n_no_contra", "15"}, {"lambda", "0.2"}, {"max_len", "150"}};
  if (preset == "concept") return {{"n_no_contra", "4"}, {"lambda", "1.5"}, {"max_len", "64"}};
  throw ConfigError("unknown task preset '" + preset + "' (completion|story|concept)");
}

KeyValues paper_hparam_values(Command cmd) {
  KeyValues common = {{"prefix_len", "20"},     {"mapping", "transformer"},
                      {"mapping_layers", "8"}, {"weight_decay", "0.01"},
                      {"beam", "10"}};
  if (cmd == Command::pretrain) {
    common.insert(common.end(), {{"epochs", "5"}, {"batch_size", "128"},
                                 {"warmup_steps", "5000"}, {"lr", "0.00002"}});
  } else {
    common.insert(common.end(), {{"epochs", "20"}, {"batch_size", "8"},
                                 {"warmup_steps", "400"}, {"lr", "0.00002"}});
  }
  return common;
}

const ConfigEntry& RunConfig::entry(const std::string& key) const {
  auto it = entries.find(key);
  if (it == entries.end()) throw ContractViolation("unknown config key '" + key + "'");
  return it->second;
}

std::size_t RunConfig::size(const std::string& key) const { return std::size_t(u64(key)); }

std::uint64_t RunConfig::u64(const std::string& key) const {
  const std::string& v = str(key);
  std::uint64_t x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("key '" + key + "' needs an integer value");
  }
  return x;
}

Real RunConfig::real(const std::string& key) const {
  const std::string& v = str(key);
  double x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("key '" + key + "' needs a numeric value");
  }
  return Real(x);
}

bool RunConfig::flag(const std::string& key) const {
  auto b = parse_bool(str(key));
  if (!b) throw ConfigError("key '" + key + "' needs a boolean value");
  return *b;
}

std::uint64_t RunConfig::seed() const {
  if (!has("seed")) throw ConfigError("--seed is required (no implicit entropy)");
  return u64("seed");
}

std::string RunConfig::snapshot() const {
  std::ostringstream out;
  out << "# inlg resolved configuration\n";
  for (const auto& k : config_keys()) {
    const ConfigEntry& e = entry(k.name);
    out << k.name << '=' << e.value << "  # " << to_string(e.source);
    if (!e.via.empty()) out << " via " << e.via;
    out << '\n';
  }
  return out.str();
}

ModelConfig RunConfig::model_config(std::size_t feature_dim) const {
  ModelConfig m;
  m.d_model = size("d_model");
  m.n_layers = size("n_layers");
  m.n_heads = size("n_heads");
  m.d_ff = size("d_ff");
  m.max_positions = size("max_positions");
  m.prefix_len = size("prefix_len");
  m.feature_dim = feature_dim;
  m.mapping = parse_mapping_variant(str("mapping"));
  m.mapping_layers = size("mapping_layers");
  m.mapping_hidden = size("mapping_hidden");
  m.dropout = real("dropout");
  m.pooling = parse_pooling(str("pooling"));
  m.init_std = real("init_std");
  return m;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.epochs = size("epochs");
  t.batch_size = size("batch_size");
  t.lr = real("lr");
  t.weight_decay = real("weight_decay");
  t.warmup_steps = size("warmup_steps");
  t.grad_clip = real("grad_clip");
  t.reduction = parse_loss_reduction(str("loss_reduction"));
  t.seed = seed();
  t.drop_last = flag("drop_last");
  t.tune_lm = flag("tune_lm");
  t.tune_map = flag("tune_map");
  t.pretrain_map = flag("pretrain_map");
  t.lm_phase2_only = flag("lm_phase2_only");
  t.contrastive.tau = real("tau");
  t.contrastive.lambda = real("lambda");
  t.contrastive.n_no_contra = size("n_no_contra");
  t.contrastive.denominator = parse_denominator_mode(str("contrastive_denominator"));
  t.validate();
  return t;
}

PretrainConfig RunConfig::pretrain_config() const {
  PretrainConfig p;
  p.epochs = size("epochs");
  p.batch_size = size("batch_size");
  p.lr = real("lr");
  p.weight_decay = real("weight_decay");
  p.warmup_steps = size("warmup_steps");
  p.grad_clip = real("grad_clip");
  p.reduction = parse_loss_reduction(str("loss_reduction"));
  p.seed = seed();
  p.tune_lm = flag("tune_lm");
  p.validate();
  return p;
}

DecodeConfig RunConfig::decode_config() const {
  DecodeConfig d;
  d.beam_width = size("beam");
  d.max_output_len = size("max_len");
  d.alpha = real("alpha");
  d.validate();
  return d;
}

RunConfig resolve_config(Command cmd, const KeyValues& file, const KeyValues& flags) {
  RunConfig rc;
  rc.command = cmd;
  for (const auto& [k, v] : defaults_for(cmd)) rc.entries[k] = {v, Source::default_value, ""};

  auto apply_layer = [&](const KeyValues& layer, Source src) {
    for (const auto& [k, v] : layer) {
      const KeySpec* spec = find_key(k);
      if (spec == nullptr) throw ConfigError("unknown key '" + k + "'");
      check_value(*spec, v);
    }
    auto last = [&](const std::string& key) -> std::optional<std::string> {
      std::optional<std::string> out;
      for (const auto& [k, v] : layer) {
        if (k == key) out = v;
      }
      return out;
    };
    if (auto preset = last("task_preset"); preset && !preset->empty()) {
      for (const auto& [k, v] : task_preset_values(*preset)) {
        rc.entries[k] = {v, src, "task_preset=" + *preset};
      }
    }
    if (auto paper = last("paper_hparams"); paper && *parse_bool(*paper)) {
      for (const auto& [k, v] : paper_hparam_values(cmd)) {
        rc.entries[k] = {v, src, "paper_hparams"};
      }
    }
    for (const auto& [k, v] : layer) rc.entries[k] = {v, src, ""};
  };
  apply_layer(file, Source::file);
  apply_layer(flags, Source::flag);
  return rc;
}

INLG_NAMESPACE_END
