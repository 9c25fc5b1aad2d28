// SPDX-License-Identifier: Apache-2.0
#include "inlg/cli/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "inlg/numcore/binary_io.hpp"
#include "json.hpp"

INLG_NAMESPACE_BEGIN

namespace fs = std::filesystem;

namespace {

std::string require_path(const RunConfig& rc, const std::string& key) {
  if (!rc.has(key)) throw UsageError("--" + flag_name(key) + " is required");
  return rc.str(key);
}

std::string epoch_name(std::size_t ep) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ep%03zu.inlgckpt", ep);
  return buf;
}

class LineSink {
 public:
  explicit LineSink(const fs::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot write " + path.string());
  }
  void write(const std::string& line) {
    out_ << line << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

struct Inputs {
  std::optional<FeatureTable> features;
  std::optional<Model> base;
  std::optional<Model> mapping;
  Vocab vocab;
  VocabMode mode = VocabMode::word;
  Corpus train;
  std::optional<Corpus> val;
};

/// Loads features, source checkpoints, the vocabulary and the corpora.
Inputs load_inputs(const RunConfig& rc, bool with_val) {
  Inputs in;
  if (rc.has("features")) in.features = read_features(rc.str("features"));
  if (rc.has("init_ckpt")) in.base = Model::from_checkpoint(load_checkpoint(rc.str("init_ckpt")));
  if (rc.has("map_ckpt")) in.mapping = Model::from_checkpoint(load_checkpoint(rc.str("map_ckpt")));

  bool have_vocab = true;
  if (in.base) {
    in.vocab = in.base->vocab;
    in.mode = in.base->vocab_mode;
  } else {
    in.mode = parse_vocab_mode(rc.str("vocab_mode"));
    if (rc.has("vocab_file")) in.vocab = Vocab::from_lines(read_file_bytes(rc.str("vocab_file")));
    else have_vocab = false;
  }
  LoadOptions opts;
  opts.mode = in.mode;
  opts.features = in.features ? &*in.features : nullptr;
  opts.vocab = have_vocab ? &in.vocab : nullptr;
  in.train = load_corpus(require_path(rc, "train"), opts);
  if (in.train.examples.empty()) throw UsageError("training corpus is empty");
  in.vocab = in.train.vocab;
  if (with_val && rc.has("val")) {
    opts.vocab = &in.vocab;
    in.val = load_corpus(rc.str("val"), opts);
  }
  return in;
}

ModelConfig resolve_model_config(const RunConfig& rc, const Inputs& in) {
  ModelConfig cfg = in.base ? in.base->config : rc.model_config(in.train.feature_dim);
  if (cfg.feature_dim != in.train.feature_dim) {
    throw ContractViolation("corpus feature dim " + std::to_string(in.train.feature_dim) +
                            " != model feature_dim " + std::to_string(cfg.feature_dim));
  }
  cfg.vocab_size = in.vocab.size();
  cfg.validate();
  return cfg;
}

}  // namespace

void prepare_run_dir(const RunConfig& rc) {
  const fs::path dir = require_path(rc, "run_dir");
  fs::create_directories(dir / "ckpt");
  write_file_bytes((dir / "config.snapshot").string(), rc.snapshot());
}

TrainResult run_pretrain(const RunConfig& rc) {
  const PretrainConfig pc = rc.pretrain_config();
  require_path(rc, "train");
  prepare_run_dir(rc);
  const fs::path dir = rc.str("run_dir");
  Inputs in = load_inputs(rc, false);
  const ModelConfig cfg = resolve_model_config(rc, in);
  Model model = in.base ? *in.base : Model::init(cfg, in.vocab, in.mode, pc.seed);

  LineSink log(dir / "train.log.jsonl");
  TrainHooks hooks;
  hooks.on_step = [&](const StepRecord& r) { log.write(to_json_line(r)); };
  hooks.on_epoch = [&](const EpochSummary& s, const Model& m) {
    save_checkpoint(m.to_checkpoint(), (dir / "ckpt" / epoch_name(s.epoch)).string());
  };
  TrainResult res = pretrain_mapping(model, in.train.examples, pc, hooks);
  save_checkpoint(model.to_checkpoint(), (dir / "mapping.inlgckpt").string());
  return res;
}

TrainResult run_train(const RunConfig& rc) {
  const TrainConfig tc = rc.train_config();
  require_path(rc, "train");
  if (tc.pretrain_map && !rc.has("map_ckpt")) {
    throw ConfigError("pretrain_map=true needs --map-ckpt");
  }
  prepare_run_dir(rc);
  const fs::path dir = rc.str("run_dir");
  Inputs in = load_inputs(rc, true);
  const ModelConfig cfg = resolve_model_config(rc, in);
  Model model = prepare_finetune_model(cfg, in.vocab, in.mode, tc.seed,
                                       in.base ? &*in.base : nullptr,
                                       in.mapping ? &*in.mapping : nullptr, tc.pretrain_map);

  LineSink log(dir / "train.log.jsonl");
  LineSink epochs(dir / "epochs.jsonl");
  std::optional<double> best;
  TrainHooks hooks;
  hooks.on_step = [&](const StepRecord& r) { log.write(to_json_line(r)); };
  hooks.on_epoch = [&](const EpochSummary& s, const Model& m) {
    const Checkpoint ck = m.to_checkpoint();
    save_checkpoint(ck, (dir / "ckpt" / epoch_name(s.epoch)).string());
    nlohmann::ordered_json j;
    j["ep"] = s.epoch;
    j["train_teacher"] = s.train_teacher;
    j["val_ce"] = s.val_ce ? nlohmann::ordered_json(*s.val_ce) : nullptr;
    epochs.write(j.dump());
    if (s.val_ce && (!best || *s.val_ce < *best)) {
      best = s.val_ce;
      save_checkpoint(ck, (dir / "best.inlgckpt").string());
    }
  };
  const std::vector<Example>* val = in.val ? &in.val->examples : nullptr;
  return finetune(model, in.train.examples, val, tc, hooks);
}

std::size_t run_generate(const RunConfig& rc, const GenerateJob& job) {
  if (job.ckpt.empty()) throw UsageError("--ckpt is required");
  if (job.in.empty()) throw UsageError("--in is required");
  if (job.out.empty()) throw UsageError("--out is required");
  const DecodeConfig dc = rc.decode_config();
  const Model model = Model::from_checkpoint(load_checkpoint(job.ckpt));
  std::optional<FeatureTable> features;
  if (rc.has("features")) features = read_features(rc.str("features"));
  const auto inputs = parse_generation_inputs(read_file_bytes(job.in), model.vocab,
                                              model.vocab_mode, features ? &*features : nullptr);
  const auto records = generate(model, inputs, dc, job.threads);
  std::string out;
  std::size_t errors = 0;
  for (const auto& r : records) {
    out += to_json_line(r) + "\n";
    if (r.error) ++errors;
  }
  write_file_bytes(job.out, out);
  return errors;
}

MetricsReport run_eval_metrics(const MetricsJob& job) {
  if (job.in.empty()) throw UsageError("--in is required");
  const auto texts = parse_text_records(read_file_bytes(job.in));
  if (texts.empty()) throw UsageError("no texts in " + job.in);
  MetricsReport rep = report(texts, job.mode, job.denominator);
  if (!job.out.empty()) write_file_bytes(job.out, rep.to_json());
  if (!job.csv.empty()) write_file_bytes(job.csv, rep.to_csv());
  return rep;
}

std::string describe_checkpoint(const std::string& path) {
  const Checkpoint ck = load_checkpoint(path);
  std::ostringstream out;
  out << "version " << Checkpoint::kVersion << "\n";
  for (const auto& [k, v] : ck.header) {
    if (k == "vocab") {
      out << k << " = [" << Vocab::from_json(v).size() << " tokens]\n";
    } else {
      out << k << " = " << v << "\n";
    }
  }
  std::size_t total = 0;
  for (const auto& [name, t] : ck.params) {
    out << "  " << name << " " << shape_str(t.shape()) << "\n";
    total += t.size();
  }
  out << ck.params.size() << " tensors, " << total << " parameters\n";
  return out.str();
}

INLG_NAMESPACE_END
