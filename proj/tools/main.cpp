// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "gradcheck_cmd.hpp"
#include "inlg/cli/commands.hpp"
#include "inlg/numcore/binary_io.hpp"

namespace {

using namespace inlg;

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kNumeric = 3;

/// Registers one string option per config key, plus --config.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "key=value config file")->check(CLI::ExistingFile);
    for (const auto& k : config_keys()) {
      CLI::Option* opt = app->add_option("--" + flag_name(k.name), values[k.name], k.help);
      if (k.type == KeyType::boolean) opt->expected(0, 1)->default_str("true");
      options[k.name] = opt;
    }
  }

  RunConfig resolve(Command cmd) const {
    KeyValues file;
    if (!config_file.empty()) file = parse_config_text(read_file_bytes(config_file));
    KeyValues flags;
    for (const auto& k : config_keys()) {
      const CLI::Option* opt = options.at(k.name);
      if (opt->count() == 0) continue;
      std::string v = values.at(k.name);
      if (k.type == KeyType::boolean && v.empty()) v = "true";
      flags.emplace_back(k.name, v);
    }
    return resolve_config(cmd, file, flags);
  }
};

int report_error(const std::string& kind, const std::exception& e, int code) {
  std::cerr << "inlg: " << kind << ": " << e.what() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"inlg: visually-guided text generation at desk scale"};
  app.require_subcommand(1);

  // make-synthetic
  auto* synth = app.add_subcommand("make-synthetic", "write a synthetic grounded world");
  SyntheticWorldSpec spec;
  std::string synth_out;
  std::uint64_t synth_seed = 0;
  synth->add_option("--out-dir", synth_out, "output directory")->required();
  synth->add_option("--seed", synth_seed, "generator seed")->required();
  synth->add_option("--train", spec.train_examples, "training examples");
  synth->add_option("--val", spec.val_examples, "validation examples");
  synth->add_option("--test", spec.test_examples, "test examples");
  synth->add_option("--captions", spec.caption_examples, "caption pairs for mapping pretraining");
  synth->add_option("--attributes", spec.num_attributes, "attribute vocabulary size");
  synth->add_option("--feature-dim", spec.feature_dim, "feature dimension");
  synth->add_option("--max-attributes", spec.max_attributes, "attributes per example");
  synth->add_option("--noise-std", spec.noise_std, "feature noise std");

  ConfigFlags pre_flags, train_flags, gen_flags;
  auto* pre = app.add_subcommand("pretrain-map", "pretrain the mapping network on captions");
  pre_flags.attach(pre);
  auto* train = app.add_subcommand("train", "few-shot finetuning with the two-phase objective");
  train_flags.attach(train);

  auto* gen = app.add_subcommand("generate", "beam-search generation from a checkpoint");
  gen_flags.attach(gen);
  GenerateJob job;
  gen->add_option("--ckpt", job.ckpt, "model checkpoint")->required();
  gen->add_option("--in", job.in, "input JSONL {id, context, feature_id|feature}")->required();
  gen->add_option("--out", job.out, "output JSONL")->required();
  gen->add_option("--threads", job.threads, "decoding threads");

  auto* ev = app.add_subcommand("eval-metrics", "rep-n, diversity and distinct-n of a corpus");
  MetricsJob mjob;
  std::string mode_str = "word", denom_str = "tokens";
  ev->add_option("--in", mjob.in, "JSONL {id, text}")->required();
  ev->add_option("--out", mjob.out, "report JSON")->required();
  ev->add_option("--csv", mjob.csv, "per-text CSV");
  ev->add_option("--mode", mode_str, "tokenization: word | char");
  ev->add_option("--distinct-denominator", denom_str, "tokens | ngrams");

  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of the training losses");
  std::string gc_model = "tiny", gc_mapping = "mlp";
  std::uint64_t gc_seed = 0;
  double gc_eps = 1e-4, gc_tol = 1e-3;
  gc->add_option("--model", gc_model, "model to check (tiny)")
      ->check(CLI::IsMember({"tiny"}));
  gc->add_option("--mapping", gc_mapping, "mlp | transformer");
  gc->add_option("--seed", gc_seed, "init seed");
  gc->add_option("--eps", gc_eps, "finite-difference step");
  gc->add_option("--tolerance", gc_tol, "failure threshold");

  auto* ins = app.add_subcommand("inspect-ckpt", "print a checkpoint's header and tensors");
  std::string ins_path;
  ins->add_option("ckpt", ins_path, "checkpoint path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*synth) {
      spec.validate();
      const SyntheticWorld world = gen_synthetic(spec, synth_seed);
      std::filesystem::create_directories(synth_out);
      write_synthetic(world, spec, synth_out);
      std::cout << "wrote " << world.train.size() << " train, " << world.val.size() << " val, "
                << world.test.size() << " test, " << world.captions.size() << " captions to "
                << synth_out << "\n";
    } else if (*pre) {
      const TrainResult r = run_pretrain(pre_flags.resolve(Command::pretrain));
      std::cout << "pretrain-map: " << r.steps << " steps\n";
    } else if (*train) {
      const TrainResult r = run_train(train_flags.resolve(Command::train));
      std::cout << "train: " << r.steps << " steps";
      if (r.best_epoch) {
        std::cout << ", best epoch " << *r.best_epoch << " val_ce "
                  << *r.epochs[*r.best_epoch].val_ce;
      }
      std::cout << "\n";
    } else if (*gen) {
      const std::size_t errors = run_generate(gen_flags.resolve(Command::generate), job);
      if (errors > 0) std::cerr << "inlg: " << errors << " example(s) could not be decoded\n";
    } else if (*ev) {
      mjob.mode = parse_vocab_mode(mode_str);
      mjob.denominator = parse_distinct_denominator(denom_str);
      const MetricsReport r = run_eval_metrics(mjob);
      std::cout << r.to_json();
    } else if (*gc) {
      const double err = run_tiny_gradcheck(gc_seed, gc_eps, gc_mapping, std::cout);
      if (!(err < gc_tol)) {
        std::cerr << "inlg: gradient check failed (" << err << " >= " << gc_tol << ")\n";
        return kNumeric;
      }
    } else if (*ins) {
      std::cout << describe_checkpoint(ins_path);
    }
  } catch (const NumericFault& e) {
    return report_error("numeric fault", e, kNumeric);
  } catch (const ConfigError& e) {
    return report_error("config", e, kUsage);
  } catch (const UsageError& e) {
    return report_error("usage", e, kUsage);
  } catch (const IoError& e) {
    return report_error("io", e, kUsage);
  } catch (const IngestError& e) {
    return report_error("input", e, kUsage);
  } catch (const FormatError& e) {
    return report_error("format", e, kUsage);
  } catch (const LengthError& e) {
    return report_error("length", e, kUsage);
  } catch (const ContractViolation& e) {
    return report_error("contract", e, kUsage);
  } catch (const std::exception& e) {
    return report_error("error", e, 1);
  }
  return kOk;
}
