// SPDX-License-Identifier: Apache-2.0
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "inlg/cli/commands.hpp"
#include "inlg/numcore/checkpoint.hpp"

using namespace inlg;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(INLG_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path make_world(const std::string& name) {
  fs::path dir = testing::temp_dir(name);
  SyntheticWorldSpec spec;
  spec.num_attributes = 5;
  spec.feature_dim = 6;
  spec.train_examples = 24;
  spec.val_examples = 8;
  spec.caption_examples = 16;
  write_synthetic(gen_synthetic(spec, 3), spec, dir.string());
  return dir;
}

KeyValues small_run(const fs::path& world, const fs::path& run) {
  return {{"seed", "5"},
          {"train", (world / "train.jsonl").string()},
          {"val", (world / "val.jsonl").string()},
          {"features", (world / "features.inlgfeat").string()},
          {"run_dir", run.string()},
          {"d_model", "16"},
          {"n_heads", "2"},
          {"n_layers", "1"},
          {"d_ff", "32"},
          {"max_positions", "48"},
          {"prefix_len", "3"},
          {"mapping", "mlp"},
          {"epochs", "3"},
          {"batch_size", "8"},
          {"warmup_steps", "2"},
          {"n_no_contra", "1"}};
}

}  // namespace

TEST_CASE("layer precedence: flag over file over default") {
  RunConfig d = resolve_config(Command::train, {}, {});
  CHECK(d.entry("tau").source == Source::default_value);
  RunConfig f = resolve_config(Command::train, {{"tau", "0.3"}}, {});
  CHECK(f.real("tau") == doctest::Approx(0.3));
  CHECK(f.entry("tau").source == Source::file);
  RunConfig g = resolve_config(Command::train, {{"tau", "0.3"}}, {{"tau", "0.7"}, {"seed", "1"}});
  CHECK(g.real("tau") == doctest::Approx(0.7));
  CHECK(g.entry("tau").source == Source::flag);
  CHECK(g.train_config().contrastive.tau == doctest::Approx(0.7));
}

TEST_CASE("presets expand in place and explicit keys win") {
  RunConfig rc = resolve_config(Command::train, {{"task_preset", "story"}, {"paper_hparams", "true"}},
                                {{"batch_size", "4"}});
  CHECK(rc.size("n_no_contra") == 15);
  CHECK(rc.real("lambda") == doctest::Approx(0.2));
  CHECK(rc.size("max_len") == 150);
  CHECK(rc.entry("lambda").via == "task_preset=story");
  CHECK(rc.size("prefix_len") == 20);
  CHECK(rc.size("mapping_layers") == 8);
  CHECK(rc.real("lr") == doctest::Approx(2e-5));
  CHECK(rc.entry("lr").via == "paper_hparams");
  CHECK(rc.size("batch_size") == 4);
  CHECK(rc.entry("batch_size").source == Source::flag);
  RunConfig p = resolve_config(Command::pretrain, {{"paper_hparams", "true"}}, {});
  CHECK(p.size("batch_size") == 128);
  CHECK(p.size("warmup_steps") == 5000);
  CHECK_THROWS_AS(resolve_config(Command::train, {{"task_preset", "poem"}}, {}), ConfigError);
}

TEST_CASE("config text and snapshots") {
  KeyValues kv = parse_config_text("# comment\nseed = 3\ntrain=a#b.jsonl  # trailing\n\n");
  REQUIRE(kv.size() == 2);
  CHECK(kv[1].second == "a#b.jsonl");
  CHECK_THROWS_AS(parse_config_text("no_such_key=1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("seed\n"), ConfigError);
  CHECK_THROWS_AS(resolve_config(Command::train, {}, {{"epochs", "many"}}), ConfigError);
  CHECK_THROWS_AS(resolve_config(Command::train, {}, {}).seed(), ConfigError);

  RunConfig rc = resolve_config(Command::train, {{"task_preset", "concept"}}, {{"seed", "4"}});
  const std::string snap = rc.snapshot();
  CHECK(snap.find("lambda=1.5  # file via task_preset=concept") != std::string::npos);
  CHECK(snap.find("seed=4  # flag") != std::string::npos);
  RunConfig again = resolve_config(Command::train, parse_config_text(snap), {});
  for (const auto& [k, e] : rc.entries) CHECK(again.str(k) == e.value);
  CHECK(flag_name("n_no_contra") == "n-no-contra");
}

TEST_CASE("train run layout and snapshot replay") {
  const fs::path world = make_world("cli-world");
  const fs::path run1 = testing::temp_dir("cli-run1"), run2 = testing::temp_dir("cli-run2");
  RunConfig rc = resolve_config(Command::train, {}, small_run(world, run1));
  TrainResult r = run_train(rc);
  CHECK(r.steps == 9);
  for (const char* f : {"train.log.jsonl", "epochs.jsonl", "config.snapshot", "best.inlgckpt",
                        "ckpt/ep000.inlgckpt", "ckpt/ep002.inlgckpt"})
    CHECK_MESSAGE(fs::exists(run1 / f), f);

  KeyValues replay = parse_config_text(slurp(run1 / "config.snapshot"));
  RunConfig rc2 = resolve_config(Command::train, replay, {{"run_dir", run2.string()}});
  run_train(rc2);
  CHECK(slurp(run1 / "train.log.jsonl") == slurp(run2 / "train.log.jsonl"));
  CHECK(slurp(run1 / "ckpt/ep002.inlgckpt") == slurp(run2 / "ckpt/ep002.inlgckpt"));

  // generation from the best checkpoint
  RunConfig gen = resolve_config(Command::generate, {},
                                 {{"features", (world / "features.inlgfeat").string()},
                                  {"beam", "2"},
                                  {"max_len", "5"}});
  GenerateJob job{(run1 / "best.inlgckpt").string(), (world / "val.jsonl").string(),
                  (run1 / "gen.jsonl").string(), 2};
  CHECK(run_generate(gen, job) == 0);
  std::istringstream lines(slurp(run1 / "gen.jsonl"));
  std::size_t n = 0;
  for (std::string line; std::getline(lines, line);) ++n;
  CHECK(n == 8);
  CHECK(describe_checkpoint((run1 / "best.inlgckpt").string()).find("model.d_model") !=
        std::string::npos);

  MetricsJob mj{(run1 / "gen.jsonl").string(), (run1 / "metrics.json").string(),
                (run1 / "metrics.csv").string()};
  MetricsReport mr = run_eval_metrics(mj);
  CHECK(mr.texts == 8);
  CHECK(fs::exists(run1 / "metrics.csv"));
}

TEST_CASE("pretraining then fine-tuning from the mapping checkpoint") {
  const fs::path world = make_world("cli-world2");
  const fs::path pre = testing::temp_dir("cli-pre"), run = testing::temp_dir("cli-ft");
  KeyValues pk = small_run(world, pre);
  for (auto& [k, v] : pk)
    if (k == "train") v = (world / "captions.jsonl").string();
  pk.push_back({"tune_lm", "false"});
  pk.push_back({"vocab_file", (world / "vocab.txt").string()});
  run_pretrain(resolve_config(Command::pretrain, {}, pk));
  REQUIRE(fs::exists(pre / "mapping.inlgckpt"));
  KeyValues tk = small_run(world, run);
  tk.push_back({"vocab_file", (world / "vocab.txt").string()});
  tk.push_back({"pretrain_map", "true"});
  CHECK_THROWS_AS(run_train(resolve_config(Command::train, {}, tk)), ConfigError);
  tk.push_back({"map_ckpt", (pre / "mapping.inlgckpt").string()});
  CHECK(run_train(resolve_config(Command::train, {}, tk)).steps == 9);
}

TEST_CASE("binary exit codes") {
  const fs::path dir = testing::temp_dir("cli-exit");
  {
    std::ofstream(dir / "empty.jsonl");
  }
  CHECK(run_cli("eval-metrics --in " + (dir / "empty.jsonl").string() + " --out " +
                (dir / "m.json").string()) == 2);
  CHECK_FALSE(fs::exists(dir / "m.json"));
  CHECK(run_cli("train --epochs 1") == 2);                 // missing seed
  CHECK(run_cli("train --seed 1 --no-such-flag 3") == 2);  // parse error
  CHECK(run_cli("inspect-ckpt " + (dir / "missing.inlgckpt").string()) == 2);
  CHECK(run_cli("gradcheck --model tiny --seed 0") == 0);
  CHECK(run_cli("gradcheck --model tiny --seed 0 --tolerance 1e-12") == 3);
  CHECK(run_cli("make-synthetic --out-dir " + (dir / "w").string() +
                " --seed 2 --train 16 --val 4 --captions 8") == 0);
  CHECK(fs::exists(dir / "w" / "features.inlgfeat"));
}
