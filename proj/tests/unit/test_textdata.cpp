// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "inlg/numcore/binary_io.hpp"
#include "inlg/textdata/batching.hpp"
#include "inlg/textdata/synthetic.hpp"

using namespace inlg;

TEST_SUITE("vocab") {
  TEST_CASE("reserved ids and lookup") {
    Vocab v;
    CHECK(v.size() == 4);
    CHECK(v.token(Vocab::kPad) == "<pad>");
    CHECK(v.id("<bos>") == Vocab::kBos);
    CHECK(v.id("<eos>") == Vocab::kEos);
    TokenId cat = v.add("cat");
    CHECK(cat == 4);
    CHECK(v.add("cat") == cat);
    CHECK(v.id("dog") == Vocab::kUnk);
  }

  TEST_CASE("tokenization modes") {
    CHECK(tokenize("  The Cat\tsat \n", VocabMode::word) ==
          std::vector<std::string>{"the", "cat", "sat"});
    auto chars = tokenize("a é", VocabMode::character);
    CHECK(chars == std::vector<std::string>{"a", " ", "é"});
    CHECK(detokenize({"a", "b"}, VocabMode::word) == "a b");
    CHECK(detokenize(chars, VocabMode::character) == "a é");
  }

  TEST_CASE("encode(decode(ids)) is the identity without UNK") {
    Vocab v;
    for (int i = 0; i < 30; ++i) v.add("t" + std::to_string(i));
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<TokenId> ids;
      for (std::size_t i = 0, n = rng.below(20); i < n; ++i)
        ids.push_back(TokenId(Vocab::kReserved + rng.below(30)));
      CHECK(v.encode(v.decode(ids)) == ids);
    }
  }

  TEST_CASE("serialization") {
    Vocab v;
    v.add("x");
    v.add("y z");
    CHECK(Vocab::from_json(v.to_json()) == v);
    Vocab w;
    w.add("alpha");
    w.add("beta");
    CHECK(Vocab::from_lines(w.to_lines()) == w);
  }
}

TEST_SUITE("features") {
  TEST_CASE("3x4 round trip") {
    FeatureTable t(4);
    t.add("a", {1, 2, 3, 4});
    t.add("b", {0.5f, -1, 1e-30f, 7});
    t.add("c", {0, 0, 0, 0});
    const std::string bytes = t.encode();
    CHECK(bytes.substr(0, 8) == "INLGFEAT");
    FeatureTable back = FeatureTable::decode(bytes);
    CHECK(back == t);
    CHECK(back.encode() == bytes);
    CHECK(back.ids() == std::vector<std::string>{"a", "b", "c"});
  }

  TEST_CASE("contract and format errors") {
    FeatureTable t(3);
    CHECK_THROWS_AS(t.add("a", {1, 2}), ContractViolation);
    t.add("a", {1, 2, 3});
    CHECK_THROWS_AS(t.add("a", {1, 2, 3}), ContractViolation);
    std::string bytes = t.encode();
    CHECK_THROWS_AS(FeatureTable::decode(bytes.substr(0, bytes.size() - 4)), FormatError);
    std::string magic = bytes;
    magic[3] = '?';
    CHECK_THROWS_AS(FeatureTable::decode(magic), FormatError);

    // a header promising dim 512 followed by a 511-float row
    ByteWriter w;
    w.bytes("INLGFEAT");
    w.u16(1);
    w.u32(1);
    w.u32(512);
    w.u16(1);
    w.bytes("r");
    for (int i = 0; i < 511; ++i) w.f32(1.0f);
    CHECK_THROWS_AS(FeatureTable::decode(w.buffer()), FormatError);
  }

  TEST_CASE("10000-row fuzz round trip through a file") {
    Rng rng(10);
    FeatureTable t(6);
    for (int i = 0; i < 10000; ++i) {
      std::vector<Real> row(6);
      for (auto& v : row) v = Real(rng.normal() * 100);
      t.add("id" + std::to_string(i), row);
    }
    auto dir = testing::temp_dir("features");
    write_features(t, (dir / "f.inlgfeat").string());
    FeatureTable back = read_features((dir / "f.inlgfeat").string());
    CHECK(back == t);
    CHECK(read_file_bytes((dir / "f.inlgfeat").string()) == t.encode());
  }
}

TEST_SUITE("corpus") {
  TEST_CASE("token counts") {
    LoadOptions opts;
    Corpus c = parse_corpus(
        R"({"id":"a","context":"live show .","target":"tim was in the play .","feature":[1,0]})",
        opts);
    REQUIRE(c.examples.size() == 1);
    CHECK(c.examples[0].context_ids.size() == 3);
    CHECK(c.examples[0].target_ids.size() == 7);
    CHECK(c.examples[0].target_ids.back() == Vocab::kEos);
    CHECK(c.feature_dim == 2);
  }

  TEST_CASE("ingest errors") {
    LoadOptions opts;
    auto line_of = [&](const std::string& text) -> std::size_t {
      try {
        parse_corpus(text, opts);
      } catch (const IngestError& e) {
        return e.line();
      }
      return 0;
    };
    const std::string good = R"({"id":"a","context":"x","target":"y","feature":[1]})";
    CHECK(line_of(good + "\n{oops\n") == 2);
    CHECK(line_of(R"({"id":"a","target":"","feature":[1]})") == 1);
    CHECK(line_of(good + "\n" + R"({"id":"b","target":"y","feature":[1,2]})") == 2);
    FeatureTable ft(1);
    ft.add("known", {1});
    opts.features = &ft;
    CHECK_THROWS_AS(parse_corpus(R"({"id":"a","target":"y","feature_id":"missing"})", opts),
                    DanglingReference);
    CHECK(parse_corpus(R"({"id":"a","target":"y","feature_id":"known"})", opts)
              .examples[0].feature == std::vector<Real>{1});
  }

  TEST_CASE("supplied vocabulary maps unseen words to UNK") {
    Vocab v;
    v.add("known");
    LoadOptions opts;
    opts.vocab = &v;
    Corpus c = parse_corpus(R"({"id":"a","context":"known novel","target":"known","feature":[1]})",
                            opts);
    CHECK(c.examples[0].context_ids == std::vector<TokenId>{4, Vocab::kUnk});
    CHECK(c.vocab == v);
  }

  TEST_CASE("story-shaped corpus round-trips") {
    const std::string title = "Live Show. Tim was in his school's play.";
    const std::string story =
        "He was nervous. He practiced hard. On stage he forgot a line. The crowd cheered anyway.";
    const std::string line = R"({"id":"s1","context":")" + title + R"(","target":")" + story +
                             R"(","feature":[0.1,0.2]})";
    LoadOptions opts;
    opts.mode = VocabMode::character;
    Corpus c = parse_corpus(line, opts);
    const Example& ex = c.examples[0];
    CHECK(detokenize(c.vocab.decode(ex.context_ids), VocabMode::character) == title);
    CHECK(detokenize(c.vocab.decode(ex.target_ids), VocabMode::character) == story);
    // word mode normalizes case and spacing, then is lossless
    opts.mode = VocabMode::word;
    Corpus w = parse_corpus(line, opts);
    CHECK(detokenize(w.vocab.decode(w.examples[0].context_ids), VocabMode::word) ==
          "live show. tim was in his school's play.");
  }
}

TEST_SUITE("batching") {
  std::vector<Example> toy(std::size_t n) {
    std::vector<Example> out;
    for (std::size_t i = 0; i < n; ++i) {
      Example e;
      e.id = "e" + std::to_string(i);
      e.context_ids.assign(1 + i % 3, TokenId(10 + i));
      e.target_ids.assign(1 + i % 4, TokenId(20 + i));
      e.target_ids.push_back(Vocab::kEos);
      e.feature = {Real(i), 1};
      out.push_back(e);
    }
    return out;
  }

  TEST_CASE("batch sizes and determinism") {
    auto plan = plan_batches(10, 8, 5, false);
    REQUIRE(plan.size() == 2);
    CHECK(plan[0].size() == 8);
    CHECK(plan[1].size() == 2);
    CHECK(plan_batches(10, 8, 5, false) == plan);
    CHECK(plan_batches(10, 8, 5, true).size() == 1);
    CHECK(plan_batches(10, 8, 6, false) != plan);
  }

  TEST_CASE("batches partition the epoch") {
    auto ex = toy(23);
    std::multiset<std::string> ids;
    for (const auto& b : make_batches(ex, 4, 1, false, 2)) ids.insert(b.ids.begin(), b.ids.end());
    std::multiset<std::string> want;
    for (const auto& e : ex) want.insert(e.id);
    CHECK(ids == want);
  }

  TEST_CASE("row roles for m=3, n=4, l=20") {
    Example e;
    e.id = "x";
    e.context_ids = {5, 6, 7};
    e.target_ids = {8, 9, 10, Vocab::kEos};
    e.feature = {1};
    Example f = e;
    f.context_ids = {5};
    f.target_ids = {8, Vocab::kEos};
    Batch b = collate({e, f}, {0, 1}, 20);
    CHECK(b.seq_len == 20 + 3 + 4);
    std::size_t targets0 = 0;
    for (std::size_t r = 0; r < b.seq_len; ++r) targets0 += b.is_target(r);
    CHECK(targets0 == 4);
    CHECK(b.count(RowRole::prefix) == 40);
    CHECK(b.count(RowRole::context) == 3 + 1);
    CHECK(b.count(RowRole::target) == 4 + 2);
    CHECK(b.count(RowRole::pad) == b.size * b.seq_len - 40 - 4 - 6);
    // target rows predict y_1..y_n in order
    std::vector<TokenId> labels;
    for (std::size_t r = 0; r < b.seq_len; ++r)
      if (b.is_target(r)) labels.push_back(b.labels[r]);
    CHECK(labels == e.target_ids);
    CHECK(b.input_ids[20] == Vocab::kBos);
    CHECK(b.input_ids[27 + 20] == Vocab::kBos);
  }

  TEST_CASE("prefix and context rows never carry target roles (l=2)") {
    Example e;
    e.id = "x";
    e.context_ids = {5, 6, 7};
    e.target_ids = {8, 9, 10, Vocab::kEos};
    e.feature = {1};
    Batch b = collate({e}, {0}, 2);
    for (std::size_t r = 0; r < 2 + 3; ++r) CHECK_FALSE(b.is_target(r));
    for (std::size_t r = 5; r < 9; ++r) CHECK(b.is_target(r));
  }
}

TEST_SUITE("synthetic") {
  TEST_CASE("noiseless features are exact attribute indicators") {
    SyntheticWorldSpec spec;
    spec.noise_std = 0;
    spec.train_examples = 50;
    spec.val_examples = 0;
    spec.caption_examples = 0;
    SyntheticWorld w = gen_synthetic(spec, 4);
    for (const auto& r : w.train) {
      const auto& f = w.features.at(r.feature_id);
      std::size_t ones = 0;
      for (std::size_t i = 0; i < f.size(); ++i) {
        bool on = std::find(r.attributes.begin(), r.attributes.end(), i) != r.attributes.end();
        CHECK(f[i] == (on ? 1.0f : 0.0f));
        ones += on;
      }
      CHECK(ones == r.attributes.size());
      CHECK(r.context == spec.context);
      // oracle lookup from the feature recovers the target exactly
      CHECK(oracle_target_from_feature(spec, f) == r.target);
    }
  }

  TEST_CASE("generation is byte-identical for a fixed seed") {
    SyntheticWorldSpec spec;
    spec.train_examples = 20;
    spec.val_examples = 5;
    spec.caption_examples = 5;
    auto d1 = testing::temp_dir("syn1"), d2 = testing::temp_dir("syn2");
    write_synthetic(gen_synthetic(spec, 9), spec, d1.string());
    write_synthetic(gen_synthetic(spec, 9), spec, d2.string());
    for (const char* f : {"train.jsonl", "val.jsonl", "captions.jsonl", "features.inlgfeat",
                          "vocab.txt"}) {
      CHECK(read_file_bytes((d1 / f).string()) == read_file_bytes((d2 / f).string()));
    }
    SyntheticWorld other = gen_synthetic(spec, 10);
    CHECK(other.train[0].target != gen_synthetic(spec, 9).train[0].target);
  }

  TEST_CASE("invalid specs") {
    SyntheticWorldSpec spec;
    spec.num_attributes = 20;
    spec.feature_dim = 16;
    CHECK_THROWS(spec.validate());
    SyntheticWorldSpec neg;
    neg.noise_std = -1;
    CHECK_THROWS(neg.validate());
  }
}
