// SPDX-License-Identifier: Apache-2.0
#include "inlg/textdata/synthetic.hpp"

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "inlg/numcore/binary_io.hpp"
#include "inlg/numcore/rng.hpp"
#include "json.hpp"

INLG_NAMESPACE_BEGIN

namespace {

const char* const kAttributeNames[] = {"red",     "blue",    "green",  "yellow",
                                       "small",   "large",   "round",  "square",
                                       "striped", "spotted", "wooden", "metal",
                                       "shiny",   "dull",    "soft",   "hard"};

std::string render(const std::string& lead, const std::vector<std::string>& words,
                   const std::vector<std::size_t>& attrs, const std::string& tail) {
  std::string out = lead;
  for (std::size_t a : attrs) {
    if (!out.empty()) out += ' ';
    out += words[a];
  }
  if (!tail.empty()) out += (out.empty() ? "" : " ") + tail;
  return out;
}

}  // namespace

void SyntheticWorldSpec::validate() const {
  if (num_attributes == 0) throw ConfigError("synthetic world needs at least one attribute");
  if (num_attributes > feature_dim) {
    throw ConfigError("num_attributes (" + std::to_string(num_attributes) +
                      ") must not exceed feature_dim (" + std::to_string(feature_dim) + ")");
  }
  if (max_attributes == 0 || max_attributes > num_attributes) {
    throw ConfigError("max_attributes must be in [1, num_attributes]");
  }
  if (!(noise_std >= 0)) throw ConfigError("noise_std must be >= 0");
}

std::vector<std::string> SyntheticWorldSpec::attribute_words() const {
  std::vector<std::string> words;
  for (std::size_t i = 0; i < num_attributes; ++i) {
    words.push_back(i < std::size(kAttributeNames) ? kAttributeNames[i]
                                                   : "attr" + std::to_string(i));
  }
  return words;
}

SyntheticWorld gen_synthetic(const SyntheticWorldSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng = Rng::for_stream(seed, "synthetic");
  const auto words = spec.attribute_words();
  SyntheticWorld world{{}, {}, {}, {}, FeatureTable(spec.feature_dim), Vocab()};

  auto draw = [&](const std::string& id, bool caption) {
    const std::size_t count = 1 + static_cast<std::size_t>(rng.below(spec.max_attributes));
    std::vector<std::size_t> pool(spec.num_attributes);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    std::vector<std::size_t> attrs(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count));
    std::sort(attrs.begin(), attrs.end());

    std::vector<Real> feature(spec.feature_dim, Real(0));
    for (std::size_t a : attrs) feature[a] = Real(1);
    if (spec.noise_std > 0) {
      for (Real& v : feature) v += static_cast<Real>(spec.noise_std * rng.normal());
    }
    world.features.add(id, std::move(feature));

    SyntheticRecord rec;
    rec.id = id;
    rec.feature_id = id;
    rec.attributes = attrs;
    if (caption) {
      rec.target = render("", words, attrs, spec.caption_tail);
    } else {
      rec.context = spec.context;
      rec.target = render(spec.target_lead, words, attrs, spec.target_tail);
    }
    return rec;
  };

  auto make_split = [&](const char* name, std::size_t n, bool caption) {
    std::vector<SyntheticRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%s-%05zu", name, i);
      out.push_back(draw(buf, caption));
    }
    return out;
  };
  world.train = make_split("train", spec.train_examples, false);
  world.val = make_split("val", spec.val_examples, false);
  world.test = make_split("test", spec.test_examples, false);
  world.captions = make_split("cap", spec.caption_examples, true);

  for (const std::string& text :
       {spec.context, spec.target_lead, spec.target_tail, spec.caption_tail}) {
    for (const auto& t : tokenize(text, VocabMode::word)) world.vocab.add(t);
  }
  for (const auto& w : words) world.vocab.add(w);
  return world;
}

void write_synthetic(const SyntheticWorld& world, const SyntheticWorldSpec& spec,
                     const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto write_split = [&](const char* name, const std::vector<SyntheticRecord>& recs) {
    std::string out;
    for (const auto& r : recs) {
      nlohmann::ordered_json j;
      j["id"] = r.id;
      j["context"] = r.context;
      j["target"] = r.target;
      j["feature_id"] = r.feature_id;
      out += j.dump() + "\n";
    }
    write_file_bytes(dir + "/" + name + ".jsonl", out);
  };
  write_split("train", world.train);
  write_split("val", world.val);
  if (!world.test.empty()) write_split("test", world.test);
  write_split("captions", world.captions);
  write_features(world.features, dir + "/features.inlgfeat");
  write_file_bytes(dir + "/vocab.txt", world.vocab.to_lines());

  std::ostringstream ws;
  ws << "num_attributes=" << spec.num_attributes << "\n"
     << "feature_dim=" << spec.feature_dim << "\n"
     << "max_attributes=" << spec.max_attributes << "\n"
     << "noise_std=" << spec.noise_std << "\n"
     << "train_examples=" << spec.train_examples << "\n"
     << "val_examples=" << spec.val_examples << "\n"
     << "test_examples=" << spec.test_examples << "\n"
     << "caption_examples=" << spec.caption_examples << "\n";
  write_file_bytes(dir + "/world.txt", ws.str());
}

std::string oracle_target_from_feature(const SyntheticWorldSpec& spec,
                                       const std::vector<Real>& feature) {
  const auto words = spec.attribute_words();
  std::vector<std::size_t> attrs;
  for (std::size_t a = 0; a < spec.num_attributes && a < feature.size(); ++a) {
    if (feature[a] > Real(0.5)) attrs.push_back(a);
  }
  return render(spec.target_lead, words, attrs, spec.target_tail);
}

INLG_NAMESPACE_END
