// SPDX-License-Identifier: Apache-2.0
#include "inlg/textdata/corpus.hpp"

#include <sstream>

#include "inlg/numcore/binary_io.hpp"
#include "json.hpp"

INLG_NAMESPACE_BEGIN

namespace {

struct RawLine {
  std::size_t line_no;
  std::string id;
  std::vector<std::string> context;
  std::vector<std::string> target;
  std::vector<Real> feature;
};

}  // namespace

Corpus parse_corpus(const std::string& jsonl, const LoadOptions& opts) {
  std::vector<RawLine> raw;
  std::istringstream in(jsonl);
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw IngestError("line " + std::to_string(line_no) + ": malformed JSON: " + e.what(),
                        line_no);
    }
    auto fail = [&](const std::string& msg) -> IngestError {
      return IngestError("line " + std::to_string(line_no) + ": " + msg, line_no);
    };
    if (!j.is_object()) throw fail("expected a JSON object");
    if (!j.contains("id") || !j["id"].is_string()) throw fail("missing string field 'id'");
    RawLine r{line_no, j["id"].get<std::string>(), {}, {}, {}};
    if (j.contains("context")) {
      if (!j["context"].is_string()) throw fail("'context' must be a string");
      r.context = tokenize(j["context"].get<std::string>(), opts.mode);
    }
    if (j.contains("target")) {
      if (!j["target"].is_string()) throw fail("'target' must be a string");
      r.target = tokenize(j["target"].get<std::string>(), opts.mode);
      if (r.target.empty()) throw fail("empty target for '" + r.id + "'");
    } else if (opts.require_target) {
      throw fail("missing field 'target'");
    }
    if (j.contains("feature")) {
      if (!j["feature"].is_array()) throw fail("'feature' must be an array");
      for (const auto& v : j["feature"]) {
        if (!v.is_number()) throw fail("'feature' entries must be numbers");
        r.feature.push_back(v.get<Real>());
      }
    } else if (j.contains("feature_id")) {
      const std::string fid = j["feature_id"].get<std::string>();
      if (opts.features == nullptr || !opts.features->contains(fid)) {
        throw DanglingReference("line " + std::to_string(line_no) + ": feature_id '" + fid +
                                    "' not found in feature table",
                                line_no);
      }
      r.feature = opts.features->at(fid);
    } else {
      throw fail("needs 'feature' or 'feature_id'");
    }
    if (r.feature.empty()) throw fail("empty feature vector");
    raw.push_back(std::move(r));
  }

  Corpus corpus;
  corpus.mode = opts.mode;
  if (opts.vocab != nullptr) {
    corpus.vocab = *opts.vocab;
  } else {
    for (const auto& r : raw) {
      for (const auto& t : r.context) corpus.vocab.add(t);
      for (const auto& t : r.target) corpus.vocab.add(t);
    }
  }
  for (auto& r : raw) {
    if (corpus.feature_dim == 0) corpus.feature_dim = r.feature.size();
    if (r.feature.size() != corpus.feature_dim) {
      throw IngestError("line " + std::to_string(r.line_no) + ": feature dim " +
                            std::to_string(r.feature.size()) + " != corpus dim " +
                            std::to_string(corpus.feature_dim),
                        r.line_no);
    }
    Example ex;
    ex.id = std::move(r.id);
    ex.context_ids = corpus.vocab.encode(r.context);
    if (!r.target.empty()) {
      ex.target_ids = corpus.vocab.encode(r.target);
      ex.target_ids.push_back(Vocab::kEos);
    }
    ex.feature = std::move(r.feature);
    corpus.examples.push_back(std::move(ex));
  }
  return corpus;
}

Corpus load_corpus(const std::string& path, const LoadOptions& opts) {
  return parse_corpus(read_file_bytes(path), opts);
}

INLG_NAMESPACE_END
