// SPDX-License-Identifier: Apache-2.0
#include "inlg/metrics.hpp"

#include <set>
#include <sstream>

#include "json.hpp"

INLG_NAMESPACE_BEGIN

namespace {

std::size_t unique_ngrams(const TokenSeq& tokens, std::size_t n) {
  std::set<std::vector<std::string_view>> seen;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    seen.emplace(tokens.begin() + std::ptrdiff_t(i), tokens.begin() + std::ptrdiff_t(i + n));
  }
  return seen.size();
}

void require_n(std::size_t n) {
  if (n == 0) throw ContractViolation("n-gram order must be >= 1");
}

}  // namespace

Real rep_n(const TokenSeq& tokens, std::size_t n) {
  require_n(n);
  if (tokens.size() < n) return 0;
  const std::size_t total = tokens.size() - n + 1;
  return Real(1) - Real(unique_ngrams(tokens, n)) / Real(total);
}

Real diversity(const TokenSeq& tokens) {
  return (Real(1) - rep_n(tokens, 2)) * (Real(1) - rep_n(tokens, 3)) *
         (Real(1) - rep_n(tokens, 4));
}

DistinctDenominator parse_distinct_denominator(std::string_view s) {
  if (s == "tokens") return DistinctDenominator::tokens;
  if (s == "ngrams") return DistinctDenominator::ngrams;
  throw ConfigError("unknown distinct denominator '" + std::string(s) + "' (tokens|ngrams)");
}

std::string to_string(DistinctDenominator d) {
  return d == DistinctDenominator::tokens ? "tokens" : "ngrams";
}

std::optional<Real> distinct_n(const TokenSeq& tokens, std::size_t n, DistinctDenominator denom) {
  require_n(n);
  if (tokens.empty()) return std::nullopt;
  const std::size_t u = unique_ngrams(tokens, n);
  if (denom == DistinctDenominator::tokens) return Real(u) / Real(tokens.size());
  if (tokens.size() < n) return Real(0);
  return Real(u) / Real(tokens.size() - n + 1);
}

TextMetrics text_metrics(std::string id, const TokenSeq& tokens, DistinctDenominator denom) {
  TextMetrics m;
  m.id = std::move(id);
  m.tokens = tokens.size();
  m.rep_2 = rep_n(tokens, 2);
  m.rep_3 = rep_n(tokens, 3);
  m.rep_4 = rep_n(tokens, 4);
  m.diversity = (Real(1) - m.rep_2) * (Real(1) - m.rep_3) * (Real(1) - m.rep_4);
  m.distinct_2 = distinct_n(tokens, 2, denom);
  return m;
}

MetricsReport report(const std::vector<TextRecord>& texts, VocabMode mode,
                     DistinctDenominator denom) {
  MetricsReport r;
  r.mode = mode;
  r.denominator = denom;
  std::size_t distinct_count = 0;
  for (const auto& t : texts) {
    TextMetrics m = text_metrics(t.id, tokenize(t.text, mode), denom);
    r.tokens += m.tokens;
    r.rep_2 += m.rep_2;
    r.rep_3 += m.rep_3;
    r.rep_4 += m.rep_4;
    r.diversity += m.diversity;
    if (m.distinct_2) {
      r.distinct_2 += *m.distinct_2;
      ++distinct_count;
    } else {
      ++r.distinct_skipped;
    }
    r.per_text.push_back(std::move(m));
  }
  r.texts = texts.size();
  if (r.texts > 0) {
    const double n = double(r.texts);
    r.rep_2 /= n;
    r.rep_3 /= n;
    r.rep_4 /= n;
    r.diversity /= n;
  }
  if (distinct_count > 0) r.distinct_2 /= double(distinct_count);
  return r;
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["tokenization"] = to_string(mode);
  j["aggregation"] = "macro";
  j["distinct_denominator"] = to_string(denominator);
  j["texts"] = texts;
  j["tokens"] = tokens;
  j["rep_2"] = rep_2;
  j["rep_3"] = rep_3;
  j["rep_4"] = rep_4;
  j["diversity"] = diversity;
  j["distinct_2"] = distinct_2;
  j["distinct_2_skipped"] = distinct_skipped;
  return j.dump(2) + "\n";
}

std::string MetricsReport::to_csv() const {
  std::ostringstream out;
  out << "id,tokens,rep_2,rep_3,rep_4,diversity,distinct_2\n";
  for (const auto& m : per_text) {
    std::string id = m.id;
    if (id.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char c : id) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
      id = q + "\"";
    }
    out << id << ',' << m.tokens << ',' << m.rep_2 << ',' << m.rep_3 << ',' << m.rep_4 << ','
        << m.diversity << ',';
    if (m.distinct_2) out << *m.distinct_2;
    out << '\n';
  }
  return out.str();
}

std::vector<TextRecord> parse_text_records(const std::string& jsonl) {
  std::vector<TextRecord> out;
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
    if (!j.is_object()) {
      throw IngestError("line " + std::to_string(line_no) + ": expected a JSON object", line_no);
    }
    if (j.contains("error") && !j.contains("text")) continue;
    if (!j.contains("text") || !j["text"].is_string()) {
      throw IngestError("line " + std::to_string(line_no) + ": missing string field 'text'",
                        line_no);
    }
    TextRecord r;
    if (j.contains("id") && j["id"].is_string()) r.id = j["id"].get<std::string>();
    else r.id = std::to_string(line_no);
    r.text = j["text"].get<std::string>();
    out.push_back(std::move(r));
  }
  return out;
}

INLG_NAMESPACE_END
