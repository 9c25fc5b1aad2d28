// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "inlg/textdata/vocab.hpp"

INLG_NAMESPACE_BEGIN

using TokenSeq = std::vector<std::string>;

/// 1 - unique/total over n-grams; 0 when the text has fewer than n tokens.
Real rep_n(const TokenSeq& tokens, std::size_t n);

/// (1 - rep_2)(1 - rep_3)(1 - rep_4).
Real diversity(const TokenSeq& tokens);

enum class DistinctDenominator { tokens, ngrams };
DistinctDenominator parse_distinct_denominator(std::string_view s);
std::string to_string(DistinctDenominator d);

/// Unique n-grams divided by the token count (or by the n-gram count).
/// Undefined (nullopt) for an empty text.
std::optional<Real> distinct_n(const TokenSeq& tokens, std::size_t n,
                               DistinctDenominator denom = DistinctDenominator::tokens);

struct TextMetrics {
  std::string id;
  std::size_t tokens = 0;
  Real rep_2 = 0, rep_3 = 0, rep_4 = 0;
  Real diversity = 1;
  std::optional<Real> distinct_2;
};

TextMetrics text_metrics(std::string id, const TokenSeq& tokens,
                         DistinctDenominator denom = DistinctDenominator::tokens);

struct MetricsReport {
  VocabMode mode = VocabMode::word;
  DistinctDenominator denominator = DistinctDenominator::tokens;
  std::size_t texts = 0;
  std::size_t tokens = 0;
  std::size_t distinct_skipped = 0;
  // macro averages over texts; distinct_2 over texts where it is defined
  double rep_2 = 0, rep_3 = 0, rep_4 = 0;
  double diversity = 0;
  double distinct_2 = 0;
  std::vector<TextMetrics> per_text;

  std::string to_json() const;
  std::string to_csv() const;
};

struct TextRecord {
  std::string id;
  std::string text;
};

MetricsReport report(const std::vector<TextRecord>& texts, VocabMode mode,
                     DistinctDenominator denom = DistinctDenominator::tokens);

/// Reads {"id","text"} JSONL; lines carrying an "error" field instead of
/// text are skipped.
std::vector<TextRecord> parse_text_records(const std::string& jsonl);

INLG_NAMESPACE_END
