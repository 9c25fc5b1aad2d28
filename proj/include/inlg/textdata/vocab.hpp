// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "inlg/errors.hpp"

INLG_NAMESPACE_BEGIN

using TokenId = std::int32_t;

enum class VocabMode { word, character };

VocabMode parse_vocab_mode(std::string_view s);
std::string to_string(VocabMode mode);

/// Word mode lowercases and splits on whitespace; character mode yields one
/// token per UTF-8 code point, spaces included.
std::vector<std::string> tokenize(std::string_view text, VocabMode mode);
std::string detokenize(const std::vector<std::string>& tokens, VocabMode mode);

/// Bijective token <-> id map with fixed reserved ids.
class Vocab {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kBos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kUnk = 3;
  static constexpr std::size_t kReserved = 4;

  Vocab();

  /// Adds a token if absent and returns its id.
  TokenId add(const std::string& token);
  bool contains(const std::string& token) const { return index_.contains(token); }
  /// Unknown tokens map to kUnk.
  TokenId id(const std::string& token) const;
  const std::string& token(TokenId id) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<TokenId> encode(const std::vector<std::string>& tokens) const;
  /// Inverse of encode; reserved tokens other than UNK are dropped.
  std::vector<std::string> decode(const std::vector<TokenId>& ids) const;

  /// Non-reserved tokens, one per line, in id order.
  std::string to_lines() const;
  static Vocab from_lines(std::string_view lines);
  /// JSON array of the non-reserved tokens (what checkpoints carry).
  std::string to_json() const;
  static Vocab from_json(std::string_view json);

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

INLG_NAMESPACE_END
