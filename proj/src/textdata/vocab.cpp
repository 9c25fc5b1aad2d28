// SPDX-License-Identifier: Apache-2.0
#include "inlg/textdata/vocab.hpp"

#include <cctype>
#include <sstream>

#include "json.hpp"

INLG_NAMESPACE_BEGIN

VocabMode parse_vocab_mode(std::string_view s) {
  if (s == "word") return VocabMode::word;
  if (s == "char") return VocabMode::character;
  throw ConfigError("vocab mode must be 'word' or 'char', got '" + std::string(s) + "'");
}

std::string to_string(VocabMode mode) { return mode == VocabMode::word ? "word" : "char"; }

std::vector<std::string> tokenize(std::string_view text, VocabMode mode) {
  std::vector<std::string> out;
  if (mode == VocabMode::word) {
    std::string cur;
    for (char ch : text) {
      const auto c = static_cast<unsigned char>(ch);
      if (std::isspace(c)) {
        if (!cur.empty()) out.push_back(std::move(cur));
        cur.clear();
      } else {
        cur.push_back(static_cast<char>(std::tolower(c)));
      }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
  }
  for (std::size_t i = 0; i < text.size();) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (lead >= 0xf0) len = 4;
    else if (lead >= 0xe0) len = 3;
    else if (lead >= 0xc0) len = 2;
    len = std::min(len, text.size() - i);
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

std::string detokenize(const std::vector<std::string>& tokens, VocabMode mode) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (mode == VocabMode::word && i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

Vocab::Vocab() {
  for (const char* t : {"<pad>", "<bos>", "<eos>", "<unk>"}) add(t);
}

TokenId Vocab::add(const std::string& token) {
  if (auto it = index_.find(token); it != index_.end()) return it->second;
  const auto id = static_cast<TokenId>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

TokenId Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw ContractViolation("token id out of range: " + std::to_string(id));
  }
  return tokens_[id];
}

std::vector<TokenId> Vocab::encode(const std::vector<std::string>& tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::vector<std::string> Vocab::decode(const std::vector<TokenId>& ids) const {
  std::vector<std::string> out;
  for (TokenId i : ids) {
    if (i == kPad || i == kBos || i == kEos) continue;
    out.push_back(token(i));
  }
  return out;
}

std::string Vocab::to_lines() const {
  std::string out;
  for (std::size_t i = kReserved; i < tokens_.size(); ++i) out += tokens_[i] + "\n";
  return out;
}

Vocab Vocab::from_lines(std::string_view lines) {
  Vocab v;
  std::istringstream in{std::string(lines)};
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    v.add(line);
  }
  return v;
}

std::string Vocab::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = kReserved; i < tokens_.size(); ++i) arr.push_back(tokens_[i]);
  return arr.dump();
}

Vocab Vocab::from_json(std::string_view json) {
  Vocab v;
  const auto arr = nlohmann::json::parse(json);
  for (const auto& t : arr) v.add(t.get<std::string>());
  return v;
}

INLG_NAMESPACE_END
