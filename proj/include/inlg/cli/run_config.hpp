// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "inlg/decoding.hpp"
#include "inlg/training.hpp"

INLG_NAMESPACE_BEGIN

enum class Command { pretrain, train, generate };

enum class Source { default_value, file, flag };
std::string to_string(Source s);

enum class KeyType { integer, real, boolean, text };

struct KeySpec {
  std::string name;
  KeyType type;
  std::string help;
};

/// Every configuration key, in snapshot order. Flags are the key names with
/// '_' replaced by '-'.
const std::vector<KeySpec>& config_keys();
const KeySpec* find_key(const std::string& name);
std::string flag_name(const std::string& key);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Parses key=value lines; '#' starts a comment (at line start or after
/// whitespace). Unknown keys and malformed lines raise ConfigError.
KeyValues parse_config_text(const std::string& text);

struct ConfigEntry {
  std::string value;
  Source source = Source::default_value;
  std::string via;  // preset that supplied the value, if any
};

/// Named values for the three task presets and the paper hyperparameters.
KeyValues task_preset_values(const std::string& preset);
KeyValues paper_hparam_values(Command cmd);

class RunConfig {
 public:
  Command command = Command::train;
  std::map<std::string, ConfigEntry> entries;

  const ConfigEntry& entry(const std::string& key) const;
  const std::string& str(const std::string& key) const { return entry(key).value; }
  bool has(const std::string& key) const { return !str(key).empty(); }
  std::size_t size(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  Real real(const std::string& key) const;
  bool flag(const std::string& key) const;
  /// The seed; ConfigError when unset.
  std::uint64_t seed() const;

  /// key=value lines with provenance comments. Feeding the snapshot back as
  /// a config file resolves to the same values.
  std::string snapshot() const;

  /// Model hyperparameters; vocabulary size and feature dim come from data.
  ModelConfig model_config(std::size_t feature_dim) const;
  TrainConfig train_config() const;
  PretrainConfig pretrain_config() const;
  DecodeConfig decode_config() const;
};

/// Precedence: flags > file > defaults. A preset (task_preset,
/// paper_hparams) expands at the layer that sets it, before that layer's
/// explicit keys.
RunConfig resolve_config(Command cmd, const KeyValues& file, const KeyValues& flags);

INLG_NAMESPACE_END
