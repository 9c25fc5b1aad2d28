// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>

#include "inlg/real.hpp"
#include "inlg/errors.hpp"

INLG_NAMESPACE_BEGIN

enum class MappingVariant { mlp, transformer };
enum class Pooling { mean, last };

MappingVariant parse_mapping_variant(const std::string& s);
std::string to_string(MappingVariant v);
Pooling parse_pooling(const std::string& s);
std::string to_string(Pooling p);

struct ModelConfig {
  std::size_t d_model = 64;
  std::size_t n_layers = 2;
  std::size_t n_heads = 4;
  std::size_t d_ff = 256;
  std::size_t vocab_size = 0;
  std::size_t max_positions = 256;
  /// Number of visual prefix vectors. 0 disables the prefix entirely and
  /// gives a plain text-only LM (no mapping parameters are created).
  std::size_t prefix_len = 20;
  std::size_t feature_dim = 16;
  MappingVariant mapping = MappingVariant::transformer;
  /// 0 selects the variant default: 8 blocks for transformer, 2 layers for mlp.
  std::size_t mapping_layers = 0;
  /// Hidden width of the mlp variant; 0 selects prefix_len*d_model/2.
  std::size_t mapping_hidden = 0;
  Real dropout = Real(0);
  Pooling pooling = Pooling::mean;
  Real init_std = Real(0.02);

  std::size_t resolved_mapping_layers() const;
  std::size_t resolved_mapping_hidden() const;
  void validate() const;

  /// key=value entries (prefixed "model.") for checkpoint headers.
  std::map<std::string, std::string> to_header() const;
  static ModelConfig from_header(const std::map<std::string, std::string>& header);
  bool operator==(const ModelConfig&) const = default;
};

INLG_NAMESPACE_END
