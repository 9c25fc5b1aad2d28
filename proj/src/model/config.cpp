// SPDX-License-Identifier: Apache-2.0
#include "inlg/model/config.hpp"

#include <charconv>
#include <sstream>

INLG_NAMESPACE_BEGIN

MappingVariant parse_mapping_variant(const std::string& s) {
  if (s == "mlp") return MappingVariant::mlp;
  if (s == "transformer") return MappingVariant::transformer;
  throw ConfigError("mapping must be 'mlp' or 'transformer', got '" + s + "'");
}

std::string to_string(MappingVariant v) { return v == MappingVariant::mlp ? "mlp" : "transformer"; }

Pooling parse_pooling(const std::string& s) {
  if (s == "mean") return Pooling::mean;
  if (s == "last") return Pooling::last;
  throw ConfigError("pooling must be 'mean' or 'last', got '" + s + "'");
}

std::string to_string(Pooling p) { return p == Pooling::mean ? "mean" : "last"; }

std::size_t ModelConfig::resolved_mapping_layers() const {
  if (mapping_layers > 0) return mapping_layers;
  return mapping == MappingVariant::transformer ? 8 : 2;
}

std::size_t ModelConfig::resolved_mapping_hidden() const {
  if (mapping_hidden > 0) return mapping_hidden;
  return std::max<std::size_t>(1, prefix_len * d_model / 2);
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("model config: " + m); };
  if (d_model == 0 || n_heads == 0 || d_model % n_heads != 0) {
    fail("d_model must be a positive multiple of n_heads");
  }
  if (n_layers == 0) fail("n_layers must be >= 1");
  if (d_ff == 0) fail("d_ff must be >= 1");
  if (vocab_size < 5) fail("vocab_size must be >= 5");
  if (feature_dim == 0) fail("feature_dim must be >= 1");
  if (max_positions < prefix_len + 2) fail("max_positions too small for the prefix");
  if (!(dropout >= Real(0) && dropout < Real(1))) fail("dropout must be in [0, 1)");
  if (mapping == MappingVariant::mlp && mapping_layers != 0 && mapping_layers != 2) {
    fail("the mlp mapping network has exactly two layers");
  }
}

std::map<std::string, std::string> ModelConfig::to_header() const {
  std::map<std::string, std::string> h;
  auto put = [&](const char* k, auto v) {
    std::ostringstream os;
    os.precision(9);
    os << v;
    h[std::string("model.") + k] = os.str();
  };
  put("d_model", d_model);
  put("n_layers", n_layers);
  put("n_heads", n_heads);
  put("d_ff", d_ff);
  put("vocab_size", vocab_size);
  put("max_positions", max_positions);
  put("prefix_len", prefix_len);
  put("feature_dim", feature_dim);
  h["model.mapping"] = to_string(mapping);
  put("mapping_layers", mapping_layers);
  put("mapping_hidden", mapping_hidden);
  put("dropout", dropout);
  h["model.pooling"] = to_string(pooling);
  put("init_std", init_std);
  return h;
}

ModelConfig ModelConfig::from_header(const std::map<std::string, std::string>& header) {
  ModelConfig c;
  auto get = [&](const char* k) -> const std::string& {
    auto it = header.find(std::string("model.") + k);
    if (it == header.end()) throw FormatError(std::string("checkpoint header lacks model.") + k);
    return it->second;
  };
  auto size = [&](const char* k) { return static_cast<std::size_t>(std::stoull(get(k))); };
  c.d_model = size("d_model");
  c.n_layers = size("n_layers");
  c.n_heads = size("n_heads");
  c.d_ff = size("d_ff");
  c.vocab_size = size("vocab_size");
  c.max_positions = size("max_positions");
  c.prefix_len = size("prefix_len");
  c.feature_dim = size("feature_dim");
  c.mapping = parse_mapping_variant(get("mapping"));
  c.mapping_layers = size("mapping_layers");
  c.mapping_hidden = size("mapping_hidden");
  c.dropout = static_cast<Real>(std::stod(get("dropout")));
  c.pooling = parse_pooling(get("pooling"));
  c.init_std = static_cast<Real>(std::stod(get("init_std")));
  return c;
}

INLG_NAMESPACE_END
