// SPDX-License-Identifier: Apache-2.0
#include "inlg/textdata/features.hpp"

#include "inlg/numcore/binary_io.hpp"

INLG_NAMESPACE_BEGIN

namespace {
constexpr std::string_view kMagic = "INLGFEAT";
}

void FeatureTable::add(const std::string& id, std::vector<Real> row) {
  if (dim_ == 0) throw ContractViolation("feature table dimension must be positive");
  if (row.size() != dim_) {
    throw ContractViolation("feature '" + id + "' has " + std::to_string(row.size()) +
                            " values, table dim is " + std::to_string(dim_));
  }
  if (id.size() > 0xffff) throw ContractViolation("feature id too long");
  if (!index_.emplace(id, ids_.size()).second) {
    throw ContractViolation("duplicate feature id '" + id + "'");
  }
  ids_.push_back(id);
  rows_.push_back(std::move(row));
}

const std::vector<Real>& FeatureTable::at(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw ContractViolation("unknown feature id '" + id + "'");
  return rows_[it->second];
}

std::string FeatureTable::encode() const {
  ByteWriter w;
  w.bytes(kMagic);
  w.u16(kVersion);
  w.u32(static_cast<std::uint32_t>(ids_.size()));
  w.u32(static_cast<std::uint32_t>(dim_));
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    w.u16(static_cast<std::uint16_t>(ids_[i].size()));
    w.bytes(ids_[i]);
    for (Real v : rows_[i]) w.f32(static_cast<float>(v));
  }
  return w.buffer();
}

FeatureTable FeatureTable::decode(const std::string& bytes) {
  ByteReader r(bytes, "feature file");
  if (r.remaining() < kMagic.size() || r.bytes(kMagic.size()) != kMagic) {
    throw FormatError("feature file: bad magic");
  }
  const std::uint16_t version = r.u16();
  if (version != kVersion) {
    throw FormatError("feature file: unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  const std::uint32_t dim = r.u32();
  if (dim == 0) throw FormatError("feature file: zero dimension");
  FeatureTable table(dim);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t len = r.u16();
    std::string id(r.bytes(len));
    if (r.remaining() / 4 < dim) {
      throw FormatError("feature file: row '" + id + "' truncated (expected " +
                        std::to_string(dim) + " floats)");
    }
    std::vector<Real> row(dim);
    for (auto& v : row) v = static_cast<Real>(r.f32());
    if (table.contains(id)) throw FormatError("feature file: duplicate id '" + id + "'");
    table.add(id, std::move(row));
  }
  if (r.remaining() != 0) throw FormatError("feature file: trailing bytes after last row");
  return table;
}

FeatureTable read_features(const std::string& path) {
  return FeatureTable::decode(read_file_bytes(path));
}

void write_features(const FeatureTable& table, const std::string& path) {
  write_file_bytes(path, table.encode());
}

INLG_NAMESPACE_END
