// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "inlg/real.hpp"
#include "inlg/errors.hpp"

INLG_NAMESPACE_BEGIN

/// Visual feature vectors keyed by id, kept in insertion order.
///
/// File layout (little-endian): "INLGFEAT" | u16 version=1 | u32 rows
/// | u32 dim | per row: u16 id length, UTF-8 id, dim x f32.
class FeatureTable {
 public:
  static constexpr std::uint16_t kVersion = 1;

  explicit FeatureTable(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }

  void add(const std::string& id, std::vector<Real> row);
  bool contains(const std::string& id) const { return index_.contains(id); }
  const std::vector<Real>& at(const std::string& id) const;

  std::string encode() const;
  static FeatureTable decode(const std::string& bytes);

  bool operator==(const FeatureTable& other) const {
    return dim_ == other.dim_ && ids_ == other.ids_ && rows_ == other.rows_;
  }

 private:
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::vector<std::vector<Real>> rows_;
  std::unordered_map<std::string, std::size_t> index_;
};

FeatureTable read_features(const std::string& path);
void write_features(const FeatureTable& table, const std::string& path);

INLG_NAMESPACE_END
