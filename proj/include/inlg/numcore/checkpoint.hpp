// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>

#include "inlg/numcore/params.hpp"

INLG_NAMESPACE_BEGIN

/// Binary checkpoint, little-endian:
///   "INLGCKPT" | u16 version | u32 header length | header bytes
///   | u32 tensor count | per tensor: u16 name length, UTF-8 name, u8 rank,
///     u32 dims[rank], f32 row-major payload
/// The header is a UTF-8 block of key=value lines (model config, vocab).
/// Tensors are stored in name order, so equal stores give equal bytes.
struct Checkpoint {
  static constexpr std::uint16_t kVersion = 1;
  std::map<std::string, std::string> header;
  ParamStore params;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

INLG_NAMESPACE_END
