// SPDX-License-Identifier: Apache-2.0
#include "inlg/numcore/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "inlg/numcore/binary_io.hpp"

INLG_NAMESPACE_BEGIN

namespace {
constexpr std::string_view kMagic = "INLGCKPT";
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write file: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  std::string header;
  for (const auto& [k, v] : ckpt.header) {
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw ContractViolation("checkpoint header entry not representable: " + k);
    }
    header += k + "=" + v + "\n";
  }
  ByteWriter w;
  w.bytes(kMagic);
  w.u16(Checkpoint::kVersion);
  w.u32(static_cast<std::uint32_t>(header.size()));
  w.bytes(header);
  w.u32(static_cast<std::uint32_t>(ckpt.params.size()));
  for (const auto& [name, t] : ckpt.params) {
    if (name.size() > 0xffff) throw ContractViolation("tensor name too long");
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.bytes(name);
    w.u8(static_cast<std::uint8_t>(t.rank()));
    for (std::size_t d : t.shape()) w.u32(static_cast<std::uint32_t>(d));
    for (Real v : t.data()) w.f32(static_cast<float>(v));
  }
  return w.buffer();
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  ByteReader r(bytes, "checkpoint");
  if (r.remaining() < kMagic.size() || r.bytes(kMagic.size()) != kMagic) {
    throw FormatError("checkpoint: bad magic");
  }
  const std::uint16_t version = r.u16();
  if (version != Checkpoint::kVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint ckpt;
  const std::uint32_t hlen = r.u32();
  std::istringstream hs{std::string(r.bytes(hlen))};
  for (std::string line; std::getline(hs, line);) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("checkpoint: malformed header line");
    ckpt.header[line.substr(0, eq)] = line.substr(eq + 1);
  }
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t nlen = r.u16();
    std::string name(r.bytes(nlen));
    const std::uint8_t rank = r.u8();
    if (rank == 0) throw FormatError("checkpoint: tensor '" + name + "' has rank 0");
    Shape shape(rank);
    for (auto& d : shape) {
      d = r.u32();
      if (d == 0) throw FormatError("checkpoint: tensor '" + name + "' has a zero dimension");
    }
    const std::size_t n = shape_numel(shape);
    if (r.remaining() / 4 < n) throw FormatError("checkpoint: truncated payload for " + name);
    std::vector<Real> data(n);
    for (auto& v : data) v = static_cast<Real>(r.f32());
    if (!ckpt.params.emplace(name, Tensor(std::move(shape), std::move(data))).second) {
      throw FormatError("checkpoint: duplicate tensor " + name);
    }
  }
  if (r.remaining() != 0) throw FormatError("checkpoint: trailing bytes");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  write_file_bytes(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
  return decode_checkpoint(read_file_bytes(path));
}

INLG_NAMESPACE_END
