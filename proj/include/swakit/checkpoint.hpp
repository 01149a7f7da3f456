#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "swakit/errors.hpp"
#include "swakit/param_vector.hpp"

namespace swakit {

/// Binary checkpoint layout (all integers and doubles little-endian):
///
///   "SWCK"                                magic, 4 bytes
///   u32  format version (currently 1)
///   u32  group count
///   per group: u32 name length, UTF-8 name bytes, u64 offset, u64 length
///   f64  values, one per parameter, in layout order
///
/// Round-trips are bit-exact: doubles are moved through their u64 bit
/// patterns, never reformatted.
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class ByteReader {
public:
  ByteReader(const std::string& bytes, std::string path)
      : bytes_(bytes), path_(std::move(path)) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(read(4)); }
  std::uint64_t u64() { return read(8); }
  double f64() { return std::bit_cast<double>(read(8)); }

  std::string str(std::size_t len) {
    need(len);
    std::string s = bytes_.substr(pos_, len);
    pos_ += len;
    return s;
  }

  bool exhausted() const noexcept { return pos_ == bytes_.size(); }

  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) {
      throw IoError("checkpoint '" + path_ + "' is truncated");
    }
  }

private:
  std::uint64_t read(std::size_t n) {
    need(n);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += n;
    return v;
  }

  const std::string& bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline void write_checkpoint(const std::filesystem::path& path, const ParamVector& w) {
  std::string out;
  out.reserve(16 + w.size() * 8);
  out += "SWCK";
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(w.groups().size()));
  for (const ParamGroup& g : w.groups()) {
    detail::put_u32(out, static_cast<std::uint32_t>(g.name.size()));
    out += g.name;
    detail::put_u64(out, g.offset);
    detail::put_u64(out, g.length);
  }
  for (std::size_t i = 0; i < w.size(); ++i) detail::put_f64(out, w[i]);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("failed writing checkpoint '" + path.string() + "'");
}

inline ParamVector read_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  detail::ByteReader r(bytes, path.string());
  if (r.str(4) != "SWCK") {
    throw IoError("'" + path.string() + "' is not a SWCK checkpoint (bad magic)");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw IoError("checkpoint '" + path.string() + "' has unsupported format version " +
                  std::to_string(version));
  }
  const std::uint32_t group_count = r.u32();
  std::vector<ParamGroup> groups;
  groups.reserve(group_count);
  std::size_t total = 0;
  for (std::uint32_t i = 0; i < group_count; ++i) {
    const std::uint32_t name_len = r.u32();
    ParamGroup g;
    g.name = r.str(name_len);
    g.offset = r.u64();
    g.length = r.u64();
    total += g.length;
    groups.push_back(std::move(g));
  }
  std::vector<double> values(total);
  for (std::size_t i = 0; i < total; ++i) values[i] = r.f64();
  if (!r.exhausted()) {
    throw IoError("checkpoint '" + path.string() + "' has trailing bytes");
  }
  try {
    return ParamVector(std::move(values), std::move(groups));
  } catch (const LayoutError& e) {
    throw IoError("checkpoint '" + path.string() + "' has a corrupt group table: " + e.what());
  }
}

/// Sidecar metadata written next to each checkpoint as '<file>.json'.
struct CheckpointMeta {
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
  std::string config_digest;
  std::string created_at;  // ISO 8601 UTC
};

inline std::filesystem::path checkpoint_meta_path(const std::filesystem::path& checkpoint) {
  std::filesystem::path p = checkpoint;
  p += ".json";
  return p;
}

inline void write_checkpoint_meta(const std::filesystem::path& checkpoint,
                                  const CheckpointMeta& meta) {
  nlohmann::json j{{"step", meta.step},
                   {"seed", meta.seed},
                   {"config_digest", meta.config_digest},
                   {"created_at", meta.created_at}};
  std::ofstream f(checkpoint_meta_path(checkpoint), std::ios::trunc);
  if (!f) throw IoError("cannot write checkpoint metadata for '" + checkpoint.string() + "'");
  f << j.dump(2) << '\n';
}

inline CheckpointMeta read_checkpoint_meta(const std::filesystem::path& checkpoint) {
  std::ifstream f(checkpoint_meta_path(checkpoint));
  if (!f) {
    throw IoError("missing checkpoint metadata '" + checkpoint_meta_path(checkpoint).string() +
                  "'");
  }
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("corrupt checkpoint metadata for '" + checkpoint.string() + "': " + e.what());
  }
  CheckpointMeta meta;
  meta.step = j.value("step", std::uint64_t{0});
  meta.seed = j.value("seed", std::uint64_t{0});
  meta.config_digest = j.value("config_digest", std::string{});
  meta.created_at = j.value("created_at", std::string{});
  return meta;
}

}  // namespace swakit
