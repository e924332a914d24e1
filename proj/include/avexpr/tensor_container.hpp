#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "avexpr/binary_io.hpp"
#include "avexpr/error.hpp"
#include "avexpr/matrix.hpp"

namespace avexpr {

// NTC1 named-tensor container (parameter checkpoints), little-endian:
//
//   "NTC1" | tensor_count u32
//   per tensor: name_len u16 | name utf-8 | rank u8 | dims u32 x rank
//               | payload f32 x prod(dims)   (row-major)
struct NamedTensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  std::size_t element_count() const {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
  }

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

using TensorList = std::vector<NamedTensor>;

namespace ntc1 {
inline constexpr std::string_view kMagic = "NTC1";
}

inline io::Bytes encode_tensors(const TensorList& tensors) {
  io::ByteWriter w;
  w.put_bytes(ntc1::kMagic);
  if (tensors.size() > 0xFFFFFFFFu) throw ValidationError("NTC1: too many tensors");
  w.put(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    if (t.name.size() > 0xFFFF) throw ValidationError("NTC1: tensor name too long");
    if (t.dims.size() > 0xFF) throw ValidationError("NTC1: rank exceeds 255");
    if (t.data.size() != t.element_count()) {
      throw ValidationError("NTC1: tensor '" + t.name + "' payload size does not match dims");
    }
    w.put(static_cast<std::uint16_t>(t.name.size()));
    w.put_bytes(t.name);
    w.put(static_cast<std::uint8_t>(t.dims.size()));
    for (auto d : t.dims) w.put(d);
    for (float v : t.data) w.put(v);
  }
  return std::move(w).take();
}

inline TensorList decode_tensors(std::span<const std::uint8_t> data) {
  if (io::read_magic(data) != ntc1::kMagic) throw FormatError("not an NTC1 file (bad magic)");
  io::ByteReader r(data);
  r.get_string(4);
  const auto count = r.get<std::uint32_t>();
  TensorList out;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = r.get_string(r.get<std::uint16_t>());
    const auto rank = r.get<std::uint8_t>();
    t.dims.resize(rank);
    for (auto& d : t.dims) d = r.get<std::uint32_t>();
    const auto n = t.element_count();
    if (n > r.remaining() / 4) throw CorruptionError("NTC1: tensor '" + t.name + "' payload truncated");
    t.data.resize(n);
    for (auto& v : t.data) v = r.get<float>();
    out.push_back(std::move(t));
  }
  if (!r.at_end()) throw CorruptionError("NTC1: trailing bytes after last tensor");
  return out;
}

inline void write_tensors(const TensorList& tensors, const std::filesystem::path& path) {
  io::write_file(path, encode_tensors(tensors));
}

inline TensorList read_tensors(const std::filesystem::path& path) { return decode_tensors(io::read_file(path)); }

// Matrix <-> rank-2 tensor.
inline NamedTensor to_tensor(const std::string& name, const Matrix& m) {
  NamedTensor t{name, {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())}, {}};
  t.data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.size(); ++i) t.data.push_back(static_cast<float>(m.data()[i]));
  return t;
}

inline Matrix to_matrix(const NamedTensor& t) {
  if (t.dims.size() != 2) throw FormatError("tensor '" + t.name + "' is not rank 2");
  Matrix m(t.dims[0], t.dims[1]);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<double>(t.data[static_cast<std::size_t>(i)]);
  return m;
}

// Name-indexed view used when rebuilding parameter bundles.
class TensorIndex {
 public:
  explicit TensorIndex(const TensorList& tensors) {
    for (const auto& t : tensors) {
      if (!by_name_.emplace(t.name, &t).second) throw FormatError("duplicate tensor name '" + t.name + "'");
    }
  }

  bool contains(const std::string& name) const { return by_name_.contains(name); }

  const NamedTensor& at(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw FormatError("checkpoint is missing tensor '" + name + "'");
    return *it->second;
  }

  Matrix matrix(const std::string& name) const { return to_matrix(at(name)); }

  std::size_t size() const noexcept { return by_name_.size(); }

 private:
  std::map<std::string, const NamedTensor*> by_name_;
};

}  // namespace avexpr
