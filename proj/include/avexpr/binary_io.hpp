#pragma once

#include <bit>
#include <concepts>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "avexpr/error.hpp"

namespace avexpr::io {

using Bytes = std::vector<std::uint8_t>;

template <typename T>
concept Scalar = std::integral<T> || std::floating_point<T>;

// Appends little-endian encoded values to an in-memory buffer.
class ByteWriter {
 public:
  template <Scalar T>
  void put(T value) {
    using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
              std::conditional_t<sizeof(T) == 2, std::uint16_t,
              std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>>;
    auto bits = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      buf_.push_back(static_cast<std::uint8_t>(bits & 0xFFu));
      if constexpr (sizeof(T) > 1) bits = static_cast<U>(bits >> 8);
    }
  }

  void put_bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

  // Writes each value narrowed to binary32.
  template <typename Range>
  void put_f32s(const Range& values) {
    for (const auto v : values) put(static_cast<float>(v));
  }

  void put_zeros(std::size_t n) { buf_.insert(buf_.end(), n, 0); }

  const Bytes& bytes() const& noexcept { return buf_; }
  Bytes take() && { return std::move(buf_); }
  std::size_t size() const noexcept { return buf_.size(); }

 private:
  Bytes buf_;
};

// Bounds-checked little-endian cursor over a byte span. Running off the end
// raises CorruptionError.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  template <Scalar T>
  T get() {
    using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
              std::conditional_t<sizeof(T) == 2, std::uint16_t,
              std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>>;
    require(sizeof(T));
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bits = static_cast<U>(bits | (static_cast<U>(data_[pos_ + i]) << (8 * i)));
    }
    pos_ += sizeof(T);
    return std::bit_cast<T>(bits);
  }

  std::string get_string(std::size_t n) {
    require(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  // Reads n binary32 values promoted to double.
  std::vector<double> get_f32s(std::size_t n) {
    require(n * 4);
    std::vector<double> out(n);
    for (auto& v : out) v = static_cast<double>(get<float>());
    return out;
  }

  bool at_end() const noexcept { return pos_ == data_.size(); }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  std::size_t position() const noexcept { return pos_; }

  void require(std::size_t n) const {
    if (n > data_.size() - pos_) {
      throw CorruptionError("unexpected end of data at byte " + std::to_string(pos_) + " (need " +
                            std::to_string(n) + ", have " + std::to_string(data_.size() - pos_) + ")");
    }
  }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

inline Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return data;
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::string read_magic(std::span<const std::uint8_t> data) {
  if (data.size() < 4) return {};
  return std::string(reinterpret_cast<const char*>(data.data()), 4);
}

}  // namespace avexpr::io
