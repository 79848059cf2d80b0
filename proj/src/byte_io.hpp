#pragma once

// Little-endian encode/decode shared by the binary formats.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "stgc/errors.hpp"

namespace stgc::detail {

class ByteWriter {
 public:
  explicit ByteWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  template <class T>
  void put(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    out_.insert(out_.end(), raw, raw + sizeof(T));
  }

  void put_bytes(std::span<const std::uint8_t> bytes) {
    out_.insert(out_.end(), bytes.begin(), bytes.end());
  }

  void put_doubles(std::span<const double> values) {
    for (double v : values) put(v);
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in, std::size_t base_offset = 0)
      : in_(in), base_(base_offset) {}

  template <class T>
  T get(const char* what) {
    require(sizeof(T), what);
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, in_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }

  std::span<const std::uint8_t> get_bytes(std::size_t n, const char* what) {
    require(n, what);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  void get_doubles(std::span<double> out, const char* what) {
    require(out.size() * sizeof(double), what);
    for (double& v : out) v = get<double>(what);
  }

  void skip(std::size_t n, const char* what) { get_bytes(n, what); }

  std::size_t position() const noexcept { return base_ + pos_; }
  std::size_t remaining() const noexcept { return in_.size() - pos_; }

 private:
  void require(std::size_t n, const char* what) const {
    if (in_.size() - pos_ < n)
      throw FormatError(std::string("truncated input while reading ") + what, base_ + pos_);
  }

  std::span<const std::uint8_t> in_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

}  // namespace stgc::detail
