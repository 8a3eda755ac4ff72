#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace daimon {

using Bytes = std::vector<std::uint8_t>;

/// Canonical binary encoder: little-endian fixed-width integers, IEEE-754
/// doubles by bit pattern, variable-length data with a u64 length prefix.
/// Every digest in the system is taken over bytes produced here.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  void raw(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

  /// Length-prefixed byte string.
  void bytes(std::span<const std::uint8_t> b) {
    u64(b.size());
    raw(b);
  }

  void str(std::string_view s) {
    u64(s.size());
    buf_.insert(buf_.end(), s.begin(), s.end());
  }

  void f64_vec(std::span<const double> v) {
    u64(v.size());
    for (double x : v) f64(x);
  }

  void i32_vec(std::span<const std::int32_t> v) {
    u64(v.size());
    for (std::int32_t x : v) i32(x);
  }

  const Bytes& data() const { return buf_; }
  Bytes take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> b) : buf_(b) {}

  std::uint8_t u8() { return take(1)[0]; }

  std::uint32_t u32() {
    auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }

  std::uint64_t u64() {
    auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }

  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }

  Bytes bytes() {
    auto n = u64();
    auto b = take(n);
    return Bytes(b.begin(), b.end());
  }

  std::string str() {
    auto n = u64();
    auto b = take(n);
    return std::string(b.begin(), b.end());
  }

  std::vector<double> f64_vec() {
    auto n = u64();
    std::vector<double> v(n);
    for (auto& x : v) x = f64();
    return v;
  }

  std::vector<std::int32_t> i32_vec() {
    auto n = u64();
    std::vector<std::int32_t> v(n);
    for (auto& x : v) x = i32();
    return v;
  }

  bool exhausted() const { return pos_ == buf_.size(); }

  void expect_end() const {
    if (!exhausted()) throw std::runtime_error("decode: trailing bytes");
  }

 private:
  std::span<const std::uint8_t> take(std::size_t n) {
    if (buf_.size() - pos_ < n) throw std::runtime_error("decode: truncated input");
    auto s = buf_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::span<const std::uint8_t> buf_;
  std::size_t pos_ = 0;
};

inline std::string to_hex(std::span<const std::uint8_t> b) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(b.size() * 2);
  for (std::uint8_t c : b) {
    s.push_back(digits[c >> 4]);
    s.push_back(digits[c & 0xf]);
  }
  return s;
}

inline Bytes from_hex(std::string_view s) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::runtime_error("from_hex: bad digit");
  };
  if (s.size() % 2 != 0) throw std::runtime_error("from_hex: odd length");
  Bytes out(s.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>(nibble(s[2 * i]) << 4 | nibble(s[2 * i + 1]));
  return out;
}

inline Bytes str_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

}  // namespace daimon
