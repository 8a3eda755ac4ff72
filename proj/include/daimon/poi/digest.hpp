#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include <sodium.h>

#include "daimon/common/bytes.hpp"

namespace daimon::poi {

/// 32-byte SHA-256 digest; the single content-addressing hash used for blob
/// keys, block hashes, and peer addresses.
using Digest = std::array<std::uint8_t, 32>;

inline Digest digest(std::span<const std::uint8_t> content) {
  Digest d;
  crypto_hash_sha256(d.data(), content.data(), content.size());
  return d;
}

inline std::string hex(const Digest& d) { return to_hex(d); }

inline Digest digest_from_hex(std::string_view s) {
  auto b = from_hex(s);
  if (b.size() != 32) throw std::runtime_error("digest_from_hex: need 32 bytes");
  Digest d;
  std::copy(b.begin(), b.end(), d.begin());
  return d;
}

inline constexpr Digest kZeroDigest{};

}  // namespace daimon::poi
