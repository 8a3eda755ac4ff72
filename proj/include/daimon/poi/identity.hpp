#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>

#include <sodium.h>

#include "daimon/common/bytes.hpp"
#include "daimon/common/rng.hpp"
#include "daimon/poi/digest.hpp"

namespace daimon::poi {

using Address = std::array<std::uint8_t, 20>;

inline void ensure_sodium() {
  if (sodium_init() < 0) throw std::runtime_error("libsodium failed to initialize");
}

/// Ed25519 key pair. The address is the last 20 bytes of the digest of the
/// public key; the secret key never appears in any proof encoding.
struct PeerIdentity {
  Bytes public_key;  // 32 bytes
  Bytes secret_key;  // 64 bytes
  Address address{};
};

inline Address address_of(std::span<const std::uint8_t> public_key) {
  Digest d = digest(public_key);
  Address a;
  std::copy(d.begin() + (d.size() - a.size()), d.end(), a.begin());
  return a;
}

/// Deterministic keygen: the 32-byte Ed25519 seed is drawn from the caller's
/// seeded generator.
inline PeerIdentity keygen(Rng& rng) {
  ensure_sodium();
  std::array<std::uint8_t, crypto_sign_SEEDBYTES> seed;
  for (auto& b : seed) b = static_cast<std::uint8_t>(rng.next_u64() & 0xff);
  PeerIdentity id;
  id.public_key.resize(crypto_sign_PUBLICKEYBYTES);
  id.secret_key.resize(crypto_sign_SECRETKEYBYTES);
  crypto_sign_seed_keypair(id.public_key.data(), id.secret_key.data(), seed.data());
  id.address = address_of(id.public_key);
  return id;
}

/// Detached Ed25519 signature (deterministic for a given key and message).
inline Bytes sign(const PeerIdentity& id, std::span<const std::uint8_t> message) {
  ensure_sodium();
  Bytes sig(crypto_sign_BYTES);
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(),
                       id.secret_key.data());
  return sig;
}

inline bool verify_signature(std::span<const std::uint8_t> public_key,
                             std::span<const std::uint8_t> message,
                             std::span<const std::uint8_t> signature) {
  ensure_sodium();
  if (public_key.size() != crypto_sign_PUBLICKEYBYTES ||
      signature.size() != crypto_sign_BYTES)
    return false;
  return crypto_sign_verify_detached(signature.data(), message.data(), message.size(),
                                     public_key.data()) == 0;
}

}  // namespace daimon::poi
