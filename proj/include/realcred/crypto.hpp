#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace realcred {

using PublicKey = std::array<unsigned char, 32>;
using SecretKey = std::array<unsigned char, 64>;
using Signature = std::array<unsigned char, 64>;
using Digest = std::array<unsigned char, 32>;

/// Ed25519 key pair. Signatures are deterministic.
struct KeyPair {
  PublicKey public_key{};
  SecretKey secret_key{};

  static KeyPair generate();
  static KeyPair from_seed(std::span<const unsigned char, 32> seed);
};

Signature sign(const SecretKey& key, std::string_view message);
bool verify_signature(const PublicKey& key, std::string_view message, std::span<const unsigned char> signature);

Digest sha256(std::string_view data);
std::string to_hex(std::span<const unsigned char> bytes);

/// URL-safe alphabet, no padding.
std::string base64url_encode(std::span<const unsigned char> bytes);
/// Empty optional on any non-canonical or truncated input.
std::optional<std::vector<unsigned char>> base64url_decode(std::string_view text);

/// Random RFC 4122 version-4 UUID in "urn:uuid:" form.
std::string random_urn_uuid();

}  // namespace realcred
