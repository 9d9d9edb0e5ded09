#include "realcred/crypto.hpp"

#include <sodium.h>

#include "realcred/error.hpp"

namespace realcred {
namespace {

void ensure_init() {
  static const int rc = sodium_init();
  if (rc < 0) throw Error(Errc::InvalidArgument, "libsodium initialisation failed");
}

const auto* bytes_of(std::string_view s) { return reinterpret_cast<const unsigned char*>(s.data()); }

}  // namespace

KeyPair KeyPair::generate() {
  ensure_init();
  KeyPair kp;
  crypto_sign_keypair(kp.public_key.data(), kp.secret_key.data());
  return kp;
}

KeyPair KeyPair::from_seed(std::span<const unsigned char, 32> seed) {
  ensure_init();
  KeyPair kp;
  crypto_sign_seed_keypair(kp.public_key.data(), kp.secret_key.data(), seed.data());
  return kp;
}

Signature sign(const SecretKey& key, std::string_view message) {
  ensure_init();
  Signature sig;
  crypto_sign_detached(sig.data(), nullptr, bytes_of(message), message.size(), key.data());
  return sig;
}

bool verify_signature(const PublicKey& key, std::string_view message, std::span<const unsigned char> signature) {
  ensure_init();
  if (signature.size() != crypto_sign_BYTES) return false;
  return crypto_sign_verify_detached(signature.data(), bytes_of(message), message.size(), key.data()) == 0;
}

Digest sha256(std::string_view data) {
  ensure_init();
  Digest d;
  crypto_hash_sha256(d.data(), bytes_of(data), data.size());
  return d;
}

std::string to_hex(std::span<const unsigned char> bytes) {
  std::string out(bytes.size() * 2 + 1, '\0');
  sodium_bin2hex(out.data(), out.size(), bytes.data(), bytes.size());
  out.pop_back();
  return out;
}

std::string base64url_encode(std::span<const unsigned char> bytes) {
  ensure_init();
  constexpr int kVariant = sodium_base64_VARIANT_URLSAFE_NO_PADDING;
  std::string out(sodium_base64_ENCODED_LEN(bytes.size(), kVariant), '\0');
  sodium_bin2base64(out.data(), out.size(), bytes.data(), bytes.size(), kVariant);
  out.resize(out.size() - 1);  // trailing NUL
  return out;
}

std::optional<std::vector<unsigned char>> base64url_decode(std::string_view text) {
  ensure_init();
  std::vector<unsigned char> out(text.size() * 3 / 4 + 3);
  std::size_t len = 0;
  const char* end = nullptr;
  if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &len, &end,
                        sodium_base64_VARIANT_URLSAFE_NO_PADDING) != 0 ||
      end != text.data() + text.size()) {
    return std::nullopt;
  }
  out.resize(len);
  // reject encodings with non-zero trailing bits so that decode is injective
  if (base64url_encode(out) != text) return std::nullopt;
  return out;
}

std::string random_urn_uuid() {
  ensure_init();
  unsigned char b[16];
  randombytes_buf(b, sizeof b);
  b[6] = static_cast<unsigned char>((b[6] & 0x0F) | 0x40);
  b[8] = static_cast<unsigned char>((b[8] & 0x3F) | 0x80);
  const std::string hex = to_hex(b);
  return "urn:uuid:" + hex.substr(0, 8) + "-" + hex.substr(8, 4) + "-" + hex.substr(12, 4) + "-" + hex.substr(16, 4) +
         "-" + hex.substr(20);
}

}  // namespace realcred
