#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "realcred/clock.hpp"
#include "realcred/crypto.hpp"

namespace realcred {

inline constexpr std::string_view kDidPrefix = "did:local:";

/// "did:local:" followed by the first 16 lowercase hex chars of SHA-256(key).
std::string did_for_key(const PublicKey& key);

/// One append-only registry record. `proof` is the key's signature over the
/// uri (proof of possession); `hash` chains over the previous record.
struct DidLogEntry {
  std::uint64_t seq = 0;
  std::string uri;
  std::string public_key;  // base64url
  std::string created;
  std::string proof;       // base64url
  std::string prev_hash;   // hex
  std::string hash;        // hex
  friend bool operator==(const DidLogEntry&, const DidLogEntry&) = default;
};

nlohmann::json to_json(const DidLogEntry& e);
DidLogEntry did_entry_from_json(const nlohmann::json& j);

/// Hash-chained local DID registry. Internally synchronized.
class DidRegistry {
 public:
  DidRegistry() = default;
  DidRegistry(const DidRegistry&) = delete;
  DidRegistry& operator=(const DidRegistry&) = delete;

  /// Throws Error(DuplicateDid) if already registered.
  std::string register_key(const KeyPair& key, Timestamp now);
  /// `proof` must be a signature by `key` over the DID uri; Error(BadSignature) otherwise.
  DidLogEntry register_public_key(const PublicKey& key, std::span<const unsigned char> proof, Timestamp now);

  std::optional<PublicKey> resolve(std::string_view uri) const;
  bool contains(std::string_view uri) const { return resolve(uri).has_value(); }
  std::optional<DidLogEntry> entry(std::string_view uri) const;
  std::vector<DidLogEntry> log() const;
  std::size_t size() const;

  /// Replaces the contents with a verified log. Throws Error(Malformed) if the
  /// chain, a hash or a proof does not check out; the registry is unchanged then.
  void load_log(const std::vector<DidLogEntry>& entries);

  /// JSON-lines file, one record per line.
  void save(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path);

 private:
  mutable std::mutex mu_;
  std::vector<DidLogEntry> log_;
  std::map<std::string, PublicKey, std::less<>> keys_;
};

/// Registry verification check used by `load_log`; empty string when valid.
std::string check_did_log(const std::vector<DidLogEntry>& entries);

}  // namespace realcred
