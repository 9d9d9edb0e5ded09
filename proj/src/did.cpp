#include "realcred/did.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "realcred/credential.hpp"
#include "realcred/error.hpp"

namespace realcred {

using nlohmann::json;

namespace {

const std::string kGenesisHash(64, '0');

std::string entry_hash(const DidLogEntry& e) {
  const json body = {{"seq", e.seq},         {"uri", e.uri},   {"public_key", e.public_key},
                     {"created", e.created}, {"proof", e.proof}, {"prev_hash", e.prev_hash}};
  const auto d = sha256(canonicalize(body));
  return to_hex(d);
}

std::optional<PublicKey> decode_key(std::string_view b64) {
  auto raw = base64url_decode(b64);
  if (!raw || raw->size() != 32) return std::nullopt;
  PublicKey k;
  std::copy(raw->begin(), raw->end(), k.begin());
  return k;
}

}  // namespace

std::string did_for_key(const PublicKey& key) {
  const auto d = sha256(std::string_view(reinterpret_cast<const char*>(key.data()), key.size()));
  return std::string(kDidPrefix) + to_hex(d).substr(0, 16);
}

json to_json(const DidLogEntry& e) {
  return {{"seq", e.seq},       {"uri", e.uri},           {"public_key", e.public_key}, {"created", e.created},
          {"proof", e.proof},   {"prev_hash", e.prev_hash}, {"hash", e.hash}};
}

DidLogEntry did_entry_from_json(const json& j) {
  try {
    return {j.at("seq").get<std::uint64_t>(),      j.at("uri").get<std::string>(),
            j.at("public_key").get<std::string>(), j.at("created").get<std::string>(),
            j.at("proof").get<std::string>(),      j.at("prev_hash").get<std::string>(),
            j.at("hash").get<std::string>()};
  } catch (const json::exception& e) {
    throw Error(Errc::Malformed, std::string("DID log entry: ") + e.what());
  }
}

std::string check_did_log(const std::vector<DidLogEntry>& entries) {
  std::string prev = kGenesisHash;
  std::map<std::string, bool, std::less<>> seen;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const std::string where = "entry " + std::to_string(i) + ": ";
    if (e.seq != i) return where + "sequence gap";
    if (e.prev_hash != prev) return where + "broken chain";
    if (entry_hash(e) != e.hash) return where + "hash mismatch";
    const auto key = decode_key(e.public_key);
    if (!key) return where + "bad public key";
    if (did_for_key(*key) != e.uri) return where + "uri does not match key";
    const auto proof = base64url_decode(e.proof);
    if (!proof || !verify_signature(*key, e.uri, *proof)) return where + "bad proof of possession";
    if (!seen.emplace(e.uri, true).second) return where + "duplicate uri";
    prev = e.hash;
  }
  return {};
}

std::string DidRegistry::register_key(const KeyPair& key, Timestamp now) {
  const std::string uri = did_for_key(key.public_key);
  const auto proof = sign(key.secret_key, uri);
  return register_public_key(key.public_key, proof, now).uri;
}

DidLogEntry DidRegistry::register_public_key(const PublicKey& key, std::span<const unsigned char> proof, Timestamp now) {
  const std::string uri = did_for_key(key);
  if (!verify_signature(key, uri, proof)) throw Error(Errc::BadSignature, "proof of possession does not verify for " + uri);
  std::lock_guard lock(mu_);
  if (keys_.count(uri)) throw Error(Errc::DuplicateDid, uri);
  DidLogEntry e;
  e.seq = log_.size();
  e.uri = uri;
  e.public_key = base64url_encode(key);
  e.created = format_rfc3339(now);
  e.proof = base64url_encode(proof);
  e.prev_hash = log_.empty() ? kGenesisHash : log_.back().hash;
  e.hash = entry_hash(e);
  log_.push_back(e);
  keys_.emplace(uri, key);
  return e;
}

std::optional<PublicKey> DidRegistry::resolve(std::string_view uri) const {
  std::lock_guard lock(mu_);
  if (auto it = keys_.find(uri); it != keys_.end()) return it->second;
  return std::nullopt;
}

std::optional<DidLogEntry> DidRegistry::entry(std::string_view uri) const {
  std::lock_guard lock(mu_);
  for (const auto& e : log_) {
    if (e.uri == uri) return e;
  }
  return std::nullopt;
}

std::vector<DidLogEntry> DidRegistry::log() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::size_t DidRegistry::size() const {
  std::lock_guard lock(mu_);
  return log_.size();
}

void DidRegistry::load_log(const std::vector<DidLogEntry>& entries) {
  if (auto problem = check_did_log(entries); !problem.empty()) throw Error(Errc::Malformed, "DID log " + problem);
  std::map<std::string, PublicKey, std::less<>> keys;
  for (const auto& e : entries) keys.emplace(e.uri, *decode_key(e.public_key));
  std::lock_guard lock(mu_);
  log_ = entries;
  keys_ = std::move(keys);
}

void DidRegistry::save(const std::filesystem::path& path) const {
  const auto entries = log();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
  for (const auto& e : entries) out << to_json(e).dump() << '\n';
  if (!out) throw Error(Errc::IoFailure, "write failed: " + path.string());
}

void DidRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::vector<DidLogEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(Errc::Malformed, path.string() + ": " + e.what());
    }
    entries.push_back(did_entry_from_json(j));
  }
  load_log(entries);
}

}  // namespace realcred
