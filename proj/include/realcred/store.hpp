#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "realcred/did.hpp"
#include "realcred/process.hpp"
#include "realcred/revocation.hpp"
#include "realcred/status_list.hpp"

struct sqlite3;

namespace realcred {

struct OfferRecord {
  std::string offer_id;
  std::string process_id;
  std::string created;
  std::string expires;
  std::optional<std::string> consumed_at;
  nlohmann::json credentials = nlohmann::json::array();
  friend bool operator==(const OfferRecord&, const OfferRecord&) = default;
};

struct StoredCredential {
  CredentialRecord record;
  nlohmann::json body;
};

/// Everything one operation changes, written in a single transaction.
struct StoreCommit {
  std::optional<Process> process;
  std::vector<StatusList> lists;
  std::vector<StoredCredential> credentials;
  std::optional<OfferRecord> offer;
};

/// Embedded SQLite store. Tables:
///   processes(process_id, holder_did, state, revision, created, body)
///   submissions(process_id, doc_id, position, kind, payload)
///   corrections(process_id, seq, doc_id, label, idx, old_value, new_value, issuer_did, timestamp)  append-only
///   transitions(process_id, seq, from_state, to_state, operation, at)  append-only
///   credentials(credential_id, process_id, status_list_id, status_list_index, body)
///   status_lists(list_id, position, capacity, version, allocated, bits)
///   offers(offer_id, process_id, created, expires, consumed_at, credentials)
///   did_log(seq, uri, body)
///   keys(name, secret)
/// Internally synchronized (one connection).
class Store {
 public:
  /// Opens or creates the database file; ":memory:" gives a private store.
  explicit Store(const std::filesystem::path& path);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  /// Called at "begin", "before_commit" and "after_commit" inside `commit`.
  /// A throwing hook before the commit rolls the transaction back, which is
  /// how tests simulate a crash mid-write.
  using FaultHook = std::function<void(std::string_view point)>;
  void set_fault_hook(FaultHook hook);

  /// Error(StorageFailure) on any SQLite error; nothing is written then.
  void commit(const StoreCommit& change);

  std::vector<Process> load_processes() const;
  std::optional<Process> load_process(const std::string& process_id) const;

  std::vector<StatusList> load_status_lists() const;
  std::vector<CredentialRecord> load_credential_records() const;
  std::optional<nlohmann::json> load_credential(const std::string& credential_id) const;

  std::optional<OfferRecord> load_offer(const std::string& offer_id) const;
  /// Marks the offer consumed if it still is not. Returns false when it was.
  bool consume_offer(const std::string& offer_id, const std::string& at);

  void append_did(const DidLogEntry& entry);
  std::vector<DidLogEntry> load_did_log() const;

  void save_key(const std::string& name, std::span<const unsigned char> secret);
  std::optional<std::vector<unsigned char>> load_key(const std::string& name) const;

 private:
  void exec(const char* sql) const;

  sqlite3* db_ = nullptr;
  mutable std::mutex mu_;
  FaultHook hook_;
};

}  // namespace realcred
