#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "realcred/credential.hpp"

namespace realcred {

struct CredentialRecord {
  std::string credential_id;
  std::string process_id;
  std::string status_list_id;
  std::uint64_t status_list_index = 0;
  friend bool operator==(const CredentialRecord&, const CredentialRecord&) = default;
};

/// Owns one issuer's status lists and the credential → slot index. Each
/// mutation re-signs and republishes the affected list. Internally
/// synchronized; list versions increase monotonically.
class StatusAuthority {
 public:
  StatusAuthority(KeyPair issuer, std::size_t list_capacity = kDefaultStatusListCapacity,
                  std::string list_prefix = "status-list-");
  StatusAuthority(const StatusAuthority&) = delete;
  StatusAuthority& operator=(const StatusAuthority&) = delete;

  const KeyPair& issuer() const noexcept { return issuer_; }
  std::string issuer_did() const { return did_for_key(issuer_.public_key); }

  /// Issues into the current list, opening a new list when it is full.
  VerifiableCredential issue(const nlohmann::json& subject, const DidRegistry& registry, const std::string& process_id,
                             Timestamp now, const IssueOptions& options = {});

  /// Returns the id of the list that changed. Error(UnknownCredential).
  std::string set_state(const std::string& credential_id, CredentialState state, Timestamp now);
  std::string revoke_credential(const std::string& credential_id, Timestamp now) {
    return set_state(credential_id, CredentialState::Revoked, now);
  }
  /// Revokes every credential of the process. Error(UnknownProcess) if it has none.
  std::vector<std::string> revoke_process(const std::string& process_id, Timestamp now);

  CredentialState state_of(const std::string& credential_id) const;
  std::vector<std::string> credentials_of(const std::string& process_id) const;
  std::optional<nlohmann::json> published(const std::string& list_id) const;
  std::optional<StatusList> list(const std::string& list_id) const;
  std::vector<StatusList> lists() const;
  std::vector<CredentialRecord> records() const;

  /// Replaces all state from persisted lists and records and republishes.
  void restore(std::vector<StatusList> lists, std::vector<CredentialRecord> records, Timestamp now);

 private:
  StatusList& open_list_locked();
  void publish_locked(const StatusList& list, Timestamp now);

  KeyPair issuer_;
  std::size_t capacity_;
  std::string prefix_;
  mutable std::mutex mu_;
  std::map<std::string, StatusList> lists_;
  std::vector<std::string> list_order_;
  std::map<std::string, CredentialRecord> records_;
  std::map<std::string, nlohmann::json> published_;
};

}  // namespace realcred
