#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "realcred/clock.hpp"
#include "realcred/crypto.hpp"
#include "realcred/did.hpp"
#include "realcred/status_list.hpp"

namespace realcred {

inline constexpr std::string_view kCredentialsContext = "https://www.w3.org/ns/credentials/v2";
inline constexpr std::string_view kProofType = "Ed25519Signature-local";
inline constexpr std::string_view kStatusPurpose = "revocation";
inline constexpr std::string_view kStatusListCredentialType = "BitstringStatusListCredential";

/// Sorted keys at every depth, no whitespace, shortest round-trip numbers.
std::string canonicalize(const nlohmann::json& value);
/// Canonical bytes of a credential with its "proof" member removed.
std::string signing_input(const nlohmann::json& credential);

struct StatusEntry {
  std::string status_list_id;
  std::uint64_t status_list_index = 0;
  std::string status_purpose = std::string(kStatusPurpose);
  friend bool operator==(const StatusEntry&, const StatusEntry&) = default;
};

struct Proof {
  std::string type = std::string(kProofType);
  std::string created;
  std::string verification_method;
  Signature signature{};
  friend bool operator==(const Proof&, const Proof&) = default;
};

struct VerifiableCredential {
  std::vector<std::string> context = {std::string(kCredentialsContext)};
  std::string id;
  std::vector<std::string> type = {"VerifiableCredential"};
  std::string issuer;
  std::string valid_from;
  std::string valid_until;
  nlohmann::json credential_subject = nlohmann::json::object();
  std::optional<StatusEntry> credential_status;
  std::optional<Proof> proof;
  friend bool operator==(const VerifiableCredential&, const VerifiableCredential&) = default;
};

nlohmann::json to_json(const VerifiableCredential& vc);
/// Shape check plus conversion; Error(Malformed) names the offending member.
VerifiableCredential credential_from_json(const nlohmann::json& j);

/// Adds a proof by `issuer` over the canonical form of `vc` minus proof.
void sign_credential(VerifiableCredential& vc, const KeyPair& issuer, Timestamp now);

struct IssueOptions {
  std::vector<std::string> extra_types;
  int validity_days = 365;
  /// Generated when empty.
  std::string id;
};

/// Errors: UnregisteredIssuer, InvalidValidity (validity_days <= 0), ListFull.
/// A slot is drawn from `status_list` only once every other check passed.
VerifiableCredential issue_credential(const nlohmann::json& subject_claims, const KeyPair& issuer,
                                      const DidRegistry& registry, StatusList* status_list, Timestamp now,
                                      const IssueOptions& options = {});

/// Signed status list credential with subject
/// { id, type, encodedList, statusPurpose, statusSize, capacity, version }.
VerifiableCredential encode_status_list(const StatusList& list, const KeyPair& issuer, Timestamp now);
/// Errors: BadSignature (unverifiable or unresolvable issuer), Malformed,
/// CorruptList (an entry holds 11).
StatusList decode_status_list(const nlohmann::json& credential, const DidRegistry& registry);

enum class VerificationStatus { Valid, Invalid, Revoked, Suspended, Expired };
std::string_view to_string(VerificationStatus s) noexcept;

struct CheckOutcome {
  std::string name;  // issuer, signature, schema, validity, status
  bool passed;
  friend bool operator==(const CheckOutcome&, const CheckOutcome&) = default;
};

struct VerificationResult {
  VerificationStatus status = VerificationStatus::Invalid;
  /// Set for Invalid: UNKNOWN_ISSUER, BAD_SIGNATURE, MALFORMED, NOT_YET_VALID
  /// or STATUS_UNAVAILABLE.
  std::string reason;
  /// Checks in evaluation order; stops at the first failure.
  std::vector<CheckOutcome> checks;
};

nlohmann::json to_json(const VerificationResult& r);

/// Fetches a status list credential by list id.
using StatusResolver = std::function<std::optional<nlohmann::json>(const std::string& list_id)>;

/// Check order: issuer resolvable, signature, schema shape, validity window,
/// status. The resolver is called at most once.
VerificationResult verify_credential(const nlohmann::json& credential, const DidRegistry& registry,
                                     const StatusResolver& resolver, Timestamp now);

}  // namespace realcred
