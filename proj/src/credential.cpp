#include "realcred/credential.hpp"

#include <algorithm>

#include "realcred/error.hpp"

namespace realcred {

using nlohmann::json;

std::string canonicalize(const json& value) {
  // nlohmann::json keeps object members in a std::map, so dump() already
  // emits sorted keys; strict handling rejects invalid UTF-8.
  try {
    return value.dump(-1, ' ', false, json::error_handler_t::strict);
  } catch (const json::exception& e) {
    throw Error(Errc::Malformed, std::string("not canonicalizable: ") + e.what());
  }
}

std::string signing_input(const json& credential) {
  if (!credential.is_object() || !credential.contains("proof")) return canonicalize(credential);
  json copy = credential;
  copy.erase("proof");
  return canonicalize(copy);
}

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(Errc::Malformed, what); }

const json& member(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) malformed(std::string("missing ") + key);
  return *it;
}

std::string string_member(const json& j, const char* key) {
  const auto& v = member(j, key);
  if (!v.is_string()) malformed(std::string(key) + " must be a string");
  return v.get<std::string>();
}

std::vector<std::string> string_list(const json& j, const char* key) {
  const auto& v = member(j, key);
  if (!v.is_array() || v.empty()) malformed(std::string(key) + " must be a non-empty array");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) malformed(std::string(key) + " entries must be strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::uint64_t parse_index(const std::string& s) {
  if (s.empty() || s.size() > 19 || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
      (s.size() > 1 && s[0] == '0')) {
    malformed("statusListIndex must be a decimal string");
  }
  return std::stoull(s);
}

Timestamp timestamp_member(const json& j, const char* key) {
  auto t = parse_rfc3339(string_member(j, key));
  if (!t) malformed(std::string(key) + " is not an RFC 3339 UTC timestamp");
  return *t;
}

std::optional<Signature> signature_from(const std::string& b64) {
  auto raw = base64url_decode(b64);
  if (!raw || raw->size() != Signature{}.size()) return std::nullopt;
  Signature s;
  std::copy(raw->begin(), raw->end(), s.begin());
  return s;
}

}  // namespace

json to_json(const VerifiableCredential& vc) {
  json j = {{"@context", vc.context},      {"id", vc.id},
            {"type", vc.type},             {"issuer", vc.issuer},
            {"validFrom", vc.valid_from},  {"validUntil", vc.valid_until},
            {"credentialSubject", vc.credential_subject}};
  if (vc.credential_status) {
    j["credentialStatus"] = {{"id", vc.credential_status->status_list_id},
                             {"statusListIndex", std::to_string(vc.credential_status->status_list_index)},
                             {"statusPurpose", vc.credential_status->status_purpose}};
  }
  if (vc.proof) {
    j["proof"] = {{"type", vc.proof->type},
                  {"created", vc.proof->created},
                  {"verificationMethod", vc.proof->verification_method},
                  {"proofValue", base64url_encode(vc.proof->signature)}};
  }
  return j;
}

VerifiableCredential credential_from_json(const json& j) {
  if (!j.is_object()) malformed("credential must be an object");
  VerifiableCredential vc;
  vc.context = string_list(j, "@context");
  if (vc.context.front() != kCredentialsContext) malformed("@context must start with " + std::string(kCredentialsContext));
  vc.id = string_member(j, "id");
  if (vc.id.empty()) malformed("id must not be empty");
  vc.type = string_list(j, "type");
  if (std::find(vc.type.begin(), vc.type.end(), "VerifiableCredential") == vc.type.end()) {
    malformed("type must include VerifiableCredential");
  }
  vc.issuer = string_member(j, "issuer");
  if (vc.issuer.rfind(kDidPrefix, 0) != 0) malformed("issuer must be a " + std::string(kDidPrefix) + " uri");
  const Timestamp from = timestamp_member(j, "validFrom");
  const Timestamp until = timestamp_member(j, "validUntil");
  if (until <= from) malformed("validUntil must be after validFrom");
  vc.valid_from = format_rfc3339(from);
  vc.valid_until = format_rfc3339(until);
  vc.credential_subject = member(j, "credentialSubject");
  if (!vc.credential_subject.is_object()) malformed("credentialSubject must be an object");

  if (auto it = j.find("credentialStatus"); it != j.end()) {
    if (!it->is_object()) malformed("credentialStatus must be an object");
    StatusEntry s;
    s.status_list_id = string_member(*it, "id");
    s.status_list_index = parse_index(string_member(*it, "statusListIndex"));
    s.status_purpose = string_member(*it, "statusPurpose");
    if (s.status_purpose != kStatusPurpose) malformed("statusPurpose must be " + std::string(kStatusPurpose));
    vc.credential_status = std::move(s);
  }
  if (auto it = j.find("proof"); it != j.end()) {
    if (!it->is_object()) malformed("proof must be an object");
    Proof p;
    p.type = string_member(*it, "type");
    if (p.type != kProofType) malformed("unsupported proof type " + p.type);
    p.created = format_rfc3339(timestamp_member(*it, "created"));
    p.verification_method = string_member(*it, "verificationMethod");
    auto sig = signature_from(string_member(*it, "proofValue"));
    if (!sig) malformed("proofValue must be a base64url 64-byte signature");
    p.signature = *sig;
    vc.proof = std::move(p);
  }
  return vc;
}

void sign_credential(VerifiableCredential& vc, const KeyPair& issuer, Timestamp now) {
  vc.proof.reset();
  const std::string input = signing_input(to_json(vc));
  Proof p;
  p.created = format_rfc3339(now);
  p.verification_method = did_for_key(issuer.public_key);
  p.signature = sign(issuer.secret_key, input);
  vc.proof = std::move(p);
}

VerifiableCredential issue_credential(const json& subject_claims, const KeyPair& issuer, const DidRegistry& registry,
                                      StatusList* status_list, Timestamp now, const IssueOptions& options) {
  const std::string issuer_did = did_for_key(issuer.public_key);
  const auto registered = registry.resolve(issuer_did);
  if (!registered || *registered != issuer.public_key) throw Error(Errc::UnregisteredIssuer, issuer_did);
  if (options.validity_days <= 0) {
    throw Error(Errc::InvalidValidity, "validity_days must be positive, got " + std::to_string(options.validity_days));
  }
  if (!subject_claims.is_object()) throw Error(Errc::InvalidArgument, "subject claims must be an object");

  VerifiableCredential vc;
  vc.id = options.id.empty() ? random_urn_uuid() : options.id;
  for (const auto& t : options.extra_types) {
    if (std::find(vc.type.begin(), vc.type.end(), t) == vc.type.end()) vc.type.push_back(t);
  }
  vc.issuer = issuer_did;
  vc.valid_from = format_rfc3339(now);
  vc.valid_until = format_rfc3339(now + std::chrono::days{options.validity_days});
  vc.credential_subject = subject_claims;
  if (status_list) vc.credential_status = StatusEntry{status_list->id(), status_list->allocate()};
  sign_credential(vc, issuer, now);
  return vc;
}

VerifiableCredential encode_status_list(const StatusList& list, const KeyPair& issuer, Timestamp now) {
  VerifiableCredential vc;
  vc.id = list.id();
  vc.type.push_back(std::string(kStatusListCredentialType));
  vc.issuer = did_for_key(issuer.public_key);
  vc.valid_from = format_rfc3339(now);
  vc.valid_until = format_rfc3339(now + std::chrono::days{3650});
  vc.credential_subject = {{"id", list.id() + "#list"},
                           {"type", "BitstringStatusList"},
                           {"encodedList", encode_bitstring(list.bytes())},
                           {"statusPurpose", kStatusPurpose},
                           {"statusSize", kStatusSize},
                           {"capacity", list.capacity()},
                           {"version", list.version()}};
  sign_credential(vc, issuer, now);
  return vc;
}

namespace {

// Issuer key and signature over the canonical bytes; empty string when valid.
std::string check_signature(const json& credential, const PublicKey& key) {
  auto proof = credential.find("proof");
  if (proof == credential.end() || !proof->is_object()) return "missing proof";
  auto type = proof->find("type");
  auto method = proof->find("verificationMethod");
  auto value = proof->find("proofValue");
  if (type == proof->end() || *type != kProofType) return "unsupported proof type";
  if (method == proof->end() || *method != credential["issuer"]) return "verificationMethod is not the issuer";
  if (value == proof->end() || !value->is_string()) return "missing proofValue";
  const auto sig = signature_from(value->get<std::string>());
  if (!sig) return "proofValue is not a 64-byte base64url signature";
  std::string input;
  try {
    input = signing_input(credential);
  } catch (const Error&) {
    return "credential is not canonicalizable";
  }
  return verify_signature(key, input, *sig) ? std::string() : "signature does not verify";
}

std::optional<PublicKey> issuer_key(const json& credential, const DidRegistry& registry) {
  if (!credential.is_object()) return std::nullopt;
  auto it = credential.find("issuer");
  if (it == credential.end() || !it->is_string()) return std::nullopt;
  return registry.resolve(it->get<std::string>());
}

}  // namespace

StatusList decode_status_list(const json& credential, const DidRegistry& registry) {
  const auto key = issuer_key(credential, registry);
  if (!key) throw Error(Errc::BadSignature, "status list issuer is not resolvable");
  if (auto problem = check_signature(credential, *key); !problem.empty()) throw Error(Errc::BadSignature, problem);
  const auto vc = credential_from_json(credential);
  const auto& s = vc.credential_subject;
  auto need = [&](const char* key) -> const json& {
    auto it = s.find(key);
    if (it == s.end()) malformed(std::string("status list subject missing ") + key);
    return *it;
  };
  const auto& encoded = need("encodedList");
  const auto& purpose = need("statusPurpose");
  const auto& size = need("statusSize");
  const auto& capacity = need("capacity");
  const auto& version = need("version");
  if (!encoded.is_string()) malformed("encodedList must be a string");
  if (purpose != kStatusPurpose) malformed("statusPurpose must be " + std::string(kStatusPurpose));
  if (!size.is_number_integer() || size.get<std::int64_t>() != kStatusSize) malformed("statusSize must be 2");
  if (!capacity.is_number_unsigned() || capacity.get<std::uint64_t>() == 0 ||
      capacity.get<std::uint64_t>() > kMaxStatusListCapacity) {
    malformed("capacity out of range");
  }
  if (!version.is_number_unsigned()) malformed("version must be a non-negative integer");
  const auto cap = capacity.get<std::size_t>();
  auto raw = decode_bitstring(encoded.get<std::string>(), status_list_byte_length(cap));
  return StatusList::from_bytes(vc.id, cap, std::move(raw), version.get<std::uint64_t>());
}

std::string_view to_string(VerificationStatus s) noexcept {
  switch (s) {
    case VerificationStatus::Valid: return "Valid";
    case VerificationStatus::Invalid: return "Invalid";
    case VerificationStatus::Revoked: return "Revoked";
    case VerificationStatus::Suspended: return "Suspended";
    case VerificationStatus::Expired: return "Expired";
  }
  return "Invalid";
}

json to_json(const VerificationResult& r) {
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back({{"check", c.name}, {"passed", c.passed}});
  json j = {{"status", to_string(r.status)}, {"checks", std::move(checks)}};
  j["reason"] = r.reason.empty() ? json(nullptr) : json(r.reason);
  return j;
}

VerificationResult verify_credential(const json& credential, const DidRegistry& registry,
                                     const StatusResolver& resolver, Timestamp now) {
  VerificationResult r;
  auto fail = [&](const char* check, const char* reason, VerificationStatus status = VerificationStatus::Invalid) {
    r.checks.push_back({check, false});
    r.status = status;
    r.reason = status == VerificationStatus::Invalid ? reason : "";
    return r;
  };
  auto pass = [&](const char* check) { r.checks.push_back({check, true}); };

  const auto key = issuer_key(credential, registry);
  if (!key) return fail("issuer", "UNKNOWN_ISSUER");
  pass("issuer");

  if (!check_signature(credential, *key).empty()) return fail("signature", "BAD_SIGNATURE");
  pass("signature");

  VerifiableCredential vc;
  try {
    vc = credential_from_json(credential);
  } catch (const Error&) {
    return fail("schema", "MALFORMED");
  }
  pass("schema");

  if (now < *parse_rfc3339(vc.valid_from)) return fail("validity", "NOT_YET_VALID");
  if (now > *parse_rfc3339(vc.valid_until)) return fail("validity", "EXPIRED", VerificationStatus::Expired);
  pass("validity");

  if (!vc.credential_status) {
    r.status = VerificationStatus::Valid;
    return r;
  }
  const auto& entry = *vc.credential_status;
  const auto published = resolver ? resolver(entry.status_list_id) : std::nullopt;
  if (!published) return fail("status", "STATUS_UNAVAILABLE");
  CredentialState state;
  try {
    const auto list = decode_status_list(*published, registry);
    if (list.id() != entry.status_list_id || (*published)["issuer"] != vc.issuer ||
        entry.status_list_index >= list.capacity()) {
      return fail("status", "STATUS_UNAVAILABLE");
    }
    state = list.get(entry.status_list_index);
  } catch (const Error&) {
    return fail("status", "STATUS_UNAVAILABLE");
  }
  switch (state) {
    case CredentialState::Valid:
      pass("status");
      r.status = VerificationStatus::Valid;
      return r;
    case CredentialState::Revoked: return fail("status", "", VerificationStatus::Revoked);
    case CredentialState::Suspended: return fail("status", "", VerificationStatus::Suspended);
  }
  return r;
}

}  // namespace realcred
