#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <thread>

#include <gtest/gtest.h>
#include <zlib.h>

#include "realcred/credential.hpp"
#include "realcred/error.hpp"
#include "realcred/revocation.hpp"

namespace realcred {
namespace {

using nlohmann::json;
using namespace std::chrono_literals;

KeyPair key_from(unsigned char b) {
  std::array<unsigned char, 32> seed{};
  seed.fill(b);
  return KeyPair::from_seed(seed);
}

const Timestamp kNow = *parse_rfc3339("2025-03-01T12:00:00Z");

std::optional<json> some(const json& j) { return std::optional<json>(std::in_place, j); }

template <class F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::InvalidArgument;
}

TEST(Canonical, SortsKeysAtEveryDepth) {
  EXPECT_EQ(canonicalize(json::parse(R"({"b":1,"a":2})")), R"({"a":2,"b":1})");
  EXPECT_EQ(canonicalize(json::parse(R"({"z":{"y":1,"x":2}})")), R"({"z":{"x":2,"y":1}})");
  EXPECT_EQ(canonicalize(json::parse(R"({ "a" : [ 3, {"d":1,"c":true} ], "n": null })")),
            R"({"a":[3,{"c":true,"d":1}],"n":null})");
}

TEST(Canonical, InsertionOrderIndependent) {
  json a, b;
  a["issuer"] = "x";
  a["id"] = "1";
  a["credentialSubject"]["NIF"] = "123456789";
  a["credentialSubject"]["FIRST_NAME"] = "Ana";
  b["credentialSubject"]["FIRST_NAME"] = "Ana";
  b["credentialSubject"]["NIF"] = "123456789";
  b["id"] = "1";
  b["issuer"] = "x";
  EXPECT_EQ(canonicalize(a), canonicalize(b));
}

TEST(Canonical, NumbersAndStrings) {
  EXPECT_EQ(canonicalize(json::parse("[0.1, 1e3, -0.0, 12]")), "[0.1,1000.0,-0.0,12]");
  EXPECT_EQ(canonicalize(json("João \"x\"\n")), "\"João \\\"x\\\"\\n\"");
  EXPECT_EQ(code_of([] { canonicalize(json(std::string("\xff"))); }), Errc::Malformed);
}

TEST(Canonical, InjectiveOnDistinctValues) {
  const std::vector<json> values = {json("1"), json(1), json(1.5), json::array({1}), json::object({{"1", 1}}),
                                    json(nullptr), json(true), json("true"), json::array(), json::object()};
  std::set<std::string> seen;
  for (const auto& v : values) EXPECT_TRUE(seen.insert(canonicalize(v)).second) << v;
}

TEST(Encoding, Base64urlRoundTrip) {
  std::mt19937 rng(1);
  for (int n = 0; n < 200; ++n) {
    std::vector<unsigned char> bytes(n);
    for (auto& b : bytes) b = static_cast<unsigned char>(rng());
    const auto text = base64url_encode(bytes);
    EXPECT_EQ(text.find_first_of("+/="), std::string::npos);
    EXPECT_EQ(base64url_decode(text), bytes);
  }
  EXPECT_FALSE(base64url_decode("A").has_value());
  EXPECT_FALSE(base64url_decode("AB=").has_value());
  EXPECT_FALSE(base64url_decode("AB+").has_value());
  EXPECT_FALSE(base64url_decode("AB").has_value() && base64url_decode("AF").has_value());  // non-zero trailing bits
}

TEST(Clock, Rfc3339) {
  EXPECT_EQ(format_rfc3339(kNow), "2025-03-01T12:00:00Z");
  EXPECT_EQ(format_rfc3339(Timestamp{}), "1970-01-01T00:00:00Z");
  EXPECT_EQ(*parse_rfc3339("1970-01-01T00:00:01Z"), Timestamp{1s});
  for (auto bad : {"2025-02-30T00:00:00Z", "2025-03-01T12:00:00", "2025-03-01 12:00:00Z", "2025-03-01T24:00:00Z",
                   "+025-03-01T12:00:00Z", "2025-3-01T12:00:00Z"}) {
    EXPECT_FALSE(parse_rfc3339(bad).has_value()) << bad;
  }
}

TEST(Did, UriForm) {
  const auto kp = key_from(7);
  const auto uri = did_for_key(kp.public_key);
  ASSERT_EQ(uri.size(), kDidPrefix.size() + 16);
  EXPECT_EQ(uri.rfind("did:local:", 0), 0u);
  for (char c : uri.substr(kDidPrefix.size())) EXPECT_TRUE((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'));
  EXPECT_EQ(uri, did_for_key(key_from(7).public_key));
  EXPECT_NE(uri, did_for_key(key_from(8).public_key));
}

TEST(Did, RegisterResolveDuplicate) {
  DidRegistry reg;
  const auto kp = key_from(1);
  const auto uri = reg.register_key(kp, kNow);
  EXPECT_EQ(reg.resolve(uri), kp.public_key);
  EXPECT_FALSE(reg.resolve("did:local:0000000000000000").has_value());
  EXPECT_EQ(code_of([&] { reg.register_key(kp, kNow); }), Errc::DuplicateDid);
  const auto other = key_from(2);
  const auto wrong_proof = sign(kp.secret_key, did_for_key(other.public_key));
  EXPECT_EQ(code_of([&] { reg.register_public_key(other.public_key, wrong_proof, kNow); }), Errc::BadSignature);
  EXPECT_EQ(reg.size(), 1u);
}

TEST(Did, LogPersistsAndDetectsTampering) {
  DidRegistry reg;
  for (unsigned char b = 1; b <= 4; ++b) reg.register_key(key_from(b), kNow + std::chrono::seconds(b));
  const auto path = std::filesystem::temp_directory_path() / "realcred_did_log.jsonl";
  reg.save(path);
  DidRegistry loaded;
  loaded.load(path);
  EXPECT_EQ(loaded.log(), reg.log());
  EXPECT_EQ(loaded.resolve(did_for_key(key_from(3).public_key)), key_from(3).public_key);
  std::filesystem::remove(path);

  const auto log = reg.log();
  auto tampered = log;
  tampered[1].created = "2030-01-01T00:00:00Z";
  EXPECT_EQ(code_of([&] { loaded.load_log(tampered); }), Errc::Malformed);
  tampered = log;
  tampered.erase(tampered.begin() + 1);
  EXPECT_EQ(code_of([&] { loaded.load_log(tampered); }), Errc::Malformed);
  tampered = log;
  std::swap(tampered[2].public_key, tampered[3].public_key);
  EXPECT_EQ(code_of([&] { loaded.load_log(tampered); }), Errc::Malformed);
  EXPECT_EQ(loaded.log(), reg.log());  // failed loads leave it unchanged
}

struct Fixture : ::testing::Test {
  DidRegistry registry;
  KeyPair issuer = key_from(42);
  void SetUp() override { registry.register_key(issuer, kNow); }
};

using Issue = Fixture;

TEST_F(Issue, IssueThenVerifyValid) {
  StatusList list("sl-1", 16);
  auto vc = issue_credential({{"NIF", "123456789"}}, issuer, registry, &list, kNow);
  const auto published = to_json(encode_status_list(list, issuer, kNow));
  auto resolver = [&](const std::string& id) -> std::optional<json> {
    if (id == "sl-1") return some(published);
    return std::nullopt;
  };
  const auto r = verify_credential(to_json(vc), registry, resolver, kNow + 1h);
  EXPECT_EQ(r.status, VerificationStatus::Valid) << r.reason;
  ASSERT_EQ(r.checks.size(), 5u);
  for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << c.name;
}

TEST_F(Issue, JsonFieldNames) {
  StatusList list("sl-1", 16);
  list.allocate();
  auto j = to_json(issue_credential({{"A", "b"}}, issuer, registry, &list, kNow));
  for (auto key : {"@context", "id", "type", "issuer", "validFrom", "validUntil", "credentialSubject", "credentialStatus",
                   "proof"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j.size(), 9u);
  EXPECT_EQ(j["@context"][0], "https://www.w3.org/ns/credentials/v2");
  EXPECT_EQ(j["credentialStatus"], (json{{"id", "sl-1"}, {"statusListIndex", "1"}, {"statusPurpose", "revocation"}}));
  EXPECT_EQ(j["proof"]["type"], "Ed25519Signature-local");
  EXPECT_EQ(j["proof"]["verificationMethod"], did_for_key(issuer.public_key));
  EXPECT_EQ(base64url_decode(j["proof"]["proofValue"].get<std::string>())->size(), 64u);
  EXPECT_EQ(j["validUntil"], "2026-03-01T12:00:00Z");
  EXPECT_EQ(credential_from_json(j), credential_from_json(json::parse(j.dump())));
}

TEST_F(Issue, Errors) {
  StatusList list("sl-1", 2);
  IssueOptions zero;
  zero.validity_days = 0;
  EXPECT_EQ(code_of([&] { issue_credential({}, issuer, registry, &list, kNow, zero); }), Errc::InvalidValidity);
  EXPECT_EQ(code_of([&] { issue_credential({}, key_from(9), registry, &list, kNow); }), Errc::UnregisteredIssuer);
  EXPECT_EQ(list.allocated(), 0u);  // failed issuance consumes no slot
  auto a = issue_credential(json::object(), issuer, registry, &list, kNow);
  auto b = issue_credential(json::object(), issuer, registry, &list, kNow);
  EXPECT_NE(a.id, b.id);
  EXPECT_NE(a.credential_status->status_list_index, b.credential_status->status_list_index);
  EXPECT_EQ(code_of([&] { issue_credential(json::object(), issuer, registry, &list, kNow); }), Errc::ListFull);
}

TEST_F(Issue, DeterministicSignature) {
  IssueOptions opts;
  opts.id = "urn:uuid:fixed";
  auto a = issue_credential({{"X", "1"}}, issuer, registry, nullptr, kNow, opts);
  auto b = issue_credential({{"X", "1"}}, issuer, registry, nullptr, kNow, opts);
  EXPECT_EQ(a, b);
}

using Tamper = Fixture;

TEST_F(Tamper, EverySingleByteMutationFails) {
  StatusList list("sl-1", 16);
  IssueOptions opts;
  opts.id = "urn:uuid:0f0e";
  const auto vc = to_json(issue_credential({{"NIF", "123456789"}, {"NAME", "Ana Sá"}}, issuer, registry, &list, kNow, opts));
  const auto published = to_json(encode_status_list(list, issuer, kNow));
  auto resolver = [&](const std::string&) -> std::optional<json> { return some(published); };
  ASSERT_EQ(verify_credential(vc, registry, resolver, kNow).status, VerificationStatus::Valid);

  const std::string canonical = signing_input(vc);
  std::size_t mutations = 0, rejected = 0;
  for (std::size_t pos = 0; pos < canonical.size(); ++pos) {
    for (int bit = 0; bit < 8; ++bit) {
      std::string bytes = canonical;
      bytes[pos] = static_cast<char>(bytes[pos] ^ (1 << bit));
      ++mutations;
      json mutated;
      try {
        mutated = json::parse(bytes);
      } catch (const json::exception&) {
        ++rejected;  // unparseable input never verifies
        continue;
      }
      if (mutated.is_object()) mutated["proof"] = vc["proof"];
      if (verify_credential(mutated, registry, resolver, kNow).status != VerificationStatus::Valid) ++rejected;
    }
  }
  EXPECT_EQ(rejected, mutations);
  EXPECT_EQ(mutations, canonical.size() * 8);
}

TEST_F(Tamper, ProofMutations) {
  const auto vc = to_json(issue_credential({{"K", "v"}}, issuer, registry, nullptr, kNow));
  auto none = [](const std::string&) -> std::optional<json> { return std::nullopt; };
  auto j = vc;
  j.erase("proof");
  EXPECT_EQ(verify_credential(j, registry, none, kNow).reason, "BAD_SIGNATURE");
  j = vc;
  j["proof"]["verificationMethod"] = "did:local:0000000000000000";
  EXPECT_EQ(verify_credential(j, registry, none, kNow).reason, "BAD_SIGNATURE");
  j = vc;
  auto pv = j["proof"]["proofValue"].get<std::string>();
  pv[3] = pv[3] == 'A' ? 'B' : 'A';
  j["proof"]["proofValue"] = pv;
  EXPECT_EQ(verify_credential(j, registry, none, kNow).reason, "BAD_SIGNATURE");
  j = vc;
  j["issuer"] = "did:local:ffffffffffffffff";
  const auto r = verify_credential(j, registry, none, kNow);
  EXPECT_EQ(r.reason, "UNKNOWN_ISSUER");
  ASSERT_EQ(r.checks.size(), 1u);
  EXPECT_FALSE(r.checks[0].passed);
}

class Verify : public Fixture {
 protected:
  StatusList list{"sl-9", 64};
  int resolver_calls = 0;
  json published;
  StatusResolver resolver = [this](const std::string& id) -> std::optional<json> {
    ++resolver_calls;
    if (id != list.id()) return std::nullopt;
    return some(published);
  };
  void publish() { published = to_json(encode_status_list(list, issuer, kNow)); }
  json issue(int days = 30) {
    IssueOptions o;
    o.validity_days = days;
    return to_json(issue_credential({{"A", "1"}}, issuer, registry, &list, kNow, o));
  }
};

TEST_F(Verify, StatusStates) {
  const auto vc = issue();
  const std::size_t idx = std::stoul(vc["credentialStatus"]["statusListIndex"].get<std::string>());
  publish();
  EXPECT_EQ(verify_credential(vc, registry, resolver, kNow).status, VerificationStatus::Valid);
  list.set(idx, CredentialState::Suspended);
  publish();
  EXPECT_EQ(verify_credential(vc, registry, resolver, kNow).status, VerificationStatus::Suspended);
  list.set(idx, CredentialState::Valid);
  publish();
  EXPECT_EQ(verify_credential(vc, registry, resolver, kNow).status, VerificationStatus::Valid);
  list.set(idx, CredentialState::Revoked);
  publish();
  const auto r = verify_credential(vc, registry, resolver, kNow);
  EXPECT_EQ(r.status, VerificationStatus::Revoked);
  EXPECT_TRUE(r.checks[1].passed);   // signature green
  EXPECT_FALSE(r.checks.back().passed);  // status red
  EXPECT_EQ(r.checks.back().name, "status");
}

TEST_F(Verify, ExpiredBeatsRevoked) {
  const auto vc = issue(1);
  list.set(0, CredentialState::Revoked);
  publish();
  const auto r = verify_credential(vc, registry, resolver, kNow + std::chrono::days{2});
  EXPECT_EQ(r.status, VerificationStatus::Expired);
  EXPECT_EQ(resolver_calls, 0);
  EXPECT_EQ(verify_credential(vc, registry, resolver, kNow + std::chrono::days{1}).status, VerificationStatus::Revoked);
}

TEST_F(Verify, NotYetValid) {
  const auto vc = issue();
  publish();
  const auto r = verify_credential(vc, registry, resolver, kNow - 1s);
  EXPECT_EQ(r.status, VerificationStatus::Invalid);
  EXPECT_EQ(r.reason, "NOT_YET_VALID");
}

TEST_F(Verify, SingleResolverCall) {
  const auto vc = issue();
  publish();
  for (int i = 0; i < 10; ++i) verify_credential(vc, registry, resolver, kNow);
  EXPECT_EQ(resolver_calls, 10);
}

TEST_F(Verify, StatusUnavailable) {
  const auto vc = issue();
  auto none = [](const std::string&) -> std::optional<json> { return std::nullopt; };
  EXPECT_EQ(verify_credential(vc, registry, none, kNow).reason, "STATUS_UNAVAILABLE");
  // a list signed by someone else is not a source of truth
  const auto mallory = key_from(66);
  registry.register_key(mallory, kNow);
  auto forged = to_json(encode_status_list(list, mallory, kNow));
  auto forged_resolver = [&](const std::string&) -> std::optional<json> { return some(forged); };
  EXPECT_EQ(verify_credential(vc, registry, forged_resolver, kNow).reason, "STATUS_UNAVAILABLE");
  publish();
  published["credentialSubject"]["encodedList"] = "AAAA";
  EXPECT_EQ(verify_credential(vc, registry, resolver, kNow).reason, "STATUS_UNAVAILABLE");
}

TEST_F(Verify, SignedButMalformed) {
  VerifiableCredential vc;
  vc.id = "urn:x";
  vc.issuer = did_for_key(issuer.public_key);
  vc.valid_from = "2025-03-01T12:00:00Z";
  vc.valid_until = "2025-03-01T11:00:00Z";  // before validFrom
  sign_credential(vc, issuer, kNow);
  const auto r = verify_credential(to_json(vc), registry, resolver, kNow);
  EXPECT_EQ(r.reason, "MALFORMED");
  EXPECT_EQ(r.checks.size(), 3u);
}

TEST(StatusListBits, NewListAllValid) {
  StatusList list("l", 16);
  EXPECT_EQ(list.get(5), CredentialState::Valid);
  EXPECT_EQ(list.bytes().size(), 4u);
  EXPECT_EQ(list.version(), 0u);
}

TEST(StatusListBits, SetIsLocalAndBumpsVersion) {
  StatusList list("l", 16);
  list.set(3, CredentialState::Revoked);
  EXPECT_EQ(list.get(3), CredentialState::Revoked);
  EXPECT_EQ(list.get(2), CredentialState::Valid);
  EXPECT_EQ(list.get(4), CredentialState::Valid);
  EXPECT_EQ(list.bytes(), (std::vector<std::uint8_t>{0x01, 0x00, 0x00, 0x00}));
  EXPECT_EQ(list.version(), 1u);
  list.set(3, CredentialState::Revoked);
  EXPECT_EQ(list.version(), 2u);
  list.set(0, CredentialState::Suspended);
  EXPECT_EQ(list.bytes()[0], 0x81);
  EXPECT_EQ(code_of([&] { list.set(3, CredentialState::Valid); }), Errc::IllegalTransition);
  EXPECT_EQ(code_of([&] { list.set(16, CredentialState::Valid); }), Errc::OutOfRange);
  EXPECT_EQ(code_of([&] { list.get(16); }), Errc::OutOfRange);
  EXPECT_EQ(list.version(), 3u);
}

TEST(StatusListBits, PaddingAndForbiddenValue) {
  EXPECT_EQ(code_of([] { StatusList::from_bytes("l", 16, {0x03, 0, 0, 0}, 0); }), Errc::CorruptList);
  EXPECT_EQ(code_of([] { StatusList::from_bytes("l", 5, {0, 0x10}, 0); }), Errc::Malformed);  // padding bits
  EXPECT_EQ(code_of([] { StatusList::from_bytes("l", 16, {0, 0, 0}, 0); }), Errc::Malformed);
  EXPECT_EQ(StatusList::from_bytes("l", 5, {0x00, 0x80}, 4).get(4), CredentialState::Suspended);
}

StatusList random_list(std::mt19937_64& rng, std::size_t capacity, double density) {
  StatusList list("urn:list:" + std::to_string(capacity), capacity);
  std::bernoulli_distribution hit(density);
  std::uniform_int_distribution<int> state(1, 2);
  if (density >= 1e-9) {
    for (std::size_t i = 0; i < capacity; ++i) {
      if (hit(rng)) list.set(i, static_cast<CredentialState>(state(rng)));
    }
  }
  return list;
}

TEST(StatusListCodec, RoundTripRandomLists) {
  std::mt19937_64 rng(2024);
  const std::size_t capacities[] = {16, 1024, 131072};
  for (int n = 0; n < 1000; ++n) {
    const auto cap = capacities[n % 3];
    const double density = cap == 131072 ? 0.001 : std::uniform_real_distribution<double>(0, 1)(rng);
    const auto list = random_list(rng, cap, density);
    const auto raw = decode_bitstring(encode_bitstring(list.bytes()), status_list_byte_length(cap));
    ASSERT_EQ(StatusList::from_bytes(list.id(), cap, raw, list.version()), list);
  }
}

TEST(StatusListCodec, SparseListCompresses) {
  std::mt19937_64 rng(5);
  StatusList list("l", 131072);
  std::uniform_int_distribution<std::size_t> pick(0, 131071);
  for (int i = 0; i < 1311; ++i) list.set(pick(rng), CredentialState::Revoked);
  const auto encoded = encode_bitstring(list.bytes());
  const auto compressed = base64url_decode(encoded)->size();
  EXPECT_LT(compressed, list.bytes().size() / 10);
}

TEST(StatusListCodec, UsesZlibDeflate) {
  StatusList list("l", 16);
  list.set(3, CredentialState::Revoked);
  const auto packed = *base64url_decode(encode_bitstring(list.bytes()));
  std::vector<unsigned char> out(16);
  uLongf len = out.size();
  ASSERT_EQ(uncompress(out.data(), &len, packed.data(), packed.size()), Z_OK);
  out.resize(len);
  EXPECT_EQ(out, (std::vector<unsigned char>{0x01, 0x00, 0x00, 0x00}));
}

TEST(StatusListCodec, MalformedInput) {
  EXPECT_EQ(code_of([] { decode_bitstring("!!", 4); }), Errc::Malformed);
  EXPECT_EQ(code_of([] { decode_bitstring("AAAA", 4); }), Errc::Malformed);
  const auto enc = encode_bitstring(std::vector<std::uint8_t>(8, 0));
  EXPECT_EQ(code_of([&] { decode_bitstring(enc, 4); }), Errc::Malformed);
  EXPECT_EQ(code_of([&] { decode_bitstring(enc, 9); }), Errc::Malformed);
  EXPECT_EQ(decode_bitstring(enc, 8).size(), 8u);
}

using StatusCredential = Fixture;

TEST_F(StatusCredential, EncodeDecode) {
  StatusList list("sl-7", 64);
  list.set(3, CredentialState::Revoked);
  list.set(9, CredentialState::Suspended);
  const auto vc = to_json(encode_status_list(list, issuer, kNow));
  const auto& s = vc["credentialSubject"];
  EXPECT_EQ(s["statusPurpose"], "revocation");
  EXPECT_EQ(s["statusSize"], 2);
  EXPECT_TRUE(s["encodedList"].is_string());
  auto decoded = decode_status_list(vc, registry);
  EXPECT_EQ(decoded.bytes(), list.bytes());
  EXPECT_EQ(decoded.version(), list.version());
  EXPECT_EQ(decoded.id(), "sl-7");
}

TEST_F(StatusCredential, TamperedEncodedList) {
  StatusList list("sl-7", 64);
  auto vc = to_json(encode_status_list(list, issuer, kNow));
  auto enc = vc["credentialSubject"]["encodedList"].get<std::string>();
  for (std::size_t i = 0; i < enc.size(); ++i) {
    auto j = vc;
    auto t = enc;
    t[i] = t[i] == 'A' ? 'B' : 'A';
    j["credentialSubject"]["encodedList"] = t;
    const auto code = code_of([&] { decode_status_list(j, registry); });
    EXPECT_TRUE(code == Errc::BadSignature || code == Errc::CorruptList) << to_string(code);
  }
}

TEST_F(StatusCredential, SignedButInvalidContent) {
  StatusList list("sl-7", 16);
  auto vc = encode_status_list(list, issuer, kNow);
  vc.credential_subject.erase("statusSize");
  sign_credential(vc, issuer, kNow);
  EXPECT_EQ(code_of([&] { decode_status_list(to_json(vc), registry); }), Errc::Malformed);

  vc = encode_status_list(list, issuer, kNow);
  vc.credential_subject["encodedList"] = encode_bitstring({0x0C, 0, 0, 0});  // entry 1 = 11
  sign_credential(vc, issuer, kNow);
  EXPECT_EQ(code_of([&] { decode_status_list(to_json(vc), registry); }), Errc::CorruptList);

  vc = encode_status_list(list, key_from(99), kNow);
  EXPECT_EQ(code_of([&] { decode_status_list(to_json(vc), registry); }), Errc::BadSignature);
}

using Authority = Fixture;

TEST_F(Authority, RevokeOneOfThree) {
  StatusAuthority auth(issuer, 64);
  std::vector<json> vcs;
  for (int i = 0; i < 3; ++i) vcs.push_back(to_json(auth.issue({{"N", i}}, registry, "p1", kNow)));
  auto resolver = [&](const std::string& id) { return auth.published(id); };
  auth.revoke_credential(vcs[1]["id"], kNow);
  EXPECT_EQ(verify_credential(vcs[0], registry, resolver, kNow).status, VerificationStatus::Valid);
  EXPECT_EQ(verify_credential(vcs[1], registry, resolver, kNow).status, VerificationStatus::Revoked);
  EXPECT_EQ(verify_credential(vcs[2], registry, resolver, kNow).status, VerificationStatus::Valid);
  auth.revoke_process("p1", kNow);
  for (const auto& vc : vcs) EXPECT_EQ(verify_credential(vc, registry, resolver, kNow).status, VerificationStatus::Revoked);
}

TEST_F(Authority, IdempotentRevocationBumpsVersion) {
  StatusAuthority auth(issuer, 64);
  const auto vc = auth.issue(json::object(), registry, "p", kNow);
  auth.revoke_credential(vc.id, kNow);
  const auto v1 = auth.list(vc.credential_status->status_list_id)->version();
  auth.revoke_credential(vc.id, kNow);
  const auto v2 = auth.list(vc.credential_status->status_list_id)->version();
  EXPECT_GT(v2, v1);
  EXPECT_EQ(auth.state_of(vc.id), CredentialState::Revoked);
  EXPECT_EQ(auth.published(vc.credential_status->status_list_id)->at("credentialSubject").at("version"), v2);
  EXPECT_EQ(code_of([&] { auth.set_state(vc.id, CredentialState::Valid, kNow); }), Errc::IllegalTransition);
}

TEST_F(Authority, SuspendAndReinstate) {
  StatusAuthority auth(issuer, 64);
  const auto vc = to_json(auth.issue(json::object(), registry, "p", kNow));
  auto resolver = [&](const std::string& id) { return auth.published(id); };
  auth.set_state(vc["id"], CredentialState::Suspended, kNow);
  EXPECT_EQ(verify_credential(vc, registry, resolver, kNow).status, VerificationStatus::Suspended);
  auth.set_state(vc["id"], CredentialState::Valid, kNow);
  EXPECT_EQ(verify_credential(vc, registry, resolver, kNow).status, VerificationStatus::Valid);
}

TEST_F(Authority, UnknownTargets) {
  StatusAuthority auth(issuer, 64);
  EXPECT_EQ(code_of([&] { auth.revoke_credential("urn:nope", kNow); }), Errc::UnknownCredential);
  EXPECT_EQ(code_of([&] { auth.revoke_process("nope", kNow); }), Errc::UnknownProcess);
}

TEST_F(Authority, OpensNewListWhenFull) {
  StatusAuthority auth(issuer, 2);
  std::set<std::string> lists;
  for (int i = 0; i < 5; ++i) lists.insert(auth.issue(json::object(), registry, "p", kNow).credential_status->status_list_id);
  EXPECT_EQ(lists.size(), 3u);
  EXPECT_EQ(auth.lists().size(), 3u);
  for (const auto& id : lists) EXPECT_TRUE(auth.published(id).has_value());
}

TEST_F(Authority, RestoreRoundTrip) {
  StatusAuthority a(issuer, 4);
  std::vector<json> vcs;
  for (int i = 0; i < 6; ++i) vcs.push_back(to_json(a.issue(json::object(), registry, i < 3 ? "p1" : "p2", kNow)));
  a.revoke_process("p1", kNow);
  StatusAuthority b(issuer, 4);
  b.restore(a.lists(), a.records(), kNow);
  EXPECT_EQ(b.lists(), a.lists());
  EXPECT_EQ(b.records(), a.records());
  auto resolver = [&](const std::string& id) { return b.published(id); };
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(verify_credential(vcs[i], registry, resolver, kNow).status,
              i < 3 ? VerificationStatus::Revoked : VerificationStatus::Valid);
  }
  // new issuance continues after the restored allocation
  auto next = b.issue(json::object(), registry, "p3", kNow);
  EXPECT_EQ(next.credential_status->status_list_id, "status-list-2");
  EXPECT_EQ(next.credential_status->status_list_index, 2u);
}

TEST_F(Authority, ConcurrentMutationsKeepVersionsMonotonic) {
  StatusAuthority auth(issuer, 256);
  std::vector<std::string> ids;
  for (int i = 0; i < 64; ++i) ids.push_back(auth.issue(json::object(), registry, "p", kNow).id);
  std::atomic<bool> stop{false};
  std::uint64_t last_seen = 0;
  bool monotonic = true;
  std::thread reader([&] {
    while (!stop) {
      auto pub = auth.published("status-list-1");
      const auto v = pub->at("credentialSubject").at("version").get<std::uint64_t>();
      if (v < last_seen) monotonic = false;
      last_seen = v;
    }
  });
  std::vector<std::thread> writers;
  for (int t = 0; t < 4; ++t) {
    writers.emplace_back([&, t] {
      for (int k = 0; k < 50; ++k) auth.set_state(ids[(t * 16 + k) % 64], CredentialState::Suspended, kNow);
    });
  }
  for (auto& w : writers) w.join();
  stop = true;
  reader.join();
  EXPECT_TRUE(monotonic);
  EXPECT_EQ(auth.list("status-list-1")->version(), 200u);
}

}  // namespace
}  // namespace realcred
