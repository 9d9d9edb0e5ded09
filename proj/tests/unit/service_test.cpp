#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <thread>

#include <gtest/gtest.h>

#include "../support/fixtures.hpp"
#include "../support/http_api.hpp"
#include "realcred/error.hpp"
#include "realcred/service.hpp"

namespace realcred {
namespace {

using nlohmann::json;
using testing::ApiClient;
using testing::case_batch;
using testing::clean_stream;
using testing::nif_mismatch_batch;
using testing::ServerHarness;
using S = ProcessState;

template <class F>
std::optional<Errc> code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

struct Crash {};

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("realcred-svc-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

class Service : public ::testing::Test {
 public:
  ServiceConfig config(bool async = false) const {
    ServiceConfig c;
    c.data_dir = dir.path();
    c.async_extraction = async;
    c.status_list_capacity = 1024;
    return c;
  }
  std::unique_ptr<CredentialService> open(bool async = false) {
    return std::make_unique<CredentialService>(config(async), [this] { return now.load(); });
  }
  std::optional<Process> stored(const std::string& id) {
    Store s(dir.path() / "realcred.db");
    return s.load_process(id);
  }

  TempDir dir;
  std::atomic<Timestamp> now{*parse_rfc3339("2025-06-01T10:00:00Z")};
};

ValidationInput approve(const std::string& issuer) { return {issuer, ValidationInput::Kind::Approve, {}, ""}; }

TEST_F(Service, HappyPathIssuesFourValidCredentials) {
  auto svc = open();
  const auto holder = svc->register_generated_did().uri;
  auto p = svc->create_process(holder);
  p = svc->submit(p.process_id, case_batch(generate_case(1)));
  EXPECT_EQ(p.state, S::PendingValidation);
  p = svc->validate(p.process_id, approve(svc->issuer_did()));
  EXPECT_EQ(p.state, S::ReadyToIssue);
  const auto offer = svc->issue(p.process_id);
  EXPECT_EQ(svc->get_process(p.process_id).state, S::Issued);
  const auto delivered = svc->redeem(offer.offer_id);
  ASSERT_EQ(delivered.at("credentials").size(), 4u);
  for (const auto& vc : delivered["credentials"]) EXPECT_EQ(svc->verify(vc).status, VerificationStatus::Valid);
}

TEST_F(Service, DistinctProcessIdsAndUnknownHolder) {
  auto svc = open();
  const auto holder = svc->register_generated_did().uri;
  EXPECT_NE(svc->create_process(holder).process_id, svc->create_process(holder).process_id);
  EXPECT_EQ(code_of([&] { svc->create_process("did:local:0123456789abcdef"); }), Errc::UnknownDid);
  EXPECT_EQ(code_of([&] { svc->get_process("missing"); }), Errc::UnknownProcess);
}

TEST_F(Service, OfferIsSingleUse) {
  auto svc = open();
  const auto holder = svc->register_generated_did().uri;
  auto p = svc->create_process(holder);
  svc->submit(p.process_id, case_batch(generate_case(2)));
  svc->validate(p.process_id, approve(svc->issuer_did()));
  const auto offer = svc->issue(p.process_id);
  EXPECT_EQ(offer.credentials.size(), 4u);
  svc->redeem(offer.offer_id);
  EXPECT_EQ(code_of([&] { svc->redeem(offer.offer_id); }), Errc::OfferConsumed);
  EXPECT_EQ(code_of([&] { svc->redeem("no-such-offer"); }), Errc::UnknownOffer);
  EXPECT_EQ(code_of([&] { svc->issue(p.process_id); }), Errc::InvalidState);
}

TEST_F(Service, OfferExpiresAfterTtl) {
  auto svc = open();
  const auto holder = svc->register_generated_did().uri;
  auto p = svc->create_process(holder);
  svc->submit(p.process_id, case_batch(generate_case(3)));
  svc->validate(p.process_id, approve(svc->issuer_did()));
  const auto offer = svc->issue(p.process_id);
  EXPECT_EQ(*parse_rfc3339(offer.expires) - *parse_rfc3339(offer.created), std::chrono::seconds(900));
  now = now.load() + std::chrono::seconds(901);
  EXPECT_EQ(code_of([&] { svc->redeem(offer.offer_id); }), Errc::OfferExpired);
}

TEST_F(Service, AsyncExtractionIsObservable) {
  auto svc = open(true);
  const auto holder = svc->register_generated_did().uri;
  auto p = svc->create_process(holder);
  p = svc->submit(p.process_id, case_batch(generate_case(4)));
  EXPECT_EQ(p.state, S::Extracting);
  svc->wait_idle();
  EXPECT_EQ(svc->get_process(p.process_id).state, S::PendingValidation);
}

TEST_F(Service, RestartKeepsIssuerAndStatus) {
  std::string holder, issuer, pid;
  json revoked, kept;
  {
    auto svc = open();
    issuer = svc->issuer_did();
    holder = svc->register_generated_did().uri;
    pid = svc->create_process(holder).process_id;
    svc->submit(pid, case_batch(generate_case(5)));
    svc->validate(pid, approve(issuer));
    const auto offer = svc->issue(pid);
    revoked = offer.credentials[0];
    kept = offer.credentials[1];
    svc->revoke_credential(revoked["id"].get<std::string>());
  }
  auto svc = open();
  EXPECT_EQ(svc->issuer_did(), issuer);
  EXPECT_TRUE(svc->registry().contains(holder));
  EXPECT_EQ(svc->get_process(pid).state, S::Issued);
  EXPECT_EQ(svc->verify(revoked).status, VerificationStatus::Revoked);
  EXPECT_EQ(svc->verify(kept).status, VerificationStatus::Valid);
  // Slots keep being drawn after the persisted ones.
  auto p2 = svc->create_process(holder);
  svc->submit(p2.process_id, case_batch(generate_case(6)));
  svc->validate(p2.process_id, approve(issuer));
  const auto offer = svc->issue(p2.process_id);
  std::set<std::uint64_t> slots;
  for (const auto& r : svc->store().load_credential_records()) slots.insert(r.status_list_index);
  EXPECT_EQ(slots.size(), 8u);
  EXPECT_EQ(svc->verify(offer.credentials[0]).status, VerificationStatus::Valid);
}

// One step of a scripted workflow, with the state its first commit records.
struct Step {
  std::string name;
  std::function<void(CredentialService&, std::string&)> run;
  std::optional<S> committed;  // empty: the step creates the process
};

std::vector<Step> happy_steps() {
  auto issuer = [](CredentialService& s) { return s.issuer_did(); };
  return {
      {"create", [](CredentialService& s, std::string& pid) {
         pid = s.create_process(s.register_generated_did().uri).process_id;
       }, S::AwaitingDocuments},
      {"submit", [](CredentialService& s, std::string& pid) { s.submit(pid, case_batch(generate_case(8))); },
       S::Extracting},
      {"approve", [issuer](CredentialService& s, std::string& pid) { s.validate(pid, approve(issuer(s))); },
       S::ReadyToIssue},
      {"issue", [](CredentialService& s, std::string& pid) { s.issue(pid); }, S::Issued},
      {"revoke-one", [](CredentialService& s, std::string& pid) {
         s.revoke_credential(s.get_process(pid).issued.front());
       }, S::Issued},
      {"revoke-all", [](CredentialService& s, std::string& pid) { s.revoke_process(pid); }, S::Revoked},
  };
}

std::vector<Step> correction_steps() {
  auto issuer = [](CredentialService& s) { return s.issuer_did(); };
  return {
      {"create", [](CredentialService& s, std::string& pid) {
         pid = s.create_process(s.register_generated_did().uri).process_id;
       }, S::AwaitingDocuments},
      {"submit", [](CredentialService& s, std::string& pid) { s.submit(pid, nif_mismatch_batch(generate_case(9))); },
       S::Extracting},
      {"approve", [issuer](CredentialService& s, std::string& pid) { s.validate(pid, approve(issuer(s))); },
       S::ReconciliationFailed},
      {"request-correction",
       [issuer](CredentialService& s, std::string& pid) {
         s.validate(pid, {issuer(s), ValidationInput::Kind::RequestCorrection, {}, "fix NIF"});
       },
       S::PendingValidation},
      {"reject",
       [issuer](CredentialService& s, std::string& pid) {
         s.validate(pid, {issuer(s), ValidationInput::Kind::Reject, {}, ""});
       },
       S::Rejected},
  };
}

void crash_around_each_step(Service& t, const std::vector<Step>& steps,
                            const std::function<std::unique_ptr<CredentialService>()>& open,
                            const std::function<std::optional<Process>(const std::string&)>& stored,
                            const std::function<void()>& wipe) {
  for (std::size_t k = 0; k < steps.size(); ++k) {
    for (const char* point : {"before_commit", "after_commit"}) {
      SCOPED_TRACE(steps[k].name + " / " + point);
      wipe();
      std::string pid;
      std::optional<Process> before;
      std::vector<json> credentials_before;
      {
        auto svc = open();
        for (std::size_t i = 0; i < k; ++i) steps[i].run(*svc, pid);
        if (!pid.empty()) before = svc->get_process(pid);
        if (before) {
          for (const auto& id : before->issued) credentials_before.push_back(*svc->credential(id));
        }
        bool armed = true;
        svc->store().set_fault_hook([&](std::string_view at) {
          if (armed && at == point) {
            armed = false;
            throw Crash{};
          }
        });
        EXPECT_THROW(steps[k].run(*svc, pid), Crash);
        if (k == 0 && std::string_view(point) == "after_commit") {
          // The id never reached the caller; recover it from the store.
          Store s(t.config().data_dir / "realcred.db");
          auto all = s.load_processes();
          ASSERT_EQ(all.size(), 1u);
          pid = all.front().process_id;
        }
      }
      // Process killed; what survived on disk is the last committed state.
      if (std::string_view(point) == "before_commit") {
        if (!before) {
          Store s(t.config().data_dir / "realcred.db");
          EXPECT_TRUE(s.load_processes().empty());
          continue;
        }
        auto on_disk = stored(pid);
        ASSERT_TRUE(on_disk);
        EXPECT_EQ(*on_disk, *before);
      } else {
        auto on_disk = stored(pid);
        ASSERT_TRUE(on_disk);
        EXPECT_EQ(on_disk->state, *steps[k].committed);
        EXPECT_EQ(on_disk->revision, before ? before->revision + 1 : 0);
      }
      // Restart resumes from there, and status lists agree with the process.
      auto svc = open();
      const auto resumed = svc->get_process(pid);
      if (resumed.state == S::Revoked) {
        for (const auto& id : resumed.issued) EXPECT_EQ(svc->verify(*svc->credential(id)).status, VerificationStatus::Revoked);
      } else if (resumed.state == S::Issued && std::string_view(point) == "before_commit") {
        for (const auto& vc : credentials_before) {
          const auto status = svc->verify(vc).status;
          EXPECT_TRUE(status == VerificationStatus::Valid || status == VerificationStatus::Revoked);
        }
      }
      if (steps[k].committed == S::Extracting && std::string_view(point) == "after_commit") {
        EXPECT_EQ(resumed.state, S::PendingValidation);
      }
      // The workflow can continue from the resumed state.
      if (std::string_view(point) == "before_commit") {
        EXPECT_NO_THROW(steps[k].run(*svc, pid));
        EXPECT_EQ(svc->get_process(pid).state, k == 1 ? S::PendingValidation : *steps[k].committed);
      }
    }
  }
}

TEST_F(Service, CrashAroundEachTransition) {
  auto wipe = [this] { std::filesystem::remove_all(dir.path()); };
  auto opener = [this] { return open(); };
  auto reader = [this](const std::string& id) { return stored(id); };
  crash_around_each_step(*this, happy_steps(), opener, reader, wipe);
  crash_around_each_step(*this, correction_steps(), opener, reader, wipe);
}

TEST_F(Service, FailedRevocationCommitLeavesCredentialValid) {
  auto svc = open();
  const auto holder = svc->register_generated_did().uri;
  auto p = svc->create_process(holder);
  svc->submit(p.process_id, case_batch(generate_case(10)));
  svc->validate(p.process_id, approve(svc->issuer_did()));
  const auto offer = svc->issue(p.process_id);
  svc->store().set_fault_hook([](std::string_view at) {
    if (at == "before_commit") throw Error(Errc::StorageFailure, "disk full");
  });
  EXPECT_EQ(code_of([&] { svc->revoke_process(p.process_id); }), Errc::StorageFailure);
  svc->store().set_fault_hook({});
  EXPECT_EQ(svc->get_process(p.process_id).state, S::Issued);
  for (const auto& vc : offer.credentials) EXPECT_EQ(svc->verify(vc).status, VerificationStatus::Valid);
}

TEST_F(Service, ReconcilingResumesOnRestart) {
  std::string pid;
  {
    auto svc = open();
    pid = svc->create_process(svc->register_generated_did().uri).process_id;
    svc->submit(pid, case_batch(generate_case(11)));
  }
  {
    Store s(dir.path() / "realcred.db");
    auto p = *s.load_process(pid);
    p.transitions.push_back({p.state, S::Reconciling, Operation::RecordValidation, "2025-06-01T10:00:00Z"});
    p.state = S::Reconciling;
    ++p.revision;
    s.commit({p, {}, {}, std::nullopt});
  }
  auto svc = open();
  EXPECT_EQ(svc->get_process(pid).state, S::ReadyToIssue);
}

TEST_F(Service, ConcurrentProcessesAllIssue) {
  auto svc = open(true);
  const auto issuer = svc->issuer_did();
  constexpr int kThreads = 8;
  std::vector<std::thread> threads;
  std::vector<std::string> ids(kThreads);
  std::atomic<int> failures{0};
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&, t] {
      try {
        const auto holder = svc->register_generated_did().uri;
        const auto pid = svc->create_process(holder).process_id;
        ids[static_cast<std::size_t>(t)] = pid;
        svc->submit(pid, case_batch(generate_case(static_cast<std::uint64_t>(200 + t))));
        while (svc->get_process(pid).state == S::Extracting) std::this_thread::yield();
        svc->validate(pid, approve(issuer));
        svc->issue(pid);
      } catch (const std::exception& e) {
        ADD_FAILURE() << e.what();
        ++failures;
      }
    });
  }
  for (auto& th : threads) th.join();
  ASSERT_EQ(failures, 0);
  std::set<std::pair<std::string, std::uint64_t>> slots;
  for (const auto& id : ids) {
    const auto p = svc->get_process(id);
    EXPECT_EQ(p.state, S::Issued);
    EXPECT_EQ(p.issued.size(), 4u);
  }
  for (const auto& r : svc->store().load_credential_records()) slots.insert({r.status_list_id, r.status_list_index});
  EXPECT_EQ(slots.size(), static_cast<std::size_t>(kThreads * 4));
}

TEST_F(Service, SameProcessMutationsAreLinearized) {
  auto svc = open();
  const auto pid = svc->create_process(svc->register_generated_did().uri).process_id;
  svc->submit(pid, case_batch(generate_case(12)));
  std::atomic<int> ok{0}, invalid{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      const auto code = code_of([&] { svc->validate(pid, approve(svc->issuer_did())); });
      if (!code) ++ok;
      if (code == Errc::InvalidState) ++invalid;
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok, 1);
  EXPECT_EQ(invalid, 7);
}

TEST(ServiceConfigEnv, ReadsVariables) {
  ::setenv("REALCRED_BIND", "0.0.0.0:9191", 1);
  ::setenv("REALCRED_DATA_DIR", "/tmp/realcred-x", 1);
  ::setenv("REALCRED_COORD_TOLERANCE_KM", "2.5", 1);
  ::setenv("REALCRED_OFFER_TTL_S", "60", 1);
  const auto c = ServiceConfig::from_env();
  EXPECT_EQ(c.bind_host, "0.0.0.0");
  EXPECT_EQ(c.port, 9191);
  EXPECT_EQ(c.data_dir, "/tmp/realcred-x");
  EXPECT_DOUBLE_EQ(c.coordinate_tolerance_km, 2.5);
  EXPECT_EQ(c.offer_ttl, std::chrono::seconds(60));
  ::setenv("REALCRED_OFFER_TTL_S", "soon", 1);
  EXPECT_EQ(code_of([] { ServiceConfig::from_env(); }), Errc::InvalidArgument);
  ::setenv("REALCRED_OFFER_TTL_S", "60", 1);
  ::setenv("REALCRED_COORD_TOLERANCE_KM", "-1", 1);
  EXPECT_EQ(code_of([] { ServiceConfig::from_env(); }), Errc::InvalidArgument);
  ::setenv("REALCRED_COORD_TOLERANCE_KM", "1", 1);
  ::setenv("REALCRED_BIND", "localhost:99999", 1);
  EXPECT_EQ(code_of([] { ServiceConfig::from_env(); }), Errc::InvalidArgument);
  for (const char* v : {"REALCRED_BIND", "REALCRED_DATA_DIR", "REALCRED_COORD_TOLERANCE_KM", "REALCRED_OFFER_TTL_S"}) {
    ::unsetenv(v);
  }
  const auto d = ServiceConfig::from_env();
  EXPECT_EQ(d.port, 8080);
  EXPECT_EQ(d.offer_ttl, std::chrono::seconds(900));
}

TEST(RequestParsing, SubmissionShapes) {
  const auto stream = clean_stream(generate_case(13).citizen_card);
  const auto tokens = to_json(to_annotation(stream));
  auto s = submission_from_request({{"tokens", tokens}});
  EXPECT_EQ(s.kind, DocumentKind::CitizenCard);
  EXPECT_EQ(s.doc_id, stream.doc_id);
  EXPECT_EQ(std::get<LabeledTokenStream>(s.payload), stream);
  EXPECT_EQ(code_of([&] { submission_from_request({{"tokens", tokens}, {"kind", "PropertyRecord"}}); }),
            Errc::InvalidArgument);
  EXPECT_EQ(code_of([&] { submission_from_request({{"kind", "CitizenCard"}}); }), Errc::InvalidArgument);
  EXPECT_EQ(code_of([&] { submission_from_request({{"credential", json::object()}}); }), Errc::InvalidArgument);
  EXPECT_EQ(code_of([&] { submission_from_request({{"tokens_path", "/nonexistent/x.json"}}); }), Errc::IoFailure);
  const auto batch = batch_from_request({{"documents", {{{"tokens", tokens}}, {{"tokens", tokens}}}}});
  EXPECT_EQ(batch.size(), 2u);
}

TEST(RequestParsing, ValidationShapes) {
  const auto v = validation_from_request(
      {{"issuer_did", "did:local:x"},
       {"decision", "Approve"},
       {"corrections", {{{"doc_id", "d"}, {"label", "NIF"}, {"value", "1"}}, {{"doc_id", "d"}, {"label", "X"}, {"index", 2}, {"value", nullptr}}}}});
  EXPECT_EQ(v.decision, ValidationInput::Kind::Approve);
  ASSERT_EQ(v.corrections.size(), 2u);
  EXPECT_EQ(v.corrections[1].index, 2u);
  EXPECT_FALSE(v.corrections[1].value);
  EXPECT_EQ(code_of([] { validation_from_request({{"issuer_did", "x"}, {"decision", "maybe"}}); }),
            Errc::InvalidArgument);
  EXPECT_EQ(code_of([] { validation_from_request({{"decision", "approve"}}); }), Errc::InvalidArgument);
}

TEST(HttpStatus, ErrorClasses) {
  EXPECT_EQ(http_status(Errc::UnknownProcess), 404);
  EXPECT_EQ(http_status(Errc::InvalidState), 409);
  EXPECT_EQ(http_status(Errc::OfferConsumed), 410);
  EXPECT_EQ(http_status(Errc::VcInvalid), 400);
  EXPECT_EQ(http_status(Errc::StorageFailure), 500);
}

class Http : public Service {};

TEST_F(Http, ErrorBodiesHaveCodeAndDetail) {
  auto svc = open();
  ServerHarness server(*svc);
  auto api = server.client();
  auto r = api.get("/processes/nope");
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(r.body.at("error"), "UNKNOWN_PROCESS");
  EXPECT_TRUE(r.body.at("detail").is_string());
  EXPECT_EQ(r.body.size(), 2u);

  r = api.post_raw("/processes", "{not json");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body.at("error"), "PARSE_ERROR");

  r = api.post("/processes", {{"holder_did", "did:local:0000000000000000"}});
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(r.body.at("error"), "UNKNOWN_DID");

  r = api.get("/no/such/route");
  EXPECT_EQ(r.status, 404);
  EXPECT_TRUE(r.body.contains("error"));

  r = api.get("/status-lists/none");
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(r.body.at("error"), "UNKNOWN_STATUS_LIST");
}

TEST_F(Http, DidRegistrationWithProof) {
  auto svc = open();
  ServerHarness server(*svc);
  auto api = server.client();
  std::array<unsigned char, 32> seed{};
  seed.fill(42);
  const auto kp = KeyPair::from_seed(seed);
  const auto uri = did_for_key(kp.public_key);
  const auto proof = sign(kp.secret_key, uri);
  auto bad = sign(kp.secret_key, "other");
  auto r = api.post("/dids", {{"public_key", base64url_encode(kp.public_key)}, {"proof", base64url_encode(bad)}});
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body.at("error"), "BAD_SIGNATURE");
  r = api.post("/dids", {{"public_key", base64url_encode(kp.public_key)}, {"proof", base64url_encode(proof)}});
  ASSERT_EQ(r.status, 201);
  EXPECT_EQ(r.body.at("uri"), uri);
  r = api.post("/dids", {{"public_key", base64url_encode(kp.public_key)}, {"proof", base64url_encode(proof)}});
  EXPECT_EQ(r.status, 409);
  r = api.get("/dids/" + uri);
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body.at("public_key"), base64url_encode(kp.public_key));
  r = api.get("/issuer");
  EXPECT_EQ(r.body.at("did"), svc->issuer_did());
}

TEST_F(Http, FullFlowWithCorrectionsAndTokenFile) {
  auto svc = open(true);
  ServerHarness server(*svc);
  auto api = server.client();
  const auto holder = api.post("/dids", {{"generate", true}}).body.at("uri").get<std::string>();
  const auto issuer = api.get("/issuer").body.at("did").get<std::string>();
  auto r = api.post("/processes", {{"holder_did", holder}});
  ASSERT_EQ(r.status, 201);
  EXPECT_EQ(r.body.at("state"), "AwaitingDocuments");
  const auto pid = r.body.at("process_id").get<std::string>();

  const auto c = generate_case(14);
  std::filesystem::create_directories(dir.path());
  const auto pr_path = dir.path() / "pr.tokens.json";
  std::ofstream(pr_path) << to_json(to_annotation(clean_stream(c.property_record))).dump();
  json docs = json::array();
  docs.push_back({{"tokens", to_json(to_annotation(clean_stream(c.citizen_card)))}});
  docs.push_back({{"kind", "EnergyCertificate"}, {"tokens", to_json(to_annotation(clean_stream(c.energy_certificate)))}});
  docs.push_back({{"tokens_path", pr_path.string()}});
  r = api.post("/processes/" + pid + "/documents", {{"documents", docs}});
  ASSERT_EQ(r.status, 202) << r.body.dump();
  EXPECT_EQ(r.body.at("state"), "Extracting");

  for (int i = 0; i < 500 && api.get("/processes/" + pid).body.at("state") == "Extracting"; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  r = api.get("/processes/" + pid);
  ASSERT_EQ(r.body.at("state"), "PendingValidation");

  r = api.post("/processes/" + pid + "/issue", json::object());
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(r.body.at("error"), "INVALID_STATE");

  json corrections = {{{"doc_id", c.citizen_card.doc_id}, {"label", "NATIONALITY"}, {"value", "Portuguesa (corrigida)"}}};
  r = api.post("/processes/" + pid + "/validation",
               {{"issuer_did", issuer}, {"decision", "approve"}, {"corrections", corrections}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body.at("state"), "ReadyToIssue");

  r = api.post("/processes/" + pid + "/issue", json::object());
  ASSERT_EQ(r.status, 201);
  const auto redeem_url = r.body.at("redeem_url").get<std::string>();
  r = api.post(redeem_url, json::object());
  ASSERT_EQ(r.status, 200);
  const auto creds = r.body.at("credentials");
  ASSERT_EQ(creds.size(), 4u);
  EXPECT_EQ(creds[0].at("credentialSubject").at("claims").at("NATIONALITY"), "Portuguesa (corrigida)");
  r = api.post(redeem_url, json::object());
  EXPECT_EQ(r.status, 410);
  EXPECT_EQ(r.body.at("error"), "OFFER_CONSUMED");

  for (const auto& vc : creds) EXPECT_EQ(api.post("/verify", vc).body.at("status"), "Valid");
  const auto list_id = creds[0].at("credentialStatus").at("id").get<std::string>();
  r = api.get("/status-lists/" + list_id);
  ASSERT_EQ(r.status, 200);
  EXPECT_NE(std::find(r.body.at("type").begin(), r.body.at("type").end(), "BitstringStatusListCredential"),
            r.body.at("type").end());

  const auto first_id = creds[0].at("id").get<std::string>();
  r = api.post("/credentials/" + first_id + "/revoke", json::object());
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(api.post("/verify", creds[0]).body.at("status"), "Revoked");
  EXPECT_EQ(api.post("/verify", creds[1]).body.at("status"), "Valid");

  r = api.post("/processes/" + pid + "/revoke", json::object());
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body.at("state"), "Revoked");
  for (const auto& vc : creds) EXPECT_EQ(api.post("/verify", vc).body.at("status"), "Revoked");
  r = api.post("/processes/" + pid + "/revoke", json::object());
  EXPECT_EQ(r.status, 409);
  r = api.post("/credentials/urn:uuid:00000000-0000-0000-0000-000000000000/revoke", json::object());
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(r.body.at("error"), "UNKNOWN_CREDENTIAL");
}

}  // namespace
}  // namespace realcred
