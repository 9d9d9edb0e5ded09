#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "realcred/error.hpp"
#include "realcred/process.hpp"
#include "realcred/store.hpp"

namespace realcred {

struct ServiceConfig {
  std::string bind_host = "127.0.0.1";
  int port = 8080;
  /// Holds realcred.db. Empty runs on a private in-memory database.
  std::filesystem::path data_dir = "realcred-data";
  double coordinate_tolerance_km = 1.0;
  std::chrono::seconds offer_ttl{900};
  std::size_t status_list_capacity = kDefaultStatusListCapacity;
  /// Run extraction on a background worker. Off, submission extracts inline.
  bool async_extraction = true;

  /// Reads REALCRED_BIND (host:port), REALCRED_DATA_DIR,
  /// REALCRED_COORD_TOLERANCE_KM and REALCRED_OFFER_TTL_S over the defaults.
  /// Error(InvalidArgument) on unparsable values.
  static ServiceConfig from_env();
};

/// Validation request as received from the issuer.
struct ValidationInput {
  std::string issuer_did;
  enum class Kind { Approve, Reject, RequestCorrection } decision = Kind::Approve;
  std::vector<CorrectionRequest> corrections;
  std::string note;
};

/// Process service without the transport. Mutations of one process are
/// serialized; each one commits to the store before it becomes visible.
class CredentialService {
 public:
  explicit CredentialService(ServiceConfig config, std::function<Timestamp()> clock = now_utc);
  ~CredentialService();
  CredentialService(const CredentialService&) = delete;
  CredentialService& operator=(const CredentialService&) = delete;

  const ServiceConfig& config() const noexcept { return config_; }
  std::string issuer_did() const { return authority_->issuer_did(); }
  const DidRegistry& registry() const noexcept { return registry_; }
  Store& store() noexcept { return *store_; }

  /// Registers a holder key given its proof of possession over the DID uri.
  DidLogEntry register_did(const PublicKey& key, std::span<const unsigned char> proof);
  /// Generates and registers a key whose secret is discarded. Demo use.
  DidLogEntry register_generated_did();
  /// Error(UnknownDid).
  DidLogEntry resolve_did(const std::string& uri) const;

  Process create_process(const std::string& holder_did);
  /// Error(UnknownProcess).
  Process get_process(const std::string& process_id) const;
  std::vector<Process> list_processes() const;
  Process submit(const std::string& process_id, std::vector<DocumentSubmission> batch);
  Process validate(const std::string& process_id, const ValidationInput& input);
  OfferRecord issue(const std::string& process_id);
  /// Delivers the offer's credentials once. Errors: UnknownOffer,
  /// OfferConsumed, OfferExpired.
  nlohmann::json redeem(const std::string& offer_id);
  /// Revokes one credential through its process. Returns the changed list id.
  std::string revoke_credential(const std::string& credential_id);
  Process revoke_process(const std::string& process_id);

  VerificationResult verify(const nlohmann::json& credential) const;
  /// Error(UnknownStatusList).
  nlohmann::json status_list(const std::string& list_id) const;
  std::optional<nlohmann::json> credential(const std::string& credential_id) const;

  /// Blocks until the extraction queue is drained.
  void wait_idle();

  WorkflowContext context() const;

 private:
  std::shared_ptr<std::mutex> process_lock(const std::string& process_id);
  Process cached(const std::string& process_id) const;
  struct Outcome {
    std::vector<VerifiableCredential> credentials;
    std::optional<OfferRecord> offer;
    std::vector<std::string> changed_lists;
  };
  /// Runs `op` on a copy of the process, commits it with any status-list
  /// changes, then publishes it. Authority state is reloaded on failure.
  std::pair<Process, Outcome> mutate(const std::string& process_id, bool touches_authority,
                                     const std::function<Outcome(Process&)>& op);
  void persist(const Process& next, const std::vector<VerifiableCredential>& credentials,
               const std::optional<OfferRecord>& offer);
  void reload_authority();
  void recover();
  void enqueue_extraction(const std::string& process_id);
  void worker_loop();
  void extract_now(const std::string& process_id);

  ServiceConfig config_;
  std::function<Timestamp()> clock_;
  std::unique_ptr<Store> store_;
  DidRegistry registry_;
  std::unique_ptr<StatusAuthority> authority_;

  // Held across an operation that changes status lists and its commit.
  std::mutex authority_mu_;
  std::map<std::string, std::pair<std::uint64_t, std::size_t>> persisted_lists_;

  mutable std::mutex cache_mu_;
  std::map<std::string, Process> processes_;
  std::map<std::string, std::shared_ptr<std::mutex>> locks_;

  std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  std::deque<std::string> queue_;
  std::size_t in_flight_ = 0;
  bool stopping_ = false;
  std::thread worker_;
};

class HttpServer {
 public:
  explicit HttpServer(CredentialService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Port 0 picks a free port. Returns the bound port; Error(IoFailure) if
  /// binding fails.
  int bind(const std::string& host, int port);
  /// Blocks until `stop`.
  void serve();
  /// Returns once `serve` accepts connections.
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Maps an error code to its HTTP status.
int http_status(Errc code) noexcept;

/// Parses one submission object: {doc_id?, kind?, tokens | tokens_path | credential}.
DocumentSubmission submission_from_request(const nlohmann::json& j);
/// Accepts {"documents": [...]} or a single submission object.
std::vector<DocumentSubmission> batch_from_request(const nlohmann::json& j);
ValidationInput validation_from_request(const nlohmann::json& j);

}  // namespace realcred
