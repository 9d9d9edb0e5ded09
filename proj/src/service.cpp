#include "realcred/service.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>

#include "realcred/error.hpp"

namespace realcred {

using nlohmann::json;

namespace {

constexpr const char* kIssuerKeyName = "issuer";

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

double parse_positive_double(const std::string& s, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || !std::isfinite(v) || v <= 0) {
    throw Error(Errc::InvalidArgument, std::string(what) + " must be a positive number, got '" + s + "'");
  }
  return v;
}

long long parse_int(const std::string& s, const char* what, long long lo, long long hi) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0' || v < lo || v > hi) {
    throw Error(Errc::InvalidArgument, std::string(what) + " out of range: '" + s + "'");
  }
  return v;
}

std::string new_id() {
  auto urn = random_urn_uuid();
  return urn.substr(urn.rfind(':') + 1);
}

}  // namespace

ServiceConfig ServiceConfig::from_env() {
  ServiceConfig c;
  if (auto bind = env("REALCRED_BIND")) {
    const auto colon = bind->rfind(':');
    if (colon == std::string::npos) {
      c.bind_host = *bind;
    } else {
      c.bind_host = bind->substr(0, colon);
      c.port = static_cast<int>(parse_int(bind->substr(colon + 1), "REALCRED_BIND port", 0, 65535));
    }
    if (c.bind_host.empty()) throw Error(Errc::InvalidArgument, "REALCRED_BIND has no host");
  }
  if (auto dir = env("REALCRED_DATA_DIR")) c.data_dir = *dir;
  if (auto tol = env("REALCRED_COORD_TOLERANCE_KM")) {
    c.coordinate_tolerance_km = parse_positive_double(*tol, "REALCRED_COORD_TOLERANCE_KM");
  }
  if (auto ttl = env("REALCRED_OFFER_TTL_S")) {
    c.offer_ttl = std::chrono::seconds(parse_int(*ttl, "REALCRED_OFFER_TTL_S", 1, 365LL * 24 * 3600));
  }
  return c;
}

CredentialService::CredentialService(ServiceConfig config, std::function<Timestamp()> clock)
    : config_(std::move(config)), clock_(std::move(clock)) {
  std::filesystem::path db = ":memory:";
  if (!config_.data_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(config_.data_dir, ec);
    if (ec) throw Error(Errc::IoFailure, "cannot create " + config_.data_dir.string() + ": " + ec.message());
    db = config_.data_dir / "realcred.db";
  }
  store_ = std::make_unique<Store>(db);

  KeyPair issuer;
  if (auto secret = store_->load_key(kIssuerKeyName)) {
    if (secret->size() != issuer.secret_key.size()) throw Error(Errc::StorageFailure, "issuer key has wrong size");
    issuer = KeyPair::from_seed(std::span<const unsigned char, 32>(secret->data(), 32));
  } else {
    issuer = KeyPair::generate();
    store_->save_key(kIssuerKeyName, issuer.secret_key);
  }

  registry_.load_log(store_->load_did_log());
  const auto issuer_uri = did_for_key(issuer.public_key);
  if (!registry_.contains(issuer_uri)) {
    registry_.register_key(issuer, clock_());
    store_->append_did(*registry_.entry(issuer_uri));
  }

  authority_ = std::make_unique<StatusAuthority>(issuer, config_.status_list_capacity);
  reload_authority();
  recover();
  if (config_.async_extraction) worker_ = std::thread([this] { worker_loop(); });
}

CredentialService::~CredentialService() {
  {
    std::lock_guard lock(queue_mu_);
    stopping_ = true;
  }
  queue_cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

WorkflowContext CredentialService::context() const {
  WorkflowContext ctx;
  ctx.registry = &registry_;
  ctx.authority = authority_.get();
  ctx.resolver = [auth = authority_.get()](const std::string& id) { return auth->published(id); };
  ctx.clock = clock_;
  ctx.coordinate_tolerance_km = config_.coordinate_tolerance_km;
  return ctx;
}

void CredentialService::reload_authority() {
  authority_->restore(store_->load_status_lists(), store_->load_credential_records(), clock_());
  persisted_lists_.clear();
  for (const auto& l : authority_->lists()) persisted_lists_[l.id()] = {l.version(), l.allocated()};
}

void CredentialService::recover() {
  std::vector<std::string> resume;
  {
    std::lock_guard lock(cache_mu_);
    for (auto& p : store_->load_processes()) {
      if (p.state == ProcessState::Reconciling || p.state == ProcessState::Extracting) resume.push_back(p.process_id);
      processes_.emplace(p.process_id, std::move(p));
    }
  }
  for (const auto& id : resume) {
    if (cached(id).state == ProcessState::Reconciling) {
      mutate(id, false, [this](Process& p) {
        resume_reconciliation(p, context());
        return Outcome{};
      });
    } else {
      enqueue_extraction(id);
    }
  }
}

std::shared_ptr<std::mutex> CredentialService::process_lock(const std::string& process_id) {
  std::lock_guard lock(cache_mu_);
  if (!processes_.count(process_id)) throw Error(Errc::UnknownProcess, process_id);
  auto& m = locks_[process_id];
  if (!m) m = std::make_shared<std::mutex>();
  return m;
}

Process CredentialService::cached(const std::string& process_id) const {
  std::lock_guard lock(cache_mu_);
  auto it = processes_.find(process_id);
  if (it == processes_.end()) throw Error(Errc::UnknownProcess, process_id);
  return it->second;
}

void CredentialService::persist(const Process& next, const std::vector<VerifiableCredential>& credentials,
                                const std::optional<OfferRecord>& offer) {
  StoreCommit change;
  change.process = next;
  std::map<std::string, std::pair<std::uint64_t, std::size_t>> versions;
  for (auto& l : authority_->lists()) {
    versions[l.id()] = {l.version(), l.allocated()};
    auto it = persisted_lists_.find(l.id());
    if (it == persisted_lists_.end() || it->second != versions[l.id()]) change.lists.push_back(std::move(l));
  }
  for (const auto& vc : credentials) {
    change.credentials.push_back({{vc.id, next.process_id, vc.credential_status->status_list_id,
                                   vc.credential_status->status_list_index},
                                  to_json(vc)});
  }
  change.offer = offer;
  store_->commit(change);
  persisted_lists_ = std::move(versions);
}

std::pair<Process, CredentialService::Outcome> CredentialService::mutate(const std::string& process_id,
                                                                        bool touches_authority,
                                                                        const std::function<Outcome(Process&)>& op) {
  auto plock = process_lock(process_id);
  std::lock_guard guard(*plock);
  std::unique_lock<std::mutex> auth;
  if (touches_authority) auth = std::unique_lock(authority_mu_);

  Process next = cached(process_id);
  Outcome outcome;
  try {
    outcome = op(next);
    persist(next, outcome.credentials, outcome.offer);
  } catch (...) {
    if (touches_authority) reload_authority();
    throw;
  }
  {
    std::lock_guard lock(cache_mu_);
    processes_[process_id] = next;
  }
  return {std::move(next), std::move(outcome)};
}

DidLogEntry CredentialService::register_did(const PublicKey& key, std::span<const unsigned char> proof) {
  auto entry = registry_.register_public_key(key, proof, clock_());
  try {
    store_->append_did(entry);
  } catch (...) {
    registry_.load_log(store_->load_did_log());
    throw;
  }
  return entry;
}

DidLogEntry CredentialService::register_generated_did() {
  const auto kp = KeyPair::generate();
  const auto proof = sign(kp.secret_key, did_for_key(kp.public_key));
  return register_did(kp.public_key, proof);
}

DidLogEntry CredentialService::resolve_did(const std::string& uri) const {
  auto e = registry_.entry(uri);
  if (!e) throw Error(Errc::UnknownDid, uri);
  return *e;
}

Process CredentialService::create_process(const std::string& holder_did) {
  Process p = realcred::create_process(holder_did, new_id(), context());
  store_->commit({p, {}, {}, std::nullopt});
  std::lock_guard lock(cache_mu_);
  processes_.emplace(p.process_id, p);
  return p;
}

Process CredentialService::get_process(const std::string& process_id) const { return cached(process_id); }

std::vector<Process> CredentialService::list_processes() const {
  std::lock_guard lock(cache_mu_);
  std::vector<Process> out;
  for (const auto& [id, p] : processes_) out.push_back(p);
  return out;
}

Process CredentialService::submit(const std::string& process_id, std::vector<DocumentSubmission> batch) {
  auto [p, _] = mutate(process_id, false, [&](Process& next) {
    submit_documents(next, std::move(batch), context());
    return Outcome{};
  });
  if (config_.async_extraction) {
    enqueue_extraction(process_id);
    return p;
  }
  extract_now(process_id);
  return cached(process_id);
}

void CredentialService::extract_now(const std::string& process_id) {
  mutate(process_id, false, [this](Process& next) {
    if (next.state == ProcessState::Extracting) run_extraction(next, context());
    return Outcome{};
  });
}

void CredentialService::enqueue_extraction(const std::string& process_id) {
  if (!config_.async_extraction) {
    extract_now(process_id);
    return;
  }
  {
    std::lock_guard lock(queue_mu_);
    queue_.push_back(process_id);
  }
  queue_cv_.notify_all();
}

void CredentialService::worker_loop() {
  std::unique_lock lock(queue_mu_);
  for (;;) {
    queue_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
    if (stopping_) return;
    const std::string id = queue_.front();
    queue_.pop_front();
    ++in_flight_;
    lock.unlock();
    try {
      extract_now(id);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "extraction of %s failed: %s\n", id.c_str(), e.what());
    }
    lock.lock();
    --in_flight_;
    queue_cv_.notify_all();
  }
}

void CredentialService::wait_idle() {
  std::unique_lock lock(queue_mu_);
  queue_cv_.wait(lock, [this] { return stopping_ || (queue_.empty() && in_flight_ == 0); });
}

Process CredentialService::validate(const std::string& process_id, const ValidationInput& input) {
  return mutate(process_id, false, [&](Process& next) {
           const auto ctx = context();
           switch (input.decision) {
             case ValidationInput::Kind::RequestCorrection:
               if (!input.corrections.empty()) {
                 throw Error(Errc::InvalidArgument, "a correction request carries no corrections");
               }
               request_correction(next, input.issuer_did, input.note, ctx);
               break;
             case ValidationInput::Kind::Approve:
               record_validation(next, input.issuer_did, Decision::Approve, input.corrections, ctx);
               break;
             case ValidationInput::Kind::Reject:
               record_validation(next, input.issuer_did, Decision::Reject, input.corrections, ctx);
               break;
           }
           return Outcome{};
         })
      .first;
}

OfferRecord CredentialService::issue(const std::string& process_id) {
  auto [p, outcome] = mutate(process_id, true, [&](Process& next) {
    Outcome o;
    o.credentials = issue_for_process(next, context());
    const Timestamp now = clock_();
    OfferRecord offer;
    offer.offer_id = new_id();
    offer.process_id = process_id;
    offer.created = format_rfc3339(now);
    offer.expires = format_rfc3339(now + config_.offer_ttl);
    for (const auto& vc : o.credentials) offer.credentials.push_back(to_json(vc));
    o.offer = std::move(offer);
    return o;
  });
  return *outcome.offer;
}

json CredentialService::redeem(const std::string& offer_id) {
  const auto offer = store_->load_offer(offer_id);
  if (!offer) throw Error(Errc::UnknownOffer, offer_id);
  if (offer->consumed_at) throw Error(Errc::OfferConsumed, offer_id + " was redeemed at " + *offer->consumed_at);
  const Timestamp now = clock_();
  if (now > *parse_rfc3339(offer->expires)) throw Error(Errc::OfferExpired, offer_id + " expired at " + offer->expires);
  if (!store_->consume_offer(offer_id, format_rfc3339(now))) throw Error(Errc::OfferConsumed, offer_id);
  return {{"offer_id", offer->offer_id}, {"process_id", offer->process_id}, {"credentials", offer->credentials}};
}

std::string CredentialService::revoke_credential(const std::string& credential_id) {
  std::string process_id;
  for (const auto& r : authority_->records()) {
    if (r.credential_id == credential_id) process_id = r.process_id;
  }
  if (process_id.empty()) throw Error(Errc::UnknownCredential, credential_id);
  auto [p, outcome] = mutate(process_id, true, [&](Process& next) {
    Outcome o;
    o.changed_lists = revoke_for_process(next, RevokeScope::one(credential_id), context());
    return o;
  });
  return outcome.changed_lists.front();
}

Process CredentialService::revoke_process(const std::string& process_id) {
  return mutate(process_id, true, [&](Process& next) {
           Outcome o;
           o.changed_lists = revoke_for_process(next, RevokeScope::all(), context());
           return o;
         })
      .first;
}

VerificationResult CredentialService::verify(const json& credential) const {
  return verify_credential(credential, registry_, context().resolver, clock_());
}

json CredentialService::status_list(const std::string& list_id) const {
  auto published = authority_->published(list_id);
  if (!published) throw Error(Errc::UnknownStatusList, list_id);
  return *published;
}

std::optional<json> CredentialService::credential(const std::string& credential_id) const {
  return store_->load_credential(credential_id);
}

// Request parsing.

DocumentSubmission submission_from_request(const json& j) {
  if (!j.is_object()) throw Error(Errc::InvalidArgument, "a submission must be an object");
  const int payloads = static_cast<int>(j.contains("tokens")) + static_cast<int>(j.contains("tokens_path")) +
                       static_cast<int>(j.contains("credential"));
  if (payloads != 1) throw Error(Errc::InvalidArgument, "give exactly one of tokens, tokens_path, credential");

  DocumentSubmission s;
  std::optional<DocumentKind> kind;
  if (auto k = j.find("kind"); k != j.end()) {
    if (!k->is_string() || !(kind = parse_kind(k->get<std::string>()))) {
      throw Error(Errc::InvalidArgument, "unknown document kind " + k->dump());
    }
  }
  if (auto d = j.find("doc_id"); d != j.end()) {
    if (!d->is_string()) throw Error(Errc::InvalidArgument, "doc_id must be a string");
    s.doc_id = d->get<std::string>();
  }

  if (auto c = j.find("credential"); c != j.end()) {
    if (!c->is_object()) throw Error(Errc::InvalidArgument, "credential must be an object");
    if (!kind) throw Error(Errc::InvalidArgument, "a credential submission needs a kind");
    s.payload = *c;
    s.kind = *kind;
    return s;
  }

  json tokens;
  if (auto path = j.find("tokens_path"); path != j.end()) {
    if (!path->is_string()) throw Error(Errc::InvalidArgument, "tokens_path must be a string");
    s.source = path->get<std::string>();
    std::ifstream in(s.source);
    if (!in) throw Error(Errc::IoFailure, "cannot read " + s.source);
    tokens = json::parse(in, nullptr, false);
    if (tokens.is_discarded()) throw Error(Errc::ParseError, s.source + " is not JSON");
  } else {
    tokens = j.at("tokens");
  }
  auto stream = stream_from_annotation(annotation_from_json(tokens));
  if (kind && *kind != stream.kind) {
    throw Error(Errc::InvalidArgument, "token stream is a " + std::string(to_string(stream.kind)) + ", not a " +
                                           std::string(to_string(*kind)));
  }
  s.kind = stream.kind;
  if (s.doc_id.empty()) s.doc_id = stream.doc_id;
  s.payload = std::move(stream);
  return s;
}

std::vector<DocumentSubmission> batch_from_request(const json& j) {
  std::vector<DocumentSubmission> out;
  if (j.is_object() && j.contains("documents")) {
    const auto& docs = j["documents"];
    if (!docs.is_array()) throw Error(Errc::InvalidArgument, "documents must be an array");
    for (const auto& d : docs) out.push_back(submission_from_request(d));
  } else {
    out.push_back(submission_from_request(j));
  }
  return out;
}

ValidationInput validation_from_request(const json& j) {
  if (!j.is_object()) throw Error(Errc::InvalidArgument, "validation body must be an object");
  ValidationInput in;
  if (!j.contains("issuer_did") || !j["issuer_did"].is_string()) {
    throw Error(Errc::InvalidArgument, "issuer_did is required");
  }
  in.issuer_did = j["issuer_did"].get<std::string>();
  std::string decision = j.value("decision", "");
  for (auto& ch : decision) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (decision == "approve") {
    in.decision = ValidationInput::Kind::Approve;
  } else if (decision == "reject") {
    in.decision = ValidationInput::Kind::Reject;
  } else if (decision == "request_correction") {
    in.decision = ValidationInput::Kind::RequestCorrection;
  } else {
    throw Error(Errc::InvalidArgument, "decision must be approve, reject or request_correction");
  }
  in.note = j.value("note", "");
  if (auto c = j.find("corrections"); c != j.end()) {
    if (!c->is_array()) throw Error(Errc::InvalidArgument, "corrections must be an array");
    for (const auto& e : *c) {
      if (!e.is_object() || !e.contains("doc_id") || !e.contains("label") || !e.contains("value")) {
        throw Error(Errc::InvalidArgument, "a correction needs doc_id, label and value");
      }
      CorrectionRequest r;
      r.doc_id = e.at("doc_id").get<std::string>();
      r.label = e.at("label").get<std::string>();
      r.index = e.value("index", std::size_t{0});
      if (!e["value"].is_null()) r.value = e["value"].get<std::string>();
      in.corrections.push_back(std::move(r));
    }
  }
  return in;
}

int http_status(Errc code) noexcept {
  switch (code) {
    case Errc::UnknownDid:
    case Errc::UnknownCredential:
    case Errc::UnknownProcess:
    case Errc::UnknownDocument:
    case Errc::UnknownOffer:
    case Errc::UnknownStatusList: return 404;
    case Errc::InvalidState:
    case Errc::DuplicateKind:
    case Errc::DuplicateDid:
    case Errc::DuplicateDocId:
    case Errc::IllegalTransition: return 409;
    case Errc::OfferConsumed:
    case Errc::OfferExpired: return 410;
    case Errc::InvalidArgument:
    case Errc::NotEncodable:
    case Errc::OutOfRange:
    case Errc::EmptyInput:
    case Errc::IoFailure:
    case Errc::ParseError:
    case Errc::BadSignature:
    case Errc::Malformed:
    case Errc::UnknownLabel:
    case Errc::VcInvalid:
    case Errc::KindMismatch:
    case Errc::MissingKind: return 400;
    case Errc::UnregisteredIssuer:
    case Errc::InvalidValidity:
    case Errc::ListFull:
    case Errc::CorruptList:
    case Errc::StorageFailure: return 500;
  }
  return 500;
}

}  // namespace realcred
