#include "realcred/process.hpp"

#include <algorithm>

#include "realcred/error.hpp"
#include "realcred/extraction.hpp"

namespace realcred {

using nlohmann::json;

namespace {

constexpr std::string_view kStateNames[] = {
    "AwaitingDocuments", "Extracting",           "PendingValidation", "Rejected", "Reconciling",
    "ReconciliationFailed", "ReadyToIssue",      "Issued",            "Revoked",
};

constexpr std::string_view kOperationNames[] = {
    "submit_document",    "run_extraction",    "record_validation",
    "request_correction", "issue_for_process", "revoke_for_process",
};

[[noreturn]] void invalid_state(const Process& p, Operation op) {
  throw Error(Errc::InvalidState,
              std::string(to_string(op)) + " not allowed in state " + std::string(to_string(p.state)));
}

void require_state(const Process& p, Operation op) {
  if (!operation_allowed(p.state, op)) invalid_state(p, op);
}

void move_to(Process& p, ProcessState to, Operation op, Timestamp now) {
  p.transitions.push_back({p.state, to, op, format_rfc3339(now)});
  p.state = to;
}

void commit(Process& target, Process next) {
  ++next.revision;
  target = std::move(next);
}

void require_registered(const WorkflowContext& ctx, const std::string& did) {
  if (!ctx.registry || !ctx.registry->contains(did)) throw Error(Errc::UnknownDid, did);
}

bool doc_id_used(const Process& p, const std::string& doc_id) {
  if (p.submission(doc_id)) return true;
  return std::any_of(p.corrections.begin(), p.corrections.end(),
                     [&](const CorrectionEvent& e) { return e.doc_id == doc_id; });
}

std::string fresh_doc_id(const Process& p, DocumentKind kind) {
  for (std::size_t n = p.submissions.size() + 1;; ++n) {
    std::string id = std::string(to_cli_name(kind)) + "-" + std::to_string(n);
    if (!doc_id_used(p, id)) return id;
  }
}

void apply_event(std::map<std::string, ExtractionResult>& results, const CorrectionEvent& e) {
  auto it = results.find(e.doc_id);
  if (it == results.end()) return;
  auto& values = it->second.fields[e.label];
  if (e.index < values.size()) {
    if (e.new_value) {
      values[e.index] = {*e.new_value, 1.0};
    } else {
      values.erase(values.begin() + static_cast<std::ptrdiff_t>(e.index));
    }
  } else if (e.new_value) {
    values.push_back({*e.new_value, 1.0});
  }
  if (values.empty()) it->second.fields.erase(e.label);
}

void reconcile_into(Process& p, const WorkflowContext& ctx, Timestamp now) {
  std::vector<ExtractionResult> docs;
  for (auto& [id, r] : p.current_results()) docs.push_back(std::move(r));
  ReconcileOptions options;
  options.coordinate_tolerance_km = ctx.coordinate_tolerance_km;
  options.process_id = p.process_id;
  p.report = reconcile_documents(docs, options);
  move_to(p, p.report->consistent ? ProcessState::ReadyToIssue : ProcessState::ReconciliationFailed,
          Operation::RecordValidation, now);
}

json claims_json(const ExtractionResult& r) {
  json claims = json::object();
  for (const auto& field : schema_for(r.kind)) {
    auto values = r.values_of(field.label);
    if (values.empty()) continue;
    if (field.repeatable) {
      claims[field.label] = values;
    } else {
      claims[field.label] = values.front();
    }
  }
  return claims;
}

std::size_t kind_rank(DocumentKind k) {
  return static_cast<std::size_t>(std::find(std::begin(kAllKinds), std::end(kAllKinds), k) - std::begin(kAllKinds));
}

}  // namespace

std::string_view to_string(ProcessState s) noexcept { return kStateNames[static_cast<std::size_t>(s)]; }

std::optional<ProcessState> parse_process_state(std::string_view s) noexcept {
  for (auto st : kAllStates) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

std::string_view to_string(Operation op) noexcept { return kOperationNames[static_cast<std::size_t>(op)]; }

bool operation_allowed(ProcessState state, Operation op) noexcept {
  using S = ProcessState;
  switch (op) {
    case Operation::SubmitDocument: return state == S::AwaitingDocuments || state == S::PendingValidation;
    case Operation::RunExtraction: return state == S::Extracting;
    case Operation::RecordValidation: return state == S::PendingValidation;
    case Operation::RequestCorrection: return state == S::PendingValidation || state == S::ReconciliationFailed;
    case Operation::IssueForProcess: return state == S::ReadyToIssue;
    case Operation::RevokeForProcess: return state == S::Issued;
  }
  return false;
}

bool transition_allowed(ProcessState from, ProcessState to) noexcept {
  using S = ProcessState;
  switch (from) {
    case S::AwaitingDocuments: return to == S::Extracting;
    case S::Extracting: return to == S::PendingValidation;
    case S::PendingValidation: return to == S::Rejected || to == S::Reconciling || to == S::Extracting;
    case S::Reconciling: return to == S::ReconciliationFailed || to == S::ReadyToIssue;
    case S::ReconciliationFailed: return to == S::PendingValidation;
    case S::ReadyToIssue: return to == S::Issued;
    case S::Issued: return to == S::Revoked;
    case S::Rejected:
    case S::Revoked: return false;
  }
  return false;
}

const DocumentSubmission* Process::submission(std::string_view doc_id) const {
  auto it = std::find_if(submissions.begin(), submissions.end(),
                         [&](const DocumentSubmission& s) { return s.doc_id == doc_id; });
  return it == submissions.end() ? nullptr : &*it;
}

std::map<std::string, ExtractionResult> Process::current_results() const {
  return replay_corrections(extraction_results, corrections);
}

std::vector<std::string> Process::pending_extraction() const {
  std::vector<std::string> out;
  for (const auto& s : submissions) {
    if (!s.is_credential() && !extraction_results.count(s.doc_id)) out.push_back(s.doc_id);
  }
  return out;
}

std::map<std::string, ExtractionResult> replay_corrections(std::map<std::string, ExtractionResult> raw,
                                                           std::span<const CorrectionEvent> log) {
  for (const auto& e : log) apply_event(raw, e);
  return raw;
}

ExtractionResult claims_to_result(const json& subject, DocumentKind kind, const std::string& doc_id) {
  ExtractionResult r;
  r.kind = kind;
  r.doc_id = doc_id;
  const json& claims = subject.contains("claims") && subject["claims"].is_object() ? subject["claims"] : subject;
  for (const auto& field : schema_for(kind)) {
    auto it = claims.find(field.label);
    if (it == claims.end()) continue;
    auto& values = r.fields[field.label];
    if (it->is_string()) {
      values.push_back({it->get<std::string>(), 1.0});
    } else if (it->is_array()) {
      for (const auto& v : *it) {
        if (!v.is_string()) throw Error(Errc::VcInvalid, "claim " + field.label + " is not a string");
        values.push_back({v.get<std::string>(), 1.0});
      }
    } else {
      throw Error(Errc::VcInvalid, "claim " + field.label + " is not a string");
    }
    if (values.empty()) r.fields.erase(field.label);
  }
  return r;
}

Process create_process(std::string holder_did, std::string process_id, const WorkflowContext& ctx) {
  require_registered(ctx, holder_did);
  Process p;
  p.process_id = std::move(process_id);
  p.holder_did = std::move(holder_did);
  p.created = format_rfc3339(ctx.clock());
  return p;
}

void submit_documents(Process& p, std::vector<DocumentSubmission> batch, const WorkflowContext& ctx) {
  require_state(p, Operation::SubmitDocument);
  if (p.state == ProcessState::PendingValidation && !p.correction_requested) {
    throw Error(Errc::InvalidState, "submission in PendingValidation needs a correction request");
  }
  if (batch.empty()) throw Error(Errc::InvalidArgument, "no documents in submission");

  const Timestamp now = ctx.clock();
  Process next = p;
  std::set<DocumentKind> batch_kinds;
  std::set<std::string> batch_ids;
  for (auto& s : batch) {
    if (!batch_kinds.insert(s.kind).second) {
      throw Error(Errc::DuplicateKind, std::string(to_string(s.kind)) + " appears twice in the batch");
    }
    if (s.doc_id.empty()) s.doc_id = fresh_doc_id(next, s.kind);
    if (doc_id_used(next, s.doc_id) || !batch_ids.insert(s.doc_id).second) {
      throw Error(Errc::DuplicateDocId, s.doc_id);
    }
    auto existing = std::find_if(next.submissions.begin(), next.submissions.end(),
                                 [&](const DocumentSubmission& x) { return x.kind == s.kind; });
    if (existing != next.submissions.end()) {
      if (!p.correction_requested) throw Error(Errc::DuplicateKind, std::string(to_string(s.kind)));
      next.extraction_results.erase(existing->doc_id);
      next.prevalidated.erase(existing->doc_id);
      next.submissions.erase(existing);
    }
    s.submitted = format_rfc3339(now);

    if (auto* vc = std::get_if<json>(&s.payload)) {
      const auto verdict = verify_credential(*vc, *ctx.registry, ctx.resolver, now);
      if (verdict.status != VerificationStatus::Valid) {
        std::string detail = "credential is " + std::string(to_string(verdict.status));
        if (!verdict.reason.empty()) detail += " (" + verdict.reason + ")";
        throw Error(Errc::VcInvalid, detail);
      }
      const json& subject = vc->at("credentialSubject");
      if (auto k = subject.find("documentKind"); k != subject.end()) {
        if (!k->is_string() || parse_kind(k->get<std::string>()) != s.kind) {
          throw Error(Errc::VcInvalid, "credential does not describe a " + std::string(to_string(s.kind)));
        }
      }
      next.extraction_results[s.doc_id] = claims_to_result(subject, s.kind, s.doc_id);
      next.prevalidated.insert(s.doc_id);
    } else {
      auto& stream = std::get<LabeledTokenStream>(s.payload);
      if (stream.kind != s.kind) {
        throw Error(Errc::InvalidArgument, "token stream of " + s.doc_id + " is a " +
                                               std::string(to_string(stream.kind)));
      }
      stream.doc_id = s.doc_id;
    }
    next.submissions.push_back(std::move(s));
  }
  std::stable_sort(next.submissions.begin(), next.submissions.end(),
                   [](const DocumentSubmission& a, const DocumentSubmission& b) {
                     return kind_rank(a.kind) < kind_rank(b.kind);
                   });
  next.correction_requested = false;
  next.correction_note.clear();
  move_to(next, ProcessState::Extracting, Operation::SubmitDocument, now);
  commit(p, std::move(next));
}

void run_extraction(Process& p, const WorkflowContext& ctx) {
  require_state(p, Operation::RunExtraction);
  Process next = p;
  for (const auto& doc_id : p.pending_extraction()) {
    const auto& stream = std::get<LabeledTokenStream>(next.submission(doc_id)->payload);
    auto outcome = extract_fields(stream, ctx.row_tolerance);
    outcome.result.doc_id = doc_id;
    if (outcome.unlabeled) next.warnings.push_back(doc_id + ": stream carries no field labels");
    next.extraction_results[doc_id] = std::move(outcome.result);
  }
  move_to(next, ProcessState::PendingValidation, Operation::RunExtraction, ctx.clock());
  commit(p, std::move(next));
}

void record_validation(Process& p, const std::string& issuer_did, Decision decision,
                       std::span<const CorrectionRequest> corrections, const WorkflowContext& ctx) {
  require_state(p, Operation::RecordValidation);
  require_registered(ctx, issuer_did);
  const Timestamp now = ctx.clock();
  Process next = p;
  auto current = next.current_results();
  for (const auto& c : corrections) {
    const auto* sub = next.submission(c.doc_id);
    if (!sub) throw Error(Errc::UnknownDocument, c.doc_id);
    const auto* field = find_field(sub->kind, c.label);
    if (!field) throw Error(Errc::UnknownLabel, c.label + " is not a " + std::string(to_string(sub->kind)) + " label");
    auto& doc = current.at(c.doc_id);
    const auto values = doc.values_of(c.label);
    if (c.index > values.size() || (!field->repeatable && c.index > 0)) {
      throw Error(Errc::OutOfRange, c.label + " has no value at index " + std::to_string(c.index));
    }
    if (c.value && c.value->empty()) throw Error(Errc::InvalidArgument, "empty correction value for " + c.label);
    CorrectionEvent e;
    e.seq = next.corrections.size() + 1;
    e.doc_id = c.doc_id;
    e.label = c.label;
    e.index = c.index;
    if (c.index < values.size()) e.old_value = values[c.index];
    e.new_value = c.value;
    e.issuer_did = issuer_did;
    e.timestamp = format_rfc3339(now);
    if (!e.old_value && !e.new_value) throw Error(Errc::InvalidArgument, "nothing to remove for " + c.label);
    apply_event(current, e);
    next.corrections.push_back(std::move(e));
  }
  next.validated_by = issuer_did;
  next.correction_requested = false;
  next.correction_note.clear();
  if (decision == Decision::Reject) {
    move_to(next, ProcessState::Rejected, Operation::RecordValidation, now);
  } else {
    move_to(next, ProcessState::Reconciling, Operation::RecordValidation, now);
    reconcile_into(next, ctx, now);
  }
  commit(p, std::move(next));
}

void request_correction(Process& p, const std::string& issuer_did, const std::string& note,
                        const WorkflowContext& ctx) {
  require_state(p, Operation::RequestCorrection);
  require_registered(ctx, issuer_did);
  Process next = p;
  next.correction_requested = true;
  next.correction_note = note;
  next.report.reset();
  move_to(next, ProcessState::PendingValidation, Operation::RequestCorrection, ctx.clock());
  commit(p, std::move(next));
}

std::vector<VerifiableCredential> issue_for_process(Process& p, const WorkflowContext& ctx) {
  require_state(p, Operation::IssueForProcess);
  if (!ctx.authority || !ctx.registry) throw Error(Errc::InvalidArgument, "workflow context has no issuer");
  const Timestamp now = ctx.clock();
  Process next = p;
  const auto results = next.current_results();
  std::vector<VerifiableCredential> out;
  json documents = json::array();
  for (const auto& s : next.submissions) {
    const auto& r = results.at(s.doc_id);
    json subject = {{"id", next.holder_did},
                    {"documentKind", to_string(s.kind)},
                    {"documentId", s.doc_id},
                    {"processId", next.process_id},
                    {"claims", claims_json(r)}};
    IssueOptions options;
    options.extra_types = {std::string(to_string(s.kind)) + "Credential"};
    options.validity_days = ctx.validity_days;
    out.push_back(ctx.authority->issue(subject, *ctx.registry, next.process_id, now, options));
    documents.push_back({{"documentKind", to_string(s.kind)}, {"documentId", s.doc_id}, {"credentialId", out.back().id}});
  }
  json composite = {{"id", next.holder_did},
                    {"processId", next.process_id},
                    {"consistent", next.report->consistent},
                    {"discrepancies", to_json(*next.report).at("discrepancies")},
                    {"documents", documents}};
  IssueOptions options;
  options.extra_types = {std::string(kCompositeCredentialType)};
  options.validity_days = ctx.validity_days;
  out.push_back(ctx.authority->issue(composite, *ctx.registry, next.process_id, now, options));

  for (const auto& vc : out) next.issued.push_back(vc.id);
  move_to(next, ProcessState::Issued, Operation::IssueForProcess, now);
  commit(p, std::move(next));
  return out;
}

std::vector<std::string> revoke_for_process(Process& p, const RevokeScope& scope, const WorkflowContext& ctx) {
  require_state(p, Operation::RevokeForProcess);
  if (!ctx.authority) throw Error(Errc::InvalidArgument, "workflow context has no status authority");
  const Timestamp now = ctx.clock();
  Process next = p;
  std::vector<std::string> changed;
  if (scope.credential_id) {
    if (std::find(p.issued.begin(), p.issued.end(), *scope.credential_id) == p.issued.end()) {
      throw Error(Errc::UnknownCredential, *scope.credential_id + " does not belong to " + p.process_id);
    }
    changed.push_back(ctx.authority->revoke_credential(*scope.credential_id, now));
    move_to(next, ProcessState::Issued, Operation::RevokeForProcess, now);
  } else {
    changed = ctx.authority->revoke_process(p.process_id, now);
    move_to(next, ProcessState::Revoked, Operation::RevokeForProcess, now);
  }
  commit(p, std::move(next));
  return changed;
}

void resume_reconciliation(Process& p, const WorkflowContext& ctx) {
  if (p.state != ProcessState::Reconciling) {
    throw Error(Errc::InvalidState, "nothing to resume in state " + std::string(to_string(p.state)));
  }
  Process next = p;
  reconcile_into(next, ctx, ctx.clock());
  commit(p, std::move(next));
}

// Serialization.

json to_json(const DocumentSubmission& s) {
  json j = {{"doc_id", s.doc_id}, {"kind", to_string(s.kind)}, {"submitted", s.submitted}};
  if (!s.source.empty()) j["source"] = s.source;
  if (const auto* vc = std::get_if<json>(&s.payload)) {
    j["credential"] = *vc;
  } else {
    j["tokens"] = to_json(to_annotation(std::get<LabeledTokenStream>(s.payload)));
  }
  return j;
}

DocumentSubmission submission_from_json(const json& j) {
  DocumentSubmission s;
  s.doc_id = j.at("doc_id").get<std::string>();
  auto kind = parse_kind(j.at("kind").get<std::string>());
  if (!kind) throw Error(Errc::Malformed, "unknown kind " + j.at("kind").dump());
  s.kind = *kind;
  s.submitted = j.value("submitted", "");
  s.source = j.value("source", "");
  if (j.contains("credential")) {
    s.payload = j.at("credential");
  } else {
    s.payload = stream_from_annotation(annotation_from_json(j.at("tokens")));
  }
  return s;
}

json to_json(const CorrectionEvent& e) {
  return {{"seq", e.seq},
          {"doc_id", e.doc_id},
          {"label", e.label},
          {"index", e.index},
          {"old_value", e.old_value ? json(*e.old_value) : json(nullptr)},
          {"new_value", e.new_value ? json(*e.new_value) : json(nullptr)},
          {"issuer_did", e.issuer_did},
          {"timestamp", e.timestamp}};
}

CorrectionEvent correction_from_json(const json& j) {
  CorrectionEvent e;
  e.seq = j.at("seq").get<std::uint64_t>();
  e.doc_id = j.at("doc_id").get<std::string>();
  e.label = j.at("label").get<std::string>();
  e.index = j.at("index").get<std::size_t>();
  if (!j.at("old_value").is_null()) e.old_value = j["old_value"].get<std::string>();
  if (!j.at("new_value").is_null()) e.new_value = j["new_value"].get<std::string>();
  e.issuer_did = j.at("issuer_did").get<std::string>();
  e.timestamp = j.at("timestamp").get<std::string>();
  return e;
}

json to_json(const Process& p) {
  json subs = json::array();
  for (const auto& s : p.submissions) subs.push_back(to_json(s));
  json raw = json::object();
  for (const auto& [id, r] : p.extraction_results) raw[id] = to_json(r);
  json current = json::object();
  for (const auto& [id, r] : p.current_results()) current[id] = claims_json(r);
  json corrections = json::array();
  for (const auto& e : p.corrections) corrections.push_back(to_json(e));
  json transitions = json::array();
  for (const auto& t : p.transitions) {
    transitions.push_back({{"from", to_string(t.from)}, {"to", to_string(t.to)}, {"operation", to_string(t.op)}, {"at", t.at}});
  }
  json j = {{"process_id", p.process_id},
            {"holder_did", p.holder_did},
            {"state", to_string(p.state)},
            {"created", p.created},
            {"revision", p.revision},
            {"submissions", subs},
            {"extraction_results", raw},
            {"claims", current},
            {"prevalidated", p.prevalidated},
            {"warnings", p.warnings},
            {"corrections", corrections},
            {"issued", p.issued},
            {"correction_requested", p.correction_requested},
            {"correction_note", p.correction_note},
            {"validated_by", p.validated_by},
            {"transitions", transitions}};
  j["report"] = p.report ? to_json(*p.report) : json(nullptr);
  return j;
}

Process process_from_json(const json& j) {
  try {
    Process p;
    p.process_id = j.at("process_id").get<std::string>();
    p.holder_did = j.at("holder_did").get<std::string>();
    auto state = parse_process_state(j.at("state").get<std::string>());
    if (!state) throw Error(Errc::Malformed, "unknown state " + j.at("state").dump());
    p.state = *state;
    p.created = j.at("created").get<std::string>();
    p.revision = j.at("revision").get<std::uint64_t>();
    for (const auto& s : j.at("submissions")) p.submissions.push_back(submission_from_json(s));
    for (const auto& [id, r] : j.at("extraction_results").items()) p.extraction_results[id] = extraction_from_json(r);
    p.prevalidated = j.at("prevalidated").get<std::set<std::string>>();
    p.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (const auto& e : j.at("corrections")) p.corrections.push_back(correction_from_json(e));
    p.issued = j.at("issued").get<std::vector<std::string>>();
    p.correction_requested = j.at("correction_requested").get<bool>();
    p.correction_note = j.at("correction_note").get<std::string>();
    p.validated_by = j.at("validated_by").get<std::string>();
    for (const auto& t : j.at("transitions")) {
      auto from = parse_process_state(t.at("from").get<std::string>());
      auto to = parse_process_state(t.at("to").get<std::string>());
      const auto op_name = t.at("operation").get<std::string>();
      auto op = std::find(std::begin(kOperationNames), std::end(kOperationNames), op_name);
      if (!from || !to || op == std::end(kOperationNames)) throw Error(Errc::Malformed, "bad transition record");
      p.transitions.push_back({*from, *to, static_cast<Operation>(op - std::begin(kOperationNames)),
                               t.at("at").get<std::string>()});
    }
    if (!j.at("report").is_null()) p.report = report_from_json(j["report"]);
    return p;
  } catch (const json::exception& e) {
    throw Error(Errc::Malformed, std::string("process: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::Malformed) throw;
    throw Error(Errc::Malformed, std::string("process: ") + e.what());
  }
}

}  // namespace realcred
