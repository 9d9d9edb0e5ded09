#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "realcred/clock.hpp"
#include "realcred/credential.hpp"
#include "realcred/doc_model.hpp"
#include "realcred/extraction.hpp"
#include "realcred/reconcile.hpp"
#include "realcred/revocation.hpp"
#include "realcred/synthgen.hpp"

namespace realcred {

enum class ProcessState {
  AwaitingDocuments,
  Extracting,
  PendingValidation,
  Rejected,
  Reconciling,
  ReconciliationFailed,
  ReadyToIssue,
  Issued,
  Revoked,
};

inline constexpr ProcessState kAllStates[] = {
    ProcessState::AwaitingDocuments,    ProcessState::Extracting,   ProcessState::PendingValidation,
    ProcessState::Rejected,             ProcessState::Reconciling,  ProcessState::ReconciliationFailed,
    ProcessState::ReadyToIssue,         ProcessState::Issued,       ProcessState::Revoked,
};

std::string_view to_string(ProcessState s) noexcept;
std::optional<ProcessState> parse_process_state(std::string_view s) noexcept;

/// Mutating operations on an existing process. Creation is not one of them.
enum class Operation {
  SubmitDocument,
  RunExtraction,
  RecordValidation,
  RequestCorrection,
  IssueForProcess,
  RevokeForProcess,
};

inline constexpr Operation kAllOperations[] = {
    Operation::SubmitDocument,    Operation::RunExtraction,   Operation::RecordValidation,
    Operation::RequestCorrection, Operation::IssueForProcess, Operation::RevokeForProcess,
};

std::string_view to_string(Operation op) noexcept;

/// States in which `op` may start. Submission in PendingValidation further
/// needs an open correction request; everything else is INVALID_STATE.
bool operation_allowed(ProcessState state, Operation op) noexcept;

/// True when `from -> to` is an edge of the transition relation.
bool transition_allowed(ProcessState from, ProcessState to) noexcept;

struct DocumentSubmission {
  std::string doc_id;
  DocumentKind kind = DocumentKind::CitizenCard;
  /// Labeled token stream for extraction, or an existing credential.
  std::variant<LabeledTokenStream, nlohmann::json> payload;
  /// Where the stream was read from, if it came from a file.
  std::string source;
  std::string submitted;

  bool is_credential() const noexcept { return std::holds_alternative<nlohmann::json>(payload); }
  friend bool operator==(const DocumentSubmission&, const DocumentSubmission&) = default;
};

/// One issuer edit. `index` addresses a value of a repeatable label; a
/// missing old_value means an addition, a missing new_value a removal.
struct CorrectionEvent {
  std::uint64_t seq = 0;
  std::string doc_id;
  std::string label;
  std::size_t index = 0;
  std::optional<std::string> old_value;
  std::optional<std::string> new_value;
  std::string issuer_did;
  std::string timestamp;
  friend bool operator==(const CorrectionEvent&, const CorrectionEvent&) = default;
};

/// Correction as submitted by the issuer, before it is resolved against the
/// current values.
struct CorrectionRequest {
  std::string doc_id;
  std::string label;
  std::size_t index = 0;
  std::optional<std::string> value;
};

struct TransitionRecord {
  ProcessState from;
  ProcessState to;
  Operation op;
  std::string at;
  friend bool operator==(const TransitionRecord&, const TransitionRecord&) = default;
};

struct Process {
  std::string process_id;
  std::string holder_did;
  ProcessState state = ProcessState::AwaitingDocuments;
  std::string created;
  std::vector<DocumentSubmission> submissions;
  /// Raw extraction output (or credential claims), never edited in place.
  std::map<std::string, ExtractionResult> extraction_results;
  std::set<std::string> prevalidated;
  std::vector<std::string> warnings;
  std::vector<CorrectionEvent> corrections;
  std::optional<ReconciliationReport> report;
  std::vector<std::string> issued;
  bool correction_requested = false;
  std::string correction_note;
  std::string validated_by;
  std::vector<TransitionRecord> transitions;
  /// Bumped by every committed mutation.
  std::uint64_t revision = 0;

  const DocumentSubmission* submission(std::string_view doc_id) const;
  /// Extraction results with the correction log replayed in order.
  std::map<std::string, ExtractionResult> current_results() const;
  /// Token-stream submissions that have no extraction result yet.
  std::vector<std::string> pending_extraction() const;

  friend bool operator==(const Process&, const Process&) = default;
};

/// Applies corrections to raw results, in log order.
std::map<std::string, ExtractionResult> replay_corrections(std::map<std::string, ExtractionResult> raw,
                                                           std::span<const CorrectionEvent> log);

nlohmann::json to_json(const DocumentSubmission& s);
DocumentSubmission submission_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CorrectionEvent& e);
CorrectionEvent correction_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Process& p);
/// Throws Error(Malformed).
Process process_from_json(const nlohmann::json& j);

/// Claims of a credential subject as an extraction result: the "claims"
/// member if present, the subject's schema-labelled members otherwise.
ExtractionResult claims_to_result(const nlohmann::json& subject, DocumentKind kind, const std::string& doc_id);

/// Everything the operations need besides the process itself.
struct WorkflowContext {
  const DidRegistry* registry = nullptr;
  StatusAuthority* authority = nullptr;
  StatusResolver resolver;
  std::function<Timestamp()> clock = now_utc;
  double coordinate_tolerance_km = 1.0;
  int row_tolerance = kDefaultRowTolerance;
  int validity_days = 365;
};

inline constexpr std::string_view kCompositeCredentialType = "RealEstateProcess";

/// Error(UnknownDid) unless the holder is registered.
Process create_process(std::string holder_did, std::string process_id, const WorkflowContext& ctx);

// Every operation below throws Error(InvalidState) when the process is not in
// a state that admits it, and leaves the process untouched on any error.

/// Adds a batch of documents and moves to Extracting. Credential payloads
/// must verify Valid (VC_INVALID) and are copied into the extraction results
/// as pre-validated. A kind may appear once (DUPLICATE_KIND) unless a
/// correction was requested, in which case resubmission replaces it.
void submit_documents(Process& p, std::vector<DocumentSubmission> batch, const WorkflowContext& ctx);

/// Extracts every pending stream and moves to PendingValidation.
void run_extraction(Process& p, const WorkflowContext& ctx);

enum class Decision { Approve, Reject };

/// Logs and applies corrections, then Reject -> Rejected or Approve ->
/// Reconciling -> ReadyToIssue / ReconciliationFailed. Errors:
/// UnknownDid, UnknownDocument, UnknownLabel, OutOfRange (index).
void record_validation(Process& p, const std::string& issuer_did, Decision decision,
                       std::span<const CorrectionRequest> corrections, const WorkflowContext& ctx);

/// Asks the holder to resubmit. PendingValidation stays put with the request
/// flag set; ReconciliationFailed returns to PendingValidation.
void request_correction(Process& p, const std::string& issuer_did, const std::string& note,
                        const WorkflowContext& ctx);

/// One credential per document plus the composite process credential, in
/// that order. Moves to Issued.
std::vector<VerifiableCredential> issue_for_process(Process& p, const WorkflowContext& ctx);

struct RevokeScope {
  /// Empty revokes every credential of the process.
  std::optional<std::string> credential_id;
  static RevokeScope all() { return {}; }
  static RevokeScope one(std::string id) { return {std::move(id)}; }
};

/// Returns the ids of the status lists that changed. Scope All moves to
/// Revoked. Error(UnknownCredential) for an id outside the process.
std::vector<std::string> revoke_for_process(Process& p, const RevokeScope& scope, const WorkflowContext& ctx);

/// Finishes a reconciliation interrupted in Reconciling. Internal to
/// restart recovery; not an API operation.
void resume_reconciliation(Process& p, const WorkflowContext& ctx);

}  // namespace realcred
