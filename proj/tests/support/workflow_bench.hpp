#pragma once

// In-memory workflow with a process builder for every state, plus the
// expected outcome of each (state, operation) pair.

#include <map>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "realcred/clock.hpp"
#include "realcred/process.hpp"

namespace realcred::testing {

using S = ProcessState;
using Op = Operation;

inline KeyPair key_from(unsigned char b) {
  std::array<unsigned char, 32> seed{};
  seed.fill(b);
  return KeyPair::from_seed(seed);
}

class WorkflowBench {
 public:
  WorkflowBench() : issuer(key_from(1)), holder(key_from(2)), authority(issuer, 64) {
    issuer_did = registry.register_key(issuer, now);
    holder_did = registry.register_key(holder, now);
    ctx.registry = &registry;
    ctx.authority = &authority;
    ctx.resolver = [this](const std::string& id) { return authority.published(id); };
    ctx.clock = [this] { return now; };
  }

  Process fresh(std::string id = "p-1") { return create_process(holder_did, std::move(id), ctx); }

  Process extracted(std::uint64_t seed = 7, bool mismatch = false) {
    auto p = fresh("p-" + std::to_string(seed));
    const auto c = generate_case(seed);
    submit_documents(p, mismatch ? nif_mismatch_batch(c) : case_batch(c), ctx);
    run_extraction(p, ctx);
    return p;
  }

  Process approved(std::uint64_t seed = 7) {
    auto p = extracted(seed);
    record_validation(p, issuer_did, Decision::Approve, {}, ctx);
    return p;
  }

  Process issued(std::uint64_t seed = 7) {
    auto p = approved(seed);
    issue_for_process(p, ctx);
    return p;
  }

  /// A process in `state`; the correction flag selects the resubmission
  /// variant of PendingValidation.
  Process in_state(S state, bool correction_requested = false) {
    switch (state) {
      case S::AwaitingDocuments: return fresh();
      case S::Extracting: {
        auto p = fresh();
        submit_documents(p, case_batch(generate_case(7)), ctx);
        return p;
      }
      case S::PendingValidation: {
        auto p = extracted();
        if (correction_requested) request_correction(p, issuer_did, "resubmit", ctx);
        return p;
      }
      case S::Rejected: {
        auto p = extracted();
        record_validation(p, issuer_did, Decision::Reject, {}, ctx);
        return p;
      }
      case S::Reconciling: {
        // Only observable after a crash between the two halves of approval.
        auto p = extracted();
        p.transitions.push_back({p.state, S::Reconciling, Op::RecordValidation, format_rfc3339(now)});
        p.state = S::Reconciling;
        return p;
      }
      case S::ReconciliationFailed: {
        auto p = extracted(7, true);
        record_validation(p, issuer_did, Decision::Approve, {}, ctx);
        return p;
      }
      case S::ReadyToIssue: return approved();
      case S::Issued: return issued();
      case S::Revoked: {
        auto p = issued();
        revoke_for_process(p, RevokeScope::all(), ctx);
        return p;
      }
    }
    return fresh();
  }

  void apply(Process& p, Op op) {
    switch (op) {
      case Op::SubmitDocument: {
        auto batch = case_batch(generate_case(99));
        for (auto& s : batch) s.doc_id += "-again";
        submit_documents(p, std::move(batch), ctx);
        break;
      }
      case Op::RunExtraction: run_extraction(p, ctx); break;
      case Op::RecordValidation: record_validation(p, issuer_did, Decision::Approve, {}, ctx); break;
      case Op::RequestCorrection: request_correction(p, issuer_did, "fix", ctx); break;
      case Op::IssueForProcess: issue_for_process(p, ctx); break;
      case Op::RevokeForProcess: revoke_for_process(p, RevokeScope::all(), ctx); break;
    }
  }

  Timestamp now = *parse_rfc3339("2025-06-01T10:00:00Z");
  KeyPair issuer, holder;
  DidRegistry registry;
  StatusAuthority authority;
  std::string issuer_did, holder_did;
  WorkflowContext ctx;
};

// Expected outcome of each (state, operation) pair, written from the
// transition relation alone. Absent means INVALID_STATE.
struct Row {
  S state;
  bool correction_requested;
  std::map<Op, S> allowed;
};

inline const std::vector<Row>& expected_matrix() {
  static const std::vector<Row> rows = {
      {S::AwaitingDocuments, false, {{Op::SubmitDocument, S::Extracting}}},
      {S::Extracting, false, {{Op::RunExtraction, S::PendingValidation}}},
      {S::PendingValidation,
       false,
       {{Op::RecordValidation, S::ReadyToIssue}, {Op::RequestCorrection, S::PendingValidation}}},
      {S::PendingValidation,
       true,
       {{Op::SubmitDocument, S::Extracting},
        {Op::RecordValidation, S::ReadyToIssue},
        {Op::RequestCorrection, S::PendingValidation}}},
      {S::Rejected, false, {}},
      {S::Reconciling, false, {}},
      {S::ReconciliationFailed, false, {{Op::RequestCorrection, S::PendingValidation}}},
      {S::ReadyToIssue, false, {{Op::IssueForProcess, S::Issued}}},
      {S::Issued, false, {{Op::RevokeForProcess, S::Revoked}}},
      {S::Revoked, false, {}},
  };
  return rows;
}

}  // namespace realcred::testing
