#include "realcred/revocation.hpp"

#include "realcred/error.hpp"

namespace realcred {

StatusAuthority::StatusAuthority(KeyPair issuer, std::size_t list_capacity, std::string list_prefix)
    : issuer_(issuer), capacity_(list_capacity), prefix_(std::move(list_prefix)) {}

StatusList& StatusAuthority::open_list_locked() {
  if (!list_order_.empty()) {
    auto& current = lists_.at(list_order_.back());
    if (current.allocated() < current.capacity()) return current;
  }
  const std::string id = prefix_ + std::to_string(list_order_.size() + 1);
  list_order_.push_back(id);
  return lists_.emplace(id, StatusList(id, capacity_)).first->second;
}

void StatusAuthority::publish_locked(const StatusList& list, Timestamp now) {
  published_[list.id()] = to_json(encode_status_list(list, issuer_, now));
}

VerifiableCredential StatusAuthority::issue(const nlohmann::json& subject, const DidRegistry& registry,
                                            const std::string& process_id, Timestamp now,
                                            const IssueOptions& options) {
  std::lock_guard lock(mu_);
  auto& list = open_list_locked();
  const bool fresh = !published_.count(list.id());
  auto vc = issue_credential(subject, issuer_, registry, &list, now, options);
  records_[vc.id] = {vc.id, process_id, vc.credential_status->status_list_id, vc.credential_status->status_list_index};
  if (fresh) publish_locked(list, now);
  return vc;
}

std::string StatusAuthority::set_state(const std::string& credential_id, CredentialState state, Timestamp now) {
  std::lock_guard lock(mu_);
  auto it = records_.find(credential_id);
  if (it == records_.end()) throw Error(Errc::UnknownCredential, credential_id);
  auto& list = lists_.at(it->second.status_list_id);
  list.set(it->second.status_list_index, state);
  publish_locked(list, now);
  return list.id();
}

std::vector<std::string> StatusAuthority::revoke_process(const std::string& process_id, Timestamp now) {
  std::lock_guard lock(mu_);
  std::map<std::string, bool> touched;
  for (const auto& [id, rec] : records_) {
    if (rec.process_id != process_id) continue;
    lists_.at(rec.status_list_id).set(rec.status_list_index, CredentialState::Revoked);
    touched[rec.status_list_id] = true;
  }
  if (touched.empty()) throw Error(Errc::UnknownProcess, "no credentials for process " + process_id);
  std::vector<std::string> out;
  for (const auto& [id, _] : touched) {
    publish_locked(lists_.at(id), now);
    out.push_back(id);
  }
  return out;
}

CredentialState StatusAuthority::state_of(const std::string& credential_id) const {
  std::lock_guard lock(mu_);
  auto it = records_.find(credential_id);
  if (it == records_.end()) throw Error(Errc::UnknownCredential, credential_id);
  return lists_.at(it->second.status_list_id).get(it->second.status_list_index);
}

std::vector<std::string> StatusAuthority::credentials_of(const std::string& process_id) const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, rec] : records_) {
    if (rec.process_id == process_id) out.push_back(id);
  }
  return out;
}

std::optional<nlohmann::json> StatusAuthority::published(const std::string& list_id) const {
  std::lock_guard lock(mu_);
  if (auto it = published_.find(list_id); it != published_.end()) return std::optional<nlohmann::json>(std::in_place, it->second);
  return std::nullopt;
}

std::optional<StatusList> StatusAuthority::list(const std::string& list_id) const {
  std::lock_guard lock(mu_);
  if (auto it = lists_.find(list_id); it != lists_.end()) return it->second;
  return std::nullopt;
}

std::vector<StatusList> StatusAuthority::lists() const {
  std::lock_guard lock(mu_);
  std::vector<StatusList> out;
  for (const auto& id : list_order_) out.push_back(lists_.at(id));
  return out;
}

std::vector<CredentialRecord> StatusAuthority::records() const {
  std::lock_guard lock(mu_);
  std::vector<CredentialRecord> out;
  for (const auto& [_, rec] : records_) out.push_back(rec);
  return out;
}

void StatusAuthority::restore(std::vector<StatusList> lists, std::vector<CredentialRecord> records, Timestamp now) {
  std::map<std::string, StatusList> by_id;
  std::vector<std::string> order;
  for (auto& l : lists) {
    order.push_back(l.id());
    by_id.emplace(l.id(), std::move(l));
  }
  std::map<std::string, CredentialRecord> recs;
  for (auto& r : records) {
    auto it = by_id.find(r.status_list_id);
    if (it == by_id.end() || r.status_list_index >= it->second.capacity()) {
      throw Error(Errc::Malformed, "credential " + r.credential_id + " points outside the restored lists");
    }
    recs.emplace(r.credential_id, std::move(r));
  }
  std::lock_guard lock(mu_);
  lists_ = std::move(by_id);
  list_order_ = std::move(order);
  records_ = std::move(recs);
  published_.clear();
  for (const auto& id : list_order_) publish_locked(lists_.at(id), now);
}

}  // namespace realcred
