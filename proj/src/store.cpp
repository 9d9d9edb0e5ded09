#include "realcred/store.hpp"

#include <sqlite3.h>

#include "realcred/error.hpp"

namespace realcred {

using nlohmann::json;

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS processes (
  process_id TEXT PRIMARY KEY,
  holder_did TEXT NOT NULL,
  state      TEXT NOT NULL,
  revision   INTEGER NOT NULL,
  created    TEXT NOT NULL,
  body       TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS submissions (
  process_id TEXT NOT NULL REFERENCES processes(process_id),
  doc_id     TEXT NOT NULL,
  position   INTEGER NOT NULL,
  kind       TEXT NOT NULL,
  payload    TEXT NOT NULL,
  PRIMARY KEY (process_id, doc_id)
);
CREATE TABLE IF NOT EXISTS corrections (
  process_id TEXT NOT NULL REFERENCES processes(process_id),
  seq        INTEGER NOT NULL,
  doc_id     TEXT NOT NULL,
  label      TEXT NOT NULL,
  idx        INTEGER NOT NULL,
  old_value  TEXT,
  new_value  TEXT,
  issuer_did TEXT NOT NULL,
  timestamp  TEXT NOT NULL,
  PRIMARY KEY (process_id, seq)
);
CREATE TABLE IF NOT EXISTS transitions (
  process_id TEXT NOT NULL REFERENCES processes(process_id),
  seq        INTEGER NOT NULL,
  from_state TEXT NOT NULL,
  to_state   TEXT NOT NULL,
  operation  TEXT NOT NULL,
  at         TEXT NOT NULL,
  PRIMARY KEY (process_id, seq)
);
CREATE TABLE IF NOT EXISTS credentials (
  credential_id     TEXT PRIMARY KEY,
  process_id        TEXT NOT NULL,
  status_list_id    TEXT NOT NULL,
  status_list_index INTEGER NOT NULL,
  body              TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS status_lists (
  list_id   TEXT PRIMARY KEY,
  position  INTEGER NOT NULL,
  capacity  INTEGER NOT NULL,
  version   INTEGER NOT NULL,
  allocated INTEGER NOT NULL,
  bits      BLOB NOT NULL
);
CREATE TABLE IF NOT EXISTS offers (
  offer_id    TEXT PRIMARY KEY,
  process_id  TEXT NOT NULL,
  created     TEXT NOT NULL,
  expires     TEXT NOT NULL,
  consumed_at TEXT,
  credentials TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS did_log (
  seq  INTEGER PRIMARY KEY,
  uri  TEXT NOT NULL UNIQUE,
  body TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS keys (
  name   TEXT PRIMARY KEY,
  secret BLOB NOT NULL
);
CREATE TRIGGER IF NOT EXISTS corrections_no_update BEFORE UPDATE ON corrections
  BEGIN SELECT RAISE(ABORT, 'corrections are append-only'); END;
CREATE TRIGGER IF NOT EXISTS corrections_no_delete BEFORE DELETE ON corrections
  BEGIN SELECT RAISE(ABORT, 'corrections are append-only'); END;
CREATE TRIGGER IF NOT EXISTS transitions_no_update BEFORE UPDATE ON transitions
  BEGIN SELECT RAISE(ABORT, 'transitions are append-only'); END;
CREATE TRIGGER IF NOT EXISTS transitions_no_delete BEFORE DELETE ON transitions
  BEGIN SELECT RAISE(ABORT, 'transitions are append-only'); END;
)sql";

[[noreturn]] void fail(sqlite3* db, const std::string& what) {
  throw Error(Errc::StorageFailure, what + ": " + (db ? sqlite3_errmsg(db) : "no database"));
}

class Stmt {
 public:
  Stmt(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) fail(db, "prepare");
  }
  ~Stmt() { sqlite3_finalize(stmt_); }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;

  Stmt& bind(int i, const std::string& s) {
    check(sqlite3_bind_text(stmt_, i, s.data(), static_cast<int>(s.size()), SQLITE_TRANSIENT));
    return *this;
  }
  Stmt& bind(int i, const std::optional<std::string>& s) {
    if (!s) {
      check(sqlite3_bind_null(stmt_, i));
      return *this;
    }
    return bind(i, *s);
  }
  Stmt& bind(int i, std::int64_t v) {
    check(sqlite3_bind_int64(stmt_, i, v));
    return *this;
  }
  Stmt& bind_blob(int i, std::span<const unsigned char> bytes) {
    check(sqlite3_bind_blob(stmt_, i, bytes.data(), static_cast<int>(bytes.size()), SQLITE_TRANSIENT));
    return *this;
  }

  /// True while rows remain.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    fail(db_, "step");
  }
  void run() {
    while (step()) {
    }
  }

  std::string text(int col) const {
    const auto* p = sqlite3_column_text(stmt_, col);
    return p ? std::string(reinterpret_cast<const char*>(p), static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)))
             : std::string();
  }
  std::optional<std::string> optional_text(int col) const {
    if (sqlite3_column_type(stmt_, col) == SQLITE_NULL) return std::nullopt;
    return text(col);
  }
  std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }
  std::vector<unsigned char> blob(int col) const {
    const auto* p = static_cast<const unsigned char*>(sqlite3_column_blob(stmt_, col));
    return std::vector<unsigned char>(p, p + sqlite3_column_bytes(stmt_, col));
  }

 private:
  void check(int rc) {
    if (rc != SQLITE_OK) fail(db_, "bind");
  }
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

class Transaction {
 public:
  explicit Transaction(sqlite3* db) : db_(db) {
    if (sqlite3_exec(db_, "BEGIN IMMEDIATE", nullptr, nullptr, nullptr) != SQLITE_OK) fail(db_, "begin");
  }
  ~Transaction() {
    if (!done_) sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
  }
  void commit() {
    if (sqlite3_exec(db_, "COMMIT", nullptr, nullptr, nullptr) != SQLITE_OK) fail(db_, "commit");
    done_ = true;
  }

 private:
  sqlite3* db_;
  bool done_ = false;
};

// Members kept in the processes.body column; the list-valued parts live in
// their own tables.
json process_body(const Process& p) {
  json j = to_json(p);
  for (const char* k : {"process_id", "holder_did", "state", "revision", "created", "submissions", "corrections",
                        "transitions", "claims"}) {
    j.erase(k);
  }
  return j;
}

std::int64_t as_int(std::uint64_t v) { return static_cast<std::int64_t>(v); }

void write_process(sqlite3* db, const Process& p) {
  Stmt(db,
       "INSERT INTO processes(process_id, holder_did, state, revision, created, body) VALUES(?1,?2,?3,?4,?5,?6) "
       "ON CONFLICT(process_id) DO UPDATE SET state=excluded.state, revision=excluded.revision, body=excluded.body")
      .bind(1, p.process_id)
      .bind(2, p.holder_did)
      .bind(3, std::string(to_string(p.state)))
      .bind(4, as_int(p.revision))
      .bind(5, p.created)
      .bind(6, process_body(p).dump())
      .run();

  Stmt(db, "DELETE FROM submissions WHERE process_id = ?1").bind(1, p.process_id).run();
  for (std::size_t i = 0; i < p.submissions.size(); ++i) {
    const auto& s = p.submissions[i];
    Stmt(db, "INSERT INTO submissions(process_id, doc_id, position, kind, payload) VALUES(?1,?2,?3,?4,?5)")
        .bind(1, p.process_id)
        .bind(2, s.doc_id)
        .bind(3, static_cast<std::int64_t>(i))
        .bind(4, std::string(to_string(s.kind)))
        .bind(5, to_json(s).dump())
        .run();
  }

  for (const auto& e : p.corrections) {
    Stmt(db,
         "INSERT OR IGNORE INTO corrections(process_id, seq, doc_id, label, idx, old_value, new_value, issuer_did, "
         "timestamp) VALUES(?1,?2,?3,?4,?5,?6,?7,?8,?9)")
        .bind(1, p.process_id)
        .bind(2, as_int(e.seq))
        .bind(3, e.doc_id)
        .bind(4, e.label)
        .bind(5, static_cast<std::int64_t>(e.index))
        .bind(6, e.old_value)
        .bind(7, e.new_value)
        .bind(8, e.issuer_did)
        .bind(9, e.timestamp)
        .run();
  }
  for (std::size_t i = 0; i < p.transitions.size(); ++i) {
    const auto& t = p.transitions[i];
    Stmt(db,
         "INSERT OR IGNORE INTO transitions(process_id, seq, from_state, to_state, operation, at) "
         "VALUES(?1,?2,?3,?4,?5,?6)")
        .bind(1, p.process_id)
        .bind(2, static_cast<std::int64_t>(i + 1))
        .bind(3, std::string(to_string(t.from)))
        .bind(4, std::string(to_string(t.to)))
        .bind(5, std::string(to_string(t.op)))
        .bind(6, t.at)
        .run();
  }
}

Process read_process(sqlite3* db, Stmt& row) {
  json j = json::parse(row.text(5));
  const std::string id = row.text(0);
  j["process_id"] = id;
  j["holder_did"] = row.text(1);
  j["state"] = row.text(2);
  j["revision"] = row.integer(3);
  j["created"] = row.text(4);

  j["submissions"] = json::array();
  Stmt subs(db, "SELECT payload FROM submissions WHERE process_id = ?1 ORDER BY position");
  subs.bind(1, id);
  while (subs.step()) j["submissions"].push_back(json::parse(subs.text(0)));

  j["corrections"] = json::array();
  Stmt corr(db,
            "SELECT seq, doc_id, label, idx, old_value, new_value, issuer_did, timestamp FROM corrections "
            "WHERE process_id = ?1 ORDER BY seq");
  corr.bind(1, id);
  while (corr.step()) {
    auto old_value = corr.optional_text(4);
    auto new_value = corr.optional_text(5);
    j["corrections"].push_back({{"seq", corr.integer(0)},
                                {"doc_id", corr.text(1)},
                                {"label", corr.text(2)},
                                {"index", corr.integer(3)},
                                {"old_value", old_value ? json(*old_value) : json(nullptr)},
                                {"new_value", new_value ? json(*new_value) : json(nullptr)},
                                {"issuer_did", corr.text(6)},
                                {"timestamp", corr.text(7)}});
  }

  j["transitions"] = json::array();
  Stmt tr(db, "SELECT from_state, to_state, operation, at FROM transitions WHERE process_id = ?1 ORDER BY seq");
  tr.bind(1, id);
  while (tr.step()) {
    j["transitions"].push_back({{"from", tr.text(0)}, {"to", tr.text(1)}, {"operation", tr.text(2)}, {"at", tr.text(3)}});
  }
  return process_from_json(j);
}

OfferRecord read_offer(Stmt& row) {
  OfferRecord o;
  o.offer_id = row.text(0);
  o.process_id = row.text(1);
  o.created = row.text(2);
  o.expires = row.text(3);
  o.consumed_at = row.optional_text(4);
  o.credentials = json::parse(row.text(5));
  return o;
}

}  // namespace

Store::Store(const std::filesystem::path& path) {
  if (sqlite3_open_v2(path.string().c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                      nullptr) != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    db_ = nullptr;
    throw Error(Errc::StorageFailure, "open " + path.string() + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  try {
    if (path != ":memory:") exec("PRAGMA journal_mode=WAL");
    exec("PRAGMA synchronous=FULL");
    exec("PRAGMA foreign_keys=ON");
    exec(kSchema);
  } catch (...) {
    sqlite3_close(db_);
    db_ = nullptr;
    throw;
  }
}

Store::~Store() { sqlite3_close(db_); }

void Store::exec(const char* sql) const {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw Error(Errc::StorageFailure, msg);
  }
}

void Store::set_fault_hook(FaultHook hook) {
  std::lock_guard lock(mu_);
  hook_ = std::move(hook);
}

void Store::commit(const StoreCommit& change) {
  std::lock_guard lock(mu_);
  Transaction tx(db_);
  if (hook_) hook_("begin");
  if (change.process) write_process(db_, *change.process);
  for (const auto& list : change.lists) {
    Stmt(db_,
         "INSERT INTO status_lists(list_id, position, capacity, version, allocated, bits) "
         "VALUES(?1, (SELECT COUNT(*) FROM status_lists), ?2, ?3, ?4, ?5) "
         "ON CONFLICT(list_id) DO UPDATE SET version=excluded.version, allocated=excluded.allocated, bits=excluded.bits")
        .bind(1, list.id())
        .bind(2, static_cast<std::int64_t>(list.capacity()))
        .bind(3, as_int(list.version()))
        .bind(4, static_cast<std::int64_t>(list.allocated()))
        .bind_blob(5, list.bytes())
        .run();
  }
  for (const auto& c : change.credentials) {
    Stmt(db_,
         "INSERT INTO credentials(credential_id, process_id, status_list_id, status_list_index, body) "
         "VALUES(?1,?2,?3,?4,?5)")
        .bind(1, c.record.credential_id)
        .bind(2, c.record.process_id)
        .bind(3, c.record.status_list_id)
        .bind(4, as_int(c.record.status_list_index))
        .bind(5, c.body.dump())
        .run();
  }
  if (change.offer) {
    const auto& o = *change.offer;
    Stmt(db_,
         "INSERT INTO offers(offer_id, process_id, created, expires, consumed_at, credentials) "
         "VALUES(?1,?2,?3,?4,?5,?6)")
        .bind(1, o.offer_id)
        .bind(2, o.process_id)
        .bind(3, o.created)
        .bind(4, o.expires)
        .bind(5, o.consumed_at)
        .bind(6, o.credentials.dump())
        .run();
  }
  if (hook_) hook_("before_commit");
  tx.commit();
  if (hook_) hook_("after_commit");
}

std::vector<Process> Store::load_processes() const {
  std::lock_guard lock(mu_);
  std::vector<Process> out;
  Stmt row(db_, "SELECT process_id, holder_did, state, revision, created, body FROM processes ORDER BY rowid");
  while (row.step()) out.push_back(read_process(db_, row));
  return out;
}

std::optional<Process> Store::load_process(const std::string& process_id) const {
  std::lock_guard lock(mu_);
  Stmt row(db_, "SELECT process_id, holder_did, state, revision, created, body FROM processes WHERE process_id = ?1");
  row.bind(1, process_id);
  if (!row.step()) return std::nullopt;
  return read_process(db_, row);
}

std::vector<StatusList> Store::load_status_lists() const {
  std::lock_guard lock(mu_);
  std::vector<StatusList> out;
  Stmt row(db_, "SELECT list_id, capacity, version, allocated, bits FROM status_lists ORDER BY position");
  while (row.step()) {
    out.push_back(StatusList::from_bytes(row.text(0), static_cast<std::size_t>(row.integer(1)), row.blob(4),
                                         static_cast<std::uint64_t>(row.integer(2)),
                                         static_cast<std::size_t>(row.integer(3))));
  }
  return out;
}

std::vector<CredentialRecord> Store::load_credential_records() const {
  std::lock_guard lock(mu_);
  std::vector<CredentialRecord> out;
  Stmt row(db_, "SELECT credential_id, process_id, status_list_id, status_list_index FROM credentials ORDER BY rowid");
  while (row.step()) {
    out.push_back({row.text(0), row.text(1), row.text(2), static_cast<std::uint64_t>(row.integer(3))});
  }
  return out;
}

std::optional<json> Store::load_credential(const std::string& credential_id) const {
  std::lock_guard lock(mu_);
  Stmt row(db_, "SELECT body FROM credentials WHERE credential_id = ?1");
  row.bind(1, credential_id);
  if (!row.step()) return std::nullopt;
  return std::optional<json>(std::in_place, json::parse(row.text(0)));
}

std::optional<OfferRecord> Store::load_offer(const std::string& offer_id) const {
  std::lock_guard lock(mu_);
  Stmt row(db_, "SELECT offer_id, process_id, created, expires, consumed_at, credentials FROM offers WHERE offer_id = ?1");
  row.bind(1, offer_id);
  if (!row.step()) return std::nullopt;
  return read_offer(row);
}

bool Store::consume_offer(const std::string& offer_id, const std::string& at) {
  std::lock_guard lock(mu_);
  Stmt(db_, "UPDATE offers SET consumed_at = ?2 WHERE offer_id = ?1 AND consumed_at IS NULL")
      .bind(1, offer_id)
      .bind(2, at)
      .run();
  return sqlite3_changes(db_) == 1;
}

void Store::append_did(const DidLogEntry& entry) {
  std::lock_guard lock(mu_);
  Stmt(db_, "INSERT INTO did_log(seq, uri, body) VALUES(?1,?2,?3)")
      .bind(1, as_int(entry.seq))
      .bind(2, entry.uri)
      .bind(3, to_json(entry).dump())
      .run();
}

std::vector<DidLogEntry> Store::load_did_log() const {
  std::lock_guard lock(mu_);
  std::vector<DidLogEntry> out;
  Stmt row(db_, "SELECT body FROM did_log ORDER BY seq");
  while (row.step()) out.push_back(did_entry_from_json(json::parse(row.text(0))));
  return out;
}

void Store::save_key(const std::string& name, std::span<const unsigned char> secret) {
  std::lock_guard lock(mu_);
  Stmt(db_, "INSERT INTO keys(name, secret) VALUES(?1,?2) ON CONFLICT(name) DO UPDATE SET secret=excluded.secret")
      .bind(1, name)
      .bind_blob(2, secret)
      .run();
}

std::optional<std::vector<unsigned char>> Store::load_key(const std::string& name) const {
  std::lock_guard lock(mu_);
  Stmt row(db_, "SELECT secret FROM keys WHERE name = ?1");
  row.bind(1, name);
  if (!row.step()) return std::nullopt;
  return row.blob(0);
}

}  // namespace realcred
