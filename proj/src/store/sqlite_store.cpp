#include "campusride/store/sqlite_store.hpp"

#include <sqlite3.h>

#include <fmt/format.h>

#include "campusride/domain/error.hpp"

namespace campusride::store {

namespace {

class Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
      throw Error(ErrorCode::StoreFailure, fmt::format("sqlite prepare: {}", sqlite3_errmsg(db)));
    }
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  Statement& bind(int index, std::string_view text) {
    sqlite3_bind_text(stmt_, index, text.data(), static_cast<int>(text.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Statement& bind(int index, std::int64_t value) {
    sqlite3_bind_int64(stmt_, index, value);
    return *this;
  }

  /// True while a row is available.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw Error(ErrorCode::StoreFailure, fmt::format("sqlite step: {}", sqlite3_errmsg(db_)));
  }

  std::int64_t int_at(int col) { return sqlite3_column_int64(stmt_, col); }
  std::string text_at(int col) {
    const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, col));
    return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col))) : std::string{};
  }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_{nullptr};
};

}  // namespace

SqliteStore::SqliteStore(const std::filesystem::path& path) {
  if (path != ":memory:" && path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (sqlite3_open(path.c_str(), &db_) != SQLITE_OK) {
    const std::string why = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    db_ = nullptr;
    throw Error(ErrorCode::StoreFailure, fmt::format("cannot open {}: {}", path.string(), why));
  }
  exec("PRAGMA journal_mode=WAL");
  exec("PRAGMA synchronous=NORMAL");
  exec(
      "CREATE TABLE IF NOT EXISTS documents ("
      " collection TEXT NOT NULL, key TEXT NOT NULL, revision INTEGER NOT NULL, body TEXT NOT NULL,"
      " PRIMARY KEY (collection, key))");
}

SqliteStore::~SqliteStore() { sqlite3_close(db_); }

void SqliteStore::exec(const char* sql) const {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string why = err ? err : "unknown";
    sqlite3_free(err);
    throw Error(ErrorCode::StoreFailure, fmt::format("sqlite: {} ({})", why, sql));
  }
}

std::optional<Versioned> SqliteStore::get(std::string_view collection, std::string_view key) const {
  std::scoped_lock lock(mu_);
  Statement st(db_, "SELECT revision, body FROM documents WHERE collection = ?1 AND key = ?2");
  st.bind(1, collection).bind(2, key);
  if (!st.step()) return std::nullopt;
  return Versioned{static_cast<Revision>(st.int_at(0)), Document::parse(st.text_at(1))};
}

std::vector<std::pair<std::string, Versioned>> SqliteStore::scan(std::string_view collection) const {
  std::scoped_lock lock(mu_);
  // BINARY collation matches std::string ordering.
  Statement st(db_, "SELECT key, revision, body FROM documents WHERE collection = ?1 ORDER BY key");
  st.bind(1, collection);
  std::vector<std::pair<std::string, Versioned>> out;
  while (st.step()) {
    out.emplace_back(st.text_at(0), Versioned{static_cast<Revision>(st.int_at(1)), Document::parse(st.text_at(2))});
  }
  return out;
}

Revision SqliteStore::current_revision(std::string_view collection, std::string_view key) const {
  Statement st(db_, "SELECT revision FROM documents WHERE collection = ?1 AND key = ?2");
  st.bind(1, collection).bind(2, key);
  return st.step() ? static_cast<Revision>(st.int_at(0)) : 0;
}

Revision SqliteStore::upsert(std::string_view collection, std::string_view key, Revision current, const Document& doc) {
  const Revision next = current + 1;
  Statement st(db_,
               "INSERT INTO documents (collection, key, revision, body) VALUES (?1, ?2, ?3, ?4)"
               " ON CONFLICT (collection, key) DO UPDATE SET revision = excluded.revision, body = excluded.body");
  st.bind(1, collection).bind(2, key).bind(3, static_cast<std::int64_t>(next)).bind(4, doc.dump());
  st.step();
  return next;
}

std::optional<Revision> SqliteStore::compare_and_swap(std::string_view collection, std::string_view key,
                                                      Revision expected, const Document& doc) {
  std::scoped_lock lock(mu_);
  exec("BEGIN IMMEDIATE");
  try {
    const Revision current = current_revision(collection, key);
    if (current != expected) {
      exec("ROLLBACK");
      return std::nullopt;
    }
    const Revision next = upsert(collection, key, current, doc);
    exec("COMMIT");
    return next;
  } catch (...) {
    exec("ROLLBACK");
    throw;
  }
}

Revision SqliteStore::put(std::string_view collection, std::string_view key, const Document& doc) {
  std::scoped_lock lock(mu_);
  exec("BEGIN IMMEDIATE");
  try {
    const Revision next = upsert(collection, key, current_revision(collection, key), doc);
    exec("COMMIT");
    return next;
  } catch (...) {
    exec("ROLLBACK");
    throw;
  }
}

bool SqliteStore::erase(std::string_view collection, std::string_view key) {
  std::scoped_lock lock(mu_);
  Statement st(db_, "DELETE FROM documents WHERE collection = ?1 AND key = ?2");
  st.bind(1, collection).bind(2, key);
  st.step();
  return sqlite3_changes(db_) > 0;
}

}  // namespace campusride::store
