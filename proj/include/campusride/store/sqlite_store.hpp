#pragma once

#include <filesystem>
#include <mutex>

#include "campusride/store/document_store.hpp"

struct sqlite3;

namespace campusride::store {

/// Document collections in one SQLite table. Pass ":memory:" for a
/// throwaway database.
class SqliteStore final : public DocumentStore {
 public:
  explicit SqliteStore(const std::filesystem::path& path);
  ~SqliteStore() override;

  SqliteStore(const SqliteStore&) = delete;
  SqliteStore& operator=(const SqliteStore&) = delete;

  [[nodiscard]] std::optional<Versioned> get(std::string_view collection, std::string_view key) const override;
  [[nodiscard]] std::vector<std::pair<std::string, Versioned>> scan(std::string_view collection) const override;
  std::optional<Revision> compare_and_swap(std::string_view collection, std::string_view key, Revision expected,
                                           const Document& doc) override;
  Revision put(std::string_view collection, std::string_view key, const Document& doc) override;
  bool erase(std::string_view collection, std::string_view key) override;

 private:
  void exec(const char* sql) const;
  [[nodiscard]] Revision current_revision(std::string_view collection, std::string_view key) const;
  Revision upsert(std::string_view collection, std::string_view key, Revision current, const Document& doc);

  mutable std::mutex mu_;
  sqlite3* db_{nullptr};
};

}  // namespace campusride::store
