#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>

#include "campusride/store/document_store.hpp"

namespace campusride::store {

/// In-memory collections, optionally mirrored to an append-only JSON-lines
/// log that is replayed on open. A torn trailing record (crash mid-write) is
/// discarded.
class MemoryLogStore final : public DocumentStore {
 public:
  struct Options {
    bool fsync{false};  // fflush alone survives process death; fsync also survives power loss
  };

  MemoryLogStore();
  explicit MemoryLogStore(std::filesystem::path log_path);
  MemoryLogStore(std::filesystem::path log_path, Options options);
  ~MemoryLogStore() override;

  MemoryLogStore(const MemoryLogStore&) = delete;
  MemoryLogStore& operator=(const MemoryLogStore&) = delete;

  [[nodiscard]] std::optional<Versioned> get(std::string_view collection, std::string_view key) const override;
  [[nodiscard]] std::vector<std::pair<std::string, Versioned>> scan(std::string_view collection) const override;
  std::optional<Revision> compare_and_swap(std::string_view collection, std::string_view key, Revision expected,
                                           const Document& doc) override;
  Revision put(std::string_view collection, std::string_view key, const Document& doc) override;
  bool erase(std::string_view collection, std::string_view key) override;

 private:
  using Collection = std::map<std::string, Versioned, std::less<>>;

  void replay();
  void append(const Document& record);
  Revision write_locked(std::string_view collection, std::string_view key, Revision current, const Document& doc);

  mutable std::mutex mu_;
  std::map<std::string, Collection, std::less<>> data_;
  std::optional<std::filesystem::path> path_;
  Options options_;
  std::FILE* log_{nullptr};
};

}  // namespace campusride::store
