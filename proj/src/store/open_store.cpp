#include <fmt/format.h>

#include "campusride/domain/error.hpp"
#include "campusride/store/document_store.hpp"
#include "campusride/store/memory_log_store.hpp"
#include "campusride/store/sqlite_store.hpp"

namespace campusride::store {

std::shared_ptr<DocumentStore> open_store(std::string_view spec) {
  if (spec.empty() || spec == "memory") return std::make_shared<MemoryLogStore>();
  if ((spec.starts_with("log:") && spec.size() == 4) || (spec.starts_with("sqlite:") && spec.size() == 7)) {
    throw Error(ErrorCode::StoreFailure, fmt::format("store '{}' names no path", spec));
  }
  if (spec.starts_with("log:")) return std::make_shared<MemoryLogStore>(std::filesystem::path(spec.substr(4)));
  if (spec.starts_with("sqlite:")) return std::make_shared<SqliteStore>(std::filesystem::path(spec.substr(7)));
  throw Error(ErrorCode::StoreFailure, fmt::format("unknown store '{}' (memory, log:<path>, sqlite:<path>)", spec));
}

}  // namespace campusride::store
