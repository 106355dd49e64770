#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace campusride::store {

using Document = nlohmann::json;

/// Revision 0 means "absent"; every successful write bumps the revision.
using Revision = std::uint64_t;

struct Versioned {
  Revision revision{};
  Document doc;
};

namespace collections {
inline constexpr std::string_view kUsers = "users";
inline constexpr std::string_view kCars = "cars";
inline constexpr std::string_view kRequests = "requests";
inline constexpr std::string_view kRides = "rides";
inline constexpr std::string_view kLocations = "locations";
inline constexpr std::string_view kOutbox = "outbox";
inline constexpr std::string_view kSessions = "sessions";
}  // namespace collections

/// Keyed document collections with an atomic compare-and-swap. Every mutation
/// is durable when the call returns. Implementations are thread-safe.
class DocumentStore {
 public:
  virtual ~DocumentStore() = default;

  [[nodiscard]] virtual std::optional<Versioned> get(std::string_view collection, std::string_view key) const = 0;

  /// All documents of a collection in ascending key order.
  [[nodiscard]] virtual std::vector<std::pair<std::string, Versioned>> scan(std::string_view collection) const = 0;

  /// Writes `doc` iff the stored revision equals `expected` (0: key must be
  /// absent). Returns the new revision, or nullopt on conflict.
  virtual std::optional<Revision> compare_and_swap(std::string_view collection, std::string_view key,
                                                   Revision expected, const Document& doc) = 0;

  /// Unconditional upsert.
  virtual Revision put(std::string_view collection, std::string_view key, const Document& doc) = 0;

  /// Returns false when the key was absent.
  virtual bool erase(std::string_view collection, std::string_view key) = 0;
};

/// "memory", "log:<path>" or "sqlite:<path>". Throws Error{StoreFailure}.
[[nodiscard]] std::shared_ptr<DocumentStore> open_store(std::string_view spec);

}  // namespace campusride::store
