#pragma once

#include <compare>
#include <functional>
#include <ostream>
#include <string>
#include <utility>

namespace campusride {

/// String identifier distinguished at compile time by its tag.
template <class Tag>
struct StrongId {
  std::string value;

  StrongId() = default;
  explicit StrongId(std::string v) : value(std::move(v)) {}

  [[nodiscard]] bool empty() const noexcept { return value.empty(); }
  [[nodiscard]] const std::string& str() const noexcept { return value; }

  auto operator<=>(const StrongId&) const = default;
  bool operator==(const StrongId&) const = default;

  friend std::ostream& operator<<(std::ostream& os, const StrongId& id) { return os << id.value; }
};

using AccountId = StrongId<struct AccountIdTag>;
using CarId = StrongId<struct CarIdTag>;
using RequestId = StrongId<struct RequestIdTag>;
using RideId = StrongId<struct RideIdTag>;
using NodeId = StrongId<struct NodeIdTag>;

}  // namespace campusride

template <class Tag>
struct std::hash<campusride::StrongId<Tag>> {
  std::size_t operator()(const campusride::StrongId<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.value);
  }
};
