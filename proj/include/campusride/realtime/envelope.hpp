#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "campusride/domain/clock.hpp"
#include "campusride/domain/ids.hpp"

namespace campusride::realtime {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::size_t kMaxFrameBytes = 1u << 20;

enum class EventType : std::uint8_t {
  RideRequest,
  RideAccepted,
  RideRejected,
  DriverArrived,
  RideEnded,
  LocationUpdate,
  NoCarsAvailable,
};

[[nodiscard]] std::string_view to_string(EventType type) noexcept;
[[nodiscard]] std::optional<EventType> parse_event_type(std::string_view tag) noexcept;

/// A recipient: one rider/admin account or one car. Wire form
/// "account:<id>" / "car:<id>".
struct Address {
  enum class Kind : std::uint8_t { Account, Car };

  Kind kind{Kind::Account};
  std::string id;

  static Address account(const AccountId& a) { return {Kind::Account, a.str()}; }
  static Address car(const CarId& c) { return {Kind::Car, c.str()}; }
  /// Throws Error{MalformedFrame}.
  static Address parse(std::string_view text);

  [[nodiscard]] std::string str() const;

  auto operator<=>(const Address&) const = default;
};

struct EventEnvelope {
  EventType type{EventType::RideRequest};
  std::optional<RideId> ride_id;
  std::vector<Address> to;
  nlohmann::json payload = nlohmann::json::object();
  std::uint64_t seq{};
  TimePoint sent_at{};

  bool operator==(const EventEnvelope&) const = default;
};

[[nodiscard]] nlohmann::json envelope_to_json(const EventEnvelope& e);
/// Throws Error{MalformedFrame}.
[[nodiscard]] EventEnvelope envelope_from_json(const nlohmann::json& j);

/// 4-byte big-endian length followed by the UTF-8 JSON text.
[[nodiscard]] Bytes encode_frame(std::string_view text);

[[nodiscard]] Bytes encode_event(const EventEnvelope& e);

/// Decodes one complete frame (prefix included). Throws Error{MalformedFrame}
/// for a bad prefix, invalid JSON, an unknown type tag or missing fields.
[[nodiscard]] EventEnvelope decode_event(std::span<const std::uint8_t> frame);

/// Reassembles frames from a byte stream.
class FrameReader {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  void feed(const char* data, std::size_t size);

  /// Next complete frame's JSON text. Throws Error{MalformedFrame} when a
  /// declared length exceeds kMaxFrameBytes.
  [[nodiscard]] std::optional<std::string> next();

 private:
  Bytes buffer_;
  std::size_t offset_{0};
};

}  // namespace campusride::realtime
