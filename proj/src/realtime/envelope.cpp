#include "campusride/realtime/envelope.hpp"

#include <array>
#include <cstring>

#include <fmt/format.h>

#include "campusride/domain/error.hpp"

namespace campusride::realtime {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<EventType, std::string_view>, 7> kTags{{
    {EventType::RideRequest, "ride-request"},
    {EventType::RideAccepted, "ride-accepted"},
    {EventType::RideRejected, "ride-rejected"},
    {EventType::DriverArrived, "driver-arrived"},
    {EventType::RideEnded, "ride-ended"},
    {EventType::LocationUpdate, "location-update"},
    {EventType::NoCarsAvailable, "no-cars-available"},
}};

[[noreturn]] void malformed(const std::string& why) { throw Error(ErrorCode::MalformedFrame, why); }

}  // namespace

std::string_view to_string(EventType type) noexcept {
  for (const auto& [t, tag] : kTags) {
    if (t == type) return tag;
  }
  return "unknown";
}

std::optional<EventType> parse_event_type(std::string_view tag) noexcept {
  for (const auto& [t, name] : kTags) {
    if (name == tag) return t;
  }
  return std::nullopt;
}

Address Address::parse(std::string_view text) {
  if (text.starts_with("account:") && text.size() > 8) return {Kind::Account, std::string(text.substr(8))};
  if (text.starts_with("car:") && text.size() > 4) return {Kind::Car, std::string(text.substr(4))};
  malformed(fmt::format("bad address '{}'", text));
}

std::string Address::str() const { return (kind == Kind::Account ? "account:" : "car:") + id; }

json envelope_to_json(const EventEnvelope& e) {
  json j{{"type", to_string(e.type)}, {"seq", e.seq}, {"sent_at", to_millis(e.sent_at)}};
  if (e.ride_id) j["ride_id"] = e.ride_id->str();
  if (!e.to.empty()) {
    json to = json::array();
    for (const auto& a : e.to) to.push_back(a.str());
    j["to"] = std::move(to);
  }
  if (!e.payload.empty()) j["payload"] = e.payload;
  return j;
}

EventEnvelope envelope_from_json(const json& j) {
  if (!j.is_object()) malformed("frame is not a JSON object");
  EventEnvelope e;

  const auto type = j.find("type");
  if (type == j.end() || !type->is_string()) malformed("missing 'type'");
  const auto parsed = parse_event_type(type->get_ref<const std::string&>());
  if (!parsed) malformed(fmt::format("unknown event type '{}'", type->get<std::string>()));
  e.type = *parsed;

  const auto seq = j.find("seq");
  if (seq == j.end() || !seq->is_number_unsigned()) malformed("missing or invalid 'seq'");
  e.seq = seq->get<std::uint64_t>();

  const auto sent = j.find("sent_at");
  if (sent == j.end() || !sent->is_number_integer()) malformed("missing or invalid 'sent_at'");
  e.sent_at = from_millis(sent->get<std::int64_t>());

  if (auto ride = j.find("ride_id"); ride != j.end()) {
    if (!ride->is_string() || ride->get_ref<const std::string&>().empty()) malformed("invalid 'ride_id'");
    e.ride_id = RideId{ride->get<std::string>()};
  }
  if (auto to = j.find("to"); to != j.end()) {
    if (!to->is_array()) malformed("invalid 'to'");
    for (const auto& a : *to) {
      if (!a.is_string()) malformed("invalid address");
      e.to.push_back(Address::parse(a.get_ref<const std::string&>()));
    }
  }
  if (auto payload = j.find("payload"); payload != j.end()) {
    if (!payload->is_object()) malformed("'payload' must be an object");
    e.payload = *payload;
  }
  return e;
}

Bytes encode_frame(std::string_view text) {
  if (text.size() > kMaxFrameBytes) throw Error(ErrorCode::MalformedFrame, "frame too large");
  const auto n = static_cast<std::uint32_t>(text.size());
  Bytes out;
  out.reserve(4 + text.size());
  out.push_back(static_cast<std::uint8_t>(n >> 24));
  out.push_back(static_cast<std::uint8_t>(n >> 16));
  out.push_back(static_cast<std::uint8_t>(n >> 8));
  out.push_back(static_cast<std::uint8_t>(n));
  out.insert(out.end(), text.begin(), text.end());
  return out;
}

Bytes encode_event(const EventEnvelope& e) { return encode_frame(envelope_to_json(e).dump()); }

EventEnvelope decode_event(std::span<const std::uint8_t> frame) {
  if (frame.size() < 4) malformed("frame shorter than its length prefix");
  const std::uint32_t n = (std::uint32_t{frame[0]} << 24) | (std::uint32_t{frame[1]} << 16) |
                          (std::uint32_t{frame[2]} << 8) | std::uint32_t{frame[3]};
  if (n != frame.size() - 4) malformed(fmt::format("length prefix {} does not match body {}", n, frame.size() - 4));
  const std::string_view text(reinterpret_cast<const char*>(frame.data() + 4), n);
  auto j = json::parse(text, nullptr, false);
  if (j.is_discarded()) malformed("frame body is not valid JSON");
  return envelope_from_json(j);
}

void FrameReader::feed(std::span<const std::uint8_t> bytes) {
  if (offset_ > 0 && offset_ == buffer_.size()) {
    buffer_.clear();
    offset_ = 0;
  }
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

void FrameReader::feed(const char* data, std::size_t size) {
  feed(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(data), size));
}

std::optional<std::string> FrameReader::next() {
  const std::size_t avail = buffer_.size() - offset_;
  if (avail < 4) return std::nullopt;
  const auto* p = buffer_.data() + offset_;
  const std::uint32_t n = (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
                          std::uint32_t{p[3]};
  if (n > kMaxFrameBytes) throw Error(ErrorCode::MalformedFrame, fmt::format("declared frame length {} too large", n));
  if (avail < 4 + std::size_t{n}) return std::nullopt;
  std::string text(reinterpret_cast<const char*>(p + 4), n);
  offset_ += 4 + n;
  if (offset_ > 64 * 1024 && offset_ * 2 > buffer_.size()) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(offset_));
    offset_ = 0;
  }
  return text;
}

}  // namespace campusride::realtime
