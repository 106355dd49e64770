#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "campusride/realtime/envelope.hpp"

namespace campusride::sim {

struct TranscriptEntry {
  enum class Kind : std::uint8_t { Http, Event, Note };

  std::int64_t t_ms{};  // virtual time since the scenario started
  std::uint64_t seq{};  // append order, the tiebreak within one instant
  std::string actor;
  Kind kind{Kind::Note};

  // Http
  std::string method;
  std::string path;
  nlohmann::json request;
  int status{};
  nlohmann::json response;

  // Event
  std::optional<realtime::EventEnvelope> event;

  // Note
  std::string note;
};

/// Append-only record of one run, ordered by (t_ms, seq). Secrets are
/// redacted on the way in: "password" in request bodies and "token" in
/// responses never reach the transcript.
class Transcript {
 public:
  const TranscriptEntry& http(std::int64_t t_ms, std::string actor, std::string method, std::string path,
                              nlohmann::json request, int status, nlohmann::json response);
  const TranscriptEntry& event(std::int64_t t_ms, std::string actor, realtime::EventEnvelope envelope);
  const TranscriptEntry& note(std::int64_t t_ms, std::string actor, std::string text);

  [[nodiscard]] const std::vector<TranscriptEntry>& entries() const noexcept { return entries_; }
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

  /// One line per entry: "t=<ms> <actor> <kind> <details>".
  [[nodiscard]] std::string render() const;
  /// Lines [index - radius, index + radius].
  [[nodiscard]] std::string excerpt(std::size_t index, std::size_t radius = 3) const;

 private:
  TranscriptEntry& append(std::int64_t t_ms, std::string actor, TranscriptEntry::Kind kind);

  std::vector<TranscriptEntry> entries_;
};

[[nodiscard]] std::string render_line(const TranscriptEntry& e);

}  // namespace campusride::sim
