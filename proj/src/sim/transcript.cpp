#include "campusride/sim/transcript.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace campusride::sim {

using nlohmann::json;

namespace {

void redact(json& j, std::string_view key) {
  if (j.is_object()) {
    for (auto& [k, v] : j.items()) {
      if (k == key) {
        v = "<redacted>";
      } else {
        redact(v, key);
      }
    }
  } else if (j.is_array()) {
    for (auto& v : j) redact(v, key);
  }
}

}  // namespace

TranscriptEntry& Transcript::append(std::int64_t t_ms, std::string actor, TranscriptEntry::Kind kind) {
  TranscriptEntry e;
  e.t_ms = t_ms;
  e.seq = entries_.size();
  e.actor = std::move(actor);
  e.kind = kind;
  entries_.push_back(std::move(e));
  return entries_.back();
}

const TranscriptEntry& Transcript::http(std::int64_t t_ms, std::string actor, std::string method, std::string path,
                                        json request, int status, json response) {
  redact(request, "password");
  redact(response, "token");
  auto& e = append(t_ms, std::move(actor), TranscriptEntry::Kind::Http);
  e.method = std::move(method);
  e.path = std::move(path);
  e.request = std::move(request);
  e.status = status;
  e.response = std::move(response);
  return e;
}

const TranscriptEntry& Transcript::event(std::int64_t t_ms, std::string actor, realtime::EventEnvelope envelope) {
  auto& e = append(t_ms, std::move(actor), TranscriptEntry::Kind::Event);
  e.event = std::move(envelope);
  return e;
}

const TranscriptEntry& Transcript::note(std::int64_t t_ms, std::string actor, std::string text) {
  auto& e = append(t_ms, std::move(actor), TranscriptEntry::Kind::Note);
  e.note = std::move(text);
  return e;
}

std::string render_line(const TranscriptEntry& e) {
  switch (e.kind) {
    case TranscriptEntry::Kind::Http: {
      std::string line = fmt::format("t={} {} http {} {}", e.t_ms, e.actor, e.method, e.path);
      if (!e.request.is_null()) line += " " + e.request.dump();
      return line + fmt::format(" -> {} {}", e.status, e.response.dump());
    }
    case TranscriptEntry::Kind::Event:
      return fmt::format("t={} {} event {}", e.t_ms, e.actor, realtime::envelope_to_json(*e.event).dump());
    case TranscriptEntry::Kind::Note: return fmt::format("t={} {} note {}", e.t_ms, e.actor, e.note);
  }
  return {};
}

std::string Transcript::render() const {
  std::string out;
  for (const auto& e : entries_) {
    out += render_line(e);
    out += '\n';
  }
  return out;
}

std::string Transcript::excerpt(std::size_t index, std::size_t radius) const {
  if (entries_.empty()) return {};
  index = std::min(index, entries_.size() - 1);
  const std::size_t lo = index > radius ? index - radius : 0;
  const std::size_t hi = std::min(entries_.size(), index + radius + 1);
  std::string out;
  for (std::size_t i = lo; i < hi; ++i) {
    out += i == index ? "> " : "  ";
    out += render_line(entries_[i]);
    out += '\n';
  }
  return out;
}

}  // namespace campusride::sim
