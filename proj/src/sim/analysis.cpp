#include "campusride/sim/analysis.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <utility>

#include <fmt/format.h>

namespace campusride::sim {

using nlohmann::json;
using Kind = TranscriptEntry::Kind;

namespace {

using OrderKey = std::pair<std::int64_t, std::string>;

bool is_event(const TranscriptEntry& e, realtime::EventType type) {
  return e.kind == Kind::Event && e.event && e.event->type == type;
}

bool is_ok(const TranscriptEntry& e, std::string_view method, std::string_view path) {
  return e.kind == Kind::Http && e.method == method && e.path == path && e.status >= 200 && e.status < 300;
}

std::string str_field(const json& j, const char* key) {
  if (!j.is_object()) return {};
  auto it = j.find(key);
  return it != j.end() && it->is_string() ? it->get<std::string>() : std::string{};
}

/// "/rides/<id>/<suffix>" -> id.
std::optional<std::string> ride_in_path(const std::string& path, std::string_view suffix) {
  constexpr std::string_view prefix = "/rides/";
  if (path.rfind(prefix, 0) != 0) return std::nullopt;
  const std::string tail = "/" + std::string(suffix);
  if (path.size() <= prefix.size() + tail.size() || path.compare(path.size() - tail.size(), tail.size(), tail) != 0) {
    return std::nullopt;
  }
  return path.substr(prefix.size(), path.size() - prefix.size() - tail.size());
}

/// created_at of every offered request, taken from the ride-request payloads.
std::map<std::string, std::int64_t> offer_times(const Transcript& t) {
  std::map<std::string, std::int64_t> out;
  for (const auto& e : t.entries()) {
    if (!is_event(e, realtime::EventType::RideRequest)) continue;
    const auto& p = e.event->payload;
    out.emplace(str_field(p, "request_id"), p.value("created_at", std::int64_t{0}));
  }
  return out;
}

OrderReport check_order(const std::vector<std::pair<std::size_t, OrderKey>>& seq, std::string_view what) {
  OrderReport report;
  report.items = seq.size();
  for (std::size_t j = 0; j < seq.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      if (seq[i].second <= seq[j].second) continue;
      ++report.inversions;
      if (report.violations.size() < 10) {
        report.violations.push_back(
            {seq[j].first, fmt::format("{} {} (created_at {}) came after {} (created_at {})", what,
                                       seq[j].second.second, seq[j].second.first, seq[i].second.second,
                                       seq[i].second.first)});
      }
    }
  }
  return report;
}

}  // namespace

OrderReport assert_fifo(const Transcript& t) {
  std::vector<std::pair<std::size_t, OrderKey>> seq;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& e = t.entries()[i];
    if (!is_event(e, realtime::EventType::RideRequest)) continue;
    const auto& p = e.event->payload;
    const auto id = str_field(p, "request_id");
    if (!seen.insert(id).second) continue;
    seq.push_back({i, {p.value("created_at", std::int64_t{0}), id}});
  }
  return check_order(seq, "offer of");
}

OrderReport assert_acceptance_order(const Transcript& t) {
  const auto created = offer_times(t);
  std::vector<std::pair<std::size_t, OrderKey>> seq;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& e = t.entries()[i];
    if (!is_ok(e, "POST", "/accept-ride")) continue;
    const auto id = str_field(e.response, "request_id");
    auto it = created.find(id);
    seq.push_back({i, {it == created.end() ? std::numeric_limits<std::int64_t>::max() : it->second, id}});
  }
  return check_order(seq, "claim of");
}

std::vector<Violation> assert_exactly_once(const Transcript& t, realtime::EventType type) {
  std::map<std::string, std::size_t> count;
  std::map<std::string, std::size_t> first_index;
  std::map<std::string, std::size_t> required;  // ride -> entry that obliges one event
  const std::string stage_name = type == realtime::EventType::DriverArrived ? "i_have_arrived" : "end_ride";

  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& e = t.entries()[i];
    if (is_event(e, type) && e.event->ride_id) {
      const auto& ride = e.event->ride_id->str();
      if (count[ride]++ == 0) first_index[ride] = i;
    }
    if (type == realtime::EventType::RideAccepted && is_ok(e, "POST", "/accept-ride")) {
      required.emplace(str_field(e.response, "ride_id"), i);
    }
    if ((type == realtime::EventType::DriverArrived || type == realtime::EventType::RideEnded) &&
        e.kind == Kind::Http && e.method == "POST" && e.status == 200 && str_field(e.request, "target_stage") == stage_name) {
      if (auto ride = ride_in_path(e.path, "stage")) required.emplace(*ride, i);
    }
  }

  std::vector<Violation> out;
  for (const auto& [ride, index] : required) {
    const auto n = count[ride];
    if (n != 1) {
      out.push_back({index,
                     fmt::format("{} delivered {} times for {}", realtime::to_string(type), n, ride)});
    }
  }
  for (const auto& [ride, n] : count) {
    if (n > 1 && !required.contains(ride)) {
      out.push_back({first_index[ride], fmt::format("{} delivered {} times for {}", realtime::to_string(type), n, ride)});
    }
  }
  std::sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) { return a.index < b.index; });
  return out;
}

std::vector<Violation> assert_no_double_assignment(const Transcript& t) {
  std::vector<Violation> out;
  std::map<std::string, std::string> ride_of_request;
  std::map<std::string, std::string> active_ride_of_car;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& e = t.entries()[i];
    if (is_ok(e, "POST", "/accept-ride")) {
      const auto request = str_field(e.response, "request_id");
      const auto ride = str_field(e.response, "ride_id");
      const auto car = str_field(e.response, "car_id");
      if (auto [it, fresh] = ride_of_request.emplace(request, ride); !fresh) {
        out.push_back({i, fmt::format("{} claimed twice ({} and {})", request, it->second, ride)});
      }
      if (auto it = active_ride_of_car.find(car); it != active_ride_of_car.end()) {
        out.push_back({i, fmt::format("{} given {} while {} is active", car, ride, it->second)});
      }
      active_ride_of_car[car] = ride;
    }
    if (e.kind == Kind::Http && e.method == "POST" && e.status == 200 && str_field(e.response, "stage") == "finished") {
      active_ride_of_car.erase(str_field(e.response, "car_id"));
    }
  }
  return out;
}

std::vector<Violation> assert_hysteresis(const Transcript& t, const std::string& actor, double threshold_m) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& e = t.entries()[i];
    if (e.kind != Kind::Http || e.actor != actor || e.status != 200 || !ride_in_path(e.path, "track")) continue;
    const double deviation = e.response.value("deviation_m", 0.0);
    const bool rerouted = e.response.value("rerouted", false);
    if (rerouted != (deviation > threshold_m)) {
      out.push_back({i, fmt::format("deviation {:.3f} m with threshold {:.1f} m but rerouted={}", deviation,
                                    threshold_m, rerouted)});
    }
  }
  return out;
}

std::vector<realtime::EventType> events_for(const Transcript& t, const std::string& actor) {
  std::vector<realtime::EventType> out;
  for (const auto& e : t.entries()) {
    if (e.kind == Kind::Event && e.actor == actor) out.push_back(e.event->type);
  }
  return out;
}

std::size_t reroutes_seen(const Transcript& t, const std::string& actor) {
  std::size_t n = 0;
  for (const auto& e : t.entries()) {
    if (e.kind == Kind::Http && e.actor == actor && e.status == 200 && ride_in_path(e.path, "track") &&
        e.response.value("rerouted", false)) {
      ++n;
    }
  }
  return n;
}

Stats summarize(const std::vector<MetricSample>& samples) {
  Stats s;
  s.count = samples.size();
  if (samples.empty()) return s;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  double sum = 0;
  for (const auto& m : samples) {
    sum += m.seconds;
    s.min = std::min(s.min, m.seconds);
    s.max = std::max(s.max, m.seconds);
  }
  s.mean = sum / static_cast<double>(samples.size());
  return s;
}

Metrics metrics(const Transcript& t) {
  Metrics m;
  std::map<std::string, std::pair<std::int64_t, std::string>> confirmed;  // request -> (t, rider)
  std::map<std::pair<std::string, std::string>, std::int64_t> offered;   // (car actor, request) -> t
  for (const auto& e : t.entries()) {
    if (is_ok(e, "POST", "/confirm-ride")) {
      confirmed.emplace(str_field(e.response, "request_id"), std::make_pair(e.t_ms, e.actor));
    } else if (is_event(e, realtime::EventType::RideAccepted)) {
      const auto id = str_field(e.event->payload, "request_id");
      if (auto it = confirmed.find(id); it != confirmed.end()) {
        m.wait_times.push_back({id, it->second.second, static_cast<double>(e.t_ms - it->second.first) / 1000.0});
      }
    } else if (is_event(e, realtime::EventType::RideRequest)) {
      offered.emplace(std::make_pair(e.actor, str_field(e.event->payload, "request_id")), e.t_ms);
    } else if (is_ok(e, "POST", "/accept-ride")) {
      const auto id = str_field(e.response, "request_id");
      if (auto it = offered.find({e.actor, id}); it != offered.end()) {
        m.acceptance_latencies.push_back({id, e.actor, static_cast<double>(e.t_ms - it->second) / 1000.0});
      }
    } else if (e.kind == Kind::Http && e.status == 200 && ride_in_path(e.path, "track") &&
               e.response.value("rerouted", false)) {
      ++m.reroutes;
    }
  }
  return m;
}

std::string Metrics::csv() const {
  std::string out = "metric,request_id,actor,seconds\n";
  for (const auto& s : wait_times) out += fmt::format("wait_time,{},{},{:.3f}\n", s.request_id, s.actor, s.seconds);
  for (const auto& s : acceptance_latencies) {
    out += fmt::format("acceptance_latency,{},{},{:.3f}\n", s.request_id, s.actor, s.seconds);
  }
  out += fmt::format("reroutes,,,{}\n", reroutes);
  return out;
}

std::string Metrics::summary() const {
  auto line = [](std::string_view name, const Stats& s) {
    if (s.count == 0) return fmt::format("{:<20} n=0\n", name);
    return fmt::format("{:<20} n={} mean={:.3f}s min={:.3f}s max={:.3f}s\n", name, s.count, s.mean, s.min, s.max);
  };
  return line("wait_time", summarize(wait_times)) + line("acceptance_latency", summarize(acceptance_latencies)) +
         fmt::format("{:<20} {}\n", "reroutes", reroutes);
}

}  // namespace campusride::sim
