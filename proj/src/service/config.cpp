#include "campusride/service/config.hpp"

#include <charconv>
#include <cstdlib>

#include <fmt/format.h>

#include "campusride/domain/error.hpp"

namespace campusride::service {

namespace {

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

template <class T>
T parse_number(const std::string& text, const char* name) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("{}: cannot parse '{}'", name, text));
  }
  return value;
}

double parse_double(const std::string& text, const char* name) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("{}: cannot parse '{}'", name, text));
  }
  return v;
}

}  // namespace

void ServiceConfig::set_bind_addr(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) {
    http_port = parse_number<int>(addr, "BIND_ADDR");
    return;
  }
  if (colon > 0) bind_host = addr.substr(0, colon);
  http_port = parse_number<int>(addr.substr(colon + 1), "BIND_ADDR");
}

ServiceConfig ServiceConfig::from_env(ServiceConfig base) {
  ServiceConfig c = std::move(base);
  if (auto v = env("BIND_ADDR")) {
    c.set_bind_addr(*v);
    c.realtime_port = c.http_port == 0 ? 0 : c.http_port + 1;
  }
  if (auto v = env("REALTIME_PORT")) c.realtime_port = parse_number<int>(*v, "REALTIME_PORT");
  if (auto v = env("GRAPH_FILE")) c.graph_file = *v;
  if (auto v = env("STORE")) c.store = *v;
  if (auto v = env("OUTBOX_DIR")) c.outbox_dir = *v;
  if (auto v = env("ROUTING_API_KEY")) c.routing_api_key = *v;
  if (auto v = env("ROUTING_URL")) c.routing_url = *v;
  if (auto v = env("OFFER_TIMEOUT_MS")) c.offer_timeout = Millis{parse_number<long long>(*v, "OFFER_TIMEOUT_MS")};
  if (auto v = env("CAMPUS_SPEED_MPS")) c.campus_speed_mps = parse_double(*v, "CAMPUS_SPEED_MPS");
  if (auto v = env("SNAP_RADIUS_M")) c.snap_radius_m = parse_double(*v, "SNAP_RADIUS_M");
  if (auto v = env("REROUTE_THRESHOLD_M")) c.reroute_threshold_m = parse_double(*v, "REROUTE_THRESHOLD_M");
  if (auto v = env("TRACK_PUBLISH_MS")) c.track_publish = Millis{parse_number<long long>(*v, "TRACK_PUBLISH_MS")};
  if (auto v = env("TRACK_POLL_MS")) c.track_poll = Millis{parse_number<long long>(*v, "TRACK_POLL_MS")};
  return c;
}

ServiceConfig ServiceConfig::from_env() { return from_env(ServiceConfig{}); }

}  // namespace campusride::service
