#include "campusride/sim/clients.hpp"

#include <httplib.h>

#include <fmt/format.h>

#include "campusride/domain/error.hpp"

namespace campusride::sim {

using nlohmann::json;

ApiClient::ApiClient(const std::string& host, int port) : client_(std::make_unique<httplib::Client>(host, port)) {
  client_->set_keep_alive(true);
  client_->set_tcp_nodelay(true);
  client_->set_read_timeout(10, 0);
}

ApiClient::~ApiClient() = default;
ApiClient::ApiClient(ApiClient&&) noexcept = default;
ApiClient& ApiClient::operator=(ApiClient&&) noexcept = default;

namespace {

HttpResult to_result(const httplib::Result& r, const std::string& what) {
  if (!r) throw Error(ErrorCode::NetworkFailure, fmt::format("{}: {}", what, httplib::to_string(r.error())));
  HttpResult out{r->status, json::parse(r->body, nullptr, false)};
  if (out.body.is_discarded()) out.body = r->body;
  return out;
}

httplib::Headers auth_headers(const std::string& token) {
  if (token.empty()) return {};
  return {{"Authorization", "Bearer " + token}};
}

}  // namespace

HttpResult ApiClient::get(const std::string& path, const std::string& token) {
  return to_result(client_->Get(path, auth_headers(token)), "GET " + path);
}

HttpResult ApiClient::post(const std::string& path, const json& body, const std::string& token) {
  return to_result(client_->Post(path, auth_headers(token), body.dump(), "application/json"), "POST " + path);
}

RealtimeClient::RealtimeClient(const std::string& host, int port, std::chrono::milliseconds timeout)
    : socket_(service::tcp_connect(host, port)) {
  service::set_timeouts(socket_, timeout, timeout);
}

void RealtimeClient::send_raw(const std::string& text) {
  const auto bytes = realtime::encode_frame(text);
  if (!service::send_all(socket_, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::NetworkFailure, "realtime send failed");
  }
}

json RealtimeClient::next_frame() {
  char buf[8192];
  for (;;) {
    if (auto text = reader_.next()) {
      auto frame = json::parse(*text, nullptr, false);
      if (frame.is_discarded()) throw Error(ErrorCode::MalformedFrame, "server sent invalid JSON");
      return frame;
    }
    if (!socket_.valid()) throw Error(ErrorCode::NetworkFailure, "realtime connection closed");
    const long n = service::recv_some(socket_, buf, sizeof buf);
    if (n == 0) throw Error(ErrorCode::NetworkFailure, "realtime connection closed by server");
    if (n < 0) throw Error(ErrorCode::NetworkFailure, "realtime receive timed out");
    reader_.feed(buf, static_cast<std::size_t>(n));
  }
}

std::string RealtimeClient::authenticate(const std::string& token) {
  send_raw(json{{"auth", token}}.dump());
  auto reply = next_frame();
  if (!reply.value("ok", false)) {
    throw Error(ErrorCode::Unauthenticated, reply.value("message", std::string("realtime authentication failed")));
  }
  return reply.at("address").get<std::string>();
}

realtime::EventEnvelope RealtimeClient::next_event(std::vector<json>* controls) {
  for (;;) {
    auto frame = next_frame();
    if (frame.contains("type")) return realtime::envelope_from_json(frame);
    if (controls != nullptr) controls->push_back(std::move(frame));
  }
}

std::vector<realtime::EventEnvelope> RealtimeClient::sync() {
  const auto n = ++sync_counter_;
  send_raw(json{{"sync", n}}.dump());
  std::vector<realtime::EventEnvelope> out;
  for (;;) {
    auto frame = next_frame();
    if (frame.contains("type")) {
      out.push_back(realtime::envelope_from_json(frame));
    } else if (frame.contains("synced") && frame["synced"] == n) {
      return out;
    }
  }
}

void RealtimeClient::send(realtime::EventEnvelope envelope, std::optional<std::uint64_t> seq) {
  envelope.seq = seq.value_or(seq_ + 1);
  seq_ = std::max(seq_, envelope.seq);
  const auto bytes = realtime::encode_event(envelope);
  if (!service::send_all(socket_, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::NetworkFailure, "realtime send failed");
  }
}

void RealtimeClient::close() { socket_.close(); }

}  // namespace campusride::sim
