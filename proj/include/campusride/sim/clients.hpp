#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "campusride/realtime/envelope.hpp"
#include "campusride/service/socket.hpp"

namespace httplib {
class Client;
}

namespace campusride::sim {

struct HttpResult {
  int status{};
  nlohmann::json body;
};

/// JSON-over-HTTP client for the service API. One keep-alive connection;
/// not thread-safe.
class ApiClient {
 public:
  ApiClient(const std::string& host, int port);
  ~ApiClient();
  ApiClient(ApiClient&&) noexcept;
  ApiClient& operator=(ApiClient&&) noexcept;

  /// Throws Error{NetworkFailure} when no response arrives.
  HttpResult get(const std::string& path, const std::string& token = {});
  HttpResult post(const std::string& path, const nlohmann::json& body, const std::string& token = {});

 private:
  std::unique_ptr<httplib::Client> client_;
};

/// One realtime session over the length-prefixed frame protocol.
class RealtimeClient {
 public:
  RealtimeClient(const std::string& host, int port,
                 std::chrono::milliseconds timeout = std::chrono::milliseconds{5000});

  /// Sends the auth frame and returns the bound address ("account:..." or
  /// "car:..."). Throws Error{Unauthenticated}.
  std::string authenticate(const std::string& token);

  /// Next frame of any kind. Throws Error{NetworkFailure} on timeout or close.
  nlohmann::json next_frame();

  /// Next server envelope; control frames in between are returned through
  /// `controls` when given, else dropped.
  realtime::EventEnvelope next_event(std::vector<nlohmann::json>* controls = nullptr);

  /// Round-trips {"sync": n} and returns the envelopes that arrived first.
  std::vector<realtime::EventEnvelope> sync();

  /// Sends an envelope with the next client seq (or `seq` when given).
  void send(realtime::EventEnvelope envelope, std::optional<std::uint64_t> seq = std::nullopt);
  void send_raw(const std::string& text);

  void close();
  [[nodiscard]] bool open() const noexcept { return socket_.valid(); }

 private:
  service::Socket socket_;
  realtime::FrameReader reader_;
  std::uint64_t seq_{0};
  std::uint64_t sync_counter_{0};
};

}  // namespace campusride::sim
