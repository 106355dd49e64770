#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "campusride/accounts/accounts.hpp"
#include "campusride/domain/error.hpp"
#include "campusride/realtime/envelope.hpp"
#include "campusride/realtime/event_sink.hpp"
#include "campusride/service/socket.hpp"

namespace campusride::service {

/// Realtime endpoint: length-prefixed JSON frames over TCP.
///
/// A session opens with the client sending {"auth": token}; the gateway
/// answers {"ok": true, "address": "..."} or {"error": code, "message": ...}
/// and closes. After that the client may send event envelopes (drivers:
/// location-update) and {"sync": n}, answered with {"synced": n} once every
/// earlier frame on the connection has been handled and written. Server
/// envelopes carry a per-connection seq starting at 1; inbound envelopes must
/// carry strictly increasing seq values.
class Gateway final : public realtime::EventSink {
 public:
  using Authenticate = std::function<std::optional<accounts::Session>(std::string_view token)>;
  /// Handles one inbound envelope. Throwing Error sends an error frame back.
  using Inbound = std::function<void(const accounts::Session&, const realtime::EventEnvelope&)>;

  Gateway(Authenticate authenticate, Inbound inbound);
  ~Gateway() override;

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Starts accepting; returns the bound port.
  int listen(const std::string& host, int port);
  void stop();

  bool deliver(const realtime::Address& to, realtime::EventEnvelope envelope) override;

  [[nodiscard]] std::size_t connection_count() const;
  [[nodiscard]] std::size_t connection_count(const realtime::Address& a) const;
  /// Envelopes successfully written to connections of `a`.
  [[nodiscard]] std::uint64_t sent_to(const realtime::Address& a) const;

 private:
  struct Connection {
    Socket socket;
    std::optional<accounts::Session> session;
    std::optional<realtime::Address> address;
    std::mutex write_mu;
    std::uint64_t seq_out{0};
    std::uint64_t seq_in{0};
  };

  void accept_loop();
  void serve(std::shared_ptr<Connection> conn);
  /// Returns false when the connection should close.
  bool handle(Connection& conn, const std::string& text);
  static bool write_frame(Connection& conn, const nlohmann::json& frame);
  void detach(const std::shared_ptr<Connection>& conn);

  Authenticate authenticate_;
  Inbound inbound_;
  Socket listener_;
  std::thread accept_thread_;
  std::atomic<bool> stopping_{false};

  mutable std::mutex mu_;
  std::multimap<realtime::Address, std::shared_ptr<Connection>> by_address_;
  std::vector<std::shared_ptr<Connection>> connections_;
  std::vector<std::thread> readers_;
  std::map<realtime::Address, std::uint64_t> sent_;
};

}  // namespace campusride::service
