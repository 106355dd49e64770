#include "campusride/service/gateway.hpp"

#include <sys/socket.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include <fmt/format.h>

#include <spdlog/spdlog.h>

namespace campusride::service {

using nlohmann::json;
using realtime::Address;

namespace {

constexpr std::chrono::milliseconds kSendTimeout{2000};

json error_frame(std::string_view code, std::string_view message) {
  return {{"error", code}, {"message", message}};
}

}  // namespace

Gateway::Gateway(Authenticate authenticate, Inbound inbound)
    : authenticate_(std::move(authenticate)), inbound_(std::move(inbound)) {}

Gateway::~Gateway() { stop(); }

int Gateway::listen(const std::string& host, int port) {
  auto [socket, bound] = tcp_listen(host, port);
  listener_ = std::move(socket);
  stopping_ = false;
  accept_thread_ = std::thread([this] { accept_loop(); });
  spdlog::info("realtime gateway listening on {}:{}", host, bound);
  return bound;
}

void Gateway::stop() {
  if (stopping_.exchange(true)) return;
  listener_.shutdown();
  if (accept_thread_.joinable()) accept_thread_.join();
  listener_.close();
  std::vector<std::thread> readers;
  {
    std::scoped_lock lock(mu_);
    for (auto& c : connections_) c->socket.shutdown();
    readers.swap(readers_);
  }
  for (auto& t : readers) {
    if (t.joinable()) t.join();
  }
  std::scoped_lock lock(mu_);
  connections_.clear();
  by_address_.clear();
}

void Gateway::accept_loop() {
  while (!stopping_) {
    const int fd = ::accept4(listener_.fd(), nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
      if (stopping_) return;
      if (errno == EINTR || errno == ECONNABORTED) continue;
      spdlog::warn("realtime accept failed: {}", std::strerror(errno));
      return;
    }
    auto conn = std::make_shared<Connection>();
    conn->socket = Socket(fd);
    set_timeouts(conn->socket, kSendTimeout, std::chrono::milliseconds{0});
    std::scoped_lock lock(mu_);
    if (stopping_) return;
    connections_.push_back(conn);
    readers_.emplace_back([this, conn] { serve(conn); });
  }
}

void Gateway::serve(std::shared_ptr<Connection> conn) {
  realtime::FrameReader reader;
  char buf[8192];
  bool open = true;
  while (open) {
    const long n = recv_some(conn->socket, buf, sizeof buf);
    if (n <= 0) break;
    try {
      reader.feed(buf, static_cast<std::size_t>(n));
      while (open) {
        auto text = reader.next();
        if (!text) break;
        open = handle(*conn, *text);
      }
    } catch (const Error& e) {
      write_frame(*conn, error_frame(to_string(e.code()), e.what()));
      open = false;
    }
  }
  detach(conn);
}

bool Gateway::handle(Connection& conn, const std::string& text) {
  json frame = json::parse(text, nullptr, false);
  if (frame.is_discarded() || !frame.is_object()) {
    write_frame(conn, error_frame("MalformedFrame", "frame is not a JSON object"));
    return true;
  }

  if (!conn.session) {
    auto it = frame.find("auth");
    std::optional<accounts::Session> session;
    if (it != frame.end() && it->is_string()) session = authenticate_(it->get<std::string>());
    if (!session) {
      write_frame(conn, error_frame("Unauthenticated", "first frame must carry a valid session token"));
      return false;
    }
    Address address = session->role == Role::Driver && session->car_id ? Address::car(*session->car_id)
                                                                        : Address::account(session->account_id);
    conn.session = std::move(session);
    conn.address = address;
    {
      std::scoped_lock lock(mu_);
      for (auto& c : connections_) {
        if (&*c == &conn) by_address_.emplace(address, c);
      }
    }
    write_frame(conn, {{"ok", true}, {"address", address.str()}});
    return true;
  }

  if (auto it = frame.find("sync"); it != frame.end()) {
    write_frame(conn, {{"synced", *it}});
    return true;
  }

  if (!frame.contains("type")) {
    write_frame(conn, error_frame("MalformedFrame", "expected an event envelope or a control frame"));
    return true;
  }
  try {
    auto envelope = realtime::envelope_from_json(frame);
    if (envelope.seq <= conn.seq_in) {
      throw Error(ErrorCode::MalformedFrame,
                  fmt::format("seq {} does not follow {}", envelope.seq, conn.seq_in));
    }
    conn.seq_in = envelope.seq;
    inbound_(*conn.session, envelope);
  } catch (const Error& e) {
    write_frame(conn, error_frame(to_string(e.code()), e.what()));
  }
  return true;
}

bool Gateway::write_frame(Connection& conn, const json& frame) {
  const auto bytes = realtime::encode_frame(frame.dump());
  std::scoped_lock lock(conn.write_mu);
  return send_all(conn.socket, bytes.data(), bytes.size());
}

void Gateway::detach(const std::shared_ptr<Connection>& conn) {
  std::scoped_lock lock(mu_);
  for (auto it = by_address_.begin(); it != by_address_.end();) {
    it = it->second == conn ? by_address_.erase(it) : std::next(it);
  }
  // The socket stays open until stop(): its descriptor number must not be
  // reused while another thread could still be writing to it.
  conn->socket.shutdown();
  if (conn->address) spdlog::debug("realtime session for {} closed", conn->address->str());
}

bool Gateway::deliver(const Address& to, realtime::EventEnvelope envelope) {
  std::vector<std::shared_ptr<Connection>> targets;
  {
    std::scoped_lock lock(mu_);
    auto [lo, hi] = by_address_.equal_range(to);
    for (auto it = lo; it != hi; ++it) targets.push_back(it->second);
  }
  envelope.to = {to};
  std::uint64_t written = 0;
  for (const auto& conn : targets) {
    std::scoped_lock lock(conn->write_mu);
    auto e = envelope;
    e.seq = conn->seq_out + 1;
    const auto bytes = realtime::encode_event(e);
    if (send_all(conn->socket, bytes.data(), bytes.size())) {
      conn->seq_out = e.seq;
      ++written;
    } else {
      spdlog::warn("dropping {} for {}: write failed", realtime::to_string(e.type), to.str());
      conn->socket.shutdown();
    }
  }
  if (written > 0) {
    std::scoped_lock lock(mu_);
    sent_[to] += written;
  }
  return written > 0;
}

std::size_t Gateway::connection_count() const {
  std::scoped_lock lock(mu_);
  return by_address_.size();
}

std::size_t Gateway::connection_count(const Address& a) const {
  std::scoped_lock lock(mu_);
  return by_address_.count(a);
}

std::uint64_t Gateway::sent_to(const Address& a) const {
  std::scoped_lock lock(mu_);
  auto it = sent_.find(a);
  return it == sent_.end() ? 0 : it->second;
}

}  // namespace campusride::service
