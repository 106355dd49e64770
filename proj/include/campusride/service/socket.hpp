#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>

namespace campusride::service {

/// Owning TCP socket descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) noexcept : fd_(fd) {}
  ~Socket() { close(); }

  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept {
    if (this != &other) {
      close();
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  [[nodiscard]] int fd() const noexcept { return fd_; }
  [[nodiscard]] bool valid() const noexcept { return fd_ >= 0; }
  explicit operator bool() const noexcept { return valid(); }

  void close() noexcept;
  /// Wakes any thread blocked on the descriptor without releasing it.
  void shutdown() noexcept;

 private:
  int fd_{-1};
};

/// Binds and listens; port 0 picks an ephemeral port. Returns the bound port.
/// Throws std::system_error.
[[nodiscard]] std::pair<Socket, int> tcp_listen(const std::string& host, int port);
[[nodiscard]] Socket tcp_connect(const std::string& host, int port);

void set_timeouts(const Socket& s, std::chrono::milliseconds send, std::chrono::milliseconds recv);

/// False when the peer is gone or the send timed out.
[[nodiscard]] bool send_all(const Socket& s, const void* data, std::size_t size) noexcept;

/// Bytes read; 0 on orderly close, negative on error or timeout.
[[nodiscard]] long recv_some(const Socket& s, void* buf, std::size_t size) noexcept;

}  // namespace campusride::service
