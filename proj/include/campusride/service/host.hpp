#pragma once

#include <condition_variable>
#include <memory>
#include <mutex>
#include <thread>

#include "campusride/service/config.hpp"
#include "campusride/service/gateway.hpp"
#include "campusride/service/service.hpp"

namespace httplib {
class Server;
}

namespace campusride::service {

/// A running service: the HTTP API, the realtime gateway and the offer
/// timeout sweeper around one Service instance.
class ServiceHost {
 public:
  ServiceHost(ServiceConfig config, std::shared_ptr<store::DocumentStore> store, geo::RoadGraph graph,
              const Clock& clock, std::shared_ptr<geo::ExternalRouter> router = nullptr);
  ~ServiceHost();

  ServiceHost(const ServiceHost&) = delete;
  ServiceHost& operator=(const ServiceHost&) = delete;

  /// Binds both listeners (port 0 picks an ephemeral port) and starts serving.
  void start();
  void stop();
  /// Blocks until stop() is called from another thread.
  void wait();

  [[nodiscard]] int http_port() const noexcept { return http_port_; }
  [[nodiscard]] int realtime_port() const noexcept { return realtime_port_; }
  [[nodiscard]] const std::string& host() const noexcept { return config_.bind_host; }
  [[nodiscard]] Service& service() noexcept { return *service_; }
  [[nodiscard]] Gateway& gateway() noexcept { return *gateway_; }

 private:
  ServiceConfig config_;
  std::unique_ptr<Service> service_;
  std::unique_ptr<Gateway> gateway_;
  std::unique_ptr<httplib::Server> http_;
  std::thread http_thread_;
  std::thread sweep_thread_;
  int http_port_{0};
  int realtime_port_{0};

  std::mutex mu_;
  std::condition_variable cv_;
  bool running_{false};
};

/// Builds the external router when the config names an API key.
[[nodiscard]] std::shared_ptr<geo::ExternalRouter> make_external_router(const ServiceConfig& config);

}  // namespace campusride::service
