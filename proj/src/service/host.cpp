#include "campusride/service/host.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <system_error>

#include "campusride/service/http_api.hpp"

namespace campusride::service {

namespace {

constexpr std::chrono::milliseconds kSweepPeriod{500};

void handle_inbound(Service& service, const Session& session, const realtime::EventEnvelope& e) {
  if (e.type != realtime::EventType::LocationUpdate) {
    throw Error(ErrorCode::MalformedFrame,
                fmt::format("clients may not send {}", realtime::to_string(e.type)));
  }
  const auto& p = e.payload;
  if (!p.contains("lat") || !p.contains("lon") || !p["lat"].is_number() || !p["lon"].is_number()) {
    throw Error(ErrorCode::MalformedFrame, "location-update needs numeric lat and lon");
  }
  const GeoPoint point{p["lat"].get<double>(), p["lon"].get<double>()};
  const auto at = p.contains("recorded_at") && p["recorded_at"].is_number_integer()
                      ? from_millis(p["recorded_at"].get<std::int64_t>())
                      : e.sent_at;
  service.publish_location(session, point, at);
}

}  // namespace

std::shared_ptr<geo::ExternalRouter> make_external_router(const ServiceConfig& config) {
  if (!config.routing_api_key) return nullptr;
  geo::DirectionsEndpoint endpoint;
  endpoint.base_url = config.routing_url;
  endpoint.profile = config.routing_profile;
  endpoint.api_key = *config.routing_api_key;
  return std::make_shared<geo::ExternalRouter>(std::move(endpoint));
}

ServiceHost::ServiceHost(ServiceConfig config, std::shared_ptr<store::DocumentStore> store, geo::RoadGraph graph,
                         const Clock& clock, std::shared_ptr<geo::ExternalRouter> router)
    : config_(std::move(config)) {
  Service::Deps deps{std::move(store), std::move(graph), &clock, nullptr, std::move(router)};
  service_ = std::make_unique<Service>(config_, std::move(deps));
  Service* svc = service_.get();
  gateway_ = std::make_unique<Gateway>([svc](std::string_view token) { return svc->authenticate(token); },
                                       [svc](const Session& s, const realtime::EventEnvelope& e) {
                                         handle_inbound(*svc, s, e);
                                       });
  service_->attach_sink(gateway_.get());
  http_ = std::make_unique<httplib::Server>();
  http_->set_tcp_nodelay(true);
  install_routes(*http_, *service_);
}

ServiceHost::~ServiceHost() { stop(); }

void ServiceHost::start() {
  realtime_port_ = gateway_->listen(config_.bind_host, config_.realtime_port);
  if (config_.http_port == 0) {
    http_port_ = http_->bind_to_any_port(config_.bind_host);
  } else {
    http_port_ = http_->bind_to_port(config_.bind_host, config_.http_port) ? config_.http_port : -1;
  }
  if (http_port_ < 0) {
    gateway_->stop();
    throw std::system_error(std::make_error_code(std::errc::address_in_use),
                            fmt::format("cannot bind {}:{}", config_.bind_host, config_.http_port));
  }
  {
    std::scoped_lock lock(mu_);
    running_ = true;
  }
  http_thread_ = std::thread([this] { http_->listen_after_bind(); });
  if (config_.background_sweep) {
    sweep_thread_ = std::thread([this] {
      std::unique_lock lock(mu_);
      while (running_) {
        cv_.wait_for(lock, kSweepPeriod);
        if (!running_) break;
        lock.unlock();
        try {
          service_->sweep_timeouts();
        } catch (const std::exception& e) {
          spdlog::error("offer sweep failed: {}", e.what());
        }
        lock.lock();
      }
    });
  }
  spdlog::info("http api listening on {}:{}", config_.bind_host, http_port_);
}

void ServiceHost::stop() {
  {
    std::scoped_lock lock(mu_);
    if (!running_) return;
    running_ = false;
  }
  cv_.notify_all();
  http_->stop();
  if (http_thread_.joinable()) http_thread_.join();
  if (sweep_thread_.joinable()) sweep_thread_.join();
  gateway_->stop();
}

void ServiceHost::wait() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return !running_; });
}

}  // namespace campusride::service
