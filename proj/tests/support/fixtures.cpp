#include "fixtures.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "campusride/geo/haversine.hpp"

#ifndef CAMPUSRIDE_SOURCE_DIR
#error "CAMPUSRIDE_SOURCE_DIR must be defined"
#endif

namespace campusride::testing {

std::string graph_path(const std::string& name) { return fmt::format("{}/data/graphs/{}", CAMPUSRIDE_SOURCE_DIR, name); }

GeoPoint offset(const GeoPoint& origin, double east_m, double north_m) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double dlat = north_m / (geo::kEarthRadiusM * kDeg);
  const double dlon = east_m / (geo::kEarthRadiusM * kDeg * std::cos(origin.lat * kDeg));
  return {origin.lat + dlat, origin.lon + dlon};
}

geo::RoadGraph small_grid() {
  geo::RoadGraph g;
  const GeoPoint origin{29.99, 31.45};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) g.add_node(NodeId{fmt::format("g{}", r * 3 + c)}, offset(origin, 100.0 * c, 100.0 * r));
  }
  auto link = [&](int a, int b) {
    const NodeId x{fmt::format("g{}", a)};
    const NodeId y{fmt::format("g{}", b)};
    g.add_edge({x, y, geo::haversine_distance(g.position(x), g.position(y)), true});
  };
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (c < 2) link(r * 3 + c, r * 3 + c + 1);
      if (r < 2) link(r * 3 + c, (r + 1) * 3 + c);
    }
  }
  g.validate();
  return g;
}

ServiceRig::ServiceRig(std::shared_ptr<store::DocumentStore> s, geo::RoadGraph g)
    : store(s ? std::move(s) : store::open_store("memory")), graph(std::move(g)) {
  config.fast_password_hashing = true;
  config.background_sweep = false;
  restart();
}

void ServiceRig::restart() {
  svc.reset();
  svc = std::make_unique<service::Service>(config, service::Service::Deps{store, graph, &clock, &sink, nullptr});
}

accounts::Session ServiceRig::rider(const std::string& first, const std::string& last) {
  ++riders_;
  const auto password = first + "-secret";
  accounts::Registration form{fmt::format("U{:05}", riders_),
                              fmt::format("{}.{}{}@campus.example", first, last, riders_),
                              first,
                              last,
                              fmt::format("0100{:07}", riders_),
                              password};
  const auto account = svc->register_rider(form);
  const auto reviewer = admin();
  (void)svc->review(reviewer, account.account_id, accounts::Decision::Accept);
  return svc->login(account.username, password);
}

accounts::Session ServiceRig::driver(const std::string& car, int capacity) {
  (void)svc->provision_car(CarId{car}, capacity, car + "-secret");
  return svc->login(car, car + "-secret");
}

accounts::Session ServiceRig::admin() {
  if (!admin_made_) {
    (void)svc->bootstrap_admin("ops", "ops-secret");
    admin_made_ = true;
  }
  return svc->login("ops", "ops-secret");
}

}  // namespace campusride::testing
