#pragma once

#include <memory>
#include <string>

#include "campusride/accounts/accounts.hpp"
#include "campusride/domain/clock.hpp"
#include "campusride/geo/road_graph.hpp"
#include "campusride/realtime/event_sink.hpp"
#include "campusride/service/service.hpp"
#include "campusride/store/document_store.hpp"

namespace campusride::testing {

/// Path of a file under data/graphs.
std::string graph_path(const std::string& name);

/// 3x3 grid of 100 m blocks anchored at (29.99, 31.45); nodes g0..g8 row-major.
geo::RoadGraph small_grid();

/// Position `east_m`/`north_m` away from `origin` on a local tangent plane.
GeoPoint offset(const GeoPoint& origin, double east_m, double north_m);

/// An in-process service on a manual clock with a recording sink.
struct ServiceRig {
  explicit ServiceRig(std::shared_ptr<store::DocumentStore> store = nullptr, geo::RoadGraph graph = small_grid());

  /// Constructs a fresh Service over the same store, as after a restart.
  void restart();

  accounts::Session rider(const std::string& first, const std::string& last);
  accounts::Session driver(const std::string& car, int capacity = 4);
  accounts::Session admin();

  service::ServiceConfig config;
  std::shared_ptr<store::DocumentStore> store;
  geo::RoadGraph graph;
  ManualClock clock;
  realtime::RecordingSink sink;
  std::unique_ptr<service::Service> svc;

 private:
  int riders_{0};
  bool admin_made_{false};
};

}  // namespace campusride::testing
