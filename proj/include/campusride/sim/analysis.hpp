#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "campusride/realtime/envelope.hpp"
#include "campusride/sim/transcript.hpp"

// Pure predicates and folds over a finished transcript.
namespace campusride::sim {

struct Violation {
  std::size_t index{};  // transcript entry that exposed it
  std::string message;
};

struct OrderReport {
  std::size_t items{};
  std::size_t inversions{};  // pairs out of (created_at, request_id) order
  std::vector<Violation> violations;

  [[nodiscard]] bool ok() const noexcept { return violations.empty(); }
};

/// Requests must be first offered in (created_at, request_id) order.
[[nodiscard]] OrderReport assert_fifo(const Transcript& t);

/// Successful claims must follow the same order.
[[nodiscard]] OrderReport assert_acceptance_order(const Transcript& t);

/// Each ride gets at most one `type` event, and exactly one once the stage
/// that produces it was acknowledged (ride-accepted: once the claim was).
[[nodiscard]] std::vector<Violation> assert_exactly_once(const Transcript& t, realtime::EventType type);

/// No request claimed twice and no car holding two rides at once.
[[nodiscard]] std::vector<Violation> assert_no_double_assignment(const Transcript& t);

/// For every track poll by `actor`: rerouted iff deviation_m > threshold_m.
[[nodiscard]] std::vector<Violation> assert_hysteresis(const Transcript& t, const std::string& actor,
                                                       double threshold_m);

/// Event types received by `actor`, in order.
[[nodiscard]] std::vector<realtime::EventType> events_for(const Transcript& t, const std::string& actor);

/// Track polls by `actor` that reported a reroute.
[[nodiscard]] std::size_t reroutes_seen(const Transcript& t, const std::string& actor);

struct MetricSample {
  std::string request_id;
  std::string actor;
  double seconds{};
};

struct Stats {
  std::size_t count{};
  double mean{};
  double min{};
  double max{};
};

[[nodiscard]] Stats summarize(const std::vector<MetricSample>& samples);

struct Metrics {
  std::vector<MetricSample> wait_times;            // confirm-ride ack -> ride-accepted at the rider
  std::vector<MetricSample> acceptance_latencies;  // offer received by the car -> claim ack
  std::size_t reroutes{};

  [[nodiscard]] std::string csv() const;
  [[nodiscard]] std::string summary() const;
};

[[nodiscard]] Metrics metrics(const Transcript& t);

}  // namespace campusride::sim
