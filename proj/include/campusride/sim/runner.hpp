#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "campusride/sim/analysis.hpp"
#include "campusride/sim/scenario.hpp"
#include "campusride/sim/transcript.hpp"

namespace campusride::sim {

struct RunOptions {
  std::uint64_t seed{1};
  /// Store spec for the service under test; the scenario's `set store`
  /// wins when present. A "{tmp}" in either is replaced by a scratch
  /// directory removed after the run.
  std::string store{"memory"};
};

struct RunResult {
  std::string scenario;
  std::uint64_t seed{};
  Transcript transcript;
  /// Step failures (the run stops at the first) and failed assertions, each
  /// with its line and a transcript excerpt.
  std::vector<std::string> failures;
  Metrics metrics;
  double wall_seconds{};

  [[nodiscard]] bool ok() const noexcept { return failures.empty(); }
};

/// Runs a scenario against a fresh in-process service on loopback HTTP and
/// realtime listeners under virtual time. The transcript is a pure function
/// of (scenario, seed). Throws Error{ScenarioInvalid} for references the
/// scenario file cannot satisfy (unknown nodes, unreadable graph).
[[nodiscard]] RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// Throws Error{AssertionFailed} carrying the first failure.
void require_pass(const RunResult& result);

}  // namespace campusride::sim
