#pragma once

#include <mutex>
#include <optional>
#include <utility>

#include "campusride/domain/types.hpp"

namespace campusride {

struct LegStatuses {
  LegStatus pickup{LegStatus::Pending};
  LegStatus dropoff{LegStatus::Pending};

  bool operator==(const LegStatuses&) const = default;
};

/// Immediate successor in the linear stage order; nullopt for Finished.
[[nodiscard]] std::optional<RideStage> next_stage(RideStage s) noexcept;

/// The only actor permitted to move a ride into `target`.
[[nodiscard]] Actor required_actor(RideStage target) noexcept;

[[nodiscard]] LegStatuses derive_leg_statuses(RideStage stage) noexcept;

/// Returns a copy of `ride` advanced to `target` with statuses recomputed and
/// one history entry appended at `now`. History timestamps are forced strictly
/// increasing: if `now` does not exceed the last entry, the entry is stamped
/// one millisecond after it.
///
/// Throws Error with StaleRide (target at or behind the current stage),
/// IllegalTransition (target skips a stage) or WrongActor.
[[nodiscard]] Ride advance_stage(const Ride& ride, Actor actor, RideStage target, TimePoint now);

/// A Ride guarded for concurrent mutation. advance() is a compare-and-set on
/// the stage observed by the caller, so racing identical transitions produce
/// one state change.
class AtomicRide {
 public:
  explicit AtomicRide(Ride ride) : ride_(std::move(ride)) {}

  [[nodiscard]] Ride snapshot() const {
    std::scoped_lock lock(mu_);
    return ride_;
  }

  Ride advance(Actor actor, RideStage target, TimePoint now) {
    std::scoped_lock lock(mu_);
    ride_ = advance_stage(ride_, actor, target, now);
    return ride_;
  }

 private:
  mutable std::mutex mu_;
  Ride ride_;
};

}  // namespace campusride
