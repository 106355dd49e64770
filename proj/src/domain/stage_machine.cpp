#include "campusride/domain/stage_machine.hpp"

#include <array>
#include <utility>

#include <fmt/format.h>

#include "campusride/domain/error.hpp"

namespace campusride {

namespace {

struct StageName {
  RideStage stage;
  std::string_view name;
};

constexpr std::array kStageNames{
    StageName{RideStage::StartJourney, "start_journey"}, StageName{RideStage::HeadToPickup, "head_to_pickup"},
    StageName{RideStage::IHaveArrived, "i_have_arrived"}, StageName{RideStage::StartRide, "start_ride"},
    StageName{RideStage::EndRide, "end_ride"},           StageName{RideStage::Finished, "finished"},
};

}  // namespace

std::string_view to_string(RideStage s) noexcept {
  for (const auto& [stage, name] : kStageNames) {
    if (stage == s) return name;
  }
  return "unknown";
}

RideStage parse_stage(std::string_view s) {
  for (const auto& [stage, name] : kStageNames) {
    if (name == s) return stage;
  }
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown ride stage '{}'", s));
}

std::string_view to_string(LegStatus s) noexcept {
  switch (s) {
    case LegStatus::Pending: return "pending";
    case LegStatus::Enroute: return "enroute";
    case LegStatus::Arrived: return "arrived";
    case LegStatus::Completed: return "completed";
  }
  return "unknown";
}

LegStatus parse_leg_status(std::string_view s) {
  if (s == "pending") return LegStatus::Pending;
  if (s == "enroute") return LegStatus::Enroute;
  if (s == "arrived") return LegStatus::Arrived;
  if (s == "completed") return LegStatus::Completed;
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown leg status '{}'", s));
}

std::string_view to_string(RequestState s) noexcept {
  switch (s) {
    case RequestState::Queued: return "queued";
    case RequestState::Offered: return "offered";
    case RequestState::Accepted: return "accepted";
    case RequestState::Rejected: return "rejected";
  }
  return "unknown";
}

RequestState parse_request_state(std::string_view s) {
  if (s == "queued") return RequestState::Queued;
  if (s == "offered") return RequestState::Offered;
  if (s == "accepted") return RequestState::Accepted;
  if (s == "rejected") return RequestState::Rejected;
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown request state '{}'", s));
}

std::string_view to_string(Approval a) noexcept {
  switch (a) {
    case Approval::Pending: return "pending";
    case Approval::Approved: return "approved";
    case Approval::Rejected: return "rejected";
  }
  return "unknown";
}

Approval parse_approval(std::string_view s) {
  if (s == "pending") return Approval::Pending;
  if (s == "approved") return Approval::Approved;
  if (s == "rejected") return Approval::Rejected;
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown approval '{}'", s));
}

std::string_view to_string(Role r) noexcept {
  switch (r) {
    case Role::Rider: return "rider";
    case Role::Driver: return "driver";
    case Role::Admin: return "admin";
  }
  return "unknown";
}

Role parse_role(std::string_view s) {
  if (s == "rider") return Role::Rider;
  if (s == "driver") return Role::Driver;
  if (s == "admin") return Role::Admin;
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown role '{}'", s));
}

std::optional<RideStage> next_stage(RideStage s) noexcept {
  if (s == RideStage::Finished) return std::nullopt;
  return static_cast<RideStage>(static_cast<int>(s) + 1);
}

Actor required_actor(RideStage target) noexcept {
  return target == RideStage::Finished ? Actor::System : Actor::Driver;
}

LegStatuses derive_leg_statuses(RideStage stage) noexcept {
  switch (stage) {
    case RideStage::StartJourney: return {LegStatus::Pending, LegStatus::Pending};
    case RideStage::HeadToPickup: return {LegStatus::Enroute, LegStatus::Pending};
    case RideStage::IHaveArrived: return {LegStatus::Arrived, LegStatus::Pending};
    case RideStage::StartRide: return {LegStatus::Completed, LegStatus::Enroute};
    case RideStage::EndRide:
    case RideStage::Finished: return {LegStatus::Completed, LegStatus::Completed};
  }
  return {};
}

Ride advance_stage(const Ride& ride, Actor actor, RideStage target, TimePoint now) {
  if (static_cast<int>(target) <= static_cast<int>(ride.stage)) {
    throw Error(ErrorCode::StaleRide,
                fmt::format("ride {} is already at {}", ride.ride_id.str(), to_string(ride.stage)));
  }
  if (next_stage(ride.stage) != target) {
    throw Error(ErrorCode::IllegalTransition,
                fmt::format("cannot move from {} to {}", to_string(ride.stage), to_string(target)));
  }
  if (required_actor(target) != actor) {
    throw Error(ErrorCode::WrongActor, fmt::format("{} is not entered by this actor", to_string(target)));
  }

  Ride next = ride;
  next.stage = target;
  const auto statuses = derive_leg_statuses(target);
  next.pickup_status = statuses.pickup;
  next.dropoff_status = statuses.dropoff;
  TimePoint at = now;
  if (!next.history.empty() && at <= next.history.back().at) {
    at = next.history.back().at + Millis{1};
  }
  next.history.push_back({target, at});
  return next;
}

}  // namespace campusride
