#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "campusride/domain/clock.hpp"
#include "campusride/domain/geo_point.hpp"
#include "campusride/domain/ids.hpp"

namespace campusride {

inline constexpr int kMaxSeats = 4;

enum class RideStage : std::uint8_t { StartJourney, HeadToPickup, IHaveArrived, StartRide, EndRide, Finished };
inline constexpr RideStage kAllStages[] = {RideStage::StartJourney, RideStage::HeadToPickup,
                                           RideStage::IHaveArrived, RideStage::StartRide,
                                           RideStage::EndRide,      RideStage::Finished};

enum class LegStatus : std::uint8_t { Pending, Enroute, Arrived, Completed };

enum class RequestState : std::uint8_t { Queued, Offered, Accepted, Rejected };

enum class Approval : std::uint8_t { Pending, Approved, Rejected };

enum class Role : std::uint8_t { Rider, Driver, Admin };

/// Who initiates a stage transition.
enum class Actor : std::uint8_t { Driver, System };

std::string_view to_string(RideStage s) noexcept;
std::string_view to_string(LegStatus s) noexcept;
std::string_view to_string(RequestState s) noexcept;
std::string_view to_string(Approval a) noexcept;
std::string_view to_string(Role r) noexcept;

// Parsers throw Error{InvalidArgument} on unknown spellings.
RideStage parse_stage(std::string_view s);
LegStatus parse_leg_status(std::string_view s);
RequestState parse_request_state(std::string_view s);
Approval parse_approval(std::string_view s);
Role parse_role(std::string_view s);

struct RideRequest {
  RequestId request_id;
  AccountId rider_id;
  GeoPoint pickup;
  GeoPoint dropoff;
  int seats{1};
  TimePoint created_at{};
  RequestState state{RequestState::Queued};

  bool operator==(const RideRequest&) const = default;
};

struct StageEntry {
  RideStage stage{};
  TimePoint at{};

  bool operator==(const StageEntry&) const = default;
};

struct Ride {
  RideId ride_id;
  RideRequest request;
  CarId car_id;
  RideStage stage{RideStage::StartJourney};
  LegStatus pickup_status{LegStatus::Pending};
  LegStatus dropoff_status{LegStatus::Pending};
  std::vector<StageEntry> history;

  [[nodiscard]] bool active() const noexcept { return stage != RideStage::Finished; }

  bool operator==(const Ride&) const = default;
};

struct CarAgent {
  CarId car_id;
  int capacity{1};
  int seats_available{1};
  bool available{true};
  GeoPoint position;
  TimePoint position_updated_at{};

  bool operator==(const CarAgent&) const = default;
};

struct UserAccount {
  AccountId account_id;
  std::string university_id;
  std::string email;
  std::string first_name;
  std::string last_name;
  std::string phone;
  std::string username;
  std::string password_digest;
  Approval approval{Approval::Pending};
  Role role{Role::Rider};
  std::optional<CarId> car_id;  // drivers only

  bool operator==(const UserAccount&) const = default;
};

}  // namespace campusride
