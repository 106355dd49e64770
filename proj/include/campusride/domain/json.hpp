#pragma once

#include <json.hpp>

#include "campusride/domain/types.hpp"

// JSON forms of the domain types, shared by persistence and the HTTP API.
namespace campusride {

void to_json(nlohmann::json& j, const GeoPoint& p);
void from_json(const nlohmann::json& j, GeoPoint& p);

void to_json(nlohmann::json& j, const RideRequest& r);
void from_json(const nlohmann::json& j, RideRequest& r);

void to_json(nlohmann::json& j, const StageEntry& e);
void from_json(const nlohmann::json& j, StageEntry& e);

void to_json(nlohmann::json& j, const Ride& r);
void from_json(const nlohmann::json& j, Ride& r);

void to_json(nlohmann::json& j, const CarAgent& c);
void from_json(const nlohmann::json& j, CarAgent& c);

void to_json(nlohmann::json& j, const UserAccount& a);
void from_json(const nlohmann::json& j, UserAccount& a);

}  // namespace campusride
