#include "campusride/domain/error.hpp"

#include <utility>

namespace campusride {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MalformedBody: return "MalformedBody";
    case ErrorCode::InvalidRequest: return "InvalidRequest";
    case ErrorCode::DuplicateRequest: return "DuplicateRequest";
    case ErrorCode::UnknownRequest: return "UnknownRequest";
    case ErrorCode::AlreadyClaimed: return "AlreadyClaimed";
    case ErrorCode::SeatMismatch: return "SeatMismatch";
    case ErrorCode::NotOffered: return "NotOffered";
    case ErrorCode::CarUnavailable: return "CarUnavailable";
    case ErrorCode::ActiveRequestExists: return "ActiveRequestExists";
    case ErrorCode::UnknownCar: return "UnknownCar";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::WrongActor: return "WrongActor";
    case ErrorCode::StaleRide: return "StaleRide";
    case ErrorCode::UnknownRide: return "UnknownRide";
    case ErrorCode::NotAssignedDriver: return "NotAssignedDriver";
    case ErrorCode::NotParticipant: return "NotParticipant";
    case ErrorCode::RideNotActive: return "RideNotActive";
    case ErrorCode::WrongStage: return "WrongStage";
    case ErrorCode::GraphInvalid: return "GraphInvalid";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::Unreachable: return "Unreachable";
    case ErrorCode::SnapTooFar: return "SnapTooFar";
    case ErrorCode::NetworkFailure: return "NetworkFailure";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::DuplicateIdentity: return "DuplicateIdentity";
    case ErrorCode::WeakPassword: return "WeakPassword";
    case ErrorCode::MalformedEmail: return "MalformedEmail";
    case ErrorCode::EmptyName: return "EmptyName";
    case ErrorCode::InvalidField: return "InvalidField";
    case ErrorCode::NotPending: return "NotPending";
    case ErrorCode::NotAuthorized: return "NotAuthorized";
    case ErrorCode::UnknownAccount: return "UnknownAccount";
    case ErrorCode::InvalidCredentials: return "InvalidCredentials";
    case ErrorCode::NotYetApproved: return "NotYetApproved";
    case ErrorCode::Unauthenticated: return "Unauthenticated";
    case ErrorCode::MalformedFrame: return "MalformedFrame";
    case ErrorCode::StaleSample: return "StaleSample";
    case ErrorCode::StoreFailure: return "StoreFailure";
    case ErrorCode::ScenarioInvalid: return "ScenarioInvalid";
    case ErrorCode::AssertionFailed: return "AssertionFailed";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::string field)
    : std::runtime_error(message), code_(code), field_(std::move(field)) {}

Error::Error(ErrorCode code, const std::string& message, std::vector<FieldIssue> issues)
    : std::runtime_error(message), code_(code), issues_(std::move(issues)) {
  if (!issues_.empty()) field_ = issues_.front().field;
}

}  // namespace campusride
