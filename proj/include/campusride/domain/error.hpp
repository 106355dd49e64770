#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace campusride {

enum class ErrorCode {
  InvalidArgument,
  MalformedBody,
  // dispatch
  InvalidRequest,
  DuplicateRequest,
  UnknownRequest,
  AlreadyClaimed,
  SeatMismatch,
  NotOffered,
  CarUnavailable,
  ActiveRequestExists,
  UnknownCar,
  // ride lifecycle
  IllegalTransition,
  WrongActor,
  StaleRide,
  UnknownRide,
  NotAssignedDriver,
  NotParticipant,
  RideNotActive,
  WrongStage,
  // routing
  GraphInvalid,
  UnknownNode,
  Unreachable,
  SnapTooFar,
  NetworkFailure,
  RateLimited,
  MalformedResponse,
  // accounts
  DuplicateIdentity,
  WeakPassword,
  MalformedEmail,
  EmptyName,
  InvalidField,
  NotPending,
  NotAuthorized,
  UnknownAccount,
  InvalidCredentials,
  NotYetApproved,
  Unauthenticated,
  // realtime
  MalformedFrame,
  StaleSample,
  // infrastructure
  StoreFailure,
  ScenarioInvalid,
  AssertionFailed,
};

std::string_view to_string(ErrorCode code) noexcept;

/// One rejected field of a request body.
struct FieldIssue {
  std::string field;
  std::string reason;
};

/// The single exception type thrown across module boundaries. The code is
/// stable and machine-readable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string field = {});
  Error(ErrorCode code, const std::string& message, std::vector<FieldIssue> issues);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  [[nodiscard]] const std::string& field() const noexcept { return field_; }
  [[nodiscard]] const std::vector<FieldIssue>& issues() const noexcept { return issues_; }

 private:
  ErrorCode code_;
  std::string field_;
  std::vector<FieldIssue> issues_;
};

}  // namespace campusride
