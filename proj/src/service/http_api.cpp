#include "campusride/service/http_api.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <fmt/format.h>

#include "campusride/domain/json.hpp"

namespace campusride::service {

using nlohmann::json;

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Unauthenticated:
    case ErrorCode::InvalidCredentials: return 401;
    case ErrorCode::NotAuthorized:
    case ErrorCode::NotYetApproved:
    case ErrorCode::WrongActor:
    case ErrorCode::NotAssignedDriver:
    case ErrorCode::NotParticipant:
    case ErrorCode::NotOffered: return 403;
    case ErrorCode::UnknownRequest:
    case ErrorCode::UnknownRide:
    case ErrorCode::UnknownAccount:
    case ErrorCode::UnknownCar:
    case ErrorCode::UnknownNode: return 404;
    case ErrorCode::AlreadyClaimed:
    case ErrorCode::DuplicateRequest:
    case ErrorCode::DuplicateIdentity:
    case ErrorCode::ActiveRequestExists:
    case ErrorCode::IllegalTransition:
    case ErrorCode::StaleRide:
    case ErrorCode::NotPending:
    case ErrorCode::CarUnavailable:
    case ErrorCode::WrongStage: return 409;
    case ErrorCode::RideNotActive: return 410;
    case ErrorCode::InvalidRequest:
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidField:
    case ErrorCode::SeatMismatch:
    case ErrorCode::SnapTooFar:
    case ErrorCode::Unreachable:
    case ErrorCode::WeakPassword:
    case ErrorCode::MalformedEmail:
    case ErrorCode::EmptyName:
    case ErrorCode::StaleSample: return 422;
    case ErrorCode::MalformedBody:
    case ErrorCode::MalformedFrame: return 400;
    case ErrorCode::RateLimited: return 429;
    case ErrorCode::NetworkFailure:
    case ErrorCode::MalformedResponse: return 502;
    default: return 500;
  }
}

json error_body(const Error& e) {
  json body{{"code", to_string(e.code())}, {"message", e.what()}};
  if (!e.field().empty()) body["field"] = e.field();
  if (!e.issues().empty()) {
    json errors = json::array();
    for (const auto& issue : e.issues()) errors.push_back({{"field", issue.field}, {"reason", issue.reason}});
    body["errors"] = std::move(errors);
    if (e.field().empty()) body["field"] = e.issues().front().field;
  } else if (!e.field().empty()) {
    body["errors"] = json::array({{{"field", e.field()}, {"reason", e.what()}}});
  }
  return body;
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    throw Error(ErrorCode::MalformedBody, "request body must be a JSON object");
  }
  return body;
}

std::string text_field(const json& body, const char* name, bool required = true) {
  auto it = body.find(name);
  if (it == body.end() || it->is_null()) {
    if (required) throw Error(ErrorCode::InvalidField, fmt::format("{} is required", name), name);
    return {};
  }
  if (!it->is_string()) throw Error(ErrorCode::InvalidField, fmt::format("{} must be a string", name), name);
  return it->get<std::string>();
}

double number_field(const json& body, const char* name, const char* path) {
  auto it = body.find(name);
  if (it == body.end() || !it->is_number()) {
    throw Error(ErrorCode::InvalidField, fmt::format("{} must be a number", path), path);
  }
  return it->get<double>();
}

GeoPoint point_field(const json& body, const char* name) {
  auto it = body.find(name);
  if (it == body.end() || !it->is_object()) {
    throw Error(ErrorCode::InvalidField, fmt::format("{} must be an object with lat and lon", name), name);
  }
  return {number_field(*it, "lat", name), number_field(*it, "lon", name)};
}

std::string bearer_token(const httplib::Request& req) {
  const auto header = req.get_header_value("Authorization");
  constexpr std::string_view prefix = "Bearer ";
  if (header.size() <= prefix.size() || header.compare(0, prefix.size(), prefix) != 0) return {};
  return header.substr(prefix.size());
}

json account_json(const UserAccount& a) {
  json out{{"account_id", a.account_id.str()}, {"username", a.username},     {"university_id", a.university_id},
           {"email", a.email},                {"first_name", a.first_name}, {"last_name", a.last_name},
           {"phone", a.phone},                {"approval", to_string(a.approval)}, {"role", to_string(a.role)}};
  if (a.car_id) out["car_id"] = a.car_id->str();
  return out;
}

class Routes {
 public:
  explicit Routes(Service& service) : service_(service) {}

  using Public = std::function<void(const httplib::Request&, httplib::Response&)>;
  using Authed = std::function<void(const Session&, const httplib::Request&, httplib::Response&)>;

  httplib::Server::Handler open(Public f) const {
    return [f = std::move(f)](const httplib::Request& req, httplib::Response& res) { guard(req, res, f); };
  }

  httplib::Server::Handler authed(Authed f) const {
    return [svc = &service_, f = std::move(f)](const httplib::Request& req, httplib::Response& res) {
      guard(req, res, [&](const httplib::Request& r, httplib::Response& s) {
        const auto token = bearer_token(r);
        auto session = token.empty() ? std::nullopt : svc->authenticate(token);
        if (!session) throw Error(ErrorCode::Unauthenticated, "missing or expired session token");
        f(*session, r, s);
      });
    };
  }

 private:
  template <class F>
  static void guard(const httplib::Request& req, httplib::Response& res, const F& f) {
    try {
      f(req, res);
    } catch (const Error& e) {
      const int status = http_status(e.code());
      if (status >= 500) spdlog::error("{} {}: {}", req.method, req.path, e.what());
      send_json(res, status, error_body(e));
    } catch (const json::exception& e) {
      send_json(res, 400, {{"code", "MalformedBody"}, {"message", e.what()}});
    } catch (const std::exception& e) {
      spdlog::error("{} {}: {}", req.method, req.path, e.what());
      send_json(res, 500, {{"code", "Internal"}, {"message", "internal error"}});
    }
  }

  Service& service_;
};

}  // namespace

void install_routes(httplib::Server& server, Service& service) {
  const Routes routes(service);
  Service* svc = &service;

  server.Get("/health", routes.open([](const auto&, auto& res) { send_json(res, 200, {{"ok", true}}); }));

  server.Post("/register", routes.open([svc](const auto& req, auto& res) {
    const auto body = parse_body(req);
    accounts::Registration form{text_field(body, "university_id", false), text_field(body, "email", false),
                                text_field(body, "first_name", false),    text_field(body, "last_name", false),
                                text_field(body, "phone", false),         text_field(body, "password", false)};
    const auto account = svc->register_rider(form);
    send_json(res, 201,
              {{"account_id", account.account_id.str()},
               {"username", account.username},
               {"approval", to_string(account.approval)}});
  }));

  server.Post("/login", routes.open([svc](const auto& req, auto& res) {
    const auto body = parse_body(req);
    const auto session = svc->login(text_field(body, "username"), text_field(body, "password"));
    json out{{"token", session.token},
             {"account_id", session.account_id.str()},
             {"role", to_string(session.role)},
             {"expires_at", to_millis(session.expires_at)}};
    if (session.car_id) out["car_id"] = session.car_id->str();
    send_json(res, 200, out);
  }));

  server.Get("/admin/pending", routes.authed([svc](const Session& s, const auto&, auto& res) {
    json accounts = json::array();
    for (const auto& a : svc->pending(s)) accounts.push_back(account_json(a));
    send_json(res, 200, {{"accounts", std::move(accounts)}});
  }));

  server.Post("/admin/review", routes.authed([svc](const Session& s, const auto& req, auto& res) {
    const auto body = parse_body(req);
    const auto decision_text = text_field(body, "decision");
    accounts::Decision decision{};
    if (decision_text == "accept" || decision_text == "approve") {
      decision = accounts::Decision::Accept;
    } else if (decision_text == "reject") {
      decision = accounts::Decision::Reject;
    } else {
      throw Error(ErrorCode::InvalidField, "decision must be accept or reject", "decision");
    }
    const auto result = svc->review(s, AccountId{text_field(body, "account_id")}, decision);
    send_json(res, 200,
              {{"account_id", result.account.account_id.str()},
               {"approval", to_string(result.account.approval)},
               {"email", {{"to", result.email.to}, {"subject", result.email.subject}}}});
  }));

  server.Post("/confirm-ride", routes.authed([svc](const Session& s, const auto& req, auto& res) {
    const auto body = parse_body(req);
    RideForm form;
    form.pickup = point_field(body, "pickup");
    form.dropoff = point_field(body, "dropoff");
    auto seats = body.find("seats");
    if (seats == body.end() || !seats->is_number_integer()) {
      throw Error(ErrorCode::InvalidRequest, "ride request failed validation",
                  std::vector<FieldIssue>{{"seats", "must be an integer"}});
    }
    form.seats = seats->template get<int>();
    const auto result = svc->confirm_ride(s, form);
    json out{{"request_id", result.request.request_id.str()},
             {"status", "queued"},
             {"state", to_string(result.request.state)},
             {"position", result.position},
             {"created_at", to_millis(result.request.created_at)},
             {"distance_m", result.distance_m},
             {"eta_s", result.eta_s}};
    if (result.outcome) out["outcome"] = dispatch::to_string(*result.outcome);
    send_json(res, 200, out);
  }));

  server.Post("/accept-ride", routes.authed([svc](const Session& s, const auto& req, auto& res) {
    const auto body = parse_body(req);
    const auto ride = svc->accept_ride(s, RequestId{text_field(body, "request_id")});
    send_json(res, 200,
              {{"ride_id", ride.ride_id.str()},
               {"stage", to_string(ride.stage)},
               {"request_id", ride.request.request_id.str()},
               {"car_id", ride.car_id.str()}});
  }));

  server.Post("/reject-ride", routes.authed([svc](const Session& s, const auto& req, auto& res) {
    const auto body = parse_body(req);
    const RequestId id{text_field(body, "request_id")};
    const auto result = svc->reject_ride(s, id);
    send_json(res, 200,
              {{"request_id", id.str()}, {"status", to_string(result.state)}, {"terminal", result.terminal}});
  }));

  server.Post(R"(/rides/([^/]+)/stage)", routes.authed([svc](const Session& s, const auto& req, auto& res) {
    const auto body = parse_body(req);
    const auto target_text = text_field(body, "target_stage");
    RideStage target{};
    try {
      target = parse_stage(target_text);
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidField, e.what(), "target_stage");
    }
    const auto ride = svc->advance_ride(s, RideId{req.matches[1].str()}, target);
    send_json(res, 200, ride);
  }));

  server.Post("/location", routes.authed([svc](const Session& s, const auto& req, auto& res) {
    const auto body = parse_body(req);
    const GeoPoint point{number_field(body, "lat", "lat"), number_field(body, "lon", "lon")};
    TimePoint at = svc->now();
    if (auto it = body.find("recorded_at"); it != body.end()) {
      if (!it->is_number_integer()) throw Error(ErrorCode::InvalidField, "recorded_at must be epoch ms", "recorded_at");
      at = from_millis(it->template get<std::int64_t>());
    }
    const bool stored = svc->publish_location(s, point, at);
    send_json(res, 200, {{"stored", stored}, {"recorded_at", to_millis(at)}});
  }));

  server.Get(R"(/rides/([^/]+)/track)", routes.authed([svc](const Session& s, const auto& req, auto& res) {
    send_json(res, 200, track_to_json(svc->track(s, RideId{req.matches[1].str()})));
  }));

  server.Get(R"(/rides/([^/]+))", routes.authed([svc](const Session& s, const auto& req, auto& res) {
    send_json(res, 200, ride_to_json(svc->ride(s, RideId{req.matches[1].str()})));
  }));
}

}  // namespace campusride::service
