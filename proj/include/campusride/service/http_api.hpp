#pragma once

#include <json.hpp>

#include "campusride/domain/error.hpp"
#include "campusride/service/service.hpp"

namespace httplib {
class Server;
}

namespace campusride::service {

/// HTTP status for a domain error code.
[[nodiscard]] int http_status(ErrorCode code) noexcept;

/// {code, message, field?, errors?}
[[nodiscard]] nlohmann::json error_body(const Error& e);

/// Mounts every endpoint on `server`. Handlers hold no state of their own.
void install_routes(httplib::Server& server, Service& service);

}  // namespace campusride::service
