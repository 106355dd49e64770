#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace campusride::accounts {

/// lowercase(trim(first)) + "." + lowercase(trim(last)). Throws EmptyName.
[[nodiscard]] std::string base_username(std::string_view first, std::string_view last);

/// base_username, suffixed "-2", "-3", ... until `taken` says it is free.
[[nodiscard]] std::string generate_username(std::string_view first, std::string_view last,
                                            const std::function<bool(std::string_view)>& taken);

/// local@domain.tld with no whitespace; not an RFC 5322 parser.
[[nodiscard]] bool is_valid_email(std::string_view email) noexcept;

}  // namespace campusride::accounts
