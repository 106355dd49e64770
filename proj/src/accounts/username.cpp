#include "campusride/accounts/username.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>

#include "campusride/domain/error.hpp"

namespace campusride::accounts {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }

std::string trim_lower(std::string_view s) {
  while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c);
  });
  return out;
}

}  // namespace

std::string base_username(std::string_view first, std::string_view last) {
  auto f = trim_lower(first);
  auto l = trim_lower(last);
  if (f.empty()) throw Error(ErrorCode::EmptyName, "first name is empty", "first_name");
  if (l.empty()) throw Error(ErrorCode::EmptyName, "last name is empty", "last_name");
  return f + "." + l;
}

std::string generate_username(std::string_view first, std::string_view last,
                              const std::function<bool(std::string_view)>& taken) {
  const auto base = base_username(first, last);
  if (!taken(base)) return base;
  for (int n = 2;; ++n) {
    auto candidate = fmt::format("{}-{}", base, n);
    if (!taken(candidate)) return candidate;
  }
}

bool is_valid_email(std::string_view email) noexcept {
  if (std::any_of(email.begin(), email.end(), [](unsigned char c) { return is_space(c) || c < 0x20; })) return false;
  const auto at = email.find('@');
  if (at == std::string_view::npos || at == 0 || email.find('@', at + 1) != std::string_view::npos) return false;
  const auto domain = email.substr(at + 1);
  const auto dot = domain.rfind('.');
  return dot != std::string_view::npos && dot > 0 && dot + 1 < domain.size() && !domain.starts_with('.') &&
         domain.find("..") == std::string_view::npos;
}

}  // namespace campusride::accounts
