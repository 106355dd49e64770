#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace campusride::accounts {

inline constexpr std::size_t kMinPasswordLength = 6;

/// Argon2id work factors.
struct HashCost {
  unsigned long long ops{};
  std::size_t mem_bytes{};

  static HashCost interactive();
  /// libsodium's floor. For tests and simulations only.
  static HashCost minimal();
};

/// UTF-8 code points; malformed bytes count one each.
[[nodiscard]] std::size_t code_point_count(std::string_view text) noexcept;

/// Throws Error{WeakPassword} unless at least six code points long.
void validate_password(std::string_view password);

/// Salted one-way digest in libsodium's self-describing string format.
[[nodiscard]] std::string hash_password(std::string_view password, HashCost cost);
[[nodiscard]] bool verify_password(std::string_view digest, std::string_view password);

/// 256 random bits, hex encoded.
[[nodiscard]] std::string random_token();

/// Hex BLAKE2b of a token; what gets persisted in place of the token.
[[nodiscard]] std::string token_digest(std::string_view token);

}  // namespace campusride::accounts
