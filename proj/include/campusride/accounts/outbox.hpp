#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "campusride/domain/clock.hpp"
#include "campusride/domain/types.hpp"
#include "campusride/store/document_store.hpp"

namespace campusride::accounts {

enum class EmailKind : std::uint8_t { Accepted, Rejected };

struct OutboxEmail {
  std::string to;
  std::string subject;
  std::string body;
  EmailKind kind{EmailKind::Accepted};
  TimePoint queued_at{};

  bool operator==(const OutboxEmail&) const = default;
};

void to_json(nlohmann::json& j, const OutboxEmail& e);
void from_json(const nlohmann::json& j, OutboxEmail& e);

[[nodiscard]] OutboxEmail compose_review_email(const UserAccount& account, EmailKind kind, TimePoint now);

/// `<queued_at ms>-<to>.eml`
[[nodiscard]] std::string eml_filename(const OutboxEmail& email);

/// `To:` and `Subject:` headers, a blank line, then the body.
[[nodiscard]] std::string render_eml(const OutboxEmail& email);

/// Persisted email queue keyed by account; at most one email per key. When a
/// sink directory is configured each queued email is also written there as a
/// .eml file.
class Outbox {
 public:
  Outbox(std::shared_ptr<store::DocumentStore> store, std::optional<std::filesystem::path> sink_dir);

  /// False if an email for `key` was already queued.
  bool enqueue(const std::string& key, const OutboxEmail& email);

  [[nodiscard]] std::vector<OutboxEmail> all() const;

 private:
  std::shared_ptr<store::DocumentStore> store_;
  std::optional<std::filesystem::path> sink_dir_;
};

}  // namespace campusride::accounts
