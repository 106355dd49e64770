#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "campusride/accounts/outbox.hpp"
#include "campusride/accounts/password.hpp"
#include "campusride/domain/clock.hpp"
#include "campusride/domain/types.hpp"
#include "campusride/store/document_store.hpp"

namespace campusride::accounts {

inline constexpr Millis kDefaultSessionTtl{24 * 60 * 60 * 1000};

struct Registration {
  std::string university_id;
  std::string email;
  std::string first_name;
  std::string last_name;
  std::string phone;
  std::string password;
};

struct Session {
  std::string token;  // empty on sessions read back from the store
  AccountId account_id;
  Role role{Role::Rider};
  std::optional<CarId> car_id;
  TimePoint expires_at{};
};

enum class Decision : std::uint8_t { Accept, Reject };

struct ReviewResult {
  UserAccount account;
  OutboxEmail email;
};

/// Registration, admin validation, login and sessions. Account documents
/// live in the `users` collection, session digests in `sessions`, emails in
/// `outbox`.
class AccountRegistry {
 public:
  struct Options {
    HashCost hash_cost{HashCost::interactive()};
    Millis session_ttl{kDefaultSessionTtl};
    std::optional<std::filesystem::path> outbox_dir;
  };

  AccountRegistry(std::shared_ptr<store::DocumentStore> store, const Clock& clock, Options options);

  /// New rider account awaiting review. Throws InvalidField, MalformedEmail,
  /// WeakPassword, EmptyName or DuplicateIdentity.
  UserAccount register_account(const Registration& form);

  /// Final decision on a pending account; queues exactly one email. Throws
  /// NotAuthorized, UnknownAccount or NotPending.
  ReviewResult admin_review(const Session& caller, const AccountId& id, Decision decision);

  /// Throws InvalidCredentials or NotYetApproved.
  Session login(std::string_view username, std::string_view password);

  /// Live session for a token, renewed on use; nullopt if unknown or expired.
  std::optional<Session> authenticate(std::string_view token);

  /// Approved account created by operator tooling (admins, drivers).
  UserAccount provision(Role role, std::string_view username, std::string_view password,
                        std::optional<CarId> car = std::nullopt);

  [[nodiscard]] std::vector<UserAccount> pending() const;
  [[nodiscard]] std::optional<UserAccount> find(const AccountId& id) const;
  [[nodiscard]] std::optional<UserAccount> find_by_username(std::string_view username) const;
  [[nodiscard]] std::vector<OutboxEmail> outbox() const { return outbox_.all(); }

 private:
  struct CachedSession {
    Session session;
    store::Revision revision{};
  };

  AccountId next_account_id();
  void index(const UserAccount& account);
  UserAccount insert_locked(UserAccount account);

  std::shared_ptr<store::DocumentStore> store_;
  const Clock& clock_;
  Options options_;
  Outbox outbox_;

  mutable std::mutex mu_;
  std::map<std::string, AccountId, std::less<>> by_username_;
  std::map<std::string, AccountId, std::less<>> by_university_id_;
  std::map<std::string, AccountId, std::less<>> by_email_;
  std::map<std::string, CachedSession, std::less<>> sessions_;  // keyed by token digest
  std::uint64_t last_account_number_{0};
};

}  // namespace campusride::accounts
