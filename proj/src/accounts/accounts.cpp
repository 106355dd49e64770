#include "campusride/accounts/accounts.hpp"

#include <charconv>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "campusride/accounts/username.hpp"
#include "campusride/domain/error.hpp"
#include "campusride/domain/json.hpp"

namespace campusride::accounts {

namespace col = store::collections;
using nlohmann::json;

namespace {

bool blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

std::uint64_t account_number(std::string_view id) {
  std::uint64_t n = 0;
  if (id.starts_with("acc-")) std::from_chars(id.data() + 4, id.data() + id.size(), n);
  return n;
}

json session_doc(const Session& s) {
  json j{{"account_id", s.account_id.str()}, {"role", to_string(s.role)}, {"expires_at", to_millis(s.expires_at)}};
  if (s.car_id) j["car_id"] = s.car_id->str();
  return j;
}

Session session_from_doc(const json& j) {
  Session s;
  s.account_id = AccountId{j.at("account_id").get<std::string>()};
  s.role = parse_role(j.at("role").get<std::string>());
  s.expires_at = from_millis(j.at("expires_at").get<std::int64_t>());
  if (auto it = j.find("car_id"); it != j.end()) s.car_id = CarId{it->get<std::string>()};
  return s;
}

}  // namespace

AccountRegistry::AccountRegistry(std::shared_ptr<store::DocumentStore> store, const Clock& clock, Options options)
    : store_(std::move(store)),
      clock_(clock),
      options_(std::move(options)),
      outbox_(store_, options_.outbox_dir) {
  const auto emailed = store_->scan(col::kOutbox);
  for (const auto& [key, v] : store_->scan(col::kUsers)) {
    const auto account = v.doc.get<UserAccount>();
    index(account);
    last_account_number_ = std::max(last_account_number_, account_number(account.account_id.str()));
    // A decision persisted without its email (crash in between) gets the email now.
    if (account.role == Role::Rider && account.approval != Approval::Pending) {
      const bool has_email = std::any_of(emailed.begin(), emailed.end(), [&](const auto& e) { return e.first == key; });
      if (!has_email) {
        const auto kind = account.approval == Approval::Approved ? EmailKind::Accepted : EmailKind::Rejected;
        outbox_.enqueue(key, compose_review_email(account, kind, clock_.now()));
      }
    }
  }
  for (const auto& [digest, v] : store_->scan(col::kSessions)) {
    sessions_.emplace(digest, CachedSession{session_from_doc(v.doc), v.revision});
  }
}

void AccountRegistry::index(const UserAccount& account) {
  by_username_.insert_or_assign(account.username, account.account_id);
  if (!account.university_id.empty()) by_university_id_.insert_or_assign(account.university_id, account.account_id);
  if (!account.email.empty()) by_email_.insert_or_assign(account.email, account.account_id);
}

AccountId AccountRegistry::next_account_id() { return AccountId{fmt::format("acc-{:06}", ++last_account_number_)}; }

UserAccount AccountRegistry::insert_locked(UserAccount account) {
  account.account_id = next_account_id();
  if (!store_->compare_and_swap(col::kUsers, account.account_id.str(), 0, json(account))) {
    throw Error(ErrorCode::StoreFailure, fmt::format("account id {} already taken", account.account_id.str()));
  }
  index(account);
  return account;
}

UserAccount AccountRegistry::register_account(const Registration& form) {
  // Names first so an empty name reports EmptyName rather than a generic field error.
  (void)base_username(form.first_name, form.last_name);
  std::vector<FieldIssue> issues;
  if (blank(form.university_id)) issues.push_back({"university_id", "required"});
  if (blank(form.email)) issues.push_back({"email", "required"});
  if (blank(form.phone)) issues.push_back({"phone", "required"});
  if (!issues.empty()) throw Error(ErrorCode::InvalidField, "required fields are missing", std::move(issues));
  if (!is_valid_email(form.email)) throw Error(ErrorCode::MalformedEmail, "email address is malformed", "email");
  validate_password(form.password);

  UserAccount account;
  account.university_id = form.university_id;
  account.email = form.email;
  account.first_name = form.first_name;
  account.last_name = form.last_name;
  account.phone = form.phone;
  account.approval = Approval::Pending;
  account.role = Role::Rider;
  account.password_digest = hash_password(form.password, options_.hash_cost);

  std::scoped_lock lock(mu_);
  if (by_university_id_.contains(account.university_id)) {
    throw Error(ErrorCode::DuplicateIdentity, "university id already registered", "university_id");
  }
  if (by_email_.contains(account.email)) {
    throw Error(ErrorCode::DuplicateIdentity, "email already registered", "email");
  }
  account.username = generate_username(account.first_name, account.last_name,
                                       [&](std::string_view name) { return by_username_.contains(name); });
  auto stored = insert_locked(std::move(account));
  spdlog::info("registered {} as {} (pending review)", stored.account_id.str(), stored.username);
  return stored;
}

UserAccount AccountRegistry::provision(Role role, std::string_view username, std::string_view password,
                                       std::optional<CarId> car) {
  validate_password(password);
  if (blank(username)) throw Error(ErrorCode::InvalidField, "username is required", "username");
  UserAccount account;
  account.username = std::string(username);
  account.first_name = std::string(username);
  account.last_name = to_string(role);
  account.approval = Approval::Approved;
  account.role = role;
  account.car_id = std::move(car);
  account.password_digest = hash_password(password, options_.hash_cost);

  std::scoped_lock lock(mu_);
  if (by_username_.contains(account.username)) {
    throw Error(ErrorCode::DuplicateIdentity, fmt::format("username {} already exists", account.username), "username");
  }
  auto stored = insert_locked(std::move(account));
  spdlog::info("provisioned {} account {} ({})", to_string(role), stored.username, stored.account_id.str());
  return stored;
}

ReviewResult AccountRegistry::admin_review(const Session& caller, const AccountId& id, Decision decision) {
  if (caller.role != Role::Admin) throw Error(ErrorCode::NotAuthorized, "only admins review registrations");
  std::scoped_lock lock(mu_);
  auto current = store_->get(col::kUsers, id.str());
  if (!current) throw Error(ErrorCode::UnknownAccount, fmt::format("unknown account {}", id.str()));
  auto account = current->doc.get<UserAccount>();
  if (account.approval != Approval::Pending || account.role != Role::Rider) {
    throw Error(ErrorCode::NotPending, fmt::format("account {} was already reviewed", id.str()));
  }
  account.approval = decision == Decision::Accept ? Approval::Approved : Approval::Rejected;
  if (!store_->compare_and_swap(col::kUsers, id.str(), current->revision, json(account))) {
    throw Error(ErrorCode::NotPending, fmt::format("account {} was reviewed concurrently", id.str()));
  }
  const auto kind = decision == Decision::Accept ? EmailKind::Accepted : EmailKind::Rejected;
  auto email = compose_review_email(account, kind, clock_.now());
  outbox_.enqueue(id.str(), email);
  spdlog::info("account {} {}", id.str(), to_string(account.approval));
  return {std::move(account), std::move(email)};
}

Session AccountRegistry::login(std::string_view username, std::string_view password) {
  std::optional<UserAccount> account = find_by_username(username);
  if (!account || !verify_password(account->password_digest, password)) {
    throw Error(ErrorCode::InvalidCredentials, "invalid username or password");
  }
  if (account->approval == Approval::Pending) {
    throw Error(ErrorCode::NotYetApproved, "registration is pending admin review");
  }
  if (account->approval != Approval::Approved) throw Error(ErrorCode::InvalidCredentials, "invalid username or password");

  Session session;
  session.token = random_token();
  session.account_id = account->account_id;
  session.role = account->role;
  session.car_id = account->car_id;
  session.expires_at = clock_.now() + options_.session_ttl;

  const auto digest = token_digest(session.token);
  const auto rev = store_->put(col::kSessions, digest, session_doc(session));
  std::scoped_lock lock(mu_);
  Session cached = session;
  cached.token.clear();
  sessions_.insert_or_assign(digest, CachedSession{std::move(cached), rev});
  return session;
}

std::optional<Session> AccountRegistry::authenticate(std::string_view token) {
  if (token.empty()) return std::nullopt;
  const auto digest = token_digest(token);
  const auto now = clock_.now();
  std::scoped_lock lock(mu_);
  auto it = sessions_.find(digest);
  if (it == sessions_.end()) return std::nullopt;
  auto& cached = it->second;
  if (cached.session.expires_at <= now) return std::nullopt;

  const auto renewed = now + options_.session_ttl;
  if (renewed - cached.session.expires_at >= Millis{60 * 60 * 1000}) {
    cached.session.expires_at = renewed;
    cached.revision = store_->put(col::kSessions, digest, session_doc(cached.session));
  }
  Session out = cached.session;
  out.token = std::string(token);
  return out;
}

std::vector<UserAccount> AccountRegistry::pending() const {
  std::vector<UserAccount> out;
  for (const auto& [key, v] : store_->scan(col::kUsers)) {
    auto account = v.doc.get<UserAccount>();
    if (account.approval == Approval::Pending) out.push_back(std::move(account));
  }
  return out;
}

std::optional<UserAccount> AccountRegistry::find(const AccountId& id) const {
  auto v = store_->get(col::kUsers, id.str());
  if (!v) return std::nullopt;
  return v->doc.get<UserAccount>();
}

std::optional<UserAccount> AccountRegistry::find_by_username(std::string_view username) const {
  AccountId id;
  {
    std::scoped_lock lock(mu_);
    auto it = by_username_.find(username);
    if (it == by_username_.end()) return std::nullopt;
    id = it->second;
  }
  return find(id);
}

}  // namespace campusride::accounts
