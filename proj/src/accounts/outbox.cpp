#include "campusride/accounts/outbox.hpp"

#include <fstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "campusride/domain/error.hpp"

namespace campusride::accounts {

using nlohmann::json;

void to_json(json& j, const OutboxEmail& e) {
  j = json{{"to", e.to},
           {"subject", e.subject},
           {"body", e.body},
           {"kind", e.kind == EmailKind::Accepted ? "accepted" : "rejected"},
           {"queued_at", to_millis(e.queued_at)}};
}

void from_json(const json& j, OutboxEmail& e) {
  e.to = j.at("to").get<std::string>();
  e.subject = j.at("subject").get<std::string>();
  e.body = j.at("body").get<std::string>();
  e.kind = j.at("kind").get<std::string>() == "accepted" ? EmailKind::Accepted : EmailKind::Rejected;
  e.queued_at = from_millis(j.at("queued_at").get<std::int64_t>());
}

OutboxEmail compose_review_email(const UserAccount& account, EmailKind kind, TimePoint now) {
  OutboxEmail email;
  email.to = account.email;
  email.kind = kind;
  email.queued_at = now;
  if (kind == EmailKind::Accepted) {
    email.subject = "Your registration has been accepted";
    email.body = fmt::format(
        "Hello {},\n\n"
        "Your registration has been accepted and you now have the ability to login.\n"
        "Username: {}\n"
        "Password: the one you chose when registering.\n",
        account.first_name, account.username);
  } else {
    email.subject = "Your registration has been rejected";
    email.body = fmt::format(
        "Hello {},\n\n"
        "The credentials you registered with are not valid.\n"
        "Please try to register again.\n",
        account.first_name);
  }
  return email;
}

std::string eml_filename(const OutboxEmail& email) {
  return fmt::format("{}-{}.eml", to_millis(email.queued_at), email.to);
}

std::string render_eml(const OutboxEmail& email) {
  return fmt::format("To: {}\nSubject: {}\n\n{}", email.to, email.subject, email.body);
}

Outbox::Outbox(std::shared_ptr<store::DocumentStore> store, std::optional<std::filesystem::path> sink_dir)
    : store_(std::move(store)), sink_dir_(std::move(sink_dir)) {}

bool Outbox::enqueue(const std::string& key, const OutboxEmail& email) {
  if (!store_->compare_and_swap(store::collections::kOutbox, key, 0, json(email))) return false;
  if (sink_dir_) {
    std::error_code ec;
    std::filesystem::create_directories(*sink_dir_, ec);
    std::ofstream out(*sink_dir_ / eml_filename(email), std::ios::binary);
    out << render_eml(email);
    if (!out) spdlog::error("outbox sink write failed for {}", eml_filename(email));
  }
  return true;
}

std::vector<OutboxEmail> Outbox::all() const {
  std::vector<OutboxEmail> out;
  for (auto& [key, v] : store_->scan(store::collections::kOutbox)) out.push_back(v.doc.get<OutboxEmail>());
  std::sort(out.begin(), out.end(), [](const OutboxEmail& a, const OutboxEmail& b) {
    return std::tie(a.queued_at, a.to) < std::tie(b.queued_at, b.to);
  });
  return out;
}

}  // namespace campusride::accounts
