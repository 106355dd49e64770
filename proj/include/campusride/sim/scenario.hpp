#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace campusride::sim {

/// A declared participant. Riders carry their registration form; cars their
/// capacity and starting node.
struct ActorDecl {
  enum class Kind : std::uint8_t { Admin, Car, Rider };

  Kind kind{Kind::Rider};
  std::string name;
  std::string password;
  std::size_t line{};

  // Rider
  std::string university_id;
  std::string email;
  std::string first_name;
  std::string last_name;
  std::string phone;

  // Car
  int capacity{4};
  std::string start_node;  // empty: the graph's first node
};

struct Step {
  std::size_t line{};
  std::string verb;
  std::vector<std::string> args;
  std::map<std::string, std::string> options;
  std::optional<int> expect_status;
  int repeat{0};
  std::vector<Step> body;  // repeat only
};

struct Assertion {
  std::size_t line{};
  std::string kind;
  std::vector<std::string> args;
  std::map<std::string, std::string> options;
};

struct Scenario {
  std::string name;
  std::filesystem::path source;
  std::filesystem::path graph;
  std::map<std::string, std::string> settings;
  std::vector<ActorDecl> actors;
  std::vector<Step> steps;
  std::vector<Assertion> assertions;

  [[nodiscard]] const ActorDecl* find(std::string_view name) const;
  [[nodiscard]] std::string setting(std::string_view key, std::string_view fallback) const;
};

/// Parses the line-oriented scenario format. Relative graph paths resolve
/// against `origin`'s directory. Throws Error{ScenarioInvalid} naming the line.
///
///   scenario <name>
///   graph <path>
///   set <key> <value>
///   admin <name> [password=..]
///   car <id> [capacity=N] [at=<node>] [password=..]
///   rider <name> [uid=..] [email=..] [first=..] [last=..] [phone=..] [password=..]
///   riders <count> <prefix>
///   <step> [args] [key=value..] [expect <status>]
///   repeat <n> / end
///   assert <kind> [args]
[[nodiscard]] Scenario parse_scenario(std::string_view text, const std::filesystem::path& origin = {});
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& path);

/// Directory of the bundled scenarios (CAMPUSRIDE_SCENARIOS overrides).
[[nodiscard]] std::filesystem::path scenario_dir();
/// Bundled scenario names, sorted.
[[nodiscard]] std::vector<std::string> list_scenarios(const std::filesystem::path& dir = scenario_dir());
/// A path to an existing file, or the name of a bundled scenario.
[[nodiscard]] std::filesystem::path resolve_scenario(std::string_view name_or_path);

}  // namespace campusride::sim
