#include "campusride/sim/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "campusride/domain/error.hpp"
#include "campusride/domain/types.hpp"

#ifndef CAMPUSRIDE_SCENARIO_DIR
#define CAMPUSRIDE_SCENARIO_DIR "scenarios"
#endif

namespace campusride::sim {

namespace {

constexpr std::string_view kExtension = ".scn";

const std::set<std::string, std::less<>> kSettings{
    "offer_timeout_ms", "reroute_threshold_m", "campus_speed_mps", "snap_radius_m",
    "track_publish_ms", "track_poll_ms",       "step_ms",          "store"};

struct VerbSpec {
  std::string_view verb;
  std::size_t min_args;
  std::size_t max_args;
};

constexpr VerbSpec kVerbs[] = {
    {"register", 1, 1}, {"review", 2, 2},     {"login", 1, 1},      {"onboard", 1, 1},
    {"request", 1, 1},  {"accept", 1, 1},     {"reject", 1, 1},     {"stage", 2, 2},
    {"drive", 1, 2},    {"track", 1, 1},      {"wait", 1, 1},       {"disconnect", 1, 1},
    {"connect", 1, 1},  {"restart", 0, 0},    {"location", 1, 1},
};

struct AssertSpec {
  std::string_view kind;
  std::size_t min_args;
  std::size_t max_args;
};

constexpr AssertSpec kAssertions[] = {
    {"events", 1, 64},  {"exactly-once", 1, 1},        {"fifo", 0, 0},     {"acceptance-order", 0, 0},
    {"no-double-assignment", 0, 0}, {"stage", 2, 2},   {"reroutes", 2, 2}, {"hysteresis", 1, 1},
    {"arrived", 2, 2},  {"outbox", 1, 1},             {"username", 2, 2},
};

[[noreturn]] void invalid(std::size_t line, const std::string& message) {
  throw Error(ErrorCode::ScenarioInvalid, fmt::format("line {}: {}", line, message));
}

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string word;
  while (in >> word) out.push_back(word);
  return out;
}

int parse_int(const std::string& text, std::size_t line, std::string_view what) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) invalid(line, fmt::format("{} must be an integer", what));
  return v;
}

struct Split {
  std::vector<std::string> positional;
  std::map<std::string, std::string> options;
  std::optional<int> expect;
};

Split split_words(const std::vector<std::string>& words, std::size_t from, std::size_t line) {
  Split s;
  for (std::size_t i = from; i < words.size(); ++i) {
    const auto& w = words[i];
    if (w == "expect") {
      if (i + 2 != words.size()) invalid(line, "expect must be last and take one status");
      s.expect = parse_int(words[i + 1], line, "expected status");
      break;
    }
    if (auto eq = w.find('='); eq != std::string::npos && eq > 0) {
      s.options[w.substr(0, eq)] = w.substr(eq + 1);
    } else {
      s.positional.push_back(w);
    }
  }
  return s;
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

ActorDecl rider_defaults(const std::string& name, std::size_t ordinal, std::size_t line) {
  ActorDecl a;
  a.kind = ActorDecl::Kind::Rider;
  a.name = name;
  a.line = line;
  a.university_id = fmt::format("U{:05}", ordinal);
  a.email = fmt::format("{}@campus.example", name);
  a.first_name = capitalize(name);
  a.last_name = "Rider";
  a.phone = fmt::format("0100{:07}", ordinal);
  a.password = name + "-pass";
  return a;
}

class Parser {
 public:
  Parser(std::string_view text, const std::filesystem::path& origin) : text_(text), origin_(origin) {}

  Scenario run() {
    std::istringstream in{std::string(text_)};
    std::string raw;
    std::vector<std::vector<Step>*> stack{&scenario_.steps};
    std::vector<std::size_t> open_lines;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
      ++line;
      if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
      const auto words = tokenize(raw);
      if (words.empty()) continue;
      const auto& head = words[0];

      if (head == "scenario") {
        if (words.size() != 2) invalid(line, "scenario takes one name");
        scenario_.name = words[1];
      } else if (head == "graph") {
        if (words.size() != 2) invalid(line, "graph takes one path");
        std::filesystem::path p = words[1];
        scenario_.graph = p.is_relative() && !origin_.empty() ? origin_.parent_path() / p : p;
      } else if (head == "set") {
        if (words.size() != 3) invalid(line, "set takes a key and a value");
        if (!kSettings.contains(words[1])) invalid(line, fmt::format("unknown setting '{}'", words[1]));
        scenario_.settings[words[1]] = words[2];
      } else if (head == "admin" || head == "car" || head == "rider") {
        declare(words, line);
      } else if (head == "riders") {
        if (words.size() != 3) invalid(line, "riders takes a count and a name prefix");
        const int n = parse_int(words[1], line, "rider count");
        if (n < 1 || n > 10000) invalid(line, "rider count out of range");
        for (int i = 1; i <= n; ++i) add_actor(rider_defaults(fmt::format("{}{:03}", words[2], i), next_ordinal(), line));
      } else if (head == "assert") {
        if (stack.size() != 1) invalid(line, "assert inside repeat");
        if (words.size() < 2) invalid(line, "assert needs a kind");
        auto split = split_words(words, 2, line);
        Assertion a{line, words[1], std::move(split.positional), std::move(split.options)};
        check_assertion(a);
        scenario_.assertions.push_back(std::move(a));
      } else if (head == "repeat") {
        if (words.size() != 2) invalid(line, "repeat takes a count");
        Step s;
        s.line = line;
        s.verb = "repeat";
        s.repeat = parse_int(words[1], line, "repeat count");
        if (s.repeat < 0) invalid(line, "repeat count must not be negative");
        stack.back()->push_back(std::move(s));
        stack.push_back(&stack.back()->back().body);
        open_lines.push_back(line);
      } else if (head == "end") {
        if (stack.size() == 1) invalid(line, "end without repeat");
        stack.pop_back();
        open_lines.pop_back();
      } else {
        if (!scenario_.assertions.empty()) invalid(line, "steps must come before assertions");
        stack.back()->push_back(parse_step(words, line));
      }
    }
    if (!open_lines.empty()) invalid(open_lines.back(), "repeat without end");
    if (scenario_.name.empty()) invalid(1, "missing 'scenario <name>'");
    if (scenario_.graph.empty()) invalid(1, "missing 'graph <path>'");
    check_steps(scenario_.steps);
    scenario_.source = origin_;
    return std::move(scenario_);
  }

 private:
  std::size_t next_ordinal() { return ++riders_; }

  void add_actor(ActorDecl a) {
    if (scenario_.find(a.name) != nullptr) invalid(a.line, fmt::format("actor '{}' declared twice", a.name));
    if (a.name == "all") invalid(a.line, "'all' is reserved");
    scenario_.actors.push_back(std::move(a));
  }

  void declare(const std::vector<std::string>& words, std::size_t line) {
    if (words.size() < 2) invalid(line, fmt::format("{} needs a name", words[0]));
    auto split = split_words(words, 2, line);
    if (!split.positional.empty() || split.expect) invalid(line, "declarations take key=value options only");
    auto opt = [&](const char* key, std::string fallback) {
      auto it = split.options.find(key);
      if (it == split.options.end()) return fallback;
      std::string v = it->second;
      split.options.erase(it);
      return v;
    };
    ActorDecl a;
    if (words[0] == "admin") {
      a.kind = ActorDecl::Kind::Admin;
      a.name = words[1];
      a.line = line;
      a.password = opt("password", words[1] + "-pass");
    } else if (words[0] == "car") {
      a.kind = ActorDecl::Kind::Car;
      a.name = words[1];
      a.line = line;
      a.capacity = parse_int(opt("capacity", "4"), line, "capacity");
      a.start_node = opt("at", "");
      a.password = opt("password", words[1] + "-pass");
    } else {
      a = rider_defaults(words[1], next_ordinal(), line);
      a.university_id = opt("uid", a.university_id);
      a.email = opt("email", a.email);
      a.first_name = opt("first", a.first_name);
      a.last_name = opt("last", a.last_name);
      a.phone = opt("phone", a.phone);
      a.password = opt("password", a.password);
    }
    if (!split.options.empty()) invalid(line, fmt::format("unknown option '{}'", split.options.begin()->first));
    add_actor(std::move(a));
  }

  static Step parse_step(const std::vector<std::string>& words, std::size_t line) {
    const auto* spec = std::find_if(std::begin(kVerbs), std::end(kVerbs),
                                    [&](const VerbSpec& v) { return v.verb == words[0]; });
    if (spec == std::end(kVerbs)) invalid(line, fmt::format("unknown step '{}'", words[0]));
    auto split = split_words(words, 1, line);
    if (split.positional.size() < spec->min_args || split.positional.size() > spec->max_args) {
      invalid(line, fmt::format("{} takes {} to {} arguments", words[0], spec->min_args, spec->max_args));
    }
    Step s;
    s.line = line;
    s.verb = words[0];
    s.args = std::move(split.positional);
    s.options = std::move(split.options);
    s.expect_status = split.expect;
    return s;
  }

  const ActorDecl& actor(const std::string& name, std::size_t line) const {
    const auto* a = scenario_.find(name);
    if (a == nullptr) invalid(line, fmt::format("undeclared actor '{}'", name));
    return *a;
  }

  void require_kind(const std::string& name, ActorDecl::Kind kind, std::size_t line, std::string_view verb) const {
    if (actor(name, line).kind != kind) invalid(line, fmt::format("{} does not apply to '{}'", verb, name));
  }

  void check_steps(const std::vector<Step>& steps) const {
    using K = ActorDecl::Kind;
    for (const auto& s : steps) {
      const auto& v = s.verb;
      if (v == "repeat") {
        check_steps(s.body);
      } else if (v == "register" || v == "review" || v == "onboard" || v == "request") {
        if (s.args[0] != "all" || v == "register" || v == "review") require_kind(s.args[0], K::Rider, s.line, v);
        if (v == "review" && s.args[1] != "accept" && s.args[1] != "reject") {
          invalid(s.line, "review decision must be accept or reject");
        }
        if ((v == "review" || v == "onboard") &&
            std::none_of(scenario_.actors.begin(), scenario_.actors.end(),
                         [](const ActorDecl& a) { return a.kind == K::Admin; })) {
          invalid(s.line, fmt::format("{} needs a declared admin", v));
        }
        if (v == "request") {
          for (const char* key : {"from", "to", "seats"}) {
            if (!s.options.contains(key)) invalid(s.line, fmt::format("request needs {}=", key));
          }
          const auto order = s.options.contains("order") ? s.options.at("order") : "declared";
          if (order != "declared" && order != "shuffled") invalid(s.line, "order must be declared or shuffled");
        }
      } else if (v == "accept" || v == "reject" || v == "stage" || v == "drive" || v == "location") {
        require_kind(s.args[0], K::Car, s.line, v);
        if (v == "stage") {
          try {
            (void)parse_stage(s.args[1]);
          } catch (const Error&) {
            invalid(s.line, fmt::format("unknown stage '{}'", s.args[1]));
          }
        }
        if (v == "drive") {
          const bool route = s.args.size() == 2 && s.args[1] == "route";
          const bool via = s.args.size() == 1 && s.options.contains("via");
          if (route == via) invalid(s.line, "drive takes 'route' or via=<node,...>");
        }
        if (v == "location" && !s.options.contains("at")) invalid(s.line, "location needs at=<node>");
        for (const char* key : {"rider"}) {
          if (s.options.contains(key)) require_kind(s.options.at(key), K::Rider, s.line, v);
        }
      } else if (v == "login" || v == "track" || v == "disconnect" || v == "connect") {
        (void)actor(s.args[0], s.line);
      } else if (v == "wait") {
        if (parse_int(s.args[0], s.line, "wait seconds") < 0) invalid(s.line, "wait must not be negative");
      }
    }
  }

  void check_assertion(const Assertion& a) const {
    const auto* spec = std::find_if(std::begin(kAssertions), std::end(kAssertions),
                                    [&](const AssertSpec& s) { return s.kind == a.kind; });
    if (spec == std::end(kAssertions)) invalid(a.line, fmt::format("unknown assertion '{}'", a.kind));
    if (a.args.size() < spec->min_args || a.args.size() > spec->max_args) {
      invalid(a.line, fmt::format("assert {} takes {} to {} arguments", a.kind, spec->min_args, spec->max_args));
    }
    const bool names_actor = a.kind == "events" || a.kind == "stage" || a.kind == "reroutes" ||
                             a.kind == "hysteresis" || a.kind == "arrived" || a.kind == "username";
    if (names_actor) (void)actor(a.args[0], a.line);
  }

  std::string_view text_;
  std::filesystem::path origin_;
  Scenario scenario_;
  std::size_t riders_{0};
};

}  // namespace

const ActorDecl* Scenario::find(std::string_view name) const {
  for (const auto& a : actors) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

std::string Scenario::setting(std::string_view key, std::string_view fallback) const {
  auto it = settings.find(std::string(key));
  return it == settings.end() ? std::string(fallback) : it->second;
}

Scenario parse_scenario(std::string_view text, const std::filesystem::path& origin) {
  return Parser(text, origin).run();
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ScenarioInvalid, fmt::format("cannot read scenario {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

std::filesystem::path scenario_dir() {
  if (const char* env = std::getenv("CAMPUSRIDE_SCENARIOS"); env != nullptr && *env != '\0') return env;
  return CAMPUSRIDE_SCENARIO_DIR;
}

std::vector<std::string> list_scenarios(const std::filesystem::path& dir) {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == kExtension) out.push_back(entry.path().stem().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::filesystem::path resolve_scenario(std::string_view name_or_path) {
  const std::filesystem::path direct{std::string(name_or_path)};
  if (std::filesystem::is_regular_file(direct)) return direct;
  auto bundled = scenario_dir() / (std::string(name_or_path) + std::string(kExtension));
  if (std::filesystem::is_regular_file(bundled)) return bundled;
  throw Error(ErrorCode::ScenarioInvalid, fmt::format("no scenario named '{}'", name_or_path));
}

}  // namespace campusride::sim
