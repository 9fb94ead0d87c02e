#pragma once

// Thin RAII wrappers over the libqttt C handles for the command-line tools.

#include <memory>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qttt/qttt.h"

namespace qttt_cli {

class ApiError : public std::runtime_error {
 public:
  ApiError(qttt_status status, const std::string& message) : std::runtime_error(message), status_(status) {}
  qttt_status status() const { return status_; }

 private:
  qttt_status status_;
};

inline void check(qttt_status status) {
  if (status != QTTT_OK) throw ApiError(status, qttt_last_error());
}

struct GameDeleter {
  void operator()(qttt_game* g) const { qttt_game_free(g); }
};
struct AgentDeleter {
  void operator()(qttt_agent* a) const { qttt_agent_free(a); }
};
struct RngDeleter {
  void operator()(qttt_rng* r) const { qttt_rng_free(r); }
};

using Game = std::unique_ptr<qttt_game, GameDeleter>;
using AgentPtr = std::unique_ptr<qttt_agent, AgentDeleter>;
using Rng = std::unique_ptr<qttt_rng, RngDeleter>;

/// Takes ownership of a library-allocated string.
inline std::string take_string(char* s) {
  std::string out(s ? s : "");
  qttt_string_free(s);
  return out;
}

inline Game new_game(int rules, std::uint64_t seed) {
  qttt_game* g = nullptr;
  check(qttt_game_new(rules, seed, 0, &g));
  return Game(g);
}

inline Rng new_rng(std::uint64_t seed) {
  qttt_rng* r = nullptr;
  check(qttt_rng_new(seed, &r));
  return Rng(r);
}

/// "random" selects the uniform-random-legal agent.
inline AgentPtr load_agent(const std::string& checkpoint) {
  qttt_agent* a = nullptr;
  if (checkpoint == "random") {
    check(qttt_agent_random(&a));
  } else {
    check(qttt_agent_load(checkpoint.c_str(), &a));
  }
  return AgentPtr(a);
}

inline nlohmann::json agent_info(const qttt_agent* agent) {
  char* s = nullptr;
  check(qttt_agent_info_json(agent, &s));
  return nlohmann::json::parse(take_string(s));
}

inline nlohmann::json state_json(const qttt_game* game) {
  char* s = nullptr;
  check(qttt_game_state_json(game, &s));
  return nlohmann::json::parse(take_string(s));
}

inline nlohmann::json record_json(const qttt_game* game) {
  char* s = nullptr;
  check(qttt_game_record_json(game, &s));
  return nlohmann::json::parse(take_string(s));
}

inline int parse_rules(const std::string& text) {
  if (text == "v1" || text == "V1" || text == "1") return QTTT_RULES_V1;
  if (text == "v3" || text == "V3" || text == "3") return QTTT_RULES_V3;
  throw std::invalid_argument("unknown rule version '" + text + "' (expected v1 or v3)");
}

inline std::string rules_name(int rules) { return rules == QTTT_RULES_V1 ? "v1" : "v3"; }

inline std::string result_name(int result) {
  switch (result) {
    case QTTT_RESULT_X_WINS: return "x_wins";
    case QTTT_RESULT_O_WINS: return "o_wins";
    case QTTT_RESULT_DRAW: return "draw";
    default: return "ongoing";
  }
}

inline nlohmann::json report_json(const qttt_report& r) {
  return {{"games", r.games},           {"avg_reward", r.avg_reward},     {"x_wins", r.x_wins},
          {"o_wins", r.o_wins},         {"draws", r.draws},               {"agent_wins", r.agent_wins},
          {"agent_losses", r.agent_losses}};
}

}  // namespace qttt_cli
