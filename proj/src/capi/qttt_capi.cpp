#include "qttt/qttt.h"

#include <cstring>
#include <filesystem>
#include <optional>
#include <string>

#include "qttt/agent.hpp"
#include "qttt/checkpoint.hpp"
#include "qttt/game.hpp"
#include "qttt/records.hpp"
#include "qttt/run_config.hpp"
#include "qttt/trainer.hpp"

struct qttt_game {
  qttt::GameState state;
};

struct qttt_agent {
  qttt::Agent agent;
  std::optional<qttt::CheckpointMeta> meta;
  std::string path;
};

struct qttt_rng {
  qttt::RngStream stream;
};

namespace {

thread_local std::string last_error;

qttt_status fail(qttt_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Maps exceptions from the C++ core onto status codes.
template <typename Fn>
qttt_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return QTTT_OK;
  } catch (const qttt::IllegalMoveError& e) {
    return fail(QTTT_ERR_ILLEGAL_MOVE, e.what());
  } catch (const qttt::GameOverError& e) {
    return fail(QTTT_ERR_GAME_OVER, e.what());
  } catch (const qttt::ConfigError& e) {
    return fail(QTTT_ERR_CONFIG, e.what());
  } catch (const qttt::CheckpointError& e) {
    return fail(QTTT_ERR_FORMAT, e.what());
  } catch (const qttt::RecordError& e) {
    return fail(QTTT_ERR_FORMAT, e.what());
  } catch (const qttt::NumericError& e) {
    return fail(QTTT_ERR_NUMERIC, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(QTTT_ERR_FORMAT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(QTTT_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(QTTT_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(QTTT_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(QTTT_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(QTTT_ERR_INTERNAL, "unknown error");
  }
}

#define QTTT_REQUIRE(cond)                                                          \
  do {                                                                              \
    if (!(cond)) return fail(QTTT_ERR_INVALID_ARGUMENT, "null or invalid argument: " #cond); \
  } while (0)

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

qttt::RuleVersion rules_from(int rules) {
  if (rules == QTTT_RULES_V1) return qttt::RuleVersion::V1;
  if (rules == QTTT_RULES_V3) return qttt::RuleVersion::V3;
  throw std::invalid_argument("rules must be QTTT_RULES_V1 or QTTT_RULES_V3");
}

int result_code(qttt::GameResult r) {
  switch (r) {
    case qttt::GameResult::Ongoing: return QTTT_RESULT_ONGOING;
    case qttt::GameResult::XWins: return QTTT_RESULT_X_WINS;
    case qttt::GameResult::OWins: return QTTT_RESULT_O_WINS;
    case qttt::GameResult::Draw: return QTTT_RESULT_DRAW;
  }
  return QTTT_RESULT_ONGOING;
}

void fill_report(const qttt::EvalReport& r, qttt_report* out) {
  out->games = r.games;
  out->x_wins = r.x_wins;
  out->o_wins = r.o_wins;
  out->draws = r.draws;
  out->agent_wins = r.agent_wins;
  out->agent_losses = r.agent_losses;
  out->avg_reward = r.avg_reward;
}

}  // namespace

extern "C" {

const char* qttt_version(void) {
  static const std::string version = qttt::code_version();
  return version.c_str();
}

const char* qttt_last_error(void) { return last_error.c_str(); }

void qttt_string_free(char* s) { delete[] s; }

qttt_status qttt_rng_new(uint64_t seed, qttt_rng** out) {
  QTTT_REQUIRE(out);
  return guarded([&] { *out = new qttt_rng{qttt::RngStream(seed)}; });
}

void qttt_rng_free(qttt_rng* rng) { delete rng; }

qttt_status qttt_action_encode(int a, int b, int* action) {
  QTTT_REQUIRE(action);
  return guarded([&] { *action = qttt::encode_action(b == 0 ? qttt::Move::classical(a) : qttt::Move::split(a, b)); });
}

qttt_status qttt_action_decode(int action, int* a, int* b) {
  QTTT_REQUIRE(a && b);
  return guarded([&] {
    const qttt::Move m = qttt::decode_action(action);
    *a = m.a;
    *b = m.b;
  });
}

qttt_status qttt_game_new(int rules, uint64_t seed, int episode_cap, qttt_game** out) {
  QTTT_REQUIRE(out);
  return guarded([&] {
    const int cap = episode_cap > 0 ? episode_cap : qttt::kDefaultEpisodeCap;
    *out = new qttt_game{qttt::reset(rules_from(rules), seed, cap)};
  });
}

qttt_status qttt_game_clone(const qttt_game* game, qttt_game** out) {
  QTTT_REQUIRE(game && out);
  return guarded([&] { *out = new qttt_game{game->state}; });
}

void qttt_game_free(qttt_game* game) { delete game; }

qttt_status qttt_game_from_record(const char* record_json, qttt_game** out) {
  QTTT_REQUIRE(record_json && out);
  return guarded([&] { *out = new qttt_game{qttt::replay_record(nlohmann::json::parse(record_json))}; });
}

qttt_status qttt_game_step(qttt_game* game, int action, double* reward, int* done) {
  QTTT_REQUIRE(game);
  return guarded([&] {
    const qttt::StepResult r = qttt::step(game->state, action);
    if (reward) *reward = r.reward;
    if (done) *done = r.done ? 1 : 0;
  });
}

qttt_status qttt_game_legal_mask(const qttt_game* game, uint8_t mask[QTTT_ACTION_COUNT]) {
  QTTT_REQUIRE(game && mask);
  return guarded([&] {
    const qttt::ActionMask m = qttt::legal_mask(game->state);
    for (int k = 0; k < QTTT_ACTION_COUNT; ++k) mask[k] = m[k] ? 1 : 0;
  });
}

qttt_status qttt_game_turn(const qttt_game* game, int* mark) {
  QTTT_REQUIRE(game && mark);
  *mark = static_cast<int>(game->state.turn);
  return QTTT_OK;
}

qttt_status qttt_game_result(const qttt_game* game, int* result) {
  QTTT_REQUIRE(game && result);
  *result = result_code(game->state.result);
  return QTTT_OK;
}

qttt_status qttt_game_move_count(const qttt_game* game, int* count) {
  QTTT_REQUIRE(game && count);
  *count = game->state.move_count;
  return QTTT_OK;
}

qttt_status qttt_game_marginals(const qttt_game* game, double out[27]) {
  QTTT_REQUIRE(game && out);
  return guarded([&] {
    const qttt::Marginals m = qttt::exact_marginals(game->state.engine);
    for (int c = 0; c < qttt::kCellCount; ++c) {
      for (int k = 0; k < 3; ++k) out[3 * c + k] = m[c][k];
    }
  });
}

qttt_status qttt_game_state_json(const qttt_game* game, char** out) {
  QTTT_REQUIRE(game && out);
  return guarded([&] { *out = dup_string(qttt::state_document(game->state).dump()); });
}

qttt_status qttt_game_record_json(const qttt_game* game, char** out) {
  QTTT_REQUIRE(game && out);
  return guarded([&] { *out = dup_string(qttt::game_record(game->state).dump()); });
}

qttt_status qttt_game_statevector_json(const qttt_game* game, char** out) {
  QTTT_REQUIRE(game && out);
  return guarded([&] { *out = dup_string(qttt::state_to_json(game->state.engine)); });
}

qttt_status qttt_game_observation_json(const qttt_game* game, const char* mode, int n_samples, int exact,
                                       qttt_rng* rng, const char* record_ref, char** out) {
  QTTT_REQUIRE(game && mode && rng && out);
  return guarded([&] {
    qttt::EncoderConfig cfg;
    cfg.mode = qttt::parse_obs_mode(mode);
    cfg.n_samples = n_samples > 0 ? n_samples : qttt::kDefaultMeasurementSamples;
    cfg.exact = exact != 0;
    cfg.history_norm = game->state.episode_cap;
    cfg.validate();
    *out = dup_string(qttt::observation_dump(game->state, cfg, rng->stream, record_ref ? record_ref : "").dump());
  });
}

qttt_status qttt_agent_random(qttt_agent** out) {
  QTTT_REQUIRE(out);
  return guarded([&] { *out = new qttt_agent{qttt::Agent::uniform_random(), std::nullopt, ""}; });
}

qttt_status qttt_agent_load(const char* checkpoint_path, qttt_agent** out) {
  QTTT_REQUIRE(checkpoint_path && out);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(checkpoint_path, ec)) {
    return fail(QTTT_ERR_IO, std::string("no checkpoint file at ") + checkpoint_path);
  }
  return guarded([&] {
    qttt::Checkpoint ckpt = qttt::load_checkpoint(checkpoint_path);
    qttt::Agent agent = qttt::Agent::from_policy(std::move(ckpt.params), ckpt.meta.encoder);
    *out = new qttt_agent{std::move(agent), ckpt.meta, checkpoint_path};
  });
}

void qttt_agent_free(qttt_agent* agent) { delete agent; }

qttt_status qttt_agent_info_json(const qttt_agent* agent, char** out) {
  QTTT_REQUIRE(agent && out);
  return guarded([&] {
    nlohmann::json info;
    if (agent->agent.is_random()) {
      info = {{"kind", "random"}};
    } else {
      const auto& meta = *agent->meta;
      info = {
          {"kind", "policy"},
          {"path", agent->path},
          {"obs_mode", qttt::to_string(meta.encoder.mode)},
          {"rule_version", qttt::to_string(meta.rule_version)},
          {"hidden", agent->agent.params()->hidden},
          {"input_dim", agent->agent.params()->input_dim},
          {"n_samples", meta.encoder.n_samples},
          {"exact", meta.encoder.exact},
          {"training_step", meta.training_step},
          {"seed", meta.seed},
          {"eval_avg_reward", meta.eval_avg_reward},
          {"code_version", meta.code_version},
      };
    }
    info["selection"] = agent->agent.selection() == qttt::ActionSelection::Greedy ? "greedy" : "sample";
    *out = dup_string(info.dump());
  });
}

qttt_status qttt_agent_set_sampling(qttt_agent* agent, int sample) {
  QTTT_REQUIRE(agent);
  agent->agent.set_selection(sample ? qttt::ActionSelection::Sample : qttt::ActionSelection::Greedy);
  return QTTT_OK;
}

qttt_status qttt_agent_act(const qttt_agent* agent, const qttt_game* game, qttt_rng* rng, int* action) {
  QTTT_REQUIRE(agent && game && rng && action);
  return guarded([&] { *action = agent->agent.act(game->state, rng->stream); });
}

qttt_status qttt_config_validate(const char* config_json, char** normalized) {
  QTTT_REQUIRE(config_json);
  return guarded([&] {
    const qttt::RunConfig cfg = qttt::parse_run_config(config_json);
    if (normalized) *normalized = dup_string(cfg.to_json().dump(2));
  });
}

qttt_status qttt_train(const char* config_json, const char* out_dir, qttt_metrics_callback callback, void* user) {
  QTTT_REQUIRE(config_json && out_dir);
  return guarded([&] {
    const qttt::RunConfig cfg = qttt::parse_run_config(config_json);
    qttt::MetricsCallback on_row;
    if (callback) on_row = [&](const qttt::MetricsRow& row) { callback(row.csv().c_str(), user); };
    qttt::train(cfg, out_dir, on_row);
  });
}

qttt_status qttt_evaluate(const qttt_agent* agent, const qttt_agent* opponent, int rules, int games, uint64_t seed,
                          qttt_report* out) {
  QTTT_REQUIRE(agent && opponent && out);
  return guarded([&] { fill_report(qttt::evaluate(agent->agent, opponent->agent, rules_from(rules), games, seed), out); });
}

qttt_status qttt_pit(const qttt_agent* x_agent, const qttt_agent* o_agent, int rules, int games, uint64_t seed,
                     qttt_report* out, int* outcomes) {
  QTTT_REQUIRE(x_agent && o_agent && out);
  return guarded([&] {
    const qttt::EvalReport r = qttt::pit(x_agent->agent, o_agent->agent, rules_from(rules), games, seed);
    fill_report(r, out);
    if (outcomes) {
      for (std::size_t g = 0; g < r.outcomes.size(); ++g) outcomes[g] = result_code(r.outcomes[g]);
    }
  });
}

}  // extern "C"
