#include <doctest.h>

#include <cstring>
#include <string>

#include <json.hpp>

#include "qttt/qttt.h"

using nlohmann::json;

namespace {

std::string take(char* s) {
  std::string out(s ? s : "");
  qttt_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("C API: version and errors") {
  CHECK(std::strlen(qttt_version()) > 0);
  qttt_game* g = nullptr;
  CHECK(qttt_game_new(2, 0, 0, &g) == QTTT_ERR_INVALID_ARGUMENT);
  CHECK(g == nullptr);
  CHECK(std::string(qttt_last_error()).find("rule") != std::string::npos);
  CHECK(qttt_game_new(QTTT_RULES_V1, 0, 0, nullptr) == QTTT_ERR_INVALID_ARGUMENT);
  qttt_game_free(nullptr);
  qttt_agent_free(nullptr);
  qttt_rng_free(nullptr);
  qttt_string_free(nullptr);
}

TEST_CASE("C API: action encoding") {
  int action = -1, a = 0, b = 0;
  CHECK(qttt_action_encode(1, 0, &action) == QTTT_OK);
  CHECK(action == 0);
  CHECK(qttt_action_encode(2, 1, &action) == QTTT_OK);
  CHECK(action == 9);
  CHECK(qttt_action_encode(8, 9, &action) == QTTT_OK);
  CHECK(action == 44);
  CHECK(qttt_action_decode(44, &a, &b) == QTTT_OK);
  CHECK(a == 8);
  CHECK(b == 9);
  CHECK(qttt_action_decode(4, &a, &b) == QTTT_OK);
  CHECK(a == 5);
  CHECK(b == 0);
  CHECK(qttt_action_encode(3, 3, &action) == QTTT_ERR_INVALID_ARGUMENT);
  CHECK(qttt_action_decode(45, &a, &b) == QTTT_ERR_INVALID_ARGUMENT);
}

TEST_CASE("C API: a game through handles") {
  qttt_game* g = nullptr;
  REQUIRE(qttt_game_new(QTTT_RULES_V1, 7, 0, &g) == QTTT_OK);
  uint8_t mask[QTTT_ACTION_COUNT];
  REQUIRE(qttt_game_legal_mask(g, mask) == QTTT_OK);
  int legal = 0;
  for (uint8_t m : mask) legal += m;
  CHECK(legal == 45);

  double reward = 9.0;
  int done = 9;
  REQUIRE(qttt_game_step(g, 9, &reward, &done) == QTTT_OK);  // split (1,2)
  CHECK(reward == 0.0);
  CHECK(done == 0);
  double marg[27];
  REQUIRE(qttt_game_marginals(g, marg) == QTTT_OK);
  CHECK(marg[0] == doctest::Approx(0.5));
  CHECK(marg[1] == doctest::Approx(0.5));
  int turn = 0;
  REQUIRE(qttt_game_turn(g, &turn) == QTTT_OK);
  CHECK(turn == QTTT_MARK_O);

  char* before = nullptr;
  REQUIRE(qttt_game_state_json(g, &before) == QTTT_OK);
  const std::string before_text = take(before);
  CHECK(qttt_game_step(g, 9, nullptr, nullptr) == QTTT_ERR_ILLEGAL_MOVE);
  char* after = nullptr;
  REQUIRE(qttt_game_state_json(g, &after) == QTTT_OK);
  CHECK(take(after) == before_text);

  qttt_game* copy = nullptr;
  REQUIRE(qttt_game_clone(g, &copy) == QTTT_OK);
  for (int cell : {3, 4, 5, 6, 7, 8, 9}) {
    int a = 0;
    qttt_action_encode(cell, 0, &a);
    REQUIRE(qttt_game_step(g, a, nullptr, nullptr) == QTTT_OK);
  }
  int result = -1;
  REQUIRE(qttt_game_result(g, &result) == QTTT_OK);
  int count = 0;
  REQUIRE(qttt_game_move_count(g, &count) == QTTT_OK);
  CHECK(count == 8);
  int copy_count = 0;
  REQUIRE(qttt_game_move_count(copy, &copy_count) == QTTT_OK);
  CHECK(copy_count == 1);

  char* rec = nullptr;
  REQUIRE(qttt_game_record_json(g, &rec) == QTTT_OK);
  const std::string record = take(rec);
  qttt_game* replayed = nullptr;
  REQUIRE(qttt_game_from_record(record.c_str(), &replayed) == QTTT_OK);
  char* s1 = nullptr;
  char* s2 = nullptr;
  qttt_game_state_json(g, &s1);
  qttt_game_state_json(replayed, &s2);
  CHECK(take(s1) == take(s2));
  CHECK(qttt_game_from_record("{\"format\":\"nope\"}", &replayed) != QTTT_OK);

  char* sv = nullptr;
  REQUIRE(qttt_game_statevector_json(copy, &sv) == QTTT_OK);
  const json doc = json::parse(take(sv));
  CHECK(doc["dimension"] == 19683);
  CHECK(doc["encoding_version"] == 1);

  qttt_rng* rng = nullptr;
  REQUIRE(qttt_rng_new(1, &rng) == QTTT_OK);
  char* obs = nullptr;
  REQUIRE(qttt_game_observation_json(copy, "m", 0, 1, rng, "ref.json", &obs) == QTTT_OK);
  const json o = json::parse(take(obs));
  CHECK(o["length"] == 27);
  CHECK(o["record"] == "ref.json");
  CHECK(qttt_game_observation_json(copy, "zz", 0, 1, rng, nullptr, &obs) == QTTT_ERR_INVALID_ARGUMENT);

  qttt_rng_free(rng);
  qttt_game_free(replayed);
  qttt_game_free(copy);
  qttt_game_free(g);
}

TEST_CASE("C API: finished games reject moves") {
  qttt_game* g = nullptr;
  REQUIRE(qttt_game_new(QTTT_RULES_V3, 1, 4, &g) == QTTT_OK);
  int done = 0;
  while (!done) REQUIRE(qttt_game_step(g, 9, nullptr, &done) == QTTT_OK);
  uint8_t mask[QTTT_ACTION_COUNT];
  CHECK(qttt_game_legal_mask(g, mask) == QTTT_ERR_GAME_OVER);
  CHECK(qttt_game_step(g, 10, nullptr, nullptr) == QTTT_ERR_GAME_OVER);
  qttt_game_free(g);
}

TEST_CASE("C API: agents, pit and evaluate") {
  qttt_agent* r = nullptr;
  REQUIRE(qttt_agent_random(&r) == QTTT_OK);
  char* info = nullptr;
  REQUIRE(qttt_agent_info_json(r, &info) == QTTT_OK);
  CHECK(json::parse(take(info))["kind"] == "random");

  qttt_report ev{}, px{}, po{};
  REQUIRE(qttt_evaluate(r, r, QTTT_RULES_V1, 60, 5, &ev) == QTTT_OK);
  std::vector<int> ox(60), oo(60);
  REQUIRE(qttt_pit(r, r, QTTT_RULES_V1, 60, 5, &px, ox.data()) == QTTT_OK);
  REQUIRE(qttt_pit(r, r, QTTT_RULES_V1, 60, 5, &po, oo.data()) == QTTT_OK);
  CHECK(ox == oo);
  CHECK(ev.games == 60);
  CHECK(ev.x_wins + ev.o_wins + ev.draws == 60);
  CHECK(ev.x_wins == px.x_wins);  // same games, only the credited side differs
  CHECK(qttt_pit(r, r, QTTT_RULES_V1, 0, 5, &px, nullptr) == QTTT_ERR_INVALID_ARGUMENT);

  qttt_agent* missing = nullptr;
  CHECK(qttt_agent_load("/nonexistent/x.ckpt", &missing) == QTTT_ERR_IO);
  qttt_agent_free(r);
}

TEST_CASE("C API: config validation reports lines") {
  char* norm = nullptr;
  REQUIRE(qttt_config_validate("{\"obs_mode\": \"m\"}", &norm) == QTTT_OK);
  const json cfg = json::parse(take(norm));
  CHECK(cfg["obs_mode"] == "m");
  CHECK(cfg["ppo"]["gamma"] == 0.99);
  CHECK(qttt_config_validate("{\n\"obs_mode\": \"m\",\n\"whatever\": 1\n}", nullptr) == QTTT_ERR_CONFIG);
  CHECK(std::string(qttt_last_error()).rfind("config line 3:", 0) == 0);
}
