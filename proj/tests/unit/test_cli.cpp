#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"

using namespace qttt_cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qttt_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TrainOptions tiny_train(const fs::path& out, const std::string& obs = "mh") {
  TrainOptions t;
  t.version = "v1";
  t.obs = obs;
  t.steps = 2000;
  t.eval_interval = 1000;
  t.eval_games = 10;
  t.samples = 20;
  t.seed = 1;
  t.out_dir = out.string();
  return t;
}

// One trained checkpoint shared by the tests below.
const fs::path& trained_checkpoint() {
  static const fs::path path = [] {
    const fs::path dir = scratch("shared_train");
    std::ostringstream out, err;
    REQUIRE(cmd_train(tiny_train(dir / "run"), out, err) == kExitOk);
    return dir / "run" / "best.ckpt";
  }();
  return path;
}

}  // namespace

TEST_CASE("train smoke run") {
  const fs::path dir = scratch("train");
  std::ostringstream out, err;
  REQUIRE(cmd_train(tiny_train(dir / "a"), out, err) == kExitOk);
  const std::string metrics = slurp(dir / "a" / "metrics.csv");
  std::istringstream lines(metrics);
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header == "step,avg_reward_100,x_wins,o_wins,draws,policy_loss,value_loss,entropy");
  CHECK_FALSE(first.empty());

  const json manifest = json::parse(slurp(dir / "a" / "manifest.json"));
  CHECK(manifest.contains("code_version"));
  CHECK(manifest["seed"] == 1);
  CHECK(manifest["config"]["obs_mode"] == "mh");
  const json config = json::parse(slurp(dir / "a" / "config.json"));
  CHECK(config["ppo"]["total_steps"] == 2000);

  std::ostringstream out2, err2;
  REQUIRE(cmd_train(tiny_train(dir / "b"), out2, err2) == kExitOk);
  CHECK(slurp(dir / "b" / "metrics.csv") == metrics);
}

TEST_CASE("train rejects bad options before writing anything") {
  const fs::path dir = scratch("train_bad");
  std::ostringstream out, err;
  TrainOptions t = tiny_train(dir / "run", "xyz");
  CHECK(cmd_train(t, out, err) == kExitUsage);
  CHECK(err.str().find("xyz") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "run"));

  std::ofstream(dir / "cfg.json") << "{\n  \"rule_version\": \"v1\",\n  \"ppo\": {\n    \"clip\": -1\n  }\n}\n";
  TrainOptions from_file;
  from_file.config_path = (dir / "cfg.json").string();
  from_file.out_dir = (dir / "run2").string();
  std::ostringstream e2;
  CHECK(cmd_train(from_file, out, e2) == kExitUsage);
  CHECK(e2.str().find("line 4") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "run2"));
}

TEST_CASE("train output directory comes from the environment when unset") {
  const fs::path dir = scratch("train_env");
  setenv(kOutputDirEnv, dir.string().c_str(), 1);
  TrainOptions t = tiny_train(dir);
  t.out_dir.reset();
  t.dry_run = true;
  std::ostringstream out, err;
  REQUIRE(cmd_train(t, out, err) == kExitOk);
  const json resolved = json::parse(out.str());
  CHECK(resolved["output_dir"] == (dir / "v1-mh-seed1").string());
  unsetenv(kOutputDirEnv);
}

TEST_CASE("pit tables") {
  const std::string ckpt = trained_checkpoint().string();
  const fs::path dir = scratch("pit");
  PitOptions p;
  p.spec.games = 10;
  p.spec.seed = 4;
  p.spec.entrants = {parse_entrant("a=" + ckpt + "@mh"), parse_entrant("b=" + ckpt), parse_entrant("random")};
  p.out_dir = (dir / "one").string();
  std::ostringstream out, err;
  REQUIRE(cmd_pit(p, out, err) == kExitOk);
  p.out_dir = (dir / "two").string();
  std::ostringstream out2;
  REQUIRE(cmd_pit(p, out2, err) == kExitOk);
  CHECK(slurp(dir / "one" / "pit.csv") == slurp(dir / "two" / "pit.csv"));

  const json doc = json::parse(slurp(dir / "one" / "pit.json"));
  CHECK(doc["pairings"].size() == 6);
  for (const auto& row : doc["pairings"]) {
    CHECK(row["x_wins"].get<int>() + row["o_wins"].get<int>() + row["draws"].get<int>() == 10);
  }
  std::istringstream csv(slurp(dir / "one" / "pit.csv"));
  std::string line;
  int rows = -1;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 6);
}

TEST_CASE("pit rejects a mode mismatch naming both sides") {
  const std::string ckpt = trained_checkpoint().string();
  PitOptions p;
  p.spec.games = 2;
  p.spec.entrants = {parse_entrant("m_agent=" + ckpt + "@m"), parse_entrant("random")};
  std::ostringstream out, err;
  CHECK(cmd_pit(p, out, err) == kExitUsage);
  CHECK(err.str().find("'m'") != std::string::npos);
  CHECK(err.str().find("'mh'") != std::string::npos);
  CHECK(err.str().find(ckpt) != std::string::npos);

  PitOptions v3 = p;
  v3.spec.version = "v3";
  v3.spec.entrants = {parse_entrant(ckpt), parse_entrant("random")};
  std::ostringstream err3;
  CHECK(cmd_pit(v3, out, err3) == kExitUsage);
  CHECK(err3.str().find("v1") != std::string::npos);

  PitOptions lone;
  lone.spec.entrants = {parse_entrant("random")};
  CHECK(cmd_pit(lone, out, err) == kExitUsage);
}

TEST_CASE("pit against random matches evaluate") {
  const std::string ckpt = trained_checkpoint().string();
  EvalOptions e;
  e.checkpoint = ckpt;
  e.games = 40;
  e.seed = 8;
  std::ostringstream eo, ee;
  REQUIRE(cmd_eval(e, eo, ee) == kExitOk);
  const json ev = json::parse(eo.str());

  const fs::path dir = scratch("pit_eval");
  PitOptions p;
  p.spec.games = 40;
  p.spec.seed = 8;
  p.spec.entrants = {parse_entrant("agent=" + ckpt), parse_entrant("random")};
  p.out_dir = dir.string();
  std::ostringstream po, pe;
  REQUIRE(cmd_pit(p, po, pe) == kExitOk);
  const json doc = json::parse(slurp(dir / "pit.json"));
  const auto& as_x = doc["pairings"][0]["outcomes"];
  const auto& as_o = doc["pairings"][1]["outcomes"];
  double total = 0.0;
  for (int g = 0; g < 40; ++g) {
    const std::string r = g % 2 == 0 ? as_x[g] : as_o[g];
    const double x = r == "x_wins" ? 1.0 : r == "o_wins" ? -1.0 : 0.0;
    total += g % 2 == 0 ? x : -x;
  }
  CHECK(ev["avg_reward"].get<double>() == doctest::Approx(total / 40).epsilon(1e-12));
}

TEST_CASE("tournament spec parsing") {
  const TournamentSpec s = parse_tournament_spec(R"({"rule_version": "v3", "games": 7, "seed": 2,
      "role_scheme": "both_orders",
      "entrants": [{"name": "a", "checkpoint": "random"}, {"checkpoint": "x.ckpt", "obs_mode": "m"}]})");
  CHECK(s.version == "v3");
  CHECK(s.games == 7);
  CHECK(s.entrants.size() == 2);
  CHECK(s.entrants[1].name == "x.ckpt");
  CHECK(s.entrants[1].mode == "m");
  CHECK_THROWS(parse_tournament_spec(R"({"role_scheme": "fixed", "entrants": []})"));
  const Entrant e = parse_entrant("p.ckpt@h");
  CHECK(e.checkpoint == "p.ckpt");
  CHECK(e.mode == "h");
  CHECK_THROWS(parse_entrant("name="));
}

TEST_CASE("terminal play") {
  const fs::path dir = scratch("play");
  PlayOptions opts;
  opts.seed = 3;
  opts.record_out = (dir / "game.json").string();

  // Garbage, an illegal repeat, then every cell and pair in turn until the game ends.
  std::string script = "hello\n5\n5\n";
  for (int c = 1; c <= 9; ++c) script += std::to_string(c) + "\n";
  for (int a = 1; a <= 9; ++a) {
    for (int b = a + 1; b <= 9; ++b) script += std::to_string(a) + " " + std::to_string(b) + "\n";
  }
  for (int round = 0; round < 5; ++round) {
    for (int a = 1; a <= 9; ++a) script += std::to_string(a) + "\n";
  }
  std::istringstream in(script);
  std::ostringstream out;
  CHECK(cmd_play(opts, in, out) == kExitOk);
  const std::string text = out.str();
  CHECK(text.find("could not read that move") != std::string::npos);
  CHECK(text.find("illegal move") != std::string::npos);
  CHECK(text.find("Result: ") != std::string::npos);
  CHECK(fs::exists(dir / "game.json"));

  std::istringstream in2(script);
  std::ostringstream out2;
  opts.record_out.clear();
  CHECK(cmd_play(opts, in2, out2) == kExitOk);
  // identical agent replies for the same seed and input
  auto agent_lines = [](const std::string& s) {
    std::istringstream lines(s);
    std::string l, acc;
    while (std::getline(lines, l)) {
      if (l.find("agent plays") != std::string::npos) acc += l + "\n";
    }
    return acc;
  };
  CHECK(agent_lines(text) == agent_lines(out2.str()));

  std::istringstream eof("");
  std::ostringstream out3;
  CHECK(cmd_play(opts, eof, out3) == kExitOk);
  CHECK(out3.str().find("input closed") != std::string::npos);

  PlayOptions as_o = opts;
  as_o.human = "o";
  std::istringstream quit("quit\n");
  std::ostringstream out4;
  CHECK(cmd_play(as_o, quit, out4) == kExitOk);
  CHECK(out4.str().find("agent plays") != std::string::npos);

  PlayOptions bad = opts;
  bad.human = "z";
  std::istringstream none("");
  std::ostringstream out5;
  CHECK(cmd_play(bad, none, out5) == kExitUsage);
}

TEST_CASE("replay dumps re-parse") {
  const fs::path dir = scratch("replay");
  PlayOptions opts;
  opts.seed = 11;
  opts.record_out = (dir / "game.json").string();
  std::string script;
  for (int round = 0; round < 6; ++round) {
    for (int a = 1; a <= 9; ++a) script += std::to_string(a) + "\n";
  }
  std::istringstream in(script);
  std::ostringstream sink;
  REQUIRE(cmd_play(opts, in, sink) == kExitOk);

  for (const std::string kind : {"state", "statevector", "record", "observation"}) {
    ReplayOptions r;
    r.record_path = opts.record_out;
    r.dump = kind;
    std::ostringstream out, err;
    REQUIRE(cmd_replay(r, out, err) == kExitOk);
    CHECK_FALSE(json::parse(out.str()).is_null());
  }
  ReplayOptions rec;
  rec.record_path = opts.record_out;
  rec.dump = "record";
  std::ostringstream out, err;
  cmd_replay(rec, out, err);
  CHECK(json::parse(out.str()) == json::parse(slurp(opts.record_out)));

  ReplayOptions early;
  early.record_path = opts.record_out;
  early.ply = 1;
  std::ostringstream o1, e1;
  REQUIRE(cmd_replay(early, o1, e1) == kExitOk);
  CHECK(json::parse(o1.str())["move_count"] == 1);

  ReplayOptions missing;
  missing.record_path = (dir / "nope.json").string();
  std::ostringstream o2, e2;
  CHECK(cmd_replay(missing, o2, e2) == kExitFailure);
}
