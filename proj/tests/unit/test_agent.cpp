#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qttt/agent.hpp"
#include "qttt/checkpoint.hpp"
#include "qttt/run_config.hpp"
#include "qttt/trainer.hpp"

using namespace qttt;
namespace fs = std::filesystem;

namespace {

Agent small_policy(ObsMode mode, std::uint64_t seed) {
  RngStream rng(seed);
  EncoderConfig enc;
  enc.mode = mode;
  return Agent::from_policy(PolicyParams::initialize(static_cast<int>(observation_size(mode)), {16}, rng), enc);
}

double x_reward(GameResult r) { return r == GameResult::XWins ? 1.0 : r == GameResult::OWins ? -1.0 : 0.0; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("agents only pick legal actions") {
  const Agent random = Agent::uniform_random();
  const Agent greedy = small_policy(ObsMode::MH, 1);
  RngStream rng(2);
  for (int g = 0; g < 30; ++g) {
    GameState gs = reset(g % 2 ? RuleVersion::V1 : RuleVersion::V3, static_cast<std::uint64_t>(g));
    while (!gs.done()) {
      const Agent& mover = gs.turn == CellMark::X ? random : greedy;
      const ActionIndex a = mover.act(gs, rng);
      REQUIRE(legal_mask(gs)[a]);
      step(gs, a);
    }
  }
  CHECK_THROWS(Agent::from_policy(small_policy(ObsMode::M, 1).params()[0], EncoderConfig{}));
}

TEST_CASE("report counts are consistent") {
  const Agent a = small_policy(ObsMode::M, 3);
  const Agent b = Agent::uniform_random();
  for (const EvalReport& r : {pit(a, b, RuleVersion::V1, 40, 5), evaluate(a, b, RuleVersion::V3, 41, 5)}) {
    CHECK(r.x_wins + r.o_wins + r.draws == r.games);
    CHECK(r.outcomes.size() == static_cast<std::size_t>(r.games));
    CHECK(r.avg_reward == doctest::Approx(double(r.agent_wins - r.agent_losses) / r.games));
    CHECK(r.avg_reward >= -1.0);
    CHECK(r.avg_reward <= 1.0);
  }
}

TEST_CASE("pit and evaluate are reproducible") {
  const Agent a = small_policy(ObsMode::MH, 4);
  CHECK(pit(a, a, RuleVersion::V1, 10, 9) == pit(a, a, RuleVersion::V1, 10, 9));
  const Agent r = Agent::uniform_random();
  CHECK(evaluate(a, r, RuleVersion::V3, 20, 9) == evaluate(a, r, RuleVersion::V3, 20, 9));
  CHECK(pit(r, r, RuleVersion::V1, 50, 1).outcomes != pit(r, r, RuleVersion::V1, 50, 2).outcomes);
}

TEST_CASE("evaluate decomposes into the two pit orders") {
  const Agent agent = small_policy(ObsMode::H, 5);
  const Agent opp = Agent::uniform_random();
  const int n = 200;
  const EvalReport ev = evaluate(agent, opp, RuleVersion::V1, n, 77);
  const EvalReport as_x = pit(agent, opp, RuleVersion::V1, n, 77);
  const EvalReport as_o = pit(opp, agent, RuleVersion::V1, n, 77);
  double total = 0.0;
  for (int g = 0; g < n; ++g) {
    const GameResult expect = g % 2 == 0 ? as_x.outcomes[g] : as_o.outcomes[g];
    REQUIRE(ev.outcomes[g] == expect);
    total += g % 2 == 0 ? x_reward(expect) : -x_reward(expect);
  }
  CHECK(ev.avg_reward == doctest::Approx(total / n).epsilon(1e-12));

  const Agent r = Agent::uniform_random();
  const EvalReport rr = evaluate(r, r, RuleVersion::V1, 1000, 3);
  const EvalReport px = pit(r, r, RuleVersion::V1, 1000, 3);
  double est = 0.0;
  for (int g = 0; g < 1000; ++g) est += (g % 2 == 0 ? 1.0 : -1.0) * x_reward(px.outcomes[g]);
  CHECK(std::abs(rr.avg_reward - est / 1000) <= 0.1);
}

TEST_CASE("run config parsing") {
  const RunConfig def = parse_run_config("{}");
  CHECK(def.version == RuleVersion::V1);
  CHECK(def.encoder.mode == ObsMode::MH);
  CHECK(def.ppo.total_steps == 500000);

  const RunConfig c = parse_run_config(R"({
  "rule_version": "v3",
  "obs_mode": "h",
  "seed": 4,
  "encoder": {"n_samples": 50},
  "ppo": {"hidden": [32, 32], "total_steps": 1000}
})");
  CHECK(c.version == RuleVersion::V3);
  CHECK(c.encoder.mode == ObsMode::H);
  CHECK(c.encoder.n_samples == 50);
  CHECK(c.ppo.seed == 4);
  CHECK(c.ppo.hidden == std::vector<int>{32, 32});
  CHECK(parse_run_config(c.to_json().dump()) == c);

  auto line_of = [](const std::string& text) {
    try {
      parse_run_config(text);
    } catch (const ConfigError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("{\n  \"seed\": 1,\n  \"bogus\": 2\n}") == 3);
  CHECK(line_of("{\n  \"ppo\": {\n    \"gamma\": 2.0\n  }\n}") == 3);
  CHECK(line_of("{\n  \"obs_mode\": \"z\"\n}") == 2);
  CHECK(line_of("{\n  \"seed\": 1,\n  oops\n}") == 3);
  CHECK(line_of("{\n  \"encoder\": {\"n_samples\": \"many\"}\n}") == 2);
  CHECK(line_of("[1, 2]") == 1);
}

TEST_CASE("short training run writes artifacts and is reproducible") {
  const fs::path root = fs::temp_directory_path() / "qttt_unit_train";
  fs::remove_all(root);
  RunConfig cfg = parse_run_config(R"({"obs_mode": "m", "seed": 3,
    "ppo": {"total_steps": 1500, "steps_per_update": 512, "eval_interval": 1000, "eval_games": 10,
            "hidden": [16], "minibatch_size": 128}})");
  std::vector<MetricsRow> rows;
  const TrainSummary a = train(cfg, (root / "a").string(), [&](const MetricsRow& r) { rows.push_back(r); });
  const TrainSummary b = train(cfg, (root / "b").string());
  CHECK(a.steps >= 1500);
  CHECK(a.eval_rows >= 1);
  CHECK(rows.size() == static_cast<std::size_t>(a.eval_rows));
  const std::string ma = slurp(root / "a" / "metrics.csv");
  CHECK(ma.rfind(MetricsRow::csv_header(), 0) == 0);
  CHECK(ma == slurp(root / "b" / "metrics.csv"));
  CHECK(fs::exists(root / "a" / "best.ckpt"));
  CHECK(fs::exists(root / "a" / "last.ckpt"));
  CHECK(slurp(root / "a" / "last.ckpt") == slurp(root / "b" / "last.ckpt"));

  const Checkpoint best = load_checkpoint((root / "a" / "best.ckpt").string());
  CHECK(best.meta.encoder.mode == ObsMode::M);
  CHECK(best.params.input_dim == 27);
  fs::remove_all(root);
}
