#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "qttt/qttt.h"
#include "service.hpp"

using namespace qttt_cli;

namespace {

template <typename T>
void opt(CLI::App* app, const std::string& name, std::optional<T>& target, const std::string& help) {
  app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum tic-tac-toe: engine, self-play PPO training, evaluation and play"};
  app.set_version_flag("--version-info", std::string(qttt_version()));
  app.require_subcommand(1);

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a PPO agent by self-play");
  train_cmd->add_option("config", train.config_path, "JSON run config")->check(CLI::ExistingFile);
  opt(train_cmd, "--version", train.version, "Rule version: v1 or v3");
  opt(train_cmd, "--obs", train.obs, "Observation mode: m, h or mh");
  opt(train_cmd, "--out", train.out_dir, "Output directory (default: $QTTT_OUTPUT_DIR/<version>-<obs>-seed<seed>)");
  opt(train_cmd, "--steps", train.steps, "Total environment steps");
  opt(train_cmd, "--eval-interval", train.eval_interval, "Steps between evaluations");
  opt(train_cmd, "--eval-games", train.eval_games, "Games per evaluation against the random agent");
  opt(train_cmd, "--samples", train.samples, "Measurement samples per observation");
  opt(train_cmd, "--seed", train.seed, "Run seed");
  train_cmd->add_flag("--dry-run", train.dry_run, "Print the resolved config and exit");

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate an agent against an opponent, alternating sides");
  eval_cmd->add_option("checkpoint", eval.checkpoint, "Checkpoint path or \"random\"")->required();
  eval_cmd->add_option("--opponent", eval.opponent, "Opponent checkpoint or \"random\"")->capture_default_str();
  opt(eval_cmd, "--rules", eval.version, "Rule version (default: the checkpoint's)");
  eval_cmd->add_option("--games", eval.games, "Number of games")->capture_default_str()->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", eval.seed, "Series seed")->capture_default_str();

  std::string pit_spec_path;
  std::vector<std::string> pit_entrants;
  std::optional<std::string> pit_version;
  std::optional<int> pit_games;
  std::optional<std::uint64_t> pit_seed;
  std::string pit_out;
  auto* pit_cmd = app.add_subcommand("pit", "Round-robin tournament with both role orders");
  pit_cmd->add_option("--spec", pit_spec_path, "Tournament spec JSON")->check(CLI::ExistingFile);
  pit_cmd->add_option("entrants", pit_entrants, "Entrants as [name=]checkpoint[@mode]");
  opt(pit_cmd, "--rules", pit_version, "Rule version");
  opt(pit_cmd, "--games", pit_games, "Games per ordered pairing");
  opt(pit_cmd, "--seed", pit_seed, "Tournament seed");
  pit_cmd->add_option("--out", pit_out, "Directory for pit.csv, standings.csv and pit.json");

  PlayOptions play;
  auto* play_cmd = app.add_subcommand("play", "Play against an agent in the terminal");
  play_cmd->add_option("checkpoint", play.checkpoint, "Checkpoint path or \"random\"")->capture_default_str();
  play_cmd->add_option("--rules", play.version, "Rule version")->capture_default_str();
  play_cmd->add_option("--human", play.human, "Your mark: x or o")->capture_default_str();
  play_cmd->add_option("--seed", play.seed, "Game seed")->capture_default_str();
  play_cmd->add_option("--record", play.record_out, "Write the finished game record here");

  std::string serve_checkpoint = "random";
  std::string serve_host = "127.0.0.1";
  int serve_port = 8080;
  std::uint64_t serve_seed = 0;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the REST game API");
  serve_cmd->add_option("checkpoint", serve_checkpoint, "Default agent checkpoint or \"random\"")->capture_default_str();
  serve_cmd->add_option("--host", serve_host)->capture_default_str();
  serve_cmd->add_option("--port", serve_port)->capture_default_str()->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--seed", serve_seed, "Base seed for games created without one")->capture_default_str();

  ReplayOptions replay;
  auto* replay_cmd = app.add_subcommand("replay", "Replay a game record and dump a view of it");
  replay_cmd->add_option("record", replay.record_path, "Game record JSON")->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--dump", replay.dump, "state, statevector, record or observation")
      ->capture_default_str()
      ->check(CLI::IsMember({"state", "statevector", "record", "observation"}));
  opt(replay_cmd, "--ply", replay.ply, "Stop after this many moves");
  replay_cmd->add_option("--obs", replay.mode, "Observation mode for --dump observation")->capture_default_str();
  replay_cmd->add_option("--samples", replay.samples, "Measurement samples")->capture_default_str();
  replay_cmd->add_flag("--exact", replay.exact, "Use exact marginals instead of sampling");
  replay_cmd->add_option("--seed", replay.seed, "Sampling seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*train_cmd) return cmd_train(train, std::cout, std::cerr);
  if (*eval_cmd) return cmd_eval(eval, std::cout, std::cerr);
  if (*play_cmd) return cmd_play(play, std::cin, std::cout);
  if (*serve_cmd) return cmd_serve(serve_checkpoint, serve_host, serve_port, serve_seed, std::cout, std::cerr);
  if (*replay_cmd) return cmd_replay(replay, std::cout, std::cerr);
  if (*pit_cmd) {
    PitOptions p;
    try {
      if (!pit_spec_path.empty()) {
        std::ifstream in(pit_spec_path);
        std::stringstream ss;
        ss << in.rdbuf();
        p.spec = parse_tournament_spec(ss.str());
      }
      for (const auto& e : pit_entrants) p.spec.entrants.push_back(parse_entrant(e));
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitUsage;
    }
    if (pit_version) p.spec.version = *pit_version;
    if (pit_games) p.spec.games = *pit_games;
    if (pit_seed) p.spec.seed = *pit_seed;
    p.out_dir = pit_out;
    return cmd_pit(p, std::cout, std::cerr);
  }
  return kExitUsage;
}
