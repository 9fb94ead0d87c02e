#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qttt_cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Environment variable naming the default parent directory for run output.
inline constexpr const char* kOutputDirEnv = "QTTT_OUTPUT_DIR";

struct TrainOptions {
  std::string config_path;  // optional JSON run config
  std::optional<std::string> version;
  std::optional<std::string> obs;
  std::optional<std::string> out_dir;
  std::optional<long> steps;
  std::optional<long> eval_interval;
  std::optional<int> eval_games;
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  bool dry_run = false;
};

/// Writes config.json, manifest.json, metrics.csv and checkpoints into the
/// output directory. Config problems exit with kExitUsage before anything
/// is written.
int cmd_train(const TrainOptions& opts, std::ostream& out, std::ostream& err);

struct EvalOptions {
  std::string checkpoint;
  std::string opponent = "random";
  std::optional<std::string> version;  // defaults to the checkpoint's rules
  int games = 100;
  std::uint64_t seed = 0;
};

int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err);

struct Entrant {
  std::string name;
  std::string checkpoint;           // path or "random"
  std::optional<std::string> mode;  // declared observation mode
};

struct TournamentSpec {
  std::string version = "v1";
  std::vector<Entrant> entrants;
  int games = 100;
  std::uint64_t seed = 0;
};

/// "[name=]path[@mode]"; the name defaults to the path.
Entrant parse_entrant(const std::string& arg);

/// {"rule_version", "games", "seed", "role_scheme": "both_orders",
///  "entrants": [{"name", "checkpoint", "obs_mode"?}, ...]}
TournamentSpec parse_tournament_spec(const std::string& text);

struct PitOptions {
  TournamentSpec spec;
  std::string out_dir;  // empty: print only
};

/// Round robin over every ordered pair of distinct entrants, first entrant
/// of the pair playing X. Writes pit.csv (one row per pairing: X wins, O
/// wins, draws), standings.csv and pit.json.
int cmd_pit(const PitOptions& opts, std::ostream& out, std::ostream& err);

struct PlayOptions {
  std::string checkpoint = "random";
  std::string version = "v1";
  std::string human = "x";
  std::uint64_t seed = 0;
  std::string record_out;
};

/// Terminal game. Input: one cell ("5") for a classical move, two cells
/// ("1 2") for a split, "quit" to leave. EOF ends the session cleanly.
int cmd_play(const PlayOptions& opts, std::istream& in, std::ostream& out);

struct ReplayOptions {
  std::string record_path;
  std::string dump = "state";  // state | statevector | record | observation
  std::optional<int> ply;      // stop after this many moves
  std::string mode = "mh";
  int samples = 100;
  bool exact = false;
  std::uint64_t seed = 0;
};

int cmd_replay(const ReplayOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace qttt_cli
