#include "commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "handles.hpp"

namespace qttt_cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// Returns the normalized config, or the library's error message.
std::optional<json> validate_config(const std::string& text, std::string& error) {
  char* normalized = nullptr;
  if (qttt_config_validate(text.c_str(), &normalized) != QTTT_OK) {
    error = qttt_last_error();
    return std::nullopt;
  }
  return json::parse(take_string(normalized));
}

void metrics_to_stream(const char* row, void* user) { *static_cast<std::ostream*>(user) << row << std::endl; }

}  // namespace

int cmd_train(const TrainOptions& opts, std::ostream& out, std::ostream& err) {
  std::string text = "{}";
  if (!opts.config_path.empty()) {
    try {
      text = read_file(opts.config_path);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
    }
  }
  std::string error;
  auto cfg = validate_config(text, error);
  if (!cfg) {
    err << "error: " << (opts.config_path.empty() ? "<defaults>" : opts.config_path) << ": " << error << '\n';
    return kExitUsage;
  }

  if (opts.version) (*cfg)["rule_version"] = *opts.version;
  if (opts.obs) (*cfg)["obs_mode"] = *opts.obs;
  if (opts.seed) (*cfg)["seed"] = *opts.seed;
  if (opts.steps) (*cfg)["ppo"]["total_steps"] = *opts.steps;
  if (opts.eval_interval) (*cfg)["ppo"]["eval_interval"] = *opts.eval_interval;
  if (opts.eval_games) (*cfg)["ppo"]["eval_games"] = *opts.eval_games;
  if (opts.samples) (*cfg)["encoder"]["n_samples"] = *opts.samples;

  std::string out_dir = opts.out_dir.value_or(cfg->value("output_dir", ""));
  if (out_dir.empty()) {
    const std::string name = cfg->at("rule_version").get<std::string>() + "-" +
                             cfg->at("obs_mode").get<std::string>() + "-seed" +
                             std::to_string(cfg->at("seed").get<std::uint64_t>());
    const char* base = std::getenv(kOutputDirEnv);
    out_dir = (fs::path(base && *base ? base : "runs") / name).string();
  }
  (*cfg)["output_dir"] = out_dir;

  cfg = validate_config(cfg->dump(2), error);
  if (!cfg) {
    // Line numbers refer to the merged document, not to anything the user wrote.
    if (const auto colon = error.find(": "); error.rfind("config line", 0) == 0 && colon != std::string::npos) {
      error = error.substr(colon + 2);
    }
    err << "error: invalid option: " << error << '\n';
    return kExitUsage;
  }
  if (opts.dry_run) {
    out << cfg->dump(2) << '\n';
    return kExitOk;
  }

  try {
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "config.json", cfg->dump(2) + "\n");
    const json manifest = {
        {"tool", "qttt train"},
        {"code_version", qttt_version()},
        {"seed", cfg->at("seed")},
        {"config", *cfg},
    };
    write_file(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
    out << "training into " << out_dir << '\n';
    check(qttt_train(cfg->dump().c_str(), out_dir.c_str(), metrics_to_stream, &out));
    out << "done: " << (fs::path(out_dir) / "best.ckpt").string() << '\n';
  } catch (const std::exception& e) {
    err << "error: training failed: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const AgentPtr agent = load_agent(opts.checkpoint);
    const AgentPtr opponent = load_agent(opts.opponent);
    const json info = agent_info(agent.get());
    const std::string version = opts.version.value_or(info.value("rule_version", "v1"));
    qttt_report report{};
    check(qttt_evaluate(agent.get(), opponent.get(), parse_rules(version), opts.games, opts.seed, &report));
    json doc = report_json(report);
    doc["agent"] = opts.checkpoint;
    doc["opponent"] = opts.opponent;
    doc["rule_version"] = version;
    doc["seed"] = opts.seed;
    out << doc.dump(2) << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

Entrant parse_entrant(const std::string& arg) {
  Entrant e;
  std::string rest = arg;
  if (const auto eq = rest.find('='); eq != std::string::npos) {
    e.name = rest.substr(0, eq);
    rest = rest.substr(eq + 1);
  }
  if (const auto at = rest.rfind('@'); at != std::string::npos) {
    e.mode = rest.substr(at + 1);
    rest = rest.substr(0, at);
  }
  if (rest.empty()) throw std::invalid_argument("entrant '" + arg + "' names no checkpoint");
  e.checkpoint = rest;
  if (e.name.empty()) e.name = rest;
  return e;
}

TournamentSpec parse_tournament_spec(const std::string& text) {
  const json doc = json::parse(text);
  TournamentSpec spec;
  spec.version = doc.value("rule_version", spec.version);
  spec.games = doc.value("games", spec.games);
  spec.seed = doc.value("seed", spec.seed);
  if (doc.value("role_scheme", std::string("both_orders")) != "both_orders") {
    throw std::invalid_argument("only the both_orders role scheme is supported");
  }
  for (const auto& item : doc.at("entrants")) {
    Entrant e;
    e.checkpoint = item.at("checkpoint").get<std::string>();
    e.name = item.value("name", e.checkpoint);
    if (item.contains("obs_mode")) e.mode = item.at("obs_mode").get<std::string>();
    spec.entrants.push_back(std::move(e));
  }
  return spec;
}

int cmd_pit(const PitOptions& opts, std::ostream& out, std::ostream& err) {
  const TournamentSpec& spec = opts.spec;
  if (spec.entrants.size() < 2) {
    err << "error: a tournament needs at least two entrants\n";
    return kExitUsage;
  }
  if (spec.games < 1) {
    err << "error: games per pairing must be >= 1\n";
    return kExitUsage;
  }

  int rules = 0;
  std::vector<AgentPtr> agents;
  try {
    rules = parse_rules(spec.version);
    for (const auto& e : spec.entrants) {
      AgentPtr agent = load_agent(e.checkpoint);
      const json info = agent_info(agent.get());
      if (info["kind"] == "policy") {
        const std::string mode = info["obs_mode"];
        if (e.mode && *e.mode != mode) {
          err << "error: entrant '" << e.name << "' declares obs mode '" << *e.mode << "' but checkpoint '"
              << e.checkpoint << "' was trained with obs mode '" << mode << "'\n";
          return kExitUsage;
        }
        const std::string trained = info["rule_version"];
        if (trained != spec.version) {
          err << "error: checkpoint '" << e.checkpoint << "' was trained on rules " << trained
              << " but the tournament uses rules " << spec.version << '\n';
          return kExitUsage;
        }
      }
      agents.push_back(std::move(agent));
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  json pairings = json::array();
  std::map<std::string, std::pair<double, int>> standings;  // name -> (score, games)
  std::ostringstream csv;
  csv << "x_agent,o_agent,games,x_wins,o_wins,draws\n";
  try {
    for (std::size_t i = 0; i < agents.size(); ++i) {
      for (std::size_t j = 0; j < agents.size(); ++j) {
        if (i == j) continue;
        qttt_report r{};
        std::vector<int> outcomes(static_cast<std::size_t>(spec.games));
        check(qttt_pit(agents[i].get(), agents[j].get(), rules, spec.games, spec.seed, &r, outcomes.data()));
        const std::string& xn = spec.entrants[i].name;
        const std::string& on = spec.entrants[j].name;
        csv << xn << ',' << on << ',' << r.games << ',' << r.x_wins << ',' << r.o_wins << ',' << r.draws << '\n';
        json row = report_json(r);
        row["x_agent"] = xn;
        row["o_agent"] = on;
        json results = json::array();
        for (int o : outcomes) results.push_back(result_name(o));
        row["outcomes"] = std::move(results);
        pairings.push_back(std::move(row));
        standings[xn].first += r.x_wins + 0.5 * r.draws;
        standings[xn].second += r.games;
        standings[on].first += r.o_wins + 0.5 * r.draws;
        standings[on].second += r.games;
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  json table = json::array();
  std::ostringstream standings_csv;
  standings_csv << "agent,games,score\n";
  for (const auto& e : spec.entrants) {
    const auto& [score, games] = standings[e.name];
    table.push_back({{"agent", e.name}, {"games", games}, {"score", score}});
    standings_csv << e.name << ',' << games << ',' << score << '\n';
  }
  json entrants = json::array();
  for (const auto& e : spec.entrants) {
    entrants.push_back({{"name", e.name}, {"checkpoint", e.checkpoint}});
  }
  const json doc = {
      {"rule_version", spec.version}, {"games_per_pairing", spec.games}, {"seed", spec.seed},
      {"role_scheme", "both_orders"}, {"entrants", entrants},           {"pairings", pairings},
      {"standings", table},
  };

  if (!opts.out_dir.empty()) {
    try {
      fs::create_directories(opts.out_dir);
      write_file(fs::path(opts.out_dir) / "pit.csv", csv.str());
      write_file(fs::path(opts.out_dir) / "standings.csv", standings_csv.str());
      write_file(fs::path(opts.out_dir) / "pit.json", doc.dump(2) + "\n");
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitFailure;
    }
  }
  out << csv.str() << '\n' << standings_csv.str();
  return kExitOk;
}

namespace {

void render_board(const json& state, std::ostream& out) {
  const auto& status = state["board_status"];
  const auto& marg = state["marginals"];
  out << '\n';
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      const int cell = 3 * r + c;
      const std::string s = status[cell];
      char glyph = '.';
      if (s == "x") glyph = 'X';
      if (s == "o") glyph = 'O';
      if (s == "touched") glyph = '?';
      out << ' ' << glyph << (c < 2 ? " |" : "\n");
    }
    if (r < 2) out << "---+---+---\n";
  }
  out << "\n cell  status     P(_)  P(X)  P(O)\n";
  out << std::fixed << std::setprecision(2);
  for (int cell = 0; cell < 9; ++cell) {
    out << "  " << cell + 1 << "    " << std::left << std::setw(9) << status[cell].get<std::string>() << std::right;
    for (int k = 0; k < 3; ++k) out << "  " << marg[cell][k].get<double>();
    out << '\n';
  }
  out.unsetf(std::ios::fixed);
}

// Parses "5", "1 2", "1,2" or "1-2" into an action index; -1 on bad input.
int parse_move(const std::string& line) {
  std::string cleaned = line;
  for (char& ch : cleaned) {
    if (ch == ',' || ch == '-') ch = ' ';
  }
  std::istringstream in(cleaned);
  std::vector<int> cells;
  std::string token;
  while (in >> token) {
    if (token.size() != 1 || token[0] < '1' || token[0] > '9') return -1;
    cells.push_back(token[0] - '0');
  }
  int action = -1;
  if (cells.size() == 1) qttt_action_encode(cells[0], 0, &action);
  if (cells.size() == 2 && cells[0] != cells[1]) qttt_action_encode(cells[0], cells[1], &action);
  return action;
}

}  // namespace

int cmd_play(const PlayOptions& opts, std::istream& in, std::ostream& out) {
  int rules = 0;
  int human = 0;
  AgentPtr agent;
  try {
    rules = parse_rules(opts.version);
    if (opts.human == "x" || opts.human == "X") human = QTTT_MARK_X;
    if (opts.human == "o" || opts.human == "O") human = QTTT_MARK_O;
    if (human == 0) throw std::invalid_argument("--human must be x or o");
    agent = load_agent(opts.checkpoint);
  } catch (const std::exception& e) {
    out << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  Game game = new_game(rules, opts.seed);
  Rng agent_rng = new_rng(opts.seed ^ 0x5bd1e995ULL);
  out << "Quantum tic-tac-toe, rules " << opts.version << ". You play " << (human == QTTT_MARK_X ? "X" : "O")
      << ".\nEnter one cell (1-9) for a classical move, two cells (e.g. \"1 2\") for a split, \"quit\" to leave.\n";

  std::size_t seen_collapses = 0;
  int result = QTTT_RESULT_ONGOING;
  while (result == QTTT_RESULT_ONGOING) {
    const json state = state_json(game.get());
    const auto& collapses = state["collapse_events"];
    for (; seen_collapses < collapses.size(); ++seen_collapses) {
      out << "\n*** collapse at ply " << collapses[seen_collapses]["ply"] << ": "
          << collapses[seen_collapses]["outcome"].get<std::string>() << " ***\n";
    }
    int turn = 0;
    check(qttt_game_turn(game.get(), &turn));
    if (turn != human) {
      int action = 0;
      check(qttt_agent_act(agent.get(), game.get(), agent_rng.get(), &action));
      int a = 0, b = 0;
      check(qttt_action_decode(action, &a, &b));
      out << "agent plays " << (b == 0 ? std::to_string(a) : std::to_string(a) + " " + std::to_string(b)) << '\n';
      check(qttt_game_step(game.get(), action, nullptr, nullptr));
    } else {
      render_board(state, out);
      out << "your move> " << std::flush;
      std::string line;
      if (!std::getline(in, line)) {
        out << "\ninput closed; leaving the game\n";
        return kExitOk;
      }
      if (line == "quit" || line == "q") {
        out << "bye\n";
        return kExitOk;
      }
      const int action = parse_move(line);
      if (action < 0) {
        out << "could not read that move; try \"5\" or \"1 2\"\n";
        continue;
      }
      const qttt_status st = qttt_game_step(game.get(), action, nullptr, nullptr);
      if (st == QTTT_ERR_ILLEGAL_MOVE) {
        out << "illegal move: " << qttt_last_error() << '\n';
        continue;
      }
      check(st);
    }
    check(qttt_game_result(game.get(), &result));
  }

  const json state = state_json(game.get());
  const auto& collapses = state["collapse_events"];
  for (; seen_collapses < collapses.size(); ++seen_collapses) {
    out << "\n*** collapse at ply " << collapses[seen_collapses]["ply"] << ": "
        << collapses[seen_collapses]["outcome"].get<std::string>() << " ***\n";
  }
  render_board(state, out);
  out << "Result: " << result_name(result) << '\n';
  if (!opts.record_out.empty()) {
    write_file(opts.record_out, record_json(game.get()).dump(2) + "\n");
    out << "record written to " << opts.record_out << '\n';
  }
  return kExitOk;
}

int cmd_replay(const ReplayOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const std::string text = read_file(opts.record_path);
    Game game;
    if (opts.ply) {
      const json record = json::parse(text);
      game = new_game(parse_rules(record.at("rule_version").get<std::string>()), record.at("seed").get<std::uint64_t>());
      const auto& actions = record.at("actions");
      const auto limit = std::min<std::size_t>(actions.size(), static_cast<std::size_t>(std::max(0, *opts.ply)));
      for (std::size_t k = 0; k < limit; ++k) check(qttt_game_step(game.get(), actions[k].get<int>(), nullptr, nullptr));
    } else {
      qttt_game* g = nullptr;
      check(qttt_game_from_record(text.c_str(), &g));
      game.reset(g);
    }

    char* s = nullptr;
    if (opts.dump == "state") {
      check(qttt_game_state_json(game.get(), &s));
    } else if (opts.dump == "statevector") {
      check(qttt_game_statevector_json(game.get(), &s));
    } else if (opts.dump == "record") {
      check(qttt_game_record_json(game.get(), &s));
    } else if (opts.dump == "observation") {
      Rng rng = new_rng(opts.seed);
      check(qttt_game_observation_json(game.get(), opts.mode.c_str(), opts.samples, opts.exact ? 1 : 0, rng.get(),
                                       opts.record_path.c_str(), &s));
    } else {
      err << "error: unknown dump kind '" << opts.dump << "'\n";
      return kExitUsage;
    }
    out << take_string(s) << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace qttt_cli
