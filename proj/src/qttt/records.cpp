#include "qttt/records.hpp"

namespace qttt {

std::string status_name(const CellStatus& status) {
  switch (status.kind) {
    case CellStatusKind::Free: return "free";
    case CellStatusKind::Touched: return "touched";
    case CellStatusKind::Occupied: return status.mark == CellMark::X ? "x" : "o";
  }
  return "?";
}

std::string mark_name(CellMark mark) {
  switch (mark) {
    case CellMark::X: return "x";
    case CellMark::O: return "o";
    case CellMark::Empty: return "empty";
  }
  return "?";
}

nlohmann::json game_record(const GameState& gs) {
  nlohmann::json actions = nlohmann::json::array();
  for (const auto& entry : gs.move_log) actions.push_back(encode_action(entry.move));
  nlohmann::json collapses = nlohmann::json::array();
  for (const auto& event : gs.collapse_log) collapses.push_back(outcome_string(event.outcome));
  return {
      {"format", "qttt-game-record"},
      {"version", kGameRecordVersion},
      {"rule_version", to_string(gs.version)},
      {"seed", gs.seed},
      {"episode_cap", gs.episode_cap},
      {"actions", std::move(actions)},
      {"collapses", std::move(collapses)},
      {"result", to_string(gs.result)},
  };
}

GameState replay_record(const nlohmann::json& record) {
  GameState gs;
  try {
    if (record.at("format").get<std::string>() != "qttt-game-record") throw RecordError("not a qttt-game-record");
    if (record.at("version").get<int>() != kGameRecordVersion) throw RecordError("unsupported game record version");
    gs = reset(parse_rule_version(record.at("rule_version").get<std::string>()),
               record.at("seed").get<std::uint64_t>(), record.value("episode_cap", kDefaultEpisodeCap));
    for (const auto& action : record.at("actions")) step(gs, action.get<int>());
  } catch (const RecordError&) {
    throw;
  } catch (const std::exception& e) {
    throw RecordError(std::string("cannot replay game record: ") + e.what());
  }

  const auto& collapses = record.at("collapses");
  if (collapses.size() != gs.collapse_log.size()) throw RecordError("replay produced a different number of collapses");
  for (std::size_t i = 0; i < collapses.size(); ++i) {
    if (collapses[i].get<std::string>() != outcome_string(gs.collapse_log[i].outcome)) {
      throw RecordError("collapse " + std::to_string(i) + " does not reproduce");
    }
  }
  if (record.at("result").get<std::string>() != to_string(gs.result)) throw RecordError("final result does not reproduce");
  return gs;
}

nlohmann::json state_document(const GameState& gs) {
  nlohmann::json board = nlohmann::json::array();
  for (const auto& s : gs.status) board.push_back(status_name(s));

  const Marginals marg = exact_marginals(gs.engine);
  nlohmann::json marginals = nlohmann::json::array();
  for (const auto& row : marg) marginals.push_back({row[0], row[1], row[2]});

  const MovesHistoryObs hist = history_of(gs);

  nlohmann::json legal = nlohmann::json::array();
  if (gs.done()) {
    for (int k = 0; k < kActionCount; ++k) legal.push_back(false);
  } else {
    for (bool b : legal_mask(gs)) legal.push_back(b);
  }

  nlohmann::json history = nlohmann::json::array();
  for (std::size_t i = 0; i < gs.move_log.size(); ++i) {
    const auto& entry = gs.move_log[i];
    nlohmann::json cells = entry.move.is_split() ? nlohmann::json{entry.move.a, entry.move.b} : nlohmann::json{entry.move.a};
    history.push_back({{"ply", i + 1},
                       {"mark", mark_name(entry.mark)},
                       {"action", encode_action(entry.move)},
                       {"kind", entry.move.is_split() ? "split" : "classical"},
                       {"cells", std::move(cells)}});
  }

  nlohmann::json collapses = nlohmann::json::array();
  for (const auto& event : gs.collapse_log) {
    collapses.push_back({{"ply", event.ply}, {"outcome", outcome_string(event.outcome)}, {"forced", event.forced}});
  }

  return {
      {"rule_version", to_string(gs.version)},
      {"turn", mark_name(gs.turn)},
      {"result", to_string(gs.result)},
      {"move_count", gs.move_count},
      {"board_status", std::move(board)},
      {"marginals", std::move(marginals)},
      {"mh_x", hist.x},
      {"mh_o", hist.o},
      {"legal_actions", std::move(legal)},
      {"history", std::move(history)},
      {"collapse_events", std::move(collapses)},
  };
}

nlohmann::json observation_dump(const GameState& gs, const EncoderConfig& cfg, RngStream& rng,
                                const std::string& record_ref) {
  const std::vector<double> obs = encode(gs, cfg, rng);
  return {
      {"mode", to_string(cfg.mode)},
      {"length", obs.size()},
      {"perspective", mark_name(gs.turn)},
      {"observation", obs},
      {"record", record_ref},
      {"ply", gs.move_count},
  };
}

}  // namespace qttt
