#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qttt/game.hpp"
#include "qttt/observation.hpp"

namespace qttt {

inline constexpr int kGameRecordVersion = 1;

class RecordError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// {"format": "qttt-game-record", "version", "rule_version", "seed",
///  "episode_cap", "actions": [...], "collapses": ["X_O______", ...],
///  "result"}. Enough to replay the game exactly.
nlohmann::json game_record(const GameState& gs);

/// Replays a record and checks that every logged collapse and the final
/// result reproduce. Throws RecordError on any mismatch.
GameState replay_record(const nlohmann::json& record);

/// Snapshot consumed by the REST service and UI.
nlohmann::json state_document(const GameState& gs);

/// {"mode", "length", "observation", "record", "ply"}.
nlohmann::json observation_dump(const GameState& gs, const EncoderConfig& cfg, RngStream& rng,
                                const std::string& record_ref);

std::string status_name(const CellStatus& status);
std::string mark_name(CellMark mark);

}  // namespace qttt
