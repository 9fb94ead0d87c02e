#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qttt/engine.hpp"
#include "qttt/rng.hpp"

namespace qttt {

enum class RuleVersion : std::uint8_t { V1 = 1, V3 = 3 };

std::string to_string(RuleVersion version);
/// Accepts "v1"/"V1"/"1" and "v3"/"V3"/"3".
RuleVersion parse_rule_version(const std::string& text);

enum class CellStatusKind : std::uint8_t { Free, Touched, Occupied };

struct CellStatus {
  CellStatusKind kind = CellStatusKind::Free;
  CellMark mark = CellMark::Empty;  // meaningful only when Occupied

  static CellStatus free() { return {}; }
  static CellStatus touched() { return {CellStatusKind::Touched, CellMark::Empty}; }
  static CellStatus occupied(CellMark m) { return {CellStatusKind::Occupied, m}; }

  friend bool operator==(const CellStatus&, const CellStatus&) = default;
};

using Board = std::array<CellStatus, kCellCount>;

/// Classical{cell} has b == 0. Split{a, b} keeps a < b.
struct Move {
  enum class Kind : std::uint8_t { Classical, Split };
  Kind kind = Kind::Classical;
  int a = 1;
  int b = 0;

  static Move classical(int cell);
  /// Canonicalizes the pair so that a < b.
  static Move split(int a, int b);

  bool is_split() const { return kind == Kind::Split; }
  friend bool operator==(const Move&, const Move&) = default;
};

using ActionIndex = int;
inline constexpr int kActionCount = 45;
using ActionMask = std::array<bool, kActionCount>;

/// 0..8 classical on cell index+1, 9..44 the pairs (a, b), a < b, in
/// lexicographic order.
ActionIndex encode_action(const Move& move);
Move decode_action(ActionIndex index);

enum class GameResult : std::uint8_t { Ongoing, XWins, OWins, Draw };

std::string to_string(GameResult result);

struct LoggedMove {
  CellMark mark = CellMark::X;
  Move move;
  friend bool operator==(const LoggedMove&, const LoggedMove&) = default;
};

struct CollapseEvent {
  int ply = 0;  // move_count at which the collapse happened
  CollapseOutcome outcome{};
  bool forced = false;
  friend bool operator==(const CollapseEvent&, const CollapseEvent&) = default;
};

inline constexpr int kDefaultEpisodeCap = 50;

struct GameState {
  RuleVersion version = RuleVersion::V1;
  std::uint64_t seed = 0;
  int episode_cap = kDefaultEpisodeCap;
  StateVector engine;
  Board status{};
  CellMark turn = CellMark::X;
  std::vector<LoggedMove> move_log;
  std::vector<CollapseEvent> collapse_log;
  int move_count = 0;
  GameResult result = GameResult::Ongoing;
  RngStream rng;

  bool done() const { return result != GameResult::Ongoing; }
  friend bool operator==(const GameState&, const GameState&) = default;
};

class IllegalMoveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GameOverError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

GameState reset(RuleVersion version, std::uint64_t seed, int episode_cap = kDefaultEpisodeCap);

/// Throws GameOverError on a terminal state.
ActionMask legal_mask(const GameState& gs);
int legal_count(const ActionMask& mask);

struct StepResult {
  double reward = 0.0;  // from the mover's perspective
  bool done = false;
};

/// Applies the move for the side to play. On IllegalMoveError or
/// GameOverError the state is left untouched.
StepResult step(GameState& gs, ActionIndex action);

bool is_saturated(const GameState& gs);

/// Samples and projects the board, freezes marked cells, frees the rest and
/// evaluates the result.
void do_collapse(GameState& gs, bool forced = false);

/// More completed lines wins; equal non-zero counts draw; no lines is
/// Ongoing while a Free cell remains, a Draw otherwise.
GameResult evaluate_result(const Board& board);

}  // namespace qttt
