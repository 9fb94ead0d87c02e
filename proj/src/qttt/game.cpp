#include "qttt/game.hpp"

#include <algorithm>

namespace qttt {

namespace {

struct PairTable {
  std::array<Move, kActionCount> moves{};
  std::array<std::array<int, kCellCount + 1>, kCellCount + 1> index{};

  PairTable() {
    for (int c = 1; c <= kCellCount; ++c) moves[c - 1] = Move{Move::Kind::Classical, c, 0};
    int k = kCellCount;
    for (int a = 1; a <= kCellCount; ++a) {
      for (int b = a + 1; b <= kCellCount; ++b) {
        moves[k] = Move{Move::Kind::Split, a, b};
        index[a][b] = k;
        ++k;
      }
    }
  }
};

const PairTable& pairs() {
  static const PairTable table;
  return table;
}

constexpr std::array<std::array<int, 3>, 8> kLines = {{
    {1, 2, 3}, {4, 5, 6}, {7, 8, 9},
    {1, 4, 7}, {2, 5, 8}, {3, 6, 9},
    {1, 5, 9}, {3, 5, 7},
}};

bool is_free(const CellStatus& s) { return s.kind == CellStatusKind::Free; }
bool is_occupied(const CellStatus& s) { return s.kind == CellStatusKind::Occupied; }

bool split_legal(RuleVersion version, const Board& board, int a, int b) {
  const auto& sa = board[a - 1];
  const auto& sb = board[b - 1];
  if (is_occupied(sa) || is_occupied(sb)) return false;
  if (version == RuleVersion::V1) return is_free(sa) || is_free(sb);
  return true;
}

}  // namespace

std::string to_string(RuleVersion version) { return version == RuleVersion::V1 ? "v1" : "v3"; }

RuleVersion parse_rule_version(const std::string& text) {
  if (text == "v1" || text == "V1" || text == "1") return RuleVersion::V1;
  if (text == "v3" || text == "V3" || text == "3") return RuleVersion::V3;
  throw std::invalid_argument("unknown rule version '" + text + "' (expected v1 or v3)");
}

std::string to_string(GameResult result) {
  switch (result) {
    case GameResult::Ongoing: return "ongoing";
    case GameResult::XWins: return "x_wins";
    case GameResult::OWins: return "o_wins";
    case GameResult::Draw: return "draw";
  }
  return "unknown";
}

Move Move::classical(int cell) {
  if (cell < 1 || cell > kCellCount) throw std::out_of_range("cell index outside 1..9");
  return Move{Kind::Classical, cell, 0};
}

Move Move::split(int a, int b) {
  if (a < 1 || a > kCellCount || b < 1 || b > kCellCount) throw std::out_of_range("cell index outside 1..9");
  if (a == b) throw std::invalid_argument("split needs two distinct cells");
  if (a > b) std::swap(a, b);
  return Move{Kind::Split, a, b};
}

ActionIndex encode_action(const Move& move) {
  if (move.kind == Move::Kind::Classical) {
    if (move.a < 1 || move.a > kCellCount) throw std::out_of_range("cell index outside 1..9");
    return move.a - 1;
  }
  const Move canonical = Move::split(move.a, move.b);
  return pairs().index[canonical.a][canonical.b];
}

Move decode_action(ActionIndex index) {
  if (index < 0 || index >= kActionCount) {
    throw std::out_of_range("action index " + std::to_string(index) + " outside 0..44");
  }
  return pairs().moves[static_cast<std::size_t>(index)];
}

GameState reset(RuleVersion version, std::uint64_t seed, int episode_cap) {
  if (episode_cap < 1) throw std::invalid_argument("episode cap must be positive");
  GameState gs;
  gs.version = version;
  gs.seed = seed;
  gs.episode_cap = episode_cap;
  gs.rng = RngStream(seed);
  return gs;
}

ActionMask legal_mask(const GameState& gs) {
  if (gs.done()) throw GameOverError("legal_mask called on a finished game");
  ActionMask mask{};
  for (int c = 1; c <= kCellCount; ++c) mask[c - 1] = is_free(gs.status[c - 1]);
  for (int k = kCellCount; k < kActionCount; ++k) {
    const Move& m = pairs().moves[k];
    mask[k] = split_legal(gs.version, gs.status, m.a, m.b);
  }
  return mask;
}

int legal_count(const ActionMask& mask) {
  return static_cast<int>(std::count(mask.begin(), mask.end(), true));
}

StepResult step(GameState& gs, ActionIndex action) {
  if (gs.done()) throw GameOverError("game is over; no further moves accepted");
  if (action < 0 || action >= kActionCount) {
    throw IllegalMoveError("action index " + std::to_string(action) + " outside 0..44");
  }
  if (!legal_mask(gs)[action]) {
    throw IllegalMoveError("action " + std::to_string(action) + " is illegal in the current position");
  }

  const CellMark mover = gs.turn;
  const Move move = decode_action(action);
  if (move.is_split()) {
    apply_split(gs.engine, move.a, move.b, mover);
    for (int c : {move.a, move.b}) {
      if (is_free(gs.status[c - 1])) gs.status[c - 1] = CellStatus::touched();
    }
  } else {
    apply_creation(gs.engine, move.a, mover);
    gs.status[move.a - 1] = CellStatus::touched();
  }
  gs.move_log.push_back({mover, move});
  ++gs.move_count;
  gs.turn = opponent(mover);

  if (is_saturated(gs)) {
    do_collapse(gs, false);
  } else if (gs.move_count >= gs.episode_cap) {
    do_collapse(gs, true);
  }

  StepResult out;
  out.done = gs.done();
  if (gs.result == GameResult::XWins) out.reward = mover == CellMark::X ? 1.0 : -1.0;
  if (gs.result == GameResult::OWins) out.reward = mover == CellMark::O ? 1.0 : -1.0;
  return out;
}

bool is_saturated(const GameState& gs) {
  return std::none_of(gs.status.begin(), gs.status.end(), is_free);
}

void do_collapse(GameState& gs, bool forced) {
  const CollapseOutcome outcome = sample_collapse(gs.engine, gs.rng);
  gs.engine = project_to_outcome(gs.engine, outcome);
  for (int c = 0; c < kCellCount; ++c) {
    gs.status[c] = outcome[c] == CellMark::Empty ? CellStatus::free() : CellStatus::occupied(outcome[c]);
  }
  gs.collapse_log.push_back({gs.move_count, outcome, forced});
  gs.result = evaluate_result(gs.status);
  if (gs.result == GameResult::Ongoing) {
    const bool any_free = std::any_of(gs.status.begin(), gs.status.end(), is_free);
    if (!any_free || forced) gs.result = GameResult::Draw;
  }
}

GameResult evaluate_result(const Board& board) {
  int x_lines = 0;
  int o_lines = 0;
  for (const auto& line : kLines) {
    const CellStatus& first = board[line[0] - 1];
    if (!is_occupied(first)) continue;
    if (board[line[1] - 1] == first && board[line[2] - 1] == first) {
      (first.mark == CellMark::X ? x_lines : o_lines) += 1;
    }
  }
  if (x_lines > o_lines) return GameResult::XWins;
  if (o_lines > x_lines) return GameResult::OWins;
  if (x_lines > 0) return GameResult::Draw;
  const bool any_free = std::any_of(board.begin(), board.end(), is_free);
  return any_free ? GameResult::Ongoing : GameResult::Draw;
}

}  // namespace qttt
