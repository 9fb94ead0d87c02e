#include "qttt/agent.hpp"

#include <stdexcept>

namespace qttt {

Agent Agent::uniform_random() { return Agent{}; }

Agent Agent::from_policy(PolicyParams params, EncoderConfig encoder, ActionSelection selection) {
  encoder.validate();
  if (static_cast<std::size_t>(params.input_dim) != observation_size(encoder.mode)) {
    throw std::invalid_argument("network input " + std::to_string(params.input_dim) + " does not match mode " +
                                to_string(encoder.mode));
  }
  Agent agent;
  agent.params_ = std::make_shared<const PolicyParams>(std::move(params));
  agent.encoder_ = encoder;
  agent.selection_ = selection;
  return agent;
}

ActionIndex Agent::act(const GameState& gs, RngStream& rng) const {
  const ActionMask mask = legal_mask(gs);
  if (is_random()) {
    std::size_t pick = rng.below(static_cast<std::size_t>(legal_count(mask)));
    for (int k = 0; k < kActionCount; ++k) {
      if (mask[k] && pick-- == 0) return k;
    }
  }
  const std::vector<double> obs = encode(gs, encoder_, rng);
  const PolicyOutput out = forward(*params_, obs, mask);
  if (selection_ == ActionSelection::Sample) {
    const double u = rng.uniform();
    double running = 0.0;
    ActionIndex last = -1;
    for (int k = 0; k < kActionCount; ++k) {
      if (out.probs[k] <= 0.0) continue;
      running += out.probs[k];
      last = k;
      if (u < running) return k;
    }
    return last;
  }
  double best = -1.0;
  std::vector<ActionIndex> ties;
  for (int k = 0; k < kActionCount; ++k) {
    if (!mask[k]) continue;
    if (out.probs[k] > best) {
      best = out.probs[k];
      ties.assign(1, k);
    } else if (out.probs[k] == best) {
      ties.push_back(k);
    }
  }
  return ties.size() == 1 ? ties.front() : ties[rng.below(ties.size())];
}

std::uint64_t series_game_seed(std::uint64_t seed, int game) {
  return derive_seed(seed, static_cast<std::uint64_t>(game), 0);
}

std::uint64_t series_player_seed(std::uint64_t seed, int game, CellMark side) {
  return derive_seed(seed, static_cast<std::uint64_t>(game), side == CellMark::X ? 1 : 2);
}

GameResult play_game(const Agent& x_player, const Agent& o_player, RuleVersion version, std::uint64_t seed,
                     int game, int episode_cap) {
  GameState gs = reset(version, series_game_seed(seed, game), episode_cap);
  RngStream x_rng(series_player_seed(seed, game, CellMark::X));
  RngStream o_rng(series_player_seed(seed, game, CellMark::O));
  while (!gs.done()) {
    const bool x_to_move = gs.turn == CellMark::X;
    const ActionIndex action = x_to_move ? x_player.act(gs, x_rng) : o_player.act(gs, o_rng);
    step(gs, action);
  }
  return gs.result;
}

namespace {

void tally(EvalReport& report, GameResult result, CellMark agent_side) {
  report.outcomes.push_back(result);
  ++report.games;
  if (result == GameResult::XWins) ++report.x_wins;
  if (result == GameResult::OWins) ++report.o_wins;
  if (result == GameResult::Draw) ++report.draws;
  const GameResult win = agent_side == CellMark::X ? GameResult::XWins : GameResult::OWins;
  const GameResult loss = agent_side == CellMark::X ? GameResult::OWins : GameResult::XWins;
  if (result == win) ++report.agent_wins;
  if (result == loss) ++report.agent_losses;
}

void finish(EvalReport& report) {
  report.avg_reward = report.games > 0 ? static_cast<double>(report.agent_wins - report.agent_losses) / report.games : 0.0;
}

}  // namespace

EvalReport pit(const Agent& x_player, const Agent& o_player, RuleVersion version, int games, std::uint64_t seed,
               int episode_cap) {
  if (games < 1) throw std::invalid_argument("games must be >= 1");
  EvalReport report;
  for (int g = 0; g < games; ++g) {
    tally(report, play_game(x_player, o_player, version, seed, g, episode_cap), CellMark::X);
  }
  finish(report);
  return report;
}

EvalReport evaluate(const Agent& agent, const Agent& opponent, RuleVersion version, int games, std::uint64_t seed,
                    int episode_cap) {
  if (games < 1) throw std::invalid_argument("games must be >= 1");
  EvalReport report;
  for (int g = 0; g < games; ++g) {
    if (g % 2 == 0) {
      tally(report, play_game(agent, opponent, version, seed, g, episode_cap), CellMark::X);
    } else {
      tally(report, play_game(opponent, agent, version, seed, g, episode_cap), CellMark::O);
    }
  }
  finish(report);
  return report;
}

}  // namespace qttt
