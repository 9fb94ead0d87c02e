#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qttt/game.hpp"
#include "qttt/observation.hpp"
#include "qttt/policy.hpp"
#include "qttt/rng.hpp"

namespace qttt {

enum class ActionSelection : std::uint8_t { Greedy, Sample };

/// A move-selecting player: either a trained policy with its own encoder, or
/// the uniform-random-legal baseline. Immutable once built, so one instance
/// may serve several games concurrently as long as each call gets its own
/// RngStream.
class Agent {
 public:
  static Agent uniform_random();
  static Agent from_policy(PolicyParams params, EncoderConfig encoder,
                           ActionSelection selection = ActionSelection::Greedy);

  /// Greedy selection breaks exact ties uniformly with `rng`; the encoder's
  /// measurement sampling also draws from `rng`.
  ActionIndex act(const GameState& gs, RngStream& rng) const;

  bool is_random() const { return params_ == nullptr; }
  const PolicyParams* params() const { return params_.get(); }
  const EncoderConfig& encoder() const { return encoder_; }
  ActionSelection selection() const { return selection_; }
  void set_selection(ActionSelection selection) { selection_ = selection; }

 private:
  std::shared_ptr<const PolicyParams> params_;
  EncoderConfig encoder_;
  ActionSelection selection_ = ActionSelection::Greedy;
};

struct EvalReport {
  int games = 0;
  double avg_reward = 0.0;  // from the evaluated agent's (pit: X agent's) side
  int x_wins = 0;
  int o_wins = 0;
  int draws = 0;
  int agent_wins = 0;
  int agent_losses = 0;
  std::vector<GameResult> outcomes;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Seeds for game g of a series: the game's collapse stream, then the
/// streams handed to the X and O players.
std::uint64_t series_game_seed(std::uint64_t seed, int game);
std::uint64_t series_player_seed(std::uint64_t seed, int game, CellMark side);

GameResult play_game(const Agent& x_player, const Agent& o_player, RuleVersion version, std::uint64_t seed,
                     int game, int episode_cap = kDefaultEpisodeCap);

/// `x_player` plays X in every game.
EvalReport pit(const Agent& x_player, const Agent& o_player, RuleVersion version, int games, std::uint64_t seed,
               int episode_cap = kDefaultEpisodeCap);

/// The agent plays X in even-numbered games and O in odd ones. Game g is
/// the same game that pit() would play as its game g for that role order.
EvalReport evaluate(const Agent& agent, const Agent& opponent, RuleVersion version, int games, std::uint64_t seed,
                    int episode_cap = kDefaultEpisodeCap);

}  // namespace qttt
