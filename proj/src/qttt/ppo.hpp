#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "qttt/game.hpp"
#include "qttt/observation.hpp"
#include "qttt/policy.hpp"
#include "qttt/rng.hpp"

namespace qttt {

struct PPOConfig {
  double gamma = 0.99;
  double lambda = 0.95;
  double clip = 0.2;
  double learning_rate = 3e-4;
  int epochs = 4;
  int minibatch_size = 256;
  long steps_per_update = 4096;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;  // <= 0 disables clipping
  long total_steps = 500000;
  long eval_interval = 20480;
  int eval_games = 100;
  std::vector<int> hidden = {128, 128};
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  friend bool operator==(const PPOConfig&, const PPOConfig&) = default;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StepRecord {
  std::vector<double> obs;
  ActionMask mask{};
  ActionIndex action = 0;
  double log_prob = 0.0;
  double value = 0.0;
  double reward = 0.0;
  bool done = false;
  CellMark mover = CellMark::X;
  int game = 0;
};

struct Trajectory {
  std::vector<StepRecord> steps;
  int games = 0;
};

/// Plays whole self-play games with one shared policy acting for both sides
/// until at least n_steps decisions are recorded. Each player's final step
/// carries the terminal reward from that player's perspective.
Trajectory collect_selfplay(RuleVersion version, const PolicyParams& params, const EncoderConfig& encoder,
                            long n_steps, RngStream& rng, int episode_cap = kDefaultEpisodeCap);

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Single-sequence GAE. dones[t] ends the episode after step t;
/// bootstrap_value stands in for V(s_T) when the last step is not terminal.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap_value, double gamma, double lambda);

/// GAE over a self-play batch, run separately on each player's steps of
/// each game.
GaeResult compute_batch_gae(const Trajectory& traj, double gamma, double lambda);

struct Minibatch {
  Eigen::MatrixXd obs;  // input_dim x B
  std::vector<ActionMask> masks;
  std::vector<ActionIndex> actions;
  std::vector<double> old_log_probs;
  std::vector<double> advantages;
  std::vector<double> returns;

  std::size_t size() const { return actions.size(); }
};

struct LossBreakdown {
  double total = 0.0;
  double policy = 0.0;   // -mean clipped surrogate
  double value = 0.0;    // mean squared value error
  double entropy = 0.0;  // mean policy entropy
  double clip_fraction = 0.0;
};

/// -surrogate + value_coef * value MSE - entropy_coef * entropy, averaged
/// over the minibatch. Writes the exact gradient into *grad when non-null.
LossBreakdown ppo_loss(const PolicyParams& params, const Minibatch& batch, const PPOConfig& cfg,
                       PolicyParams* grad);

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  int minibatches = 0;
};

/// Advantages are normalized to mean 0 / std 1 per update. Throws
/// NumericError if a loss or gradient turns non-finite; params are then
/// left at their last finite value.
UpdateStats ppo_update(PolicyParams& params, AdamOptimizer& optimizer, const Trajectory& traj, const GaeResult& gae,
                       const PPOConfig& cfg, RngStream& rng);

}  // namespace qttt
