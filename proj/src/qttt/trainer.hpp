#pragma once

#include <functional>
#include <string>

#include "qttt/agent.hpp"
#include "qttt/ppo.hpp"
#include "qttt/run_config.hpp"

namespace qttt {

struct MetricsRow {
  long step = 0;
  EvalReport eval;
  UpdateStats update;

  static std::string csv_header();
  std::string csv() const;
};

struct TrainSummary {
  long steps = 0;
  int updates = 0;
  int eval_rows = 0;
  double best_avg_reward = -2.0;
  std::string metrics_path;
  std::string best_checkpoint;
  std::string last_checkpoint;
};

using MetricsCallback = std::function<void(const MetricsRow&)>;

/// Self-play PPO training. Writes into out_dir:
///   metrics.csv                 one row per evaluation
///   checkpoints/step_<N>.ckpt   periodic snapshots
///   best.ckpt, last.ckpt
/// Every evaluation plays cfg.ppo.eval_games greedy games against the
/// uniform-random-legal agent. Throws NumericError if training diverges;
/// checkpoints written before that point are kept.
TrainSummary train(const RunConfig& cfg, const std::string& out_dir, const MetricsCallback& on_metrics = {});

}  // namespace qttt
