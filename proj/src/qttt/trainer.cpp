#include "qttt/trainer.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qttt/checkpoint.hpp"

namespace qttt {

std::string MetricsRow::csv_header() {
  return "step,avg_reward_100,x_wins,o_wins,draws,policy_loss,value_loss,entropy";
}

std::string MetricsRow::csv() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%ld,%.6f,%d,%d,%d,%.6f,%.6f,%.6f", step, eval.avg_reward, eval.x_wins, eval.o_wins,
                eval.draws, update.policy_loss, update.value_loss, update.entropy);
  return buf;
}

TrainSummary train(const RunConfig& cfg, const std::string& out_dir, const MetricsCallback& on_metrics) {
  cfg.encoder.validate();
  cfg.ppo.validate();
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "checkpoints");

  TrainSummary summary;
  summary.metrics_path = (fs::path(out_dir) / "metrics.csv").string();
  summary.best_checkpoint = (fs::path(out_dir) / "best.ckpt").string();
  summary.last_checkpoint = (fs::path(out_dir) / "last.ckpt").string();

  std::ofstream metrics(summary.metrics_path, std::ios::trunc);
  if (!metrics) throw std::runtime_error("cannot write " + summary.metrics_path);
  metrics << MetricsRow::csv_header() << '\n';

  const std::uint64_t seed = cfg.ppo.seed;
  RngStream init_rng(derive_seed(seed, 1));
  RngStream collect_rng(derive_seed(seed, 2));
  RngStream update_rng(derive_seed(seed, 3));

  PolicyParams params =
      PolicyParams::initialize(static_cast<int>(observation_size(cfg.encoder.mode)), cfg.ppo.hidden, init_rng);
  AdamOptimizer optimizer(params.parameter_count());
  const Agent random_agent = Agent::uniform_random();

  Checkpoint ckpt;
  ckpt.meta.rule_version = cfg.version;
  ckpt.meta.encoder = cfg.encoder;
  ckpt.meta.episode_cap = cfg.episode_cap;
  ckpt.meta.seed = seed;
  ckpt.meta.code_version = code_version();

  long next_eval = cfg.ppo.eval_interval;
  UpdateStats last_update;
  while (summary.steps < cfg.ppo.total_steps) {
    const long want = std::min(cfg.ppo.steps_per_update, cfg.ppo.total_steps - summary.steps);
    const Trajectory traj = collect_selfplay(cfg.version, params, cfg.encoder, want, collect_rng, cfg.episode_cap);
    const GaeResult gae = compute_batch_gae(traj, cfg.ppo.gamma, cfg.ppo.lambda);
    last_update = ppo_update(params, optimizer, traj, gae, cfg.ppo, update_rng);
    summary.steps += static_cast<long>(traj.steps.size());
    ++summary.updates;

    const bool finished = summary.steps >= cfg.ppo.total_steps;
    if (summary.steps < next_eval && !finished) continue;
    while (next_eval <= summary.steps) next_eval += cfg.ppo.eval_interval;

    const Agent agent = Agent::from_policy(params, cfg.encoder);
    MetricsRow row;
    row.step = summary.steps;
    row.update = last_update;
    row.eval = evaluate(agent, random_agent, cfg.version, cfg.ppo.eval_games,
                        derive_seed(seed, 4, static_cast<std::uint64_t>(summary.eval_rows)), cfg.episode_cap);
    metrics << row.csv() << '\n' << std::flush;
    ++summary.eval_rows;
    if (on_metrics) on_metrics(row);

    ckpt.params = params;
    ckpt.meta.training_step = summary.steps;
    ckpt.meta.eval_avg_reward = row.eval.avg_reward;
    char name[64];
    std::snprintf(name, sizeof(name), "step_%09ld.ckpt", summary.steps);
    save_checkpoint((fs::path(out_dir) / "checkpoints" / name).string(), ckpt);
    save_checkpoint(summary.last_checkpoint, ckpt);
    if (row.eval.avg_reward > summary.best_avg_reward) {
      summary.best_avg_reward = row.eval.avg_reward;
      save_checkpoint(summary.best_checkpoint, ckpt);
    }
  }
  return summary;
}

}  // namespace qttt
