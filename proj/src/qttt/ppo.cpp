#include "qttt/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace qttt {

namespace {

ActionIndex sample_from(const std::array<double, kActionCount>& probs, RngStream& rng) {
  const double u = rng.uniform();
  double running = 0.0;
  ActionIndex last_legal = -1;
  for (int k = 0; k < kActionCount; ++k) {
    if (probs[k] <= 0.0) continue;
    running += probs[k];
    last_legal = k;
    if (u < running) return k;
  }
  return last_legal;
}

double grad_norm(const PolicyParams& grad) {
  double sq = 0.0;
  for (const auto& l : grad.trunk) sq += l.weight.squaredNorm() + l.bias.squaredNorm();
  sq += grad.policy_head.weight.squaredNorm() + grad.policy_head.bias.squaredNorm();
  sq += grad.value_head.weight.squaredNorm() + grad.value_head.bias.squaredNorm();
  return std::sqrt(sq);
}

void scale(PolicyParams& grad, double factor) {
  for (auto& l : grad.trunk) {
    l.weight *= factor;
    l.bias *= factor;
  }
  grad.policy_head.weight *= factor;
  grad.policy_head.bias *= factor;
  grad.value_head.weight *= factor;
  grad.value_head.bias *= factor;
}

}  // namespace

void PPOConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
  require(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0, 1]");
  require(clip > 0.0, "clip must be > 0");
  require(learning_rate > 0.0, "learning_rate must be > 0");
  require(epochs >= 1, "epochs must be >= 1");
  require(minibatch_size >= 1, "minibatch_size must be >= 1");
  require(steps_per_update >= 1, "steps_per_update must be >= 1");
  require(total_steps >= 1, "total_steps must be >= 1");
  require(eval_interval >= 1, "eval_interval must be >= 1");
  require(eval_games >= 1, "eval_games must be >= 1");
  require(entropy_coef >= 0.0, "entropy_coef must be >= 0");
  require(value_coef >= 0.0, "value_coef must be >= 0");
  require(!hidden.empty(), "hidden must list at least one layer");
  for (int w : hidden) require(w >= 1, "hidden layer widths must be >= 1");
}

Trajectory collect_selfplay(RuleVersion version, const PolicyParams& params, const EncoderConfig& encoder,
                            long n_steps, RngStream& rng, int episode_cap) {
  Trajectory traj;
  while (static_cast<long>(traj.steps.size()) < n_steps) {
    GameState gs = reset(version, rng.next_u64(), episode_cap);
    std::array<long, 2> last_step = {-1, -1};
    const int game = traj.games++;
    while (!gs.done()) {
      StepRecord rec;
      rec.obs = encode(gs, encoder, rng);
      rec.mask = legal_mask(gs);
      const PolicyOutput out = forward(params, rec.obs, rec.mask);
      rec.action = sample_from(out.probs, rng);
      rec.log_prob = std::log(out.probs[rec.action]);
      rec.value = out.value;
      rec.mover = gs.turn;
      rec.game = game;

      const StepResult result = step(gs, rec.action);
      rec.reward = result.reward;
      rec.done = result.done;
      const std::size_t side = rec.mover == CellMark::X ? 0 : 1;
      last_step[side] = static_cast<long>(traj.steps.size());
      traj.steps.push_back(std::move(rec));

      if (result.done) {
        const long other = last_step[1 - side];
        if (other >= 0) {
          traj.steps[other].reward = -result.reward;
          traj.steps[other].done = true;
        }
      }
    }
  }
  return traj;
}

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap_value, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) throw std::invalid_argument("GAE inputs must have equal length");
  GaeResult out{std::vector<double>(n), std::vector<double>(n)};
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double next_value = t + 1 < n ? values[t + 1] : bootstrap_value;
    const double nonterminal = dones[t] ? 0.0 : 1.0;
    const double delta = rewards[t] + gamma * next_value * nonterminal - values[t];
    running = delta + gamma * lambda * nonterminal * running;
    out.advantages[t] = running;
    out.returns[t] = running + values[t];
  }
  return out;
}

GaeResult compute_batch_gae(const Trajectory& traj, double gamma, double lambda) {
  const std::size_t n = traj.steps.size();
  GaeResult out{std::vector<double>(n), std::vector<double>(n)};
  std::map<std::pair<int, int>, std::vector<std::size_t>> slices;
  for (std::size_t i = 0; i < n; ++i) {
    slices[{traj.steps[i].game, static_cast<int>(traj.steps[i].mover)}].push_back(i);
  }
  for (const auto& [key, idx] : slices) {
    std::vector<double> r, v;
    std::vector<std::uint8_t> d;
    for (std::size_t i : idx) {
      r.push_back(traj.steps[i].reward);
      v.push_back(traj.steps[i].value);
      d.push_back(traj.steps[i].done ? 1 : 0);
    }
    // An unfinished slice bootstraps from its own last estimate.
    const double bootstrap = d.back() ? 0.0 : v.back();
    const GaeResult part = compute_gae(r, v, d, bootstrap, gamma, lambda);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      out.advantages[idx[k]] = part.advantages[k];
      out.returns[idx[k]] = part.returns[k];
    }
  }
  return out;
}

LossBreakdown ppo_loss(const PolicyParams& params, const Minibatch& batch, const PPOConfig& cfg,
                       PolicyParams* grad) {
  const std::size_t n = batch.size();
  if (n == 0) throw std::invalid_argument("empty minibatch");
  const BatchActivations acts = forward_batch(params, batch.obs);
  const double inv_n = 1.0 / static_cast<double>(n);

  Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(kActionCount, static_cast<Eigen::Index>(n));
  Eigen::RowVectorXd dvalues = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(n));
  LossBreakdown out;
  std::array<double, kActionCount> probs{};
  for (std::size_t i = 0; i < n; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    const ActionMask& mask = batch.masks[i];
    const double lse = masked_softmax(acts.logits.col(col).data(), mask, probs.data());
    const ActionIndex a = batch.actions[i];
    const double log_prob = acts.logits(a, col) - lse;
    const double ratio = std::exp(log_prob - batch.old_log_probs[i]);
    const double adv = batch.advantages[i];
    const double clipped = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);
    const double surr_raw = ratio * adv;
    const double surr_clip = clipped * adv;
    const bool raw_active = surr_raw <= surr_clip;
    out.policy -= std::min(surr_raw, surr_clip) * inv_n;
    if (clipped != ratio) out.clip_fraction += inv_n;

    double entropy = 0.0;
    for (int k = 0; k < kActionCount; ++k) {
      if (probs[k] > 0.0) entropy -= probs[k] * std::log(probs[k]);
    }
    out.entropy += entropy * inv_n;

    const double value = acts.values(col);
    const double err = value - batch.returns[i];
    out.value += err * err * inv_n;

    if (grad) {
      // d(-surrogate)/d(log pi(a)) for this sample, already scaled by 1/n.
      const double dlogp = raw_active ? -surr_raw * inv_n : 0.0;
      for (int k = 0; k < kActionCount; ++k) {
        if (!mask[k]) continue;
        const double onehot = k == a ? 1.0 : 0.0;
        double g = dlogp * (onehot - probs[k]);
        if (probs[k] > 0.0) {
          const double dentropy = -probs[k] * (std::log(probs[k]) + entropy);
          g -= cfg.entropy_coef * inv_n * dentropy;
        }
        dlogits(k, col) = g;
      }
      dvalues(col) = 2.0 * cfg.value_coef * err * inv_n;
    }
  }
  out.total = out.policy + cfg.value_coef * out.value - cfg.entropy_coef * out.entropy;
  if (grad) {
    *grad = PolicyParams::zeros_like(params);
    backward_batch(params, acts, dlogits, dvalues, *grad);
  }
  return out;
}

UpdateStats ppo_update(PolicyParams& params, AdamOptimizer& optimizer, const Trajectory& traj, const GaeResult& gae,
                       const PPOConfig& cfg, RngStream& rng) {
  const std::size_t n = traj.steps.size();
  if (n == 0) throw std::invalid_argument("ppo_update needs a non-empty batch");
  if (gae.advantages.size() != n) throw std::invalid_argument("advantage count does not match batch");

  const double mean = std::accumulate(gae.advantages.begin(), gae.advantages.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double a : gae.advantages) var += (a - mean) * (a - mean);
  const double stddev = std::sqrt(var / static_cast<double>(n));
  std::vector<double> advantages(n);
  for (std::size_t i = 0; i < n; ++i) advantages[i] = (gae.advantages[i] - mean) / (stddev + 1e-8);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t mb_size = static_cast<std::size_t>(cfg.minibatch_size);
  const auto dim = static_cast<Eigen::Index>(params.input_dim);

  UpdateStats stats;
  PolicyParams grad;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng.engine());
    for (std::size_t start = 0; start < n; start += mb_size) {
      const std::size_t end = std::min(n, start + mb_size);
      Minibatch mb;
      mb.obs.resize(dim, static_cast<Eigen::Index>(end - start));
      for (std::size_t k = start; k < end; ++k) {
        const StepRecord& rec = traj.steps[order[k]];
        mb.obs.col(static_cast<Eigen::Index>(k - start)) = Eigen::Map<const Eigen::VectorXd>(rec.obs.data(), dim);
        mb.masks.push_back(rec.mask);
        mb.actions.push_back(rec.action);
        mb.old_log_probs.push_back(rec.log_prob);
        mb.advantages.push_back(advantages[order[k]]);
        mb.returns.push_back(gae.returns[order[k]]);
      }
      const LossBreakdown loss = ppo_loss(params, mb, cfg, &grad);
      const double norm = grad_norm(grad);
      if (!std::isfinite(loss.total) || !std::isfinite(norm)) {
        std::ostringstream msg;
        msg << "non-finite PPO loss at epoch " << epoch << ", minibatch offset " << start << ": policy=" << loss.policy
            << " value=" << loss.value << " entropy=" << loss.entropy << " grad_norm=" << norm;
        throw NumericError(msg.str());
      }
      if (cfg.max_grad_norm > 0.0 && norm > cfg.max_grad_norm) scale(grad, cfg.max_grad_norm / norm);
      PolicyParams previous = params;
      optimizer.step(params, grad, cfg.learning_rate);
      if (!params.all_finite()) {
        params = std::move(previous);
        throw NumericError("optimizer step produced non-finite parameters at epoch " + std::to_string(epoch));
      }
      stats.policy_loss += loss.policy;
      stats.value_loss += loss.value;
      stats.entropy += loss.entropy;
      ++stats.minibatches;
    }
  }
  stats.policy_loss /= stats.minibatches;
  stats.value_loss /= stats.minibatches;
  stats.entropy /= stats.minibatches;
  return stats;
}

}  // namespace qttt
