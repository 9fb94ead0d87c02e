#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qttt/game.hpp"
#include "qttt/observation.hpp"
#include "qttt/ppo.hpp"

namespace qttt {

/// Carries the 1-based line of the offending entry (0 when unknown).
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

struct RunConfig {
  RuleVersion version = RuleVersion::V1;
  EncoderConfig encoder;
  PPOConfig ppo;
  int episode_cap = kDefaultEpisodeCap;
  std::string output_dir;  // empty: caller decides

  nlohmann::json to_json() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses and validates a JSON run configuration. Unknown keys, wrong types
/// and out-of-range values are rejected with the line of the entry.
///
///   {"rule_version": "v1", "obs_mode": "mh", "seed": 0, "output_dir": "...",
///    "episode_cap": 50,
///    "encoder": {"n_samples": 100, "exact": false, "history_norm": 50},
///    "ppo": {"gamma", "lambda", "clip", "learning_rate", "epochs",
///            "minibatch_size", "steps_per_update", "entropy_coef",
///            "value_coef", "max_grad_norm", "total_steps", "eval_interval",
///            "eval_games", "hidden"}}
RunConfig parse_run_config(const std::string& text);

}  // namespace qttt
