#pragma once

// Checkpoint file layout (all integers and floats little-endian):
//
//   bytes 0..7   magic "QTTTCKPT"
//   u32          format version (currently 1)
//   u32          metadata length L
//   L bytes      metadata, UTF-8 JSON object:
//                  {"obs_mode", "rule_version", "input_dim", "hidden",
//                   "n_samples", "exact", "history_norm", "episode_cap",
//                   "training_step", "seed", "code_version", "eval_avg_reward"}
//   per layer, in order trunk[0..], policy head, value head:
//     u32 rows, u32 cols, rows*cols f64 weights (row-major),
//     u32 n, n f64 biases

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qttt/game.hpp"
#include "qttt/observation.hpp"
#include "qttt/policy.hpp"

namespace qttt {

inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

struct CheckpointMeta {
  RuleVersion rule_version = RuleVersion::V1;
  EncoderConfig encoder;
  int episode_cap = kDefaultEpisodeCap;
  long training_step = 0;
  std::uint64_t seed = 0;
  std::string code_version;
  double eval_avg_reward = 0.0;

  friend bool operator==(const CheckpointMeta&, const CheckpointMeta&) = default;
};

struct Checkpoint {
  CheckpointMeta meta;
  PolicyParams params;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

std::string code_version();

}  // namespace qttt
