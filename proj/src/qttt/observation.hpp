#pragma once

#include <array>
#include <string>
#include <vector>

#include "qttt/engine.hpp"
#include "qttt/game.hpp"
#include "qttt/rng.hpp"

namespace qttt {

enum class ObsMode : std::uint8_t { M, H, MH };

std::string to_string(ObsMode mode);
/// Accepts "m", "h", "mh" (any case) and "m&h".
ObsMode parse_obs_mode(const std::string& text);

inline constexpr int kDefaultMeasurementSamples = 100;

struct EncoderConfig {
  ObsMode mode = ObsMode::MH;
  int n_samples = kDefaultMeasurementSamples;
  bool exact = false;
  double history_norm = kDefaultEpisodeCap;

  /// Throws std::invalid_argument if n_samples < 1 or history_norm <= 0.
  void validate() const;
  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

/// Row i is the estimated (Empty, X, O) probability of cell i + 1.
using MeasurementObs = Marginals;

using CountMatrix = std::array<std::array<int, kCellCount>, kCellCount>;

/// Diagonal: classical moves per cell. Off-diagonal: splits per cell pair,
/// stored symmetrically.
struct MovesHistoryObs {
  CountMatrix x{};
  CountMatrix o{};

  /// Diagonal plus upper triangle, summed over both marks.
  int total_mass() const;
  friend bool operator==(const MovesHistoryObs&, const MovesHistoryObs&) = default;
};

/// Frequencies of each mark per cell over n simulated collapses of a copy
/// of the state. n must be >= 1.
MeasurementObs measure_estimate(const StateVector& state, int n, RngStream& rng);

void update_history(MovesHistoryObs& obs, CellMark mark, const Move& move);
MovesHistoryObs history_of(const GameState& gs);

std::size_t observation_size(ObsMode mode);

/// Flat observation from the perspective of the side to move: when O is to
/// move, the X and O channels are swapped so the mover always comes first.
std::vector<double> encode(const GameState& gs, const EncoderConfig& cfg, RngStream& rng);

/// Exchanges the X and O channels of an encoded observation in place.
void swap_channels(std::vector<double>& obs, ObsMode mode);

}  // namespace qttt
