#include "qttt/observation.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace qttt {

namespace {

constexpr std::size_t kMeasurementSize = kCellCount * 3;
constexpr std::size_t kHistorySize = 2 * kCellCount * kCellCount;

void append_measurement(std::vector<double>& out, const MeasurementObs& m, bool swap) {
  for (const auto& row : m) {
    out.push_back(row[0]);
    out.push_back(swap ? row[2] : row[1]);
    out.push_back(swap ? row[1] : row[2]);
  }
}

void append_counts(std::vector<double>& out, const CountMatrix& counts, double norm) {
  for (const auto& row : counts) {
    for (int v : row) out.push_back(v / norm);
  }
}

}  // namespace

std::string to_string(ObsMode mode) {
  switch (mode) {
    case ObsMode::M: return "m";
    case ObsMode::H: return "h";
    case ObsMode::MH: return "mh";
  }
  return "?";
}

ObsMode parse_obs_mode(const std::string& text) {
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "m") return ObsMode::M;
  if (lower == "h") return ObsMode::H;
  if (lower == "mh" || lower == "m&h") return ObsMode::MH;
  throw std::invalid_argument("unknown observation mode '" + text + "' (expected m, h or mh)");
}

void EncoderConfig::validate() const {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  if (!(history_norm > 0.0)) throw std::invalid_argument("history_norm must be > 0");
}

int MovesHistoryObs::total_mass() const {
  int total = 0;
  for (const CountMatrix* m : {&x, &o}) {
    for (int i = 0; i < kCellCount; ++i) {
      for (int j = i; j < kCellCount; ++j) total += (*m)[i][j];
    }
  }
  return total;
}

MeasurementObs measure_estimate(const StateVector& state, int n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("measurement needs at least one sample");
  const CollapseSampler sampler(state);
  std::array<std::array<int, 3>, kCellCount> counts{};
  for (int s = 0; s < n; ++s) {
    const CollapseOutcome outcome = sampler.sample(rng);
    for (int c = 0; c < kCellCount; ++c) ++counts[c][static_cast<std::size_t>(outcome[c])];
  }
  MeasurementObs out{};
  // Last column is the remainder so that each row sums to exactly 1.0;
  // it differs from count/n by at most an ulp.
  const double dn = n;
  for (int c = 0; c < kCellCount; ++c) {
    auto& row = out[c];
    row[0] = counts[c][0] / dn;
    if (counts[c][2] == 0) {
      row[1] = 1.0 - row[0];
      row[2] = 0.0;
    } else {
      row[1] = counts[c][1] / dn;
      row[2] = 1.0 - (row[0] + row[1]);
    }
  }
  return out;
}

void update_history(MovesHistoryObs& obs, CellMark mark, const Move& move) {
  CountMatrix& m = mark == CellMark::X ? obs.x : obs.o;
  if (move.is_split()) {
    m[move.a - 1][move.b - 1] += 1;
    m[move.b - 1][move.a - 1] += 1;
  } else {
    m[move.a - 1][move.a - 1] += 1;
  }
}

MovesHistoryObs history_of(const GameState& gs) {
  MovesHistoryObs obs;
  for (const auto& entry : gs.move_log) update_history(obs, entry.mark, entry.move);
  return obs;
}

std::size_t observation_size(ObsMode mode) {
  switch (mode) {
    case ObsMode::M: return kMeasurementSize;
    case ObsMode::H: return kHistorySize;
    case ObsMode::MH: return kMeasurementSize + kHistorySize;
  }
  return 0;
}

std::vector<double> encode(const GameState& gs, const EncoderConfig& cfg, RngStream& rng) {
  const bool swap = gs.turn == CellMark::O;
  std::vector<double> out;
  out.reserve(observation_size(cfg.mode));
  if (cfg.mode != ObsMode::H) {
    const MeasurementObs m = cfg.exact ? exact_marginals(gs.engine) : measure_estimate(gs.engine, cfg.n_samples, rng);
    append_measurement(out, m, swap);
  }
  if (cfg.mode != ObsMode::M) {
    const MovesHistoryObs h = history_of(gs);
    append_counts(out, swap ? h.o : h.x, cfg.history_norm);
    append_counts(out, swap ? h.x : h.o, cfg.history_norm);
  }
  return out;
}

void swap_channels(std::vector<double>& obs, ObsMode mode) {
  if (obs.size() != observation_size(mode)) throw std::invalid_argument("observation length does not match mode");
  std::size_t offset = 0;
  if (mode != ObsMode::H) {
    for (int c = 0; c < kCellCount; ++c) std::swap(obs[3 * c + 1], obs[3 * c + 2]);
    offset = kMeasurementSize;
  }
  if (mode != ObsMode::M) {
    const std::size_t half = kCellCount * kCellCount;
    std::swap_ranges(obs.begin() + offset, obs.begin() + offset + half, obs.begin() + offset + half);
  }
}

}  // namespace qttt
