#pragma once

// Dense state-vector simulation of the 9-qutrit board.
//
// Basis index encoding: each cell is one base-3 digit (Empty = 0, X = 1,
// O = 2) and cell 1 is the most significant digit, so the all-empty board is
// index 0 and "X on cell 9 only" is index 1.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qttt/rng.hpp"

namespace qttt {

inline constexpr int kCellCount = 9;
inline constexpr std::size_t kStateDim = 19683;  // 3^9

enum class CellMark : std::uint8_t { Empty = 0, X = 1, O = 2 };

char mark_char(CellMark mark);
CellMark opponent(CellMark mark);

using Amplitude = std::complex<double>;
using SingleQutritGate = std::array<std::array<Amplitude, 3>, 3>;
/// Row/column index of a two-qutrit basis state |p, q> is 3 * p + q, where p
/// is the first cell of the ordered pair.
using TwoQutritGate = std::array<std::array<Amplitude, 9>, 9>;

/// One classical board configuration c1..c9.
using CollapseOutcome = std::array<CellMark, kCellCount>;

/// Per-cell probability triple (Empty, X, O).
using Marginals = std::array<std::array<double, 3>, kCellCount>;

inline constexpr double kNormTolerance = 1e-9;
inline constexpr double kUnitaryTolerance = 1e-10;
inline constexpr double kCorruptNormTolerance = 1e-6;

class StateVector {
 public:
  /// The all-empty board |_________>.
  StateVector();

  std::span<const Amplitude> amplitudes() const { return amps_; }
  std::span<Amplitude> amplitudes() { return amps_; }
  const Amplitude& operator[](std::size_t index) const { return amps_[index]; }
  Amplitude& operator[](std::size_t index) { return amps_[index]; }

  double norm_squared() const;

  friend bool operator==(const StateVector&, const StateVector&) = default;

 private:
  std::vector<Amplitude> amps_;
};

StateVector new_state();

/// Transposition |Empty> <-> |mark>, fixing the opponent's basis state.
SingleQutritGate creation_gate(CellMark mark);
/// Mixes |mark, Empty> and |Empty, mark> with [[1, i], [i, 1]] / sqrt(2);
/// identity on the other seven two-qutrit basis states.
TwoQutritGate split_gate(CellMark mark);

bool is_unitary(const SingleQutritGate& gate, double tolerance = kUnitaryTolerance);
bool is_unitary(const TwoQutritGate& gate, double tolerance = kUnitaryTolerance);

/// Cells are 1-based. Throws std::out_of_range for a bad cell and
/// std::invalid_argument for mark == Empty.
void apply_creation(StateVector& state, int cell, CellMark mark);
/// Creation on `a`, then the split gate on the ordered pair (a, b).
void apply_split(StateVector& state, int a, int b, CellMark mark);

/// Throws std::domain_error when the norm is off by more than 1e-6.
Marginals exact_marginals(const StateVector& state);

double collapse_probability(const StateVector& state, const CollapseOutcome& outcome);

std::size_t outcome_index(const CollapseOutcome& outcome);
CollapseOutcome outcome_from_index(std::size_t index);
CellMark digit_of(std::size_t index, int cell);
std::string outcome_string(const CollapseOutcome& outcome);
/// Parses a 9-character string over {'_', 'X', 'O'}.
CollapseOutcome parse_outcome(const std::string& text);

/// Inverse-CDF sampler over the collapse distribution of a fixed state.
/// Building it costs one pass over the amplitudes; each draw is a binary
/// search, which makes repeated sampling of one state cheap.
class CollapseSampler {
 public:
  explicit CollapseSampler(const StateVector& state);

  std::size_t sample_index(RngStream& rng) const;
  CollapseOutcome sample(RngStream& rng) const { return outcome_from_index(sample_index(rng)); }

 private:
  std::vector<std::uint32_t> support_;
  std::vector<double> cumulative_;
};

CollapseOutcome sample_collapse(const StateVector& state, RngStream& rng);

/// Returns the basis state |outcome>. Throws std::logic_error if the outcome
/// has zero probability in `state`.
StateVector project_to_outcome(const StateVector& state, const CollapseOutcome& outcome);

/// JSON document {"format", "encoding_version", "dimension", "amplitudes"}
/// with amplitudes as [re, im] pairs in basis-index order.
std::string state_to_json(const StateVector& state);
StateVector state_from_json(const std::string& text);

inline constexpr int kStateEncodingVersion = 1;

}  // namespace qttt
