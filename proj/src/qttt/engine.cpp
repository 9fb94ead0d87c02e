#include "qttt/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace qttt {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

constexpr std::array<std::size_t, kCellCount + 1> kPow3 = {1, 3, 9, 27, 81, 243, 729, 2187, 6561, 19683};

std::size_t stride_of(int cell) { return kPow3[kCellCount - cell]; }

void check_cell(int cell) {
  if (cell < 1 || cell > kCellCount) {
    throw std::out_of_range("cell index " + std::to_string(cell) + " outside 1..9");
  }
}

void check_mark(CellMark mark) {
  if (mark != CellMark::X && mark != CellMark::O) {
    throw std::invalid_argument("move mark must be X or O");
  }
}

// digits[index * 9 + (cell - 1)]
const std::vector<std::uint8_t>& digit_table() {
  static const std::vector<std::uint8_t> table = [] {
    std::vector<std::uint8_t> t(kStateDim * kCellCount);
    for (std::size_t index = 0; index < kStateDim; ++index) {
      std::size_t rest = index;
      for (int cell = kCellCount; cell >= 1; --cell) {
        t[index * kCellCount + static_cast<std::size_t>(cell - 1)] = static_cast<std::uint8_t>(rest % 3);
        rest /= 3;
      }
    }
    return t;
  }();
  return table;
}

template <std::size_t N>
bool is_unitary_impl(const std::array<std::array<Amplitude, N>, N>& u, double tolerance) {
  for (std::size_t r = 0; r < N; ++r) {
    for (std::size_t c = 0; c < N; ++c) {
      Amplitude sum = 0.0;
      for (std::size_t k = 0; k < N; ++k) sum += std::conj(u[k][r]) * u[k][c];
      const Amplitude expected = (r == c) ? 1.0 : 0.0;
      if (std::abs(sum - expected) > tolerance) return false;
    }
  }
  return true;
}

}  // namespace

char mark_char(CellMark mark) {
  switch (mark) {
    case CellMark::Empty: return '_';
    case CellMark::X: return 'X';
    case CellMark::O: return 'O';
  }
  return '?';
}

CellMark opponent(CellMark mark) {
  check_mark(mark);
  return mark == CellMark::X ? CellMark::O : CellMark::X;
}

StateVector::StateVector() : amps_(kStateDim, Amplitude{0.0, 0.0}) { amps_[0] = 1.0; }

double StateVector::norm_squared() const {
  double total = 0.0;
  for (const auto& a : amps_) total += std::norm(a);
  return total;
}

StateVector new_state() { return StateVector{}; }

SingleQutritGate creation_gate(CellMark mark) {
  check_mark(mark);
  SingleQutritGate g{};
  const auto m = static_cast<std::size_t>(mark);
  const std::size_t other = 3 - m;
  g[0][m] = 1.0;
  g[m][0] = 1.0;
  g[other][other] = 1.0;
  return g;
}

TwoQutritGate split_gate(CellMark mark) {
  check_mark(mark);
  TwoQutritGate g{};
  for (std::size_t k = 0; k < 9; ++k) g[k][k] = 1.0;
  const auto m = static_cast<std::size_t>(mark);
  const std::size_t mark_empty = 3 * m;  // |mark, Empty>
  const std::size_t empty_mark = m;      // |Empty, mark>
  const Amplitude diag{kInvSqrt2, 0.0};
  const Amplitude off{0.0, kInvSqrt2};
  g[mark_empty][mark_empty] = diag;
  g[mark_empty][empty_mark] = off;
  g[empty_mark][mark_empty] = off;
  g[empty_mark][empty_mark] = diag;
  return g;
}

bool is_unitary(const SingleQutritGate& gate, double tolerance) { return is_unitary_impl(gate, tolerance); }
bool is_unitary(const TwoQutritGate& gate, double tolerance) { return is_unitary_impl(gate, tolerance); }

void apply_creation(StateVector& state, int cell, CellMark mark) {
  check_cell(cell);
  check_mark(mark);
  const std::size_t stride = stride_of(cell);
  const std::size_t offset = static_cast<std::size_t>(mark) * stride;
  const std::size_t block = 3 * stride;
  auto amps = state.amplitudes();
  for (std::size_t hi = 0; hi < kStateDim; hi += block) {
    for (std::size_t lo = 0; lo < stride; ++lo) {
      std::swap(amps[hi + lo], amps[hi + lo + offset]);
    }
  }
}

void apply_split(StateVector& state, int a, int b, CellMark mark) {
  check_cell(a);
  check_cell(b);
  if (a == b) throw std::invalid_argument("split needs two distinct cells");
  apply_creation(state, a, mark);

  const auto m = static_cast<std::uint8_t>(mark);
  const auto& digits = digit_table();
  const std::size_t ca = static_cast<std::size_t>(a - 1);
  const std::size_t cb = static_cast<std::size_t>(b - 1);
  const std::size_t shift_a = m * stride_of(a);
  const std::size_t shift_b = m * stride_of(b);
  auto amps = state.amplitudes();
  for (std::size_t i = 0; i < kStateDim; ++i) {
    const std::uint8_t* d = &digits[i * kCellCount];
    if (d[ca] != m || d[cb] != 0) continue;
    const std::size_t j = i - shift_a + shift_b;  // |Empty, mark> partner
    const Amplitude ai = amps[i];
    const Amplitude aj = amps[j];
    if (ai == 0.0 && aj == 0.0) continue;
    const Amplitude iu{0.0, 1.0};
    amps[i] = kInvSqrt2 * (ai + iu * aj);
    amps[j] = kInvSqrt2 * (iu * ai + aj);
  }
}

Marginals exact_marginals(const StateVector& state) {
  const double norm = state.norm_squared();
  if (std::abs(norm - 1.0) > kCorruptNormTolerance) {
    throw std::domain_error("state norm " + std::to_string(norm) + " deviates from 1; state is corrupted");
  }
  Marginals out{};
  const auto& digits = digit_table();
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < kStateDim; ++i) {
    const double p = std::norm(amps[i]);
    if (p == 0.0) continue;
    const std::uint8_t* d = &digits[i * kCellCount];
    for (int c = 0; c < kCellCount; ++c) out[c][d[c]] += p;
  }
  return out;
}

double collapse_probability(const StateVector& state, const CollapseOutcome& outcome) {
  return std::norm(state[outcome_index(outcome)]);
}

std::size_t outcome_index(const CollapseOutcome& outcome) {
  std::size_t index = 0;
  for (CellMark mark : outcome) index = index * 3 + static_cast<std::size_t>(mark);
  return index;
}

CollapseOutcome outcome_from_index(std::size_t index) {
  if (index >= kStateDim) throw std::out_of_range("basis index outside 0..19682");
  CollapseOutcome out{};
  const auto& digits = digit_table();
  for (int c = 0; c < kCellCount; ++c) out[c] = static_cast<CellMark>(digits[index * kCellCount + c]);
  return out;
}

CellMark digit_of(std::size_t index, int cell) {
  check_cell(cell);
  return static_cast<CellMark>(digit_table()[index * kCellCount + static_cast<std::size_t>(cell - 1)]);
}

std::string outcome_string(const CollapseOutcome& outcome) {
  std::string s;
  for (CellMark mark : outcome) s.push_back(mark_char(mark));
  return s;
}

CollapseOutcome parse_outcome(const std::string& text) {
  if (text.size() != kCellCount) throw std::invalid_argument("outcome string must have 9 characters");
  CollapseOutcome out{};
  for (int c = 0; c < kCellCount; ++c) {
    switch (text[c]) {
      case '_': out[c] = CellMark::Empty; break;
      case 'X': out[c] = CellMark::X; break;
      case 'O': out[c] = CellMark::O; break;
      default: throw std::invalid_argument("outcome string may only contain '_', 'X', 'O'");
    }
  }
  return out;
}

CollapseSampler::CollapseSampler(const StateVector& state) {
  double running = 0.0;
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < kStateDim; ++i) {
    const double p = std::norm(amps[i]);
    if (p == 0.0) continue;
    running += p;
    support_.push_back(static_cast<std::uint32_t>(i));
    cumulative_.push_back(running);
  }
  if (support_.empty()) throw std::domain_error("cannot sample from a zero state");
}

std::size_t CollapseSampler::sample_index(RngStream& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  return support_[static_cast<std::size_t>(it - cumulative_.begin())];
}

CollapseOutcome sample_collapse(const StateVector& state, RngStream& rng) {
  return CollapseSampler(state).sample(rng);
}

StateVector project_to_outcome(const StateVector& state, const CollapseOutcome& outcome) {
  const std::size_t index = outcome_index(outcome);
  if (std::norm(state[index]) == 0.0) {
    throw std::logic_error("projection onto zero-probability outcome " + outcome_string(outcome));
  }
  StateVector out;
  out[0] = 0.0;
  out[index] = 1.0;
  return out;
}

std::string state_to_json(const StateVector& state) {
  nlohmann::json amps = nlohmann::json::array();
  for (const auto& a : state.amplitudes()) amps.push_back({a.real(), a.imag()});
  nlohmann::json doc = {
      {"format", "qttt-statevector"},
      {"encoding_version", kStateEncodingVersion},
      {"dimension", kStateDim},
      {"cell_order", "cell1-most-significant"},
      {"amplitudes", std::move(amps)},
  };
  return doc.dump();
}

StateVector state_from_json(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  if (doc.value("format", "") != "qttt-statevector") throw std::invalid_argument("not a qttt-statevector document");
  if (doc.value("encoding_version", 0) != kStateEncodingVersion) {
    throw std::invalid_argument("unsupported state encoding version");
  }
  const auto& amps = doc.at("amplitudes");
  if (amps.size() != kStateDim) throw std::invalid_argument("state vector must hold 19683 amplitudes");
  StateVector state;
  for (std::size_t i = 0; i < kStateDim; ++i) {
    state[i] = Amplitude{amps[i].at(0).get<double>(), amps[i].at(1).get<double>()};
  }
  return state;
}

}  // namespace qttt
