#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "oracles.hpp"
#include "qttt/engine.hpp"

using namespace qttt;

namespace {

constexpr double kEps = 1e-12;
const double kHalfRoot = 1.0 / std::sqrt(2.0);

CollapseOutcome outcome_of(const std::string& s) { return parse_outcome(s); }

}  // namespace

TEST_CASE("fresh state is the all-empty basis state") {
  const StateVector s = new_state();
  CHECK(s.norm_squared() == doctest::Approx(1.0).epsilon(1e-15));
  const Marginals m = exact_marginals(s);
  for (int c = 0; c < kCellCount; ++c) {
    CHECK(m[c][0] == 1.0);
    CHECK(m[c][1] == 0.0);
    CHECK(m[c][2] == 0.0);
  }
  CHECK(collapse_probability(s, outcome_of("_________")) == 1.0);
}

TEST_CASE("gate matrices are unitary") {
  for (CellMark mark : {CellMark::X, CellMark::O}) {
    CHECK(is_unitary(creation_gate(mark)));
    CHECK(is_unitary(split_gate(mark)));
  }
  // the checker itself rejects a non-unitary matrix
  TwoQutritGate bad = split_gate(CellMark::X);
  bad[0][0] = 2.0;
  CHECK_FALSE(is_unitary(bad));
}

TEST_CASE("gate matrices match the independent construction") {
  for (int m : {1, 2}) {
    const auto mark = static_cast<CellMark>(m);
    const auto c = creation_gate(mark);
    const auto oc = oracle::creation(m);
    const auto s = split_gate(mark);
    const auto os = oracle::split_rotation(m);
    for (int r = 0; r < 3; ++r) {
      for (int k = 0; k < 3; ++k) CHECK(std::abs(c[r][k] - oc[r][k]) < kEps);
    }
    for (int r = 0; r < 9; ++r) {
      for (int k = 0; k < 9; ++k) CHECK(std::abs(s[r][k] - os[r][k]) < kEps);
    }
  }
}

TEST_CASE("creation on a fresh cell") {
  StateVector s = new_state();
  apply_creation(s, 1, CellMark::X);
  const Marginals m = exact_marginals(s);
  CHECK(m[0][1] == doctest::Approx(1.0));
  for (int c = 1; c < kCellCount; ++c) CHECK(m[c][0] == doctest::Approx(1.0));

  StateVector t = new_state();
  apply_creation(t, 5, CellMark::X);
  CHECK(exact_marginals(t)[4][1] == doctest::Approx(1.0));
}

TEST_CASE("creation is an involution") {
  std::mt19937_64 rng(11);
  StateVector s = new_state();
  apply_split(s, 1, 2, CellMark::X);
  apply_split(s, 2, 3, CellMark::O);
  apply_creation(s, 7, CellMark::X);
  for (int cell = 1; cell <= 9; ++cell) {
    for (CellMark mark : {CellMark::X, CellMark::O}) {
      StateVector t = s;
      apply_creation(t, cell, mark);
      apply_creation(t, cell, mark);
      CHECK(t == s);
    }
  }
}

TEST_CASE("creation after a split leaves the split cells alone") {
  StateVector s = new_state();
  apply_split(s, 1, 2, CellMark::X);
  const Marginals before = exact_marginals(s);
  apply_creation(s, 3, CellMark::O);
  const Marginals after = exact_marginals(s);
  CHECK(after[2][2] == doctest::Approx(1.0));
  for (int c : {0, 1}) {
    for (int k = 0; k < 3; ++k) CHECK(after[c][k] == doctest::Approx(before[c][k]).epsilon(kEps));
  }
  oracle::Vec v = oracle::split(oracle::fresh(), 1, 2, 1);
  v = oracle::apply1(v, 3, oracle::creation(2));
  CHECK(oracle::max_abs_diff(v, s) < kEps);
}

TEST_CASE("split of two empty cells is an even superposition") {
  StateVector s = new_state();
  apply_split(s, 1, 2, CellMark::X);

  int nonzero = 0;
  for (std::size_t i = 0; i < kStateDim; ++i) {
    if (std::norm(s[i]) > 0.0) ++nonzero;
  }
  CHECK(nonzero == 2);
  CHECK(collapse_probability(s, outcome_of("X________")) == doctest::Approx(0.5).epsilon(kEps));
  CHECK(collapse_probability(s, outcome_of("_X_______")) == doctest::Approx(0.5).epsilon(kEps));
  CHECK(collapse_probability(s, outcome_of("XX_______")) == 0.0);

  // (1/sqrt2)|X_> + (i/sqrt2)|_X>
  const Amplitude a = s[outcome_index(outcome_of("X________"))];
  const Amplitude b = s[outcome_index(outcome_of("_X_______"))];
  CHECK(std::abs(a - Amplitude(kHalfRoot, 0.0)) < kEps);
  CHECK(std::abs(b - Amplitude(0.0, kHalfRoot)) < kEps);

  const Marginals m = exact_marginals(s);
  for (int c : {0, 1}) {
    CHECK(m[c][0] == doctest::Approx(0.5));
    CHECK(m[c][1] == doctest::Approx(0.5));
    CHECK(m[c][2] == 0.0);
  }

  StateVector o = new_state();
  apply_split(o, 4, 7, CellMark::O);
  const Marginals mo = exact_marginals(o);
  for (int c : {3, 6}) {
    CHECK(mo[c][0] == doctest::Approx(0.5));
    CHECK(mo[c][1] == 0.0);
    CHECK(mo[c][2] == doctest::Approx(0.5));
  }
}

TEST_CASE("chained splits match hand-computed amplitudes") {
  // split X(1,2) then split X(2,3):
  // (1/2)|XX_> + (i/2)|X_X> + (i/sqrt2)|___>
  StateVector s = new_state();
  apply_split(s, 1, 2, CellMark::X);
  apply_split(s, 2, 3, CellMark::X);
  CHECK(std::abs(s[outcome_index(outcome_of("XX_______"))] - Amplitude(0.5, 0.0)) < kEps);
  CHECK(std::abs(s[outcome_index(outcome_of("X_X______"))] - Amplitude(0.0, 0.5)) < kEps);
  CHECK(std::abs(s[outcome_index(outcome_of("_________"))] - Amplitude(0.0, kHalfRoot)) < kEps);

  const Marginals m = exact_marginals(s);
  CHECK(m[0][1] == doctest::Approx(0.5));
  CHECK(m[1][1] == doctest::Approx(0.25));
  CHECK(m[2][1] == doctest::Approx(0.25));

  const oracle::Vec v = oracle::split(oracle::split(oracle::fresh(), 1, 2, 1), 2, 3, 1);
  CHECK(oracle::max_abs_diff(v, s) < kEps);
}

TEST_CASE("engine matches the dense oracle on random move sequences") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    StateVector s = new_state();
    oracle::Vec v = oracle::fresh();
    for (int k = 0; k < 8; ++k) {
      const int mark = 1 + static_cast<int>(rng() % 2);
      const int a = 1 + static_cast<int>(rng() % 9);
      if (rng() % 3 == 0) {
        apply_creation(s, a, static_cast<CellMark>(mark));
        v = oracle::apply1(v, a, oracle::creation(mark));
      } else {
        int b = 1 + static_cast<int>(rng() % 9);
        while (b == a) b = 1 + static_cast<int>(rng() % 9);
        apply_split(s, a, b, static_cast<CellMark>(mark));
        v = oracle::split(v, a, b, mark);
      }
    }
    CHECK(oracle::max_abs_diff(v, s) < 1e-12);
    CHECK(std::abs(s.norm_squared() - 1.0) < kNormTolerance);
  }
}

TEST_CASE("split for one mark never touches components where both cells hold the opponent's mark") {
  std::mt19937_64 rng(5);
  StateVector s = new_state();
  apply_creation(s, 1, CellMark::O);
  apply_split(s, 2, 3, CellMark::O);
  apply_split(s, 4, 2, CellMark::X);
  apply_split(s, 5, 6, CellMark::O);
  for (int a = 1; a <= 9; ++a) {
    for (int b = 1; b <= 9; ++b) {
      if (a == b) continue;
      for (CellMark p : {CellMark::X, CellMark::O}) {
        const CellMark q = opponent(p);
        StateVector t = s;
        apply_split(t, a, b, p);
        for (std::size_t i = 0; i < kStateDim; ++i) {
          if (digit_of(i, a) == q && digit_of(i, b) == q) {
            REQUIRE(t[i] == s[i]);
          }
        }
      }
    }
  }
}

TEST_CASE("argument checks") {
  StateVector s = new_state();
  CHECK_THROWS_AS(apply_creation(s, 0, CellMark::X), std::out_of_range);
  CHECK_THROWS_AS(apply_creation(s, 10, CellMark::X), std::out_of_range);
  CHECK_THROWS_AS(apply_creation(s, 1, CellMark::Empty), std::invalid_argument);
  CHECK_THROWS_AS(apply_split(s, 3, 3, CellMark::X), std::invalid_argument);
  CHECK_THROWS_AS(apply_split(s, 3, 12, CellMark::X), std::out_of_range);
  CHECK(s == new_state());

  StateVector bad = new_state();
  bad[0] = 2.0;
  CHECK_THROWS_AS(exact_marginals(bad), std::domain_error);
}

TEST_CASE("collapse probabilities sum to one and sampling respects the support") {
  StateVector s = new_state();
  apply_split(s, 1, 2, CellMark::X);
  apply_split(s, 2, 5, CellMark::O);
  apply_split(s, 1, 9, CellMark::X);
  double total = 0.0;
  for (std::size_t i = 0; i < kStateDim; ++i) total += collapse_probability(s, outcome_from_index(i));
  CHECK(std::abs(total - 1.0) < kNormTolerance);

  RngStream rng(3);
  const CollapseSampler sampler(s);
  for (int k = 0; k < 2000; ++k) {
    const std::size_t idx = sampler.sample_index(rng);
    REQUIRE(std::norm(s[idx]) > 0.0);
  }
}

TEST_CASE("deterministic state always collapses to itself") {
  StateVector s = new_state();
  apply_creation(s, 1, CellMark::X);
  apply_creation(s, 5, CellMark::O);
  RngStream rng(9);
  for (int k = 0; k < 100; ++k) CHECK(outcome_string(sample_collapse(s, rng)) == "X___O____");
}

TEST_CASE("split frequencies stay within the binomial bound") {
  StateVector s = new_state();
  apply_split(s, 1, 2, CellMark::X);
  RngStream rng(77);
  int x_at_1 = 0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    if (sample_collapse(s, rng)[0] == CellMark::X) ++x_at_1;
  }
  CHECK(std::abs(x_at_1 / double(n) - 0.5) <= 0.02);
}

TEST_CASE("sampled outcomes fit the exact distribution") {
  StateVector s = new_state();
  apply_split(s, 1, 2, CellMark::X);
  apply_split(s, 2, 3, CellMark::O);
  apply_split(s, 3, 4, CellMark::X);
  apply_creation(s, 9, CellMark::O);
  std::map<std::size_t, double> probs;
  for (std::size_t i = 0; i < kStateDim; ++i) {
    if (std::norm(s[i]) > 0.0) probs[i] = std::norm(s[i]);
  }
  const long n = 50000;
  RngStream rng(123);
  const CollapseSampler sampler(s);
  std::map<std::size_t, long> observed;
  for (long k = 0; k < n; ++k) ++observed[sampler.sample_index(rng)];
  for (const auto& [idx, count] : observed) REQUIRE(probs.count(idx) == 1);
  const auto chi = oracle::chi_square(observed, probs, n);
  CHECK(chi.dof >= 1);
  CHECK(chi.p_value > 0.001);
}

TEST_CASE("sampling is reproducible under a fixed seed") {
  StateVector s = new_state();
  apply_split(s, 1, 2, CellMark::X);
  apply_split(s, 2, 3, CellMark::O);
  RngStream a(42), b(42);
  for (int k = 0; k < 500; ++k) CHECK(sample_collapse(s, a) == sample_collapse(s, b));
}

TEST_CASE("projection") {
  StateVector s = new_state();
  apply_split(s, 1, 2, CellMark::X);
  const StateVector p = project_to_outcome(s, outcome_of("X________"));
  CHECK(p.norm_squared() == doctest::Approx(1.0));
  CHECK(collapse_probability(p, outcome_of("X________")) == doctest::Approx(1.0));
  CHECK_THROWS_AS(project_to_outcome(s, outcome_of("XX_______")), std::logic_error);

  StateVector d = new_state();
  apply_creation(d, 3, CellMark::O);
  const StateVector q = project_to_outcome(d, outcome_of("__O______"));
  CHECK(exact_marginals(q) == exact_marginals(d));
}

TEST_CASE("norm is preserved over random legal games") {
  std::mt19937_64 rng(8);
  for (auto version : {RuleVersion::V1, RuleVersion::V3}) {
    for (int g = 0; g < 100; ++g) {
      const GameState gs = oracle::random_game(version, static_cast<std::uint64_t>(g), 20, rng);
      CHECK(std::abs(gs.engine.norm_squared() - 1.0) < kNormTolerance);
    }
  }
}

TEST_CASE("outcome strings and indices round-trip") {
  for (std::size_t i : {std::size_t{0}, std::size_t{1}, std::size_t{6561}, std::size_t{19682}, std::size_t{12345}}) {
    CHECK(outcome_index(outcome_from_index(i)) == i);
    CHECK(outcome_index(parse_outcome(outcome_string(outcome_from_index(i)))) == i);
  }
  CHECK(outcome_index(parse_outcome("X________")) == 6561);
  CHECK(outcome_index(parse_outcome("________O")) == 2);
  CHECK_THROWS(parse_outcome("X"));
  CHECK_THROWS(parse_outcome("X_______Q"));
}

TEST_CASE("state serialization round-trips") {
  StateVector s = new_state();
  apply_split(s, 1, 2, CellMark::X);
  apply_split(s, 2, 7, CellMark::O);
  const StateVector t = state_from_json(state_to_json(s));
  CHECK(t == s);
  CHECK_THROWS(state_from_json("{\"format\":\"qttt-statevector\",\"encoding_version\":2}"));
  CHECK_THROWS(state_from_json("not json"));
}
