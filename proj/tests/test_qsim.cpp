#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "qvote/family.hpp"
#include "qvote/qsim.hpp"
#include "qvote/rng.hpp"
#include "qvote/stats.hpp"

using namespace qvote;
using sim::LocalGate;
using sim::StateVector;

TEST_CASE("apply_local with identities returns the same state") {
  const StateVector ghz = family::make_ghz(3);
  const auto out = sim::apply_local(ghz, {LocalGate::Identity, LocalGate::Identity,
                                          LocalGate::Identity});
  CHECK(sim::distance_up_to_phase(out, ghz) == 0.0);
}

TEST_CASE("apply_local rejects gate-count mismatch") {
  const StateVector ghz = family::make_ghz(3);
  CHECK_THROWS_AS(sim::apply_local(ghz, {LocalGate::Hadamard}), ContractViolation);
}

TEST_CASE("Hadamard then sqrtZ per qubit maps GHZ4 to phi0(4)") {
  StateVector st = family::make_ghz(4);
  st = sim::apply_local(st, std::vector<LocalGate>(4, LocalGate::Hadamard));
  st = sim::apply_local(st, std::vector<LocalGate>(4, LocalGate::SqrtZ));
  CHECK(sim::equal_up_to_phase(st, family::make_phi0(4), 1e-9));
  // Cross-check against the dense tensor-product oracle.
  auto ref = oracle::apply_oracle(family::make_ghz(4), {'H', 'H', 'H', 'H'});
  ref = oracle::apply_oracle(ref, {'S', 'S', 'S', 'S'});
  CHECK(sim::distance_up_to_phase(st, ref) < 1e-12);
}

TEST_CASE("H on qubits {0,1} and Z on {2,3} maps phi0(4) to +/-phi1(4)") {
  const StateVector in = family::make_phi0(4);
  const auto got = sim::apply_local(
      in, {LocalGate::Hadamard, LocalGate::Hadamard, LocalGate::PauliZ, LocalGate::PauliZ});
  const auto ref = oracle::apply_oracle(in, {'H', 'H', 'Z', 'Z'});
  CHECK(sim::distance_up_to_phase(got, ref) < 1e-12);
  const StateVector phi1 = family::make_phi1(4);
  const bool plus = sim::distance_up_to_phase(got, phi1) < 1e-9;
  StateVector neg = phi1;
  for (auto& a : neg.amps) a = -a;
  const bool minus = sim::distance_up_to_phase(got, neg) < 1e-9;
  CHECK((plus || minus));
}

TEST_CASE("sampling |0...0> always returns the all-zero string") {
  const StateVector zero = StateVector::basis_state(4, 0);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto m = sim::sample_computational(zero, seed);
    CHECK(m.index == 0);
    CHECK(m.probability == doctest::Approx(1.0));
  }
}

TEST_CASE("phi0(4) sampling only ever returns parity-even strings") {
  const StateVector st = family::make_phi0(4);
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const auto m = sim::sample_computational(st, seed);
    CHECK(sim::bit_parity(m.index) == 0);
    CHECK(m.probability == doctest::Approx(0.125));
  }
}

TEST_CASE("phi1(4) sampling only ever returns parity-odd strings") {
  const StateVector st = family::make_phi1(4);
  // Support enumerated from the construction: all odd-weight strings.
  std::set<std::uint64_t> support;
  for (std::uint64_t y = 0; y < 16; ++y) {
    if (sim::bit_parity(y) == 1) support.insert(y);
  }
  std::set<std::uint64_t> seen;
  for (std::uint64_t seed = 0; seed < 4000; ++seed) {
    const auto m = sim::sample_computational(st, seed);
    CHECK(support.count(m.index) == 1);
    seen.insert(m.index);
  }
  CHECK(seen == support);
}

TEST_CASE("projector expectation extremes and the GHZ/phi0 overlap") {
  const StateVector phi0 = family::make_phi0(4);
  const StateVector phi1 = family::make_phi1(4);
  CHECK(sim::projector_expectation(phi0, phi0) == doctest::Approx(1.0));
  CHECK(sim::projector_expectation(phi0, phi1) == doctest::Approx(0.0));
  const StateVector ghz = family::make_ghz(4);
  // Brute-force inner product oracle.
  const auto ov = oracle::inner(phi0.amps, ghz.amps);
  CHECK(sim::projector_expectation(ghz, phi0) == doctest::Approx(std::norm(ov)));
  CHECK(std::norm(ov) == doctest::Approx(0.25));
}

TEST_CASE("projector expectation rejects dimension mismatch") {
  CHECK_THROWS_AS(sim::projector_expectation(family::make_phi0(3), family::make_phi0(4)),
                  ContractViolation);
}

TEST_CASE("marginal of |00> keeping one qubit is the pure |0> projector") {
  const auto rho = sim::marginal_state(StateVector::basis_state(2, 0), {0});
  CHECK(rho.n_qubits == 1);
  CHECK(rho.at(0, 0).real() == doctest::Approx(1.0));
  CHECK(std::abs(rho.at(0, 1)) == doctest::Approx(0.0));
  CHECK(std::abs(rho.at(1, 1)) == doctest::Approx(0.0));
}

TEST_CASE("marginal of GHZ4 over two qubits is the classical 00/11 mixture") {
  const auto rho = sim::marginal_state(family::make_ghz(4), {0, 1});
  const auto ref = oracle::partial_trace(family::make_ghz(4), {0, 1});
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      CHECK(std::abs(rho.at(r, c) - ref[r][c]) < 1e-12);
    }
  }
  CHECK(rho.at(0, 0).real() == doctest::Approx(0.5));
  CHECK(rho.at(3, 3).real() == doctest::Approx(0.5));
  CHECK(std::abs(rho.at(0, 3)) == doctest::Approx(0.0));
  CHECK(rho.trace_real() == doctest::Approx(1.0));
  CHECK(rho.max_hermiticity_error() < 1e-9);
}

TEST_CASE("marginal keeping every qubit is the full projector") {
  const StateVector phi0 = family::make_phi0(4);
  const auto rho = sim::marginal_state(phi0, {0, 1, 2, 3});
  for (std::size_t r = 0; r < 16; ++r) {
    for (std::size_t c = 0; c < 16; ++c) {
      const auto want = phi0.amps[r] * std::conj(phi0.amps[c]);
      CHECK(std::abs(rho.at(r, c) - want) < 1e-12);
    }
  }
}

TEST_CASE("marginal rejects empty or invalid keep sets") {
  const StateVector ghz = family::make_ghz(3);
  CHECK_THROWS_AS(sim::marginal_state(ghz, {}), ContractViolation);
  CHECK_THROWS_AS(sim::marginal_state(ghz, {3}), ContractViolation);
  CHECK_THROWS_AS(sim::marginal_state(ghz, {0, 0}), ContractViolation);
}

TEST_CASE("norm preservation under random gate sequences") {
  Rng rng(99);
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + static_cast<int>(rng.uniform_int(5));
    std::vector<sim::Amplitude> a(std::size_t(1) << n);
    double norm = 0;
    for (auto& x : a) {
      x = {rng.normal(0, 1), rng.normal(0, 1)};
      norm += std::norm(x);
    }
    for (auto& x : a) x /= std::sqrt(norm);
    StateVector st(n, std::move(a));
    for (int d = 0; d < 3; ++d) {
      std::vector<LocalGate> gates(n);
      for (auto& g : gates) g = static_cast<LocalGate>(rng.uniform_int(5));
      st = sim::apply_local(st, gates);
    }
    CHECK(std::abs(st.norm2() - 1.0) < 1e-9);
  }
}

TEST_CASE("Born totals: empirical frequencies match the distribution") {
  // A state with unequal weights, sampled heavily.
  std::vector<sim::Amplitude> a = {{0.5, 0}, {0.0, 0.5}, {std::sqrt(0.5), 0}, {0, 0}};
  const StateVector st(2, a);
  std::vector<std::uint64_t> counts(4, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    ++counts[sim::sample_computational(st, derive_seed(5, "born", i)).index];
  }
  CHECK(counts[3] == 0);
  const auto gof = stats::chi_square_gof({counts[0], counts[1], counts[2]},
                                         {0.25, 0.25, 0.5});
  CHECK(gof.p_value > 0.001);
}

TEST_CASE("identical state and seed give identical outcomes") {
  const StateVector st = family::make_phi0(4);
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    CHECK(sim::sample_computational(st, seed).index ==
          sim::sample_computational(st, seed).index);
  }
}

TEST_CASE("gate algebra: H^2 = I and sqrtZ^2 = Z as matrix identities") {
  const auto h = sim::gate_matrix(LocalGate::Hadamard);
  const auto s = sim::gate_matrix(LocalGate::SqrtZ);
  const auto mul = [](const sim::GateMatrix& a, const sim::GateMatrix& b) {
    return sim::GateMatrix{a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
                           a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
  };
  const auto hh = mul(h, h);
  CHECK(std::abs(hh.m00 - 1.0) < 1e-12);
  CHECK(std::abs(hh.m01) < 1e-12);
  CHECK(std::abs(hh.m10) < 1e-12);
  CHECK(std::abs(hh.m11 - 1.0) < 1e-12);
  const auto ss = mul(s, s);
  const auto z = sim::gate_matrix(LocalGate::PauliZ);
  CHECK(std::abs(ss.m00 - z.m00) < 1e-12);
  CHECK(std::abs(ss.m11 - z.m11) < 1e-12);
}

TEST_CASE("state vector construction enforces the size limit") {
  CHECK_THROWS_AS(StateVector(0, {}), ContractViolation);
  CHECK_THROWS_AS(StateVector(17, std::vector<sim::Amplitude>(4)), ContractViolation);
  CHECK_THROWS_AS(StateVector(2, std::vector<sim::Amplitude>(3)), ContractViolation);
}
