#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qvote/qsim.hpp"

namespace qvote::family {

using sim::StateVector;

enum class FamilyKind : std::uint8_t { Phi0, Phi1, Psi0, Psi1, GHZ, Other };

struct FamilyLabel {
  FamilyKind kind = FamilyKind::Other;
  int sign = +1;  // +1 or -1
  int n = 0;      // qubit count
};

std::string family_kind_name(FamilyKind k);
FamilyKind family_kind_from_name(const std::string& s);

// Even-parity voting state: amplitude +1/sqrt(2^(n-1)) on Hamming weight
// 0 mod 4 strings, -1/sqrt(2^(n-1)) on weight 2 mod 4 strings, 0 elsewhere.
StateVector make_phi0(int n);

// Odd-parity analogue: + on weight 1 mod 4, - on weight 3 mod 4.
StateVector make_phi1(int n);

// (|0...0> + |1...1>)/sqrt(2).
StateVector make_ghz(int n);

// Uniform superposition of the weight-1 strings; the standard counterexample
// to parity-test determinism.
StateVector make_w(int n);

// Hadamards on `hadamard_subset` of phi0(k), Z on the remaining qubits.
// Psi0 requires |subset| = 1 mod 4, Psi1 requires |subset| = 3 mod 4.
StateVector make_psi(int k, const std::vector<int>& hadamard_subset, FamilyKind variant);

// Canonical Hadamard subset used when a Psi state is requested by label only.
std::vector<int> psi_canonical_subset(FamilyKind variant, int k);

// Canonical representative of a labeled family state (signed).
StateVector make_family_state(const FamilyLabel& label);

// Identifies a state as +/-Phi0, +/-Phi1, GHZ, a canonical Psi, or Other.
FamilyLabel classify_state(const StateVector& state, double tol = kDefaultTol);

// Applies Hadamards on the subset (|subset| even) and Z elsewhere to phi0(n)
// and classifies the result. Must come out Phi0 when |S| = 0 mod 4 and Phi1
// when |S| = 2 mod 4.
FamilyLabel transformation_property_check(int n, const std::vector<int>& hadamard_subset);

// --- source strategies ------------------------------------------------------

struct IdealSource {};

// With probability p emit phi0(n), else a uniformly random computational
// basis state; the ensemble average reproduces a Werner-like mixture.
struct WernerEnsemble {
  double p = 1.0;
  static WernerEnsemble from_fidelity(double fidelity, int n);
};

// phi0(n) with an independent diag(1, e^{i theta}) on each qubit,
// theta ~ Normal(0, sigma^2).
struct DephasingEnsemble {
  double sigma = 0.0;
};

// Emits the scheduled states in round-robin order.
struct FixedFamily {
  std::vector<FamilyLabel> schedule;
};

struct EmittedRoundState {
  int round = 0;
  StateVector state;
  std::string side_info;  // opaque; visible only to dishonest agents
};

// Arbitrary per-round emission; reconstructed from serialized form by name
// through the adversary module's scenario registry.
struct AdaptiveMalicious {
  std::string name;
  std::function<EmittedRoundState(int round, std::uint64_t seed)> emit;
};

using SourceStrategy =
    std::variant<IdealSource, WernerEnsemble, DephasingEnsemble, FixedFamily, AdaptiveMalicious>;

// Emits the state for one round. Pure in (strategy, n, round, seed).
EmittedRoundState emit_round(const SourceStrategy& strategy, int n, int round,
                             std::uint64_t seed);

struct FidelityEstimate {
  double value = 0.0;
  double std_error = 0.0;  // 0 for closed-form results
};

// Expectation of projector_expectation(emitted, target) under the strategy's
// ensemble. Closed form for Ideal/Werner/Dephasing/FixedFamily; Monte Carlo
// with a reported standard error for AdaptiveMalicious.
FidelityEstimate ensemble_fidelity(const SourceStrategy& strategy, int n,
                                   const StateVector& target, int mc_samples = 4096,
                                   std::uint64_t mc_seed = 1);

// Closed-form ensemble fidelity of the dephasing model against phi0(n).
double dephasing_fidelity_phi0(int n, double sigma);

std::string strategy_kind(const SourceStrategy& strategy);

}  // namespace qvote::family
