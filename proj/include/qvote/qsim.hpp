#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "qvote/common.hpp"

namespace qvote::sim {

using Amplitude = std::complex<double>;

// n-qubit pure state as a dense amplitude vector over the computational
// basis. Bit j of a basis index is the outcome of qubit j, so qubit 0 is the
// least significant bit; rendered bitstrings put qubit 0 (agent 1) first.
struct StateVector {
  int n_qubits = 0;
  std::vector<Amplitude> amps;

  StateVector() = default;
  StateVector(int n, std::vector<Amplitude> a);

  std::size_t dim() const { return amps.size(); }
  double norm2() const;
  void check_normalized(double tol = kDefaultTol) const;

  // |index> in the computational basis.
  static StateVector basis_state(int n, std::uint64_t index);
};

enum class LocalGate : std::uint8_t { Identity, Hadamard, PauliZ, SqrtZ, PauliX };

// Row-major 2x2 matrix of the gate. SqrtZ is diag(1, i); with this phase
// convention H followed by SqrtZ on every qubit maps the GHZ state to the
// even-parity voting state exactly (see family module).
struct GateMatrix {
  Amplitude m00, m01, m10, m11;
};
GateMatrix gate_matrix(LocalGate g);

struct MeasurementOutcome {
  std::vector<std::uint8_t> bits;  // bits[j] = outcome of qubit j
  double probability = 0.0;        // Born probability of the drawn string
  std::uint64_t index = 0;         // basis index of the drawn string
};

// Applies one single-qubit gate to the given qubit.
StateVector apply_gate(const StateVector& state, LocalGate g, int qubit);

// Applies the tensor product gates[0] x gates[1] x ... (one gate per qubit).
StateVector apply_local(const StateVector& state, const std::vector<LocalGate>& gates);

// Samples a computational-basis string from the Born distribution.
// Deterministic for a given (state, seed).
MeasurementOutcome sample_computational(const StateVector& state, std::uint64_t rng_seed);

// |<target|state>|^2.
double projector_expectation(const StateVector& state, const StateVector& target);

Amplitude inner_product(const StateVector& a, const StateVector& b);

// Reduced density operator over the kept qubits (ascending original order).
struct DensityMatrix {
  int n_qubits = 0;
  std::vector<Amplitude> elems;  // row-major 2^n x 2^n

  std::size_t dim() const { return std::size_t(1) << n_qubits; }
  Amplitude at(std::size_t r, std::size_t c) const { return elems[r * dim() + c]; }
  double trace_real() const;
  double max_hermiticity_error() const;
};
DensityMatrix marginal_state(const StateVector& state, const std::vector<int>& keep);

// True when a == e^{i phi} b componentwise within tol.
bool equal_up_to_phase(const StateVector& a, const StateVector& b, double tol = kDefaultTol);

// max_j |a_j - e^{i phi} b_j| minimized over the global phase phi.
double distance_up_to_phase(const StateVector& a, const StateVector& b);

inline int hamming_weight(std::uint64_t y) { return __builtin_popcountll(y); }
inline int bit_parity(std::uint64_t y) { return hamming_weight(y) & 1; }

std::string to_bitstring(std::uint64_t index, int n);

}  // namespace qvote::sim
