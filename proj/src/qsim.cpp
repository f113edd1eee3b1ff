#include "qvote/qsim.hpp"

#include <algorithm>
#include <cmath>

#include "qvote/rng.hpp"

namespace qvote::sim {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
}

StateVector::StateVector(int n, std::vector<Amplitude> a) : n_qubits(n), amps(std::move(a)) {
  if (n < 1 || n > kMaxQubits) {
    throw ContractViolation("qubit count must be in [1, " + std::to_string(kMaxQubits) + "]");
  }
  if (amps.size() != (std::size_t(1) << n)) {
    throw ContractViolation("amplitude vector length must be 2^n_qubits");
  }
}

double StateVector::norm2() const {
  double s = 0.0;
  for (const auto& a : amps) s += std::norm(a);
  return s;
}

void StateVector::check_normalized(double tol) const {
  if (std::abs(norm2() - 1.0) > tol) {
    throw ContractViolation("state is not normalized");
  }
}

StateVector StateVector::basis_state(int n, std::uint64_t index) {
  if (n < 1 || n > kMaxQubits) throw ContractViolation("qubit count out of range");
  std::vector<Amplitude> a(std::size_t(1) << n, Amplitude(0, 0));
  if (index >= a.size()) throw ContractViolation("basis index out of range");
  a[index] = Amplitude(1, 0);
  return StateVector(n, std::move(a));
}

GateMatrix gate_matrix(LocalGate g) {
  switch (g) {
    case LocalGate::Identity:
      return {1, 0, 0, 1};
    case LocalGate::Hadamard:
      return {kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2};
    case LocalGate::PauliZ:
      return {1, 0, 0, -1};
    case LocalGate::SqrtZ:
      return {1, 0, 0, Amplitude(0, 1)};
    case LocalGate::PauliX:
      return {0, 1, 1, 0};
  }
  throw ContractViolation("unknown gate");
}

StateVector apply_gate(const StateVector& state, LocalGate g, int qubit) {
  if (qubit < 0 || qubit >= state.n_qubits) throw ContractViolation("qubit index out of range");
  if (g == LocalGate::Identity) return state;
  StateVector out = state;
  const GateMatrix u = gate_matrix(g);
  const std::size_t step = std::size_t(1) << qubit;
  const std::size_t block = step << 1;
  const std::size_t dim = out.dim();
  for (std::size_t base = 0; base < dim; base += block) {
    for (std::size_t off = 0; off < step; ++off) {
      const std::size_t i0 = base + off;
      const std::size_t i1 = i0 + step;
      const Amplitude a = out.amps[i0];
      const Amplitude b = out.amps[i1];
      out.amps[i0] = u.m00 * a + u.m01 * b;
      out.amps[i1] = u.m10 * a + u.m11 * b;
    }
  }
  return out;
}

StateVector apply_local(const StateVector& state, const std::vector<LocalGate>& gates) {
  if (static_cast<int>(gates.size()) != state.n_qubits) {
    throw ContractViolation("apply_local requires one gate per qubit");
  }
  StateVector out = state;
  for (int q = 0; q < state.n_qubits; ++q) {
    out = apply_gate(out, gates[q], q);
  }
  return out;
}

MeasurementOutcome sample_computational(const StateVector& state, std::uint64_t rng_seed) {
  state.check_normalized();
  Rng rng(rng_seed);
  const double u = rng.uniform01();
  double cum = 0.0;
  std::size_t drawn = 0;
  double prob = 0.0;
  for (std::size_t y = 0; y < state.dim(); ++y) {
    const double p = std::norm(state.amps[y]);
    if (p == 0.0) continue;  // exact zeros can never be drawn
    cum += p;
    if (u < cum) {
      drawn = y;
      prob = p;
      break;
    }
    drawn = y;  // guard against cum < 1 from rounding on the last entry
    prob = p;
  }
  MeasurementOutcome out;
  out.index = drawn;
  out.probability = prob;
  out.bits.resize(state.n_qubits);
  for (int j = 0; j < state.n_qubits; ++j) out.bits[j] = (drawn >> j) & 1;
  return out;
}

Amplitude inner_product(const StateVector& a, const StateVector& b) {
  if (a.n_qubits != b.n_qubits) throw ContractViolation("qubit count mismatch");
  Amplitude s(0, 0);
  for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a.amps[i]) * b.amps[i];
  return s;
}

double projector_expectation(const StateVector& state, const StateVector& target) {
  const Amplitude ov = inner_product(target, state);
  return std::norm(ov);
}

double DensityMatrix::trace_real() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) t += at(i, i).real();
  return t;
}

double DensityMatrix::max_hermiticity_error() const {
  double e = 0.0;
  for (std::size_t r = 0; r < dim(); ++r) {
    for (std::size_t c = 0; c < dim(); ++c) {
      e = std::max(e, std::abs(at(r, c) - std::conj(at(c, r))));
    }
  }
  return e;
}

DensityMatrix marginal_state(const StateVector& state, const std::vector<int>& keep) {
  if (keep.empty()) throw ContractViolation("keep set must be nonempty");
  std::vector<int> ks = keep;
  std::sort(ks.begin(), ks.end());
  if (std::unique(ks.begin(), ks.end()) != ks.end()) {
    throw ContractViolation("keep set has duplicate qubits");
  }
  for (int q : ks) {
    if (q < 0 || q >= state.n_qubits) throw ContractViolation("keep qubit out of range");
  }
  const int k = static_cast<int>(ks.size());
  std::vector<int> rest;
  for (int q = 0; q < state.n_qubits; ++q) {
    if (!std::binary_search(ks.begin(), ks.end(), q)) rest.push_back(q);
  }
  DensityMatrix rho;
  rho.n_qubits = k;
  rho.elems.assign(std::size_t(1) << (2 * k), Amplitude(0, 0));
  const std::size_t kd = std::size_t(1) << k;
  const std::size_t rd = std::size_t(1) << rest.size();
  auto full_index = [&](std::size_t kept_bits, std::size_t rest_bits) {
    std::uint64_t idx = 0;
    for (int j = 0; j < k; ++j) idx |= ((kept_bits >> j) & 1) << ks[j];
    for (std::size_t j = 0; j < rest.size(); ++j) idx |= ((rest_bits >> j) & 1) << rest[j];
    return idx;
  };
  for (std::size_t r = 0; r < kd; ++r) {
    for (std::size_t c = 0; c < kd; ++c) {
      Amplitude s(0, 0);
      for (std::size_t e = 0; e < rd; ++e) {
        s += state.amps[full_index(r, e)] * std::conj(state.amps[full_index(c, e)]);
      }
      rho.elems[r * kd + c] = s;
    }
  }
  return rho;
}

double distance_up_to_phase(const StateVector& a, const StateVector& b) {
  const Amplitude ov = inner_product(b, a);
  Amplitude phase(1, 0);
  if (std::abs(ov) > 0) phase = ov / std::abs(ov);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    worst = std::max(worst, std::abs(a.amps[i] - phase * b.amps[i]));
  }
  return worst;
}

bool equal_up_to_phase(const StateVector& a, const StateVector& b, double tol) {
  if (a.n_qubits != b.n_qubits) return false;
  return distance_up_to_phase(a, b) <= tol;
}

std::string to_bitstring(std::uint64_t index, int n) {
  std::string s(n, '0');
  for (int j = 0; j < n; ++j) {
    if ((index >> j) & 1) s[j] = '1';
  }
  return s;
}

}  // namespace qvote::sim
