#include "qvote/family.hpp"

#include <cmath>

#include "qvote/rng.hpp"

namespace qvote::family {

using sim::Amplitude;
using sim::LocalGate;

std::string family_kind_name(FamilyKind k) {
  switch (k) {
    case FamilyKind::Phi0: return "phi0";
    case FamilyKind::Phi1: return "phi1";
    case FamilyKind::Psi0: return "psi0";
    case FamilyKind::Psi1: return "psi1";
    case FamilyKind::GHZ: return "ghz";
    case FamilyKind::Other: return "other";
  }
  return "other";
}

FamilyKind family_kind_from_name(const std::string& s) {
  if (s == "phi0") return FamilyKind::Phi0;
  if (s == "phi1") return FamilyKind::Phi1;
  if (s == "psi0") return FamilyKind::Psi0;
  if (s == "psi1") return FamilyKind::Psi1;
  if (s == "ghz") return FamilyKind::GHZ;
  if (s == "other") return FamilyKind::Other;
  throw ContractViolation("unknown family kind: " + s);
}

namespace {
StateVector make_weight_state(int n, int weight_plus_mod4, int weight_minus_mod4) {
  if (n < 1) throw ContractViolation("qubit count must be >= 1");
  if (n > kMaxQubits) throw ContractViolation("qubit count exceeds limit");
  std::vector<Amplitude> a(std::size_t(1) << n, Amplitude(0, 0));
  const double c = 1.0 / std::sqrt(std::pow(2.0, n - 1));
  for (std::uint64_t y = 0; y < a.size(); ++y) {
    const int w = sim::hamming_weight(y) & 3;
    if (w == weight_plus_mod4) a[y] = Amplitude(c, 0);
    else if (w == weight_minus_mod4) a[y] = Amplitude(-c, 0);
  }
  return StateVector(n, std::move(a));
}
}  // namespace

StateVector make_phi0(int n) { return make_weight_state(n, 0, 2); }
StateVector make_phi1(int n) { return make_weight_state(n, 1, 3); }

StateVector make_ghz(int n) {
  if (n < 1) throw ContractViolation("qubit count must be >= 1");
  if (n > kMaxQubits) throw ContractViolation("qubit count exceeds limit");
  std::vector<Amplitude> a(std::size_t(1) << n, Amplitude(0, 0));
  const double c = 1.0 / std::sqrt(2.0);
  a.front() = Amplitude(c, 0);
  a.back() = Amplitude(c, 0);
  return StateVector(n, std::move(a));
}

StateVector make_w(int n) {
  if (n < 1) throw ContractViolation("qubit count must be >= 1");
  if (n > kMaxQubits) throw ContractViolation("qubit count exceeds limit");
  std::vector<Amplitude> a(std::size_t(1) << n, Amplitude(0, 0));
  const double c = 1.0 / std::sqrt(static_cast<double>(n));
  for (int q = 0; q < n; ++q) a[std::size_t(1) << q] = Amplitude(c, 0);
  return StateVector(n, std::move(a));
}

namespace {
StateVector hadamard_subset_z_rest(const StateVector& base, const std::vector<int>& subset) {
  std::vector<LocalGate> gates(base.n_qubits, LocalGate::PauliZ);
  for (int q : subset) {
    if (q < 0 || q >= base.n_qubits) throw ContractViolation("subset qubit out of range");
    if (gates[q] == LocalGate::Hadamard) throw ContractViolation("subset has duplicate qubits");
    gates[q] = LocalGate::Hadamard;
  }
  return sim::apply_local(base, gates);
}
}  // namespace

StateVector make_psi(int k, const std::vector<int>& hadamard_subset, FamilyKind variant) {
  const int want = variant == FamilyKind::Psi0 ? 1
                   : variant == FamilyKind::Psi1 ? 3
                                                 : -1;
  if (want < 0) throw ContractViolation("make_psi variant must be Psi0 or Psi1");
  if (static_cast<int>(hadamard_subset.size()) % 4 != want) {
    throw ContractViolation("Hadamard subset cardinality must be " + std::to_string(want) +
                            " mod 4 for " + family_kind_name(variant));
  }
  return hadamard_subset_z_rest(make_phi0(k), hadamard_subset);
}

std::vector<int> psi_canonical_subset(FamilyKind variant, int k) {
  if (variant == FamilyKind::Psi0) {
    if (k < 1) throw ContractViolation("Psi0 needs k >= 1");
    return {0};
  }
  if (variant == FamilyKind::Psi1) {
    if (k < 3) throw ContractViolation("Psi1 needs k >= 3");
    return {0, 1, 2};
  }
  throw ContractViolation("canonical subset only defined for Psi states");
}

StateVector make_family_state(const FamilyLabel& label) {
  StateVector st;
  switch (label.kind) {
    case FamilyKind::Phi0: st = make_phi0(label.n); break;
    case FamilyKind::Phi1: st = make_phi1(label.n); break;
    case FamilyKind::GHZ: st = make_ghz(label.n); break;
    case FamilyKind::Psi0:
      st = make_psi(label.n, psi_canonical_subset(FamilyKind::Psi0, label.n), FamilyKind::Psi0);
      break;
    case FamilyKind::Psi1:
      st = make_psi(label.n, psi_canonical_subset(FamilyKind::Psi1, label.n), FamilyKind::Psi1);
      break;
    case FamilyKind::Other:
      throw ContractViolation("cannot construct an Other-labeled state");
  }
  if (label.sign < 0) {
    for (auto& a : st.amps) a = -a;
  }
  return st;
}

namespace {
// Returns +1/-1 when state == sign * target componentwise within tol, 0 otherwise.
int match_sign(const StateVector& state, const StateVector& target, double tol) {
  bool plus = true, minus = true;
  for (std::size_t i = 0; i < state.dim(); ++i) {
    if (std::abs(state.amps[i] - target.amps[i]) > tol) plus = false;
    if (std::abs(state.amps[i] + target.amps[i]) > tol) minus = false;
    if (!plus && !minus) return 0;
  }
  return plus ? +1 : (minus ? -1 : 0);
}
}  // namespace

FamilyLabel classify_state(const StateVector& state, double tol) {
  const int n = state.n_qubits;
  const struct {
    FamilyKind kind;
    StateVector target;
  } candidates[] = {
      {FamilyKind::Phi0, make_phi0(n)},
      {FamilyKind::Phi1, make_phi1(n)},
      {FamilyKind::GHZ, make_ghz(n)},
      {FamilyKind::Psi0, n >= 1 ? make_family_state({FamilyKind::Psi0, +1, n}) : StateVector()},
      {FamilyKind::Psi1, n >= 3 ? make_family_state({FamilyKind::Psi1, +1, n}) : StateVector()},
  };
  for (const auto& c : candidates) {
    if (c.target.n_qubits != n) continue;
    const int s = match_sign(state, c.target, tol);
    if (s != 0) return {c.kind, s, n};
  }
  return {FamilyKind::Other, +1, n};
}

FamilyLabel transformation_property_check(int n, const std::vector<int>& hadamard_subset) {
  if (hadamard_subset.size() % 2 != 0) {
    throw ContractViolation("transformation check requires an even Hadamard subset");
  }
  const StateVector out = hadamard_subset_z_rest(make_phi0(n), hadamard_subset);
  return classify_state(out);
}

WernerEnsemble WernerEnsemble::from_fidelity(double fidelity, int n) {
  const double floor = 1.0 / std::pow(2.0, n);
  if (fidelity < floor || fidelity > 1.0) {
    throw ContractViolation("fidelity outside reachable range for Werner ensemble");
  }
  return WernerEnsemble{(fidelity - floor) / (1.0 - floor)};
}

EmittedRoundState emit_round(const SourceStrategy& strategy, int n, int round,
                             std::uint64_t seed) {
  EmittedRoundState out;
  out.round = round;
  if (std::holds_alternative<IdealSource>(strategy)) {
    out.state = make_phi0(n);
    return out;
  }
  if (const auto* w = std::get_if<WernerEnsemble>(&strategy)) {
    if (w->p < 0.0 || w->p > 1.0) throw ContractViolation("Werner mixing probability not in [0,1]");
    Rng rng(seed);
    if (rng.uniform01() < w->p) {
      out.state = make_phi0(n);
    } else {
      out.state = StateVector::basis_state(n, rng.uniform_int(std::uint64_t(1) << n));
    }
    return out;
  }
  if (const auto* d = std::get_if<DephasingEnsemble>(&strategy)) {
    if (d->sigma < 0.0) throw ContractViolation("dephasing sigma must be >= 0");
    Rng rng(seed);
    StateVector st = make_phi0(n);
    for (int q = 0; q < n; ++q) {
      const double theta = rng.normal(0.0, d->sigma);
      const Amplitude ph = std::polar(1.0, theta);
      const std::size_t step = std::size_t(1) << q;
      for (std::size_t y = 0; y < st.dim(); ++y) {
        if (y & step) st.amps[y] *= ph;
      }
    }
    out.state = std::move(st);
    return out;
  }
  if (const auto* f = std::get_if<FixedFamily>(&strategy)) {
    if (f->schedule.empty()) throw ContractViolation("FixedFamily schedule is empty");
    const FamilyLabel& label = f->schedule[round % f->schedule.size()];
    if (label.n != n) throw ContractViolation("scheduled state qubit count != agent count");
    out.state = make_family_state(label);
    out.side_info = "{\"family\":\"" + family_kind_name(label.kind) +
                    "\",\"sign\":" + std::to_string(label.sign) + "}";
    return out;
  }
  const auto& adaptive = std::get<AdaptiveMalicious>(strategy);
  if (!adaptive.emit) throw ContractViolation("adaptive strategy has no emission policy");
  out = adaptive.emit(round, seed);
  out.round = round;
  if (out.state.n_qubits != n) {
    throw ContractViolation("adaptive emission qubit count != agent count");
  }
  return out;
}

double dephasing_fidelity_phi0(int n, double sigma) {
  // E|<phi0|psi(theta)>|^2 = sum over even Hamming distances d of
  // C(n,d) e^{-sigma^2 d / 2} / 2^(n-1).
  double total = 0.0;
  for (int d = 0; d <= n; d += 2) {
    double binom = 1.0;
    for (int i = 0; i < d; ++i) binom = binom * (n - i) / (i + 1);
    total += binom * std::exp(-sigma * sigma * d / 2.0);
  }
  return total / std::pow(2.0, n - 1);
}

FidelityEstimate ensemble_fidelity(const SourceStrategy& strategy, int n,
                                   const StateVector& target, int mc_samples,
                                   std::uint64_t mc_seed) {
  target.check_normalized();
  if (target.n_qubits != n) throw ContractViolation("target qubit count != agent count");
  if (std::holds_alternative<IdealSource>(strategy)) {
    return {sim::projector_expectation(make_phi0(n), target), 0.0};
  }
  if (const auto* w = std::get_if<WernerEnsemble>(&strategy)) {
    // p * |<t|phi0>|^2 + (1-p) * mean_y |t_y|^2 = p F0 + (1-p)/2^n.
    const double f0 = sim::projector_expectation(make_phi0(n), target);
    return {w->p * f0 + (1.0 - w->p) / std::pow(2.0, n), 0.0};
  }
  if (const auto* d = std::get_if<DephasingEnsemble>(&strategy)) {
    // E|<t|psi(theta)>|^2 with psi = per-qubit random phases on phi0:
    // sum_{y,y'} conj(t_y) phi_y t_{y'} conj(phi_{y'}) e^{-sigma^2 dist(y,y')/2}.
    const StateVector phi = make_phi0(n);
    const double s2 = d->sigma * d->sigma;
    Amplitude total(0, 0);
    for (std::size_t y = 0; y < phi.dim(); ++y) {
      if (phi.amps[y] == Amplitude(0, 0)) continue;
      for (std::size_t yp = 0; yp < phi.dim(); ++yp) {
        if (phi.amps[yp] == Amplitude(0, 0)) continue;
        const int dist = sim::hamming_weight(y ^ yp);
        total += std::conj(target.amps[y]) * phi.amps[y] * target.amps[yp] *
                 std::conj(phi.amps[yp]) * std::exp(-s2 * dist / 2.0);
      }
    }
    return {total.real(), 0.0};
  }
  if (const auto* f = std::get_if<FixedFamily>(&strategy)) {
    double sum = 0.0;
    for (std::size_t i = 0; i < f->schedule.size(); ++i) {
      sum += sim::projector_expectation(make_family_state(f->schedule[i]), target);
    }
    return {sum / static_cast<double>(f->schedule.size()), 0.0};
  }
  // Adaptive: Monte Carlo over rounds.
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < mc_samples; ++i) {
    const auto emitted = emit_round(strategy, n, i, derive_seed(mc_seed, "fidelity-mc", i));
    const double f = sim::projector_expectation(emitted.state, target);
    sum += f;
    sumsq += f * f;
  }
  const double mean = sum / mc_samples;
  const double var = std::max(0.0, sumsq / mc_samples - mean * mean);
  return {mean, std::sqrt(var / mc_samples)};
}

std::string strategy_kind(const SourceStrategy& strategy) {
  if (std::holds_alternative<IdealSource>(strategy)) return "ideal";
  if (std::holds_alternative<WernerEnsemble>(strategy)) return "werner";
  if (std::holds_alternative<DephasingEnsemble>(strategy)) return "dephasing";
  if (std::holds_alternative<FixedFamily>(strategy)) return "fixed_family";
  return "adaptive";
}

}  // namespace qvote::family
