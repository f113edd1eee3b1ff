#include <algorithm>
#include <cmath>
#include <complex>

#include "qvote/harness.hpp"
#include "qvote/rng.hpp"

namespace qvote::harness {

using family::FamilyKind;
using family::FamilyLabel;
using protocol::Basis;
using protocol::Classification;
using sim::LocalGate;
using sim::StateVector;

namespace {

StatReport named(const std::string& metric) {
  StatReport r;
  r.metric = metric;
  return r;
}

void fail(StatReport& r, const std::string& why) {
  r.status = "violation";
  if (r.details.empty()) r.details = why;
}

StatReport check_gate_algebra() {
  StatReport r = named("gate_algebra");
  const auto mul = [](const sim::GateMatrix& a, const sim::GateMatrix& b) {
    return sim::GateMatrix{a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
                           a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
  };
  const auto maxdiff = [](const sim::GateMatrix& a, const sim::GateMatrix& b) {
    return std::max({std::abs(a.m00 - b.m00), std::abs(a.m01 - b.m01), std::abs(a.m10 - b.m10),
                     std::abs(a.m11 - b.m11)});
  };
  const auto h = sim::gate_matrix(LocalGate::Hadamard);
  const auto s = sim::gate_matrix(LocalGate::SqrtZ);
  const double e1 = maxdiff(mul(h, h), sim::gate_matrix(LocalGate::Identity));
  const double e2 = maxdiff(mul(s, s), sim::gate_matrix(LocalGate::PauliZ));
  r.estimate = std::max(e1, e2);
  if (r.estimate > 1e-12) fail(r, "gate identities H^2=I or SqrtZ^2=Z violated");
  return r;
}

StatReport check_norm_preservation(std::uint64_t seed, int trials) {
  StatReport r = named("norm_preservation");
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, "norm-prop", t));
    const int n = 1 + static_cast<int>(rng.uniform_int(5));
    std::vector<sim::Amplitude> a(std::size_t(1) << n);
    double norm = 0.0;
    for (auto& x : a) {
      x = {rng.normal(0, 1), rng.normal(0, 1)};
      norm += std::norm(x);
    }
    norm = std::sqrt(norm);
    for (auto& x : a) x /= norm;
    StateVector st(n, std::move(a));
    const int depth = 1 + static_cast<int>(rng.uniform_int(4));
    for (int d = 0; d < depth; ++d) {
      std::vector<LocalGate> gates(n);
      for (auto& g : gates) g = static_cast<LocalGate>(rng.uniform_int(5));
      st = sim::apply_local(st, gates);
    }
    worst = std::max(worst, std::abs(st.norm2() - 1.0));
  }
  r.estimate = worst;
  if (worst > 1e-9) fail(r, "gate application drifted the norm");
  return r;
}

StatReport check_support_parity() {
  StatReport r = named("family_support_parity");
  for (int n = 1; n <= 8; ++n) {
    const StateVector p0 = family::make_phi0(n);
    const StateVector p1 = family::make_phi1(n);
    for (std::uint64_t y = 0; y < p0.dim(); ++y) {
      const bool odd = sim::bit_parity(y) == 1;
      if (odd && p0.amps[y] != sim::Amplitude(0, 0)) fail(r, "phi0 has odd-weight support");
      if (!odd && p1.amps[y] != sim::Amplitude(0, 0)) fail(r, "phi1 has even-weight support");
    }
  }
  return r;
}

StatReport check_transformation_laws() {
  StatReport r = named("transformation_laws_exhaustive");
  const int n = 4;
  double worst = 0.0;
  for (std::uint64_t mask = 0; mask < 16; ++mask) {
    const int sz = sim::hamming_weight(mask);
    if (sz & 1) continue;
    std::vector<int> subset;
    for (int q = 0; q < n; ++q) {
      if ((mask >> q) & 1) subset.push_back(q);
    }
    const FamilyLabel label = family::transformation_property_check(n, subset);
    const FamilyKind want = sz % 4 == 0 ? FamilyKind::Phi0 : FamilyKind::Phi1;
    if (label.kind != want) {
      fail(r, "subset of size " + std::to_string(sz) + " mapped to " +
                  family::family_kind_name(label.kind));
      continue;
    }
    // Vector-level check up to global phase.
    std::vector<LocalGate> gates(n, LocalGate::PauliZ);
    for (int q : subset) gates[q] = LocalGate::Hadamard;
    const StateVector got = sim::apply_local(family::make_phi0(n), gates);
    const StateVector target = want == FamilyKind::Phi0 ? family::make_phi0(n)
                                                        : family::make_phi1(n);
    worst = std::max(worst, sim::distance_up_to_phase(got, target));
  }
  r.estimate = worst;
  if (worst > 1e-9) fail(r, "transformed state differs from the family target");
  return r;
}

StatReport check_appendix_determinism() {
  StatReport r = named("appendix_determinism");
  const int k = 3;
  for (const FamilyKind kind :
       {FamilyKind::Phi0, FamilyKind::Phi1, FamilyKind::Psi0, FamilyKind::Psi1}) {
    const int parity = (kind == FamilyKind::Psi0 || kind == FamilyKind::Psi1) ? 1 : 0;
    for (int sign : {+1, -1}) {
      const StateVector st = family::make_family_state({kind, sign, k});
      const auto an = adversary::analyze_parity_determinism(st, parity);
      if (!an.deterministic) {
        fail(r, "family state " + family::family_kind_name(kind) + " not deterministic");
      }
      if (!an.constant_statistic) {
        fail(r, "family state " + family::family_kind_name(kind) + " has subset-dependent statistic");
      }
    }
  }
  // W-state counterexample: some even combination must be genuinely random.
  const StateVector w = family::make_w(k);
  double best_margin = 0.0;
  for (std::uint64_t mask = 0; mask < 8; ++mask) {
    if (sim::hamming_weight(mask) & 1) continue;
    std::vector<int> subset;
    for (int q = 0; q < k; ++q) {
      if ((mask >> q) & 1) subset.push_back(q);
    }
    const double p = adversary::outcome_parity_odd_probability(w, subset);
    best_margin = std::max(best_margin, std::min(p, 1.0 - p));
  }
  r.estimate = best_margin;
  if (best_margin < 0.05) fail(r, "W state parity statistic looks deterministic");
  return r;
}

StatReport check_sampling_uniformity(std::uint64_t seed, int samples) {
  StatReport rep = named("phi0_sampling_uniformity");
  const StateVector st = family::make_phi0(4);
  std::vector<std::uint64_t> support;
  for (std::uint64_t y = 0; y < 16; ++y) {
    if (sim::bit_parity(y) == 0) support.push_back(y);
  }
  std::vector<std::uint64_t> draws(samples);
  for (int i = 0; i < samples; ++i) {
    draws[i] = sim::sample_computational(st, derive_seed(seed, "uniformity", i)).index;
  }
  StatReport inner = uniformity_test(draws, support, 4);
  inner.metric = rep.metric;
  return inner;
}

StatReport check_basis_fractions(std::uint64_t seed, int rounds) {
  StatReport r = named("basis_choice_fractions");
  const int n = 4;
  std::vector<std::uint64_t> h_count(n, 0);
  std::uint64_t odd_rounds = 0;
  for (int round = 0; round < rounds; ++round) {
    int h = 0;
    for (int agent = 1; agent <= n; ++agent) {
      if (protocol::choose_basis(agent, round, seed) == Basis::Hadamard) {
        ++h_count[agent - 1];
        ++h;
      }
    }
    odd_rounds += h & 1;
  }
  const double sigma = 0.5 / std::sqrt(static_cast<double>(rounds));
  double worst = std::abs(static_cast<double>(odd_rounds) / rounds - 0.5);
  for (int a = 0; a < n; ++a) {
    worst = std::max(worst, std::abs(static_cast<double>(h_count[a]) / rounds - 0.5));
  }
  r.estimate = worst;
  r.std_error = sigma;
  if (worst > 3 * sigma) fail(r, "basis fractions outside the 3-sigma binomial band");
  return r;
}

StatReport check_classification_fractions(std::uint64_t seed, int rounds) {
  StatReport r = named("classification_fractions");
  protocol::SecurityParams params;
  params.m = 3;
  params.rounds = rounds;
  const auto res = protocol::run_election(protocol::make_profiles("EEEE"),
                                          family::IdealSource{}, params, seed);
  std::uint64_t voting = 0;
  for (const auto& rec : res.transcript) voting += rec.classification == Classification::Voting;
  const double pd = 0.5;
  const double pv = 0.5 * std::pow(2.0, -params.m);
  const double pf = 0.5 * (1.0 - std::pow(2.0, -params.m));
  const auto band = [&](double frac, double p) {
    return std::abs(frac - p) <= 3.0 * std::sqrt(p * (1 - p) / rounds);
  };
  const double fd = static_cast<double>(res.outcome.discarded_rounds) / rounds;
  const double fv = static_cast<double>(voting) / rounds;
  const double ff = static_cast<double>(res.outcome.verifying_rounds) / rounds;
  r.estimate = fd;
  if (!band(fd, pd)) fail(r, "discard fraction outside 3 sigma");
  if (!band(fv, pv)) fail(r, "voting fraction outside 3 sigma");
  if (!band(ff, pf)) fail(r, "verifying fraction outside 3 sigma");
  return r;
}

StatReport check_ideal_completeness(std::uint64_t seed, int rounds) {
  StatReport r = named("ideal_completeness_and_oracle_equivalence");
  const std::vector<std::string> intent_sets = {"EEEE", "EFEF", "FFFF", "EFFE"};
  protocol::SecurityParams params;
  params.m = 3;
  params.rounds = rounds;
  for (std::size_t i = 0; i < intent_sets.size(); ++i) {
    const auto profiles = protocol::make_profiles(intent_sets[i]);
    const std::uint64_t s = derive_seed(seed, "ideal-run", i);
    const auto res = protocol::run_election(profiles, family::IdealSource{}, params, s);
    if (res.outcome.aborted || res.outcome.verification_pass_rate != 1.0) {
      fail(r, "ideal run aborted or failed verification");
      continue;
    }
    // Parity bookkeeping: every non-discarded round satisfies the identity.
    for (const auto& rec : res.transcript) {
      if (rec.classification == Classification::Discarded) continue;
      if (rec.voter_index) continue;  // broadcast rows carry the voter flip
      int h = 0;
      for (Basis b : rec.bases) h += b == Basis::Hadamard;
      int sum = 0;
      for (auto y : rec.outcomes) sum += y;
      if ((h / 2) % 2 != sum % 2) fail(r, "parity bookkeeping violated in transcript");
    }
    // The classical baseline with the same intents must record the same candidates.
    const auto base = protocol::classical_baseline_election(profiles, derive_seed(s, "baseline"));
    if (base.outcome.votes_e != res.outcome.votes_e ||
        base.outcome.votes_f != res.outcome.votes_f) {
      fail(r, "quantum and classical recorded candidates differ");
    }
    for (std::size_t v = 0; v < res.outcome.voter_success.size(); ++v) {
      if (!res.outcome.voter_success[v] || !base.outcome.voter_success[v]) {
        fail(r, "a voter's recorded candidate does not match their intent");
      }
    }
  }
  return r;
}

StatReport check_abort_monotonicity(std::uint64_t seed) {
  StatReport r = named("abort_monotonicity");
  protocol::SecurityParams params;
  params.m = 3;
  params.rounds = 2000;
  family::FixedFamily all_phi1;
  all_phi1.schedule = {{FamilyKind::Phi1, +1, 4}};
  const auto res = protocol::run_election(protocol::make_profiles("EEEE"), all_phi1, params, seed);
  r.estimate = res.outcome.verification_pass_rate;
  if (res.outcome.verification_pass_rate != 0.0) {
    fail(r, "phi1 source should fail every verifying round");
  }
  if (!res.outcome.aborted || res.outcome.status != protocol::ElectionStatus::AbortedVerification) {
    fail(r, "pass rate below 1 - tau must abort");
  }
  return r;
}

StatReport check_discard_parity_lemma(std::uint64_t seed) {
  StatReport r = named("discard_parity_lemma");
  const auto scenario = adversary::make_scenario("family-mixed");
  protocol::SecurityParams params;
  params.m = 3;
  params.rounds = 1500;
  std::vector<int> dishonest;
  for (int id = scenario.k + 1; id <= scenario.n; ++id) dishonest.push_back(id);
  const auto profiles = protocol::make_profiles("EEEE", dishonest);
  const auto res = protocol::run_election(profiles, scenario.source, params, seed,
                                          scenario.policy.get());
  for (const auto& rec : res.transcript) {
    int h_h = 0, h_d = 0;
    for (int i = 0; i < scenario.n; ++i) {
      const bool had = rec.bases[i] == Basis::Hadamard;
      if (i < scenario.k) h_h += had;
      else h_d += had;
    }
    const bool accepted = rec.classification != Classification::Discarded;
    if (accepted && (h_h & 1) != (h_d & 1)) {
      fail(r, "accepted round with mismatched honest/dishonest Hadamard parity");
    }
  }
  r.estimate = res.outcome.verification_pass_rate;
  if (res.outcome.verification_pass_rate != 1.0) {
    fail(r, "family attack should pass every verifying round");
  }
  return r;
}

StatReport check_werner_oracle(std::uint64_t seed, int rounds) {
  StatReport r = named("werner_pass_rate_vs_oracle");
  const auto werner = family::WernerEnsemble::from_fidelity(0.89, 4);
  protocol::SecurityParams params;
  params.m = 7;
  params.rounds = rounds;
  params.tau = 0.2;
  const auto res = protocol::run_election(protocol::make_profiles("EEEE"), werner, params, seed);
  const double oracle = werner_pass_probability_oracle(werner.p, 4);
  const double n_ver = static_cast<double>(res.outcome.verifying_rounds);
  const double sigma = std::sqrt(oracle * (1 - oracle) / n_ver);
  r.estimate = res.outcome.verification_pass_rate;
  r.std_error = sigma;
  r.references.push_back({oracle, Provenance::Derived, "exact enumeration oracle"});
  if (std::abs(res.outcome.verification_pass_rate - oracle) > 3 * sigma) {
    fail(r, "Monte Carlo pass rate disagrees with the enumeration oracle");
  }
  return r;
}

StatReport check_reproducibility(std::uint64_t seed) {
  StatReport r = named("reproducibility");
  protocol::SecurityParams params;
  params.m = 3;
  params.rounds = 600;
  const auto profiles = protocol::make_profiles("EFEF");
  const auto a = protocol::run_election(profiles, family::IdealSource{}, params, seed, nullptr, 1);
  const auto b = protocol::run_election(profiles, family::IdealSource{}, params, seed, nullptr, 1);
  const auto c = protocol::run_election(profiles, family::IdealSource{}, params, seed, nullptr, 3);
  const std::string ta = transcript_to_jsonl(a.transcript);
  if (ta != transcript_to_jsonl(b.transcript)) fail(r, "identical configs produced different bytes");
  if (ta != transcript_to_jsonl(c.transcript)) fail(r, "worker count changed the results");
  return r;
}

StatReport check_pipeline_consistency(std::uint64_t seed) {
  StatReport r = named("pipeline_consistency");
  ExperimentConfig pure;
  pure.mode = "elect";
  pure.intents = "EFEF";
  pure.security.m = 3;
  pure.security.rounds = 400;
  pure.seed = seed;
  ExperimentConfig streamed = pure;
  streamed.mode = "stream-elect";
  coincidence::StreamConfig sc;
  sc.dark_rate_hz_per_channel = 0.0;
  sc.fourfold_rate_hz = 0.3;
  sc.jitter_ps = 50.0;
  streamed.stream = sc;
  const auto res_pure = run_experiment(pure);
  const auto res_stream = run_experiment(streamed);
  const json a = res_pure.summary.contains("votes") ? res_pure.summary["votes"] : json{};
  const json b = res_stream.summary.contains("votes") ? res_stream.summary["votes"] : json{};
  if (a != b ||
      res_pure.summary["verification"] != res_stream.summary["verification"] ||
      res_pure.summary["status"] != res_stream.summary["status"]) {
    fail(r, "stream-driven election differs from the pure protocol under the same seed");
  }
  return r;
}

}  // namespace

std::vector<StatReport> run_property_checks(std::uint64_t seed, bool quick) {
  const int samples = quick ? 20000 : 100000;
  const int rounds = quick ? 4000 : 20000;
  std::vector<StatReport> out;
  out.push_back(check_gate_algebra());
  out.push_back(check_norm_preservation(seed, quick ? 40 : 200));
  out.push_back(check_support_parity());
  out.push_back(check_transformation_laws());
  out.push_back(check_appendix_determinism());
  out.push_back(check_sampling_uniformity(seed, samples));
  out.push_back(check_basis_fractions(seed, samples));
  out.push_back(check_classification_fractions(seed, rounds));
  out.push_back(check_ideal_completeness(seed, quick ? 3000 : 10000));
  out.push_back(check_abort_monotonicity(seed));
  out.push_back(check_discard_parity_lemma(seed));
  out.push_back(check_werner_oracle(seed, quick ? 6000 : 21000));
  out.push_back(check_reproducibility(seed));
  out.push_back(check_pipeline_consistency(seed));
  return out;
}

}  // namespace qvote::harness
