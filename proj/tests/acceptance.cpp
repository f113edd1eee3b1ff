// Acceptance suite: one check per criterion, one pass/fail line each.
// Exit code = number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "qvote/harness.hpp"
#include "qvote/rng.hpp"

using namespace qvote;
using Clock = std::chrono::steady_clock;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& what) {
  if (!cond) throw Failure(what);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// --- 1. ideal correctness ------------------------------------------------------

void criterion_ideal_correctness() {
  const auto t0 = Clock::now();
  protocol::SecurityParams params;
  params.m = 7;
  params.rounds = 10000;
  for (int mask = 0; mask < 16; ++mask) {  // every intent vector
    std::string intents;
    for (int i = 0; i < 4; ++i) intents.push_back((mask >> i) & 1 ? 'F' : 'E');
    const auto res = protocol::run_election(protocol::make_profiles(intents),
                                            family::IdealSource{}, params,
                                            derive_seed(1001, "acc1", mask));
    require(!res.outcome.aborted, "ideal election aborted for intents " + intents);
    require(res.outcome.verification_pass_rate == 1.0,
            "pass rate not exactly 1.0 for intents " + intents);
    for (std::size_t j = 0; j < res.outcome.voter_success.size(); ++j) {
      require(res.outcome.voter_success[j] == 1,
              "recorded candidate mismatch for intents " + intents);
    }
  }
  require(seconds_since(t0) < 10.0, "ideal correctness exceeded the 10 s budget");
}

// --- 2. parity sampling ---------------------------------------------------------

void criterion_parity_sampling() {
  const auto st = family::make_phi0(4);
  std::vector<std::uint64_t> support;
  for (std::uint64_t y = 0; y < 16; ++y) {
    if (sim::bit_parity(y) == 0) support.push_back(y);
  }
  std::vector<std::uint64_t> samples(100000);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto m = sim::sample_computational(st, derive_seed(1002, "acc2", i));
    require(sim::bit_parity(m.index) == 0, "parity-odd outcome sampled from phi0(4)");
    samples[i] = m.index;
  }
  const auto rep = harness::uniformity_test(samples, support, 4);
  require(rep.status == "ok" && *rep.p_value > 0.001,
          "chi-square rejects uniformity over the 8 parity-even strings");
}

// --- 3. transformation laws -----------------------------------------------------

void criterion_transformation_laws() {
  for (std::uint64_t mask = 0; mask < 16; ++mask) {
    const int sz = sim::hamming_weight(mask);
    if (sz % 2 == 1) continue;
    std::vector<int> subset;
    std::vector<sim::LocalGate> gates(4, sim::LocalGate::PauliZ);
    for (int q = 0; q < 4; ++q) {
      if ((mask >> q) & 1) {
        subset.push_back(q);
        gates[q] = sim::LocalGate::Hadamard;
      }
    }
    const auto got = sim::apply_local(family::make_phi0(4), gates);
    const auto target = sz % 4 == 0 ? family::make_phi0(4) : family::make_phi1(4);
    require(sim::distance_up_to_phase(got, target) <= 1e-9,
            "transformed state does not match the family target for |S|=" + std::to_string(sz));
    const auto label = family::transformation_property_check(4, subset);
    require(label.kind == (sz % 4 == 0 ? family::FamilyKind::Phi0 : family::FamilyKind::Phi1),
            "classification disagrees with the transformation law");
  }
}

// --- 4. appendix determinism ----------------------------------------------------

void criterion_appendix_determinism() {
  const double tol = 1e-9;
  for (const family::FamilyKind kind : {family::FamilyKind::Phi0, family::FamilyKind::Phi1,
                                        family::FamilyKind::Psi0, family::FamilyKind::Psi1}) {
    const int parity =
        (kind == family::FamilyKind::Psi0 || kind == family::FamilyKind::Psi1) ? 1 : 0;
    for (int sign : {+1, -1}) {
      const auto st = family::make_family_state({kind, sign, 3});
      for (std::uint64_t mask = 0; mask < 8; ++mask) {
        if ((sim::hamming_weight(mask) & 1) != parity) continue;
        std::vector<int> subset;
        for (int q = 0; q < 3; ++q) {
          if ((mask >> q) & 1) subset.push_back(q);
        }
        const double p = adversary::outcome_parity_odd_probability(st, subset);
        require(p <= tol || p >= 1.0 - tol,
                "family state " + family::family_kind_name(kind) +
                    " parity statistic not deterministic");
      }
      const auto an = adversary::analyze_parity_determinism(st, parity);
      require(an.deterministic && an.constant_statistic,
              "family state fails the determinism analysis");
    }
  }
  const auto w = family::make_w(3);
  double margin = 0.0;
  for (std::uint64_t mask = 0; mask < 8; ++mask) {
    if (sim::hamming_weight(mask) & 1) continue;
    std::vector<int> subset;
    for (int q = 0; q < 3; ++q) {
      if ((mask >> q) & 1) subset.push_back(q);
    }
    const double p = adversary::outcome_parity_odd_probability(w, subset);
    margin = std::max(margin, std::min(p, 1.0 - p));
  }
  require(margin >= 0.05, "W state shows no non-deterministic basis combination");
}

// --- 5. adversary soundness dichotomy -------------------------------------------

void criterion_soundness_dichotomy() {
  std::vector<std::string> family_scenarios;
  for (const auto& name : adversary::scenario_names()) {
    if (name.rfind("family-", 0) == 0) family_scenarios.push_back(name);
  }
  require(family_scenarios.size() == 9, "unexpected family scenario catalog");
  for (const auto& name : family_scenarios) {
    const auto sc = adversary::make_scenario(name);
    const double p = adversary::scenario_pass_probability(sc);
    require(std::abs(p - 1.0) <= 1e-12, "family scenario " + name + " pass probability != 1");
  }
  const auto w = adversary::exhaustive_policy_search(family::make_w(3), 3, 4);
  require(w.best_pass_probability < 1.0 - 1e-9, "W-state attack reaches pass probability 1");
  const auto z =
      adversary::exhaustive_policy_search(sim::StateVector::basis_state(3, 0), 3, 4);
  require(z.best_pass_probability < 1.0 - 1e-9, "|000> attack reaches pass probability 1");
}

// --- 6. anonymity audit ---------------------------------------------------------

void criterion_anonymity_audit() {
  std::vector<std::string> scenarios = {"ideal"};
  for (const auto& name : adversary::scenario_names()) {
    if (name.rfind("family-", 0) == 0) scenarios.push_back(name);
  }
  for (const auto& name : scenarios) {
    const auto report =
        adversary::anonymity_audit(adversary::make_scenario(name), 10000,
                                   derive_seed(1006, "acc6", std::hash<std::string>{}(name)));
    require(!report.refused, "audit refused scenario " + name);
    require(report.homogeneity.p_value > 0.001,
            "homogeneity rejected for scenario " + name);
    require(report.mi.mi_bits <= 0.01, "MI above 0.01 bits for scenario " + name);
    require(!report.flagged, "audit flagged scenario " + name);
  }
  const auto leak =
      adversary::anonymity_audit(adversary::make_scenario("leak-control"), 10000, 77);
  require(!leak.refused, "audit refused the leak control");
  require(leak.flagged, "planted leak control was not flagged");
}

// --- 7. noise model consistency --------------------------------------------------

void criterion_noise_model() {
  const auto w = family::WernerEnsemble::from_fidelity(0.89, 4);
  protocol::SecurityParams params;
  params.m = 7;
  params.rounds = 20500;
  params.tau = 0.2;
  const auto res = protocol::run_election(protocol::make_profiles("EEEE"), w, params, 1007);
  require(res.outcome.verifying_rounds >= 10000, "fewer than 1e4 verifying rounds");
  const double oracle = harness::werner_pass_probability_oracle(w.p, 4);
  const double sigma =
      std::sqrt(oracle * (1.0 - oracle) / double(res.outcome.verifying_rounds));
  require(std::abs(res.outcome.verification_pass_rate - oracle) <= 3.0 * sigma,
          "Monte Carlo failure rate disagrees with the enumeration oracle beyond 3 sigma");

  // The report contextualizes the hardware numbers without claiming to
  // reproduce them: references carry provenance tags.
  harness::ExperimentConfig cfg;
  cfg.source = harness::json{{"kind", "werner"}, {"fidelity", 0.89}, {"n", 4}};
  cfg.security = params;
  cfg.seed = 1007;
  const auto exp = harness::run_experiment(cfg);
  bool has_oracle_ref = false, has_hardware_ref = false;
  for (const auto& rep : exp.reports) {
    for (const auto& ref : rep.references) {
      has_oracle_ref = has_oracle_ref || (ref.tag == adversary::Provenance::Derived);
      has_hardware_ref =
          has_hardware_ref || (ref.tag == adversary::Provenance::Paper && ref.value == 0.87);
    }
  }
  require(has_oracle_ref && has_hardware_ref,
          "report does not juxtapose the model oracle with the hardware reference");
  require(exp.all_ok, "werner experiment flags a violation");
}

// --- 8. coincidence pipeline ------------------------------------------------------

std::vector<coincidence::TimestampEvent> acc_random_stream(std::uint64_t seed, int n_events,
                                                           std::uint64_t span_ps) {
  Rng rng(seed);
  std::vector<coincidence::TimestampEvent> events(n_events);
  for (auto& e : events) {
    e.t_ps = rng.uniform_int(span_ps);
    e.channel = static_cast<std::uint8_t>(rng.uniform_int(coincidence::kChannels));
  }
  std::sort(events.begin(), events.end());
  return events;
}

void criterion_coincidence_pipeline() {
  using namespace coincidence;
  const ChannelMap map;

  // Streaming output equals the quadratic brute force on 1e4-event streams.
  for (std::uint64_t seed : {21, 22, 23}) {
    const auto stream = acc_random_stream(seed, 10000, 2'000'000);
    const std::uint64_t W = 1000;
    std::vector<TimestampEvent> ref_filtered;
    for (std::size_t i = 0; i < stream.size(); ++i) {
      bool drop = false;
      for (std::size_t j = 0; j < stream.size() && !drop; ++j) {
        if (i == j) continue;
        if (map.decode(stream[i].channel).agent != map.decode(stream[j].channel).agent) continue;
        const auto dt = stream[i].t_ps > stream[j].t_ps ? stream[i].t_ps - stream[j].t_ps
                                                        : stream[j].t_ps - stream[i].t_ps;
        drop = dt <= W;
      }
      if (!drop) ref_filtered.push_back(stream[i]);
    }
    std::vector<FourfoldEvent> ref_folds;
    std::size_t i = 0;
    while (i < ref_filtered.size()) {
      std::size_t end = i;
      while (end < ref_filtered.size() && ref_filtered[end].t_ps <= ref_filtered[i].t_ps + W) {
        ++end;
      }
      if (end - i == kAgents) {
        FourfoldEvent f;
        std::array<bool, kAgents> seen{};
        bool ok = true;
        for (std::size_t j = i; j < end; ++j) {
          const int agent = map.decode(ref_filtered[j].channel).agent;
          if (seen[agent - 1]) ok = false;
          seen[agent - 1] = true;
          f.by_agent[agent - 1] = ref_filtered[j];
        }
        if (ok) {
          ref_folds.push_back(f);
          i = end;
          continue;
        }
      }
      ++i;
    }
    require(veto_filter(stream, W, map) == ref_filtered, "veto differs from brute force");
    require(run_pipeline(stream, W, map) == ref_folds, "pipeline differs from brute force");
  }

  // Planted recall 1.0 at experiment-like rates.
  StreamConfig cfg;  // 0.3 fourfolds/s, 300 dark counts/s/channel, 1 ns window
  cfg.duration_s = 100.0;
  const auto schedule = make_random_schedule(cfg, map, 1008);
  const auto stream = generate_stream(cfg, schedule, 1008);
  const auto folds = run_pipeline(stream.events, cfg.window_ps, map);
  std::size_t matched = 0, cursor = 0;
  for (const auto& truth : schedule) {
    for (std::size_t j = cursor; j < folds.size(); ++j) {
      bool same = true;
      for (int a = 0; a < kAgents; ++a) {
        same = same && folds[j].by_agent[a].channel == truth.channels[a];
      }
      if (same) {
        const auto t = decode_fourfold(folds[j], map).t_ps;
        if (t + 5000 > truth.t_ps && t < truth.t_ps + 5000) {
          ++matched;
          cursor = j + 1;
          break;
        }
      }
    }
  }
  require(matched == schedule.size(), "planted-event recall below 1.0 at experiment rates");

  // 1e7 synthetic events processed in under 60 s.
  StreamConfig big;
  big.dark_rate_hz_per_channel = 62500.0;  // 16 channels * 10 s -> 1e7 events
  big.fourfold_rate_hz = 0.0;
  big.duration_s = 10.0;
  const auto big_stream = generate_stream(big, {}, 1009);
  require(big_stream.events.size() > 9'500'000, "benchmark stream too small");
  const auto t0 = Clock::now();
  const auto big_folds = run_pipeline(big_stream.events, big.window_ps, map);
  const double elapsed = seconds_since(t0);
  require(elapsed < 60.0, "pipeline needed " + std::to_string(elapsed) + " s for 1e7 events");

  // Chunk-size invariance on the benchmark prefix.
  const std::vector<TimestampEvent> prefix(big_stream.events.begin(),
                                           big_stream.events.begin() + 200000);
  const auto whole = run_pipeline(prefix, big.window_ps, map);
  for (const std::size_t chunk : {std::size_t(1), std::size_t(1009)}) {
    std::vector<FourfoldEvent> out;
    FourfoldFinder finder(big.window_ps, map, [&](const FourfoldEvent& f) { out.push_back(f); });
    VetoFilter veto(big.window_ps, map, [&](const TimestampEvent& e) { finder.push(e); });
    std::size_t i = 0;
    while (i < prefix.size()) {
      const std::size_t end = std::min(prefix.size(), i + chunk);
      for (; i < end; ++i) veto.push(prefix[i]);
    }
    veto.finish();
    finder.finish();
    require(out == whole, "output depends on chunk size");
  }
  (void)big_folds;
}

// --- 9. reproducibility ------------------------------------------------------------

void criterion_reproducibility() {
  harness::ExperimentConfig cfg;
  cfg.intents = "EFFE";
  cfg.security.m = 5;
  cfg.security.rounds = 3000;
  cfg.seed = 1010;
  cfg.transcript_path = "acc9_a.jsonl";
  cfg.summary_path = "acc9_a.json";
  harness::run_experiment(cfg);
  const auto t1 = harness::read_text_file("acc9_a.jsonl");
  const auto s1 = harness::read_text_file("acc9_a.json");

  cfg.transcript_path = "acc9_b.jsonl";
  cfg.summary_path = "acc9_b.json";
  harness::run_experiment(cfg);
  require(harness::read_text_file("acc9_b.jsonl") == t1,
          "two identical runs produced different transcripts");
  require(harness::read_text_file("acc9_b.json") == s1,
          "two identical runs produced different summaries");

  cfg.threads = 4;
  cfg.transcript_path = "acc9_c.jsonl";
  cfg.summary_path = "acc9_c.json";
  harness::run_experiment(cfg);
  require(harness::read_text_file("acc9_c.jsonl") == t1,
          "worker count changed the transcript");
  for (const char* p : {"acc9_a.jsonl", "acc9_a.json", "acc9_b.jsonl", "acc9_b.json",
                        "acc9_c.jsonl", "acc9_c.json"}) {
    std::remove(p);
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
      {"1 ideal correctness: pass rate 1.0, intents recorded, < 10 s", criterion_ideal_correctness},
      {"2 parity sampling: even support only, uniform at p > 0.001", criterion_parity_sampling},
      {"3 transformation laws: exhaustive even subsets, 1e-9 phase match",
       criterion_transformation_laws},
      {"4 appendix determinism: eight family states + W counterexample",
       criterion_appendix_determinism},
      {"5 soundness dichotomy: family passes at 1, naive stays below 1",
       criterion_soundness_dichotomy},
      {"6 anonymity audit: no leak for ideal/family, control flagged",
       criterion_anonymity_audit},
      {"7 noise model: Monte Carlo matches the enumeration oracle at 3 sigma",
       criterion_noise_model},
      {"8 coincidence pipeline: brute-force equality, recall, throughput, chunking",
       criterion_coincidence_pipeline},
      {"9 reproducibility: byte-identical transcripts, worker-count invariance",
       criterion_reproducibility},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = Clock::now();
    try {
      fn();
      std::printf("[PASS] criterion %s (%.2fs)\n", name.c_str(), seconds_since(t0));
    } catch (const std::exception& e) {
      ++failures;
      std::printf("[FAIL] criterion %s: %s\n", name.c_str(), e.what());
    }
    std::fflush(stdout);
  }
  if (failures == 0) {
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
  } else {
    std::printf("%d acceptance criteria FAILED\n", failures);
  }
  return failures;
}
