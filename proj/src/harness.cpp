#include "qvote/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qvote/rng.hpp"

namespace qvote::harness {

using adversary::AttackScenario;
using coincidence::StreamConfig;
using family::FamilyLabel;
using family::SourceStrategy;
using protocol::Basis;
using protocol::Classification;
using protocol::RoundRecord;
using sim::StateVector;

namespace {

Provenance provenance_from_name(const std::string& s) {
  if (s == "paper") return Provenance::Paper;
  if (s == "trivial") return Provenance::Trivial;
  if (s == "derived") return Provenance::Derived;
  throw std::runtime_error("unknown provenance tag: " + s);
}

}  // namespace

json ref_to_json(const RefValue& r) {
  json j;
  j["value"] = r.value;
  j["tag"] = adversary::provenance_name(r.tag);
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

RefValue ref_from_json(const json& j) {
  if (!j.contains("tag")) {
    throw std::runtime_error("reference value lacks a provenance tag");
  }
  RefValue r;
  r.value = j.at("value").get<double>();
  r.tag = provenance_from_name(j.at("tag").get<std::string>());
  r.note = j.value("note", "");
  return r;
}

json report_to_json(const StatReport& r) {
  json j;
  j["metric"] = r.metric;
  j["estimate"] = r.estimate;
  j["std_error"] = r.std_error;
  if (r.statistic) j["statistic"] = *r.statistic;
  if (r.p_value) j["p_value"] = *r.p_value;
  if (r.interval) j["interval"] = json::array({r.interval->lo, r.interval->hi});
  if (!r.references.empty()) {
    json refs = json::array();
    for (const auto& ref : r.references) refs.push_back(ref_to_json(ref));
    j["references"] = refs;
  }
  j["status"] = r.status;
  if (!r.details.empty()) j["details"] = r.details;
  return j;
}

StatReport report_from_json(const json& j) {
  StatReport r;
  r.metric = j.at("metric").get<std::string>();
  r.estimate = j.at("estimate").get<double>();
  r.std_error = j.value("std_error", 0.0);
  if (j.contains("statistic")) r.statistic = j.at("statistic").get<double>();
  if (j.contains("p_value")) r.p_value = j.at("p_value").get<double>();
  if (j.contains("interval")) {
    r.interval = stats::Interval{j.at("interval")[0].get<double>(),
                                 j.at("interval")[1].get<double>()};
  }
  if (j.contains("references")) {
    for (const auto& ref : j.at("references")) r.references.push_back(ref_from_json(ref));
  }
  r.status = j.value("status", "ok");
  r.details = j.value("details", "");
  return r;
}

json strategy_to_json(const SourceStrategy& s) {
  json j;
  j["kind"] = family::strategy_kind(s);
  if (const auto* w = std::get_if<family::WernerEnsemble>(&s)) {
    j["p"] = w->p;
  } else if (const auto* d = std::get_if<family::DephasingEnsemble>(&s)) {
    j["sigma"] = d->sigma;
  } else if (const auto* f = std::get_if<family::FixedFamily>(&s)) {
    json sched = json::array();
    for (const FamilyLabel& l : f->schedule) {
      sched.push_back(json{{"family", family::family_kind_name(l.kind)},
                           {"sign", l.sign},
                           {"n", l.n}});
    }
    j["schedule"] = sched;
  } else if (const auto* a = std::get_if<family::AdaptiveMalicious>(&s)) {
    j["kind"] = "scenario";
    j["name"] = a->name;
  }
  return j;
}

SourceStrategy strategy_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "ideal") return family::IdealSource{};
  if (kind == "werner") {
    if (j.contains("fidelity")) {
      return family::WernerEnsemble::from_fidelity(j.at("fidelity").get<double>(),
                                                   j.value("n", 4));
    }
    return family::WernerEnsemble{j.at("p").get<double>()};
  }
  if (kind == "dephasing") return family::DephasingEnsemble{j.at("sigma").get<double>()};
  if (kind == "fixed_family") {
    family::FixedFamily f;
    for (const auto& e : j.at("schedule")) {
      f.schedule.push_back({family::family_kind_from_name(e.at("family").get<std::string>()),
                            e.at("sign").get<int>(), e.at("n").get<int>()});
    }
    return f;
  }
  if (kind == "scenario") {
    return adversary::make_scenario(j.at("name").get<std::string>()).source;
  }
  throw std::runtime_error("unknown source kind: " + kind);
}

json stream_config_to_json(const StreamConfig& c) {
  json j;
  j["pulse_hz"] = c.pulse_rate_hz;
  j["fourfold_hz"] = c.fourfold_rate_hz;
  j["dark_hz"] = c.dark_rate_hz_per_channel;
  j["jitter_ps"] = c.jitter_ps;
  j["window_ps"] = c.window_ps;
  j["duration_s"] = c.duration_s;
  return j;
}

StreamConfig stream_config_from_json(const json& j) {
  StreamConfig c;
  c.pulse_rate_hz = j.value("pulse_hz", c.pulse_rate_hz);
  c.fourfold_rate_hz = j.value("fourfold_hz", c.fourfold_rate_hz);
  c.dark_rate_hz_per_channel = j.value("dark_hz", c.dark_rate_hz_per_channel);
  c.jitter_ps = j.value("jitter_ps", c.jitter_ps);
  c.window_ps = j.value("window_ps", c.window_ps);
  c.duration_s = j.value("duration_s", c.duration_s);
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["mode"] = c.mode;
  j["agents"] = c.agents;
  j["intents"] = c.intents;
  j["source"] = c.source;
  j["security"] = json{{"m", c.security.m}, {"tau", c.security.tau}, {"rounds", c.security.rounds}};
  if (!c.scenario.empty()) j["scenario"] = c.scenario;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  if (c.stream) j["stream"] = stream_config_to_json(*c.stream);
  if (!c.transcript_path.empty()) j["transcript_path"] = c.transcript_path;
  if (!c.summary_path.empty()) j["summary_path"] = c.summary_path;
  if (!c.report_path.empty()) j["report_path"] = c.report_path;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  c.mode = j.value("mode", "elect");
  c.agents = j.value("agents", 4);
  c.intents = j.value("intents", std::string(c.agents, 'E'));
  if (j.contains("source")) c.source = j.at("source");
  if (j.contains("security")) {
    const auto& s = j.at("security");
    c.security.m = s.value("m", c.security.m);
    c.security.tau = s.value("tau", c.security.tau);
    c.security.rounds = s.value("rounds", c.security.rounds);
  }
  c.scenario = j.value("scenario", "");
  c.trials = j.value("trials", std::uint64_t(10000));
  c.seed = j.value("seed", std::uint64_t(1));
  c.threads = j.value("threads", 1);
  if (j.contains("stream")) c.stream = stream_config_from_json(j.at("stream"));
  c.transcript_path = j.value("transcript_path", "");
  c.summary_path = j.value("summary_path", "");
  c.report_path = j.value("report_path", "");
  if (static_cast<int>(c.intents.size()) != c.agents) {
    throw std::runtime_error("intents length must equal agent count");
  }
  return c;
}

namespace {
std::string classification_name(Classification c) {
  switch (c) {
    case Classification::Discarded: return "discarded";
    case Classification::Voting: return "voting";
    case Classification::Verifying: return "verifying";
  }
  return "discarded";
}

Classification classification_from_name(const std::string& s) {
  if (s == "discarded") return Classification::Discarded;
  if (s == "voting") return Classification::Voting;
  if (s == "verifying") return Classification::Verifying;
  throw std::runtime_error("unknown classification: " + s);
}
}  // namespace

json round_to_json(const RoundRecord& r) {
  json j;
  j["event_id"] = r.event_id;
  std::string bases;
  for (Basis b : r.bases) bases.push_back(protocol::basis_char(b));
  j["bases"] = bases;
  j["outcomes"] = r.outcomes;
  j["verifier"] = r.verifier;
  j["classification"] = classification_name(r.classification);
  if (r.s_p) j["s_p"] = int(*r.s_p);
  if (r.pass) j["pass"] = *r.pass;
  if (r.voter_index) j["voter_index"] = *r.voter_index;
  return j;
}

std::string transcript_to_jsonl(const std::vector<RoundRecord>& transcript) {
  std::string out;
  for (const RoundRecord& r : transcript) {
    out += round_to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::vector<RoundRecord> transcript_from_jsonl(const std::string& text) {
  std::vector<RoundRecord> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    RoundRecord r;
    r.event_id = j.at("event_id").get<std::uint64_t>();
    for (char c : j.at("bases").get<std::string>()) r.bases.push_back(protocol::basis_from_char(c));
    r.outcomes = j.at("outcomes").get<std::vector<std::uint8_t>>();
    r.verifier = j.at("verifier").get<int>();
    r.classification = classification_from_name(j.at("classification").get<std::string>());
    if (j.contains("s_p")) r.s_p = static_cast<std::uint8_t>(j.at("s_p").get<int>());
    if (j.contains("pass")) r.pass = j.at("pass").get<bool>();
    if (j.contains("voter_index")) r.voter_index = j.at("voter_index").get<int>();
    out.push_back(std::move(r));
  }
  return out;
}

json election_summary(const ExperimentConfig& config, const protocol::ElectionResult& result) {
  const auto& out = result.outcome;
  json j;
  j["mode"] = config.mode;
  j["agents"] = config.agents;
  j["intents"] = config.intents;
  j["source"] = config.source;
  j["security"] =
      json{{"m", config.security.m}, {"tau", config.security.tau}, {"rounds", config.security.rounds}};
  j["seed"] = config.seed;
  j["status"] = protocol::status_name(out.status);
  j["aborted"] = out.aborted;
  j["votes"] = json{{"E", out.votes_e}, {"F", out.votes_f}};
  j["winner"] = out.aborted ? "none"
                : out.votes_e > out.votes_f ? "E"
                : out.votes_f > out.votes_e ? "F"
                                            : "tie";
  j["verification"] = json{{"verifying_rounds", out.verifying_rounds},
                           {"failed", out.failed_verifications},
                           {"pass_rate", out.verification_pass_rate}};
  j["counts"] = json{{"discarded", out.discarded_rounds}, {"voting_reserved", out.voting_rounds}};
  j["voter_success"] = out.voter_success;
  return j;
}

json audit_to_json(const adversary::AuditReport& r) {
  json j;
  j["scenario"] = r.scenario;
  j["trials"] = r.trials;
  j["pass_probability"] = r.pass_probability;
  j["refused"] = r.refused;
  if (r.refused) {
    j["refusal_reason"] = r.refusal_reason;
    return j;
  }
  j["homogeneity"] = json{{"statistic", r.homogeneity.statistic},
                          {"df", r.homogeneity.df},
                          {"p_value", r.homogeneity.p_value}};
  j["mi"] = json{{"bits", r.mi.mi_bits},
                 {"ci", json::array({r.mi.ci_lo, r.mi.ci_hi})},
                 {"resamples", r.mi.bootstrap_resamples}};
  j["thresholds"] = json{{"mi_bits", r.mi_threshold_bits}, {"p", r.p_threshold}};
  j["flagged"] = r.flagged;
  json ann;
  for (const auto& [id, dist] : r.announced) {
    json d;
    for (const auto& [s, c] : dist) d[s] = c;
    ann[std::to_string(id)] = d;
  }
  j["announced"] = ann;
  return j;
}

StatReport uniformity_test(const std::vector<std::uint64_t>& samples,
                           const std::vector<std::uint64_t>& support, int n_bits) {
  StatReport r;
  r.metric = "uniformity";
  if (samples.empty() || support.empty()) {
    r.status = "insufficient_data";
    return r;
  }
  std::vector<std::uint64_t> counts(support.size(), 0);
  for (std::uint64_t s : samples) {
    const auto it = std::find(support.begin(), support.end(), s);
    if (it == support.end()) {
      r.status = "violation";
      r.details = "sample outside expected support: " + sim::to_bitstring(s, n_bits);
      return r;
    }
    ++counts[static_cast<std::size_t>(it - support.begin())];
  }
  const auto gof =
      stats::chi_square_gof(counts, std::vector<double>(support.size(), 1.0 / support.size()));
  r.estimate = gof.statistic / std::max(1, gof.df);
  r.statistic = gof.statistic;
  r.p_value = gof.p_value;
  if (gof.p_value <= 0.001) {
    r.status = "violation";
    r.details = "chi-square rejects uniformity over the support";
  }
  return r;
}

StatReport verification_rate_report(const std::vector<RoundRecord>& transcript,
                                    const std::vector<RefValue>& references) {
  StatReport r;
  r.metric = "verification_pass_rate";
  r.references = references;
  std::uint64_t verifying = 0, passed = 0;
  for (const RoundRecord& rec : transcript) {
    if (rec.classification == Classification::Verifying) {
      ++verifying;
      passed += rec.pass.value_or(false);
    }
  }
  if (verifying == 0) {
    r.status = "insufficient_data";
    r.details = "no verifying rounds in transcript";
    return r;
  }
  r.estimate = static_cast<double>(passed) / static_cast<double>(verifying);
  r.std_error = std::sqrt(std::max(0.0, r.estimate * (1.0 - r.estimate) /
                                            static_cast<double>(verifying)));
  r.interval = stats::wilson_interval(passed, verifying, 3.0);
  for (const RefValue& ref : r.references) {
    if (ref.value < r.interval->lo || ref.value > r.interval->hi) {
      if (r.details.empty()) {
        r.details = "reference values outside the Wilson interval are expected when the "
                    "model omits implementation losses";
      }
    }
  }
  return r;
}

double werner_pass_probability_oracle(double p, int n) {
  // Enumerate the ensemble branches (phi0 plus every computational basis
  // state) against every even Hadamard combination; weight by the mixture.
  const StateVector phi0 = family::make_phi0(n);
  double total = 0.0;
  int combos = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << n); ++mask) {
    if (sim::hamming_weight(mask) & 1) continue;
    std::vector<int> subset;
    for (int q = 0; q < n; ++q) {
      if ((mask >> q) & 1) subset.push_back(q);
    }
    const int target = (sim::hamming_weight(mask) / 2) % 2;
    const double p_odd_phi = adversary::outcome_parity_odd_probability(phi0, subset);
    double pass = p * (target == 1 ? p_odd_phi : 1.0 - p_odd_phi);
    const double branch_w = (1.0 - p) / std::pow(2.0, n);
    for (std::uint64_t y = 0; y < (std::uint64_t(1) << n); ++y) {
      const double p_odd =
          adversary::outcome_parity_odd_probability(StateVector::basis_state(n, y), subset);
      pass += branch_w * (target == 1 ? p_odd : 1.0 - p_odd);
    }
    total += pass;
    ++combos;
  }
  return total / combos;
}

namespace {

ExperimentResult run_attack_experiment(const ExperimentConfig& config) {
  ExperimentResult res;
  const AttackScenario scenario = adversary::make_scenario(config.scenario);
  const auto audit = adversary::anonymity_audit(scenario, config.trials, config.seed);

  StatReport pass;
  pass.metric = "attack_pass_probability";
  pass.estimate = audit.pass_probability;
  pass.references.push_back({scenario.expected_pass_rate, scenario.expected_pass_provenance,
                             "exact enumeration over colluder reports and honest bases"});
  if (std::abs(audit.pass_probability - scenario.expected_pass_rate) > 1e-9) {
    pass.status = "violation";
    pass.details = "pass probability deviates from the scenario expectation";
  }
  res.reports.push_back(pass);

  StatReport leak;
  leak.metric = "anonymity_leak_flag";
  leak.estimate = audit.refused ? -1.0 : (audit.flagged ? 1.0 : 0.0);
  leak.references.push_back({scenario.expected_leak ? 1.0 : 0.0, Provenance::Derived,
                             "expected leak flag for this scenario"});
  if (!audit.refused) {
    leak.statistic = audit.homogeneity.statistic;
    leak.p_value = audit.homogeneity.p_value;
    if (audit.flagged != scenario.expected_leak) {
      leak.status = "violation";
      leak.details = "audit flag does not match the scenario expectation";
    }
  } else {
    leak.status = "insufficient_data";
    leak.details = audit.refusal_reason;
  }
  res.reports.push_back(leak);

  res.summary = json{};
  res.summary["mode"] = "attack";
  res.summary["scenario"] = scenario.name;
  res.summary["description"] = scenario.description;
  res.summary["audit"] = audit_to_json(audit);
  return res;
}

ExperimentResult run_election_experiment(const ExperimentConfig& config) {
  ExperimentResult res;
  const SourceStrategy strategy = strategy_from_json(config.source);
  const auto profiles = protocol::make_profiles(config.intents);
  protocol::ElectionResult result;

  if (config.mode == "stream-elect") {
    if (config.agents != coincidence::kAgents) {
      throw std::runtime_error("stream-elect supports exactly 4 agents");
    }
    StreamConfig sc = config.stream.value_or(StreamConfig{});
    // Simulate the physical rounds, plant them on the pulse grid, and run the
    // recovered fourfolds through the same completion path as pure mode.
    std::vector<protocol::SimulatedRound> sims(config.security.rounds);
    for (int r = 0; r < config.security.rounds; ++r) {
      sims[r] = protocol::simulate_round(r, profiles, strategy, nullptr, config.seed);
    }
    coincidence::ChannelMap map;
    std::vector<coincidence::PlantedFourfold> schedule(sims.size());
    Rng gap_rng(derive_seed(config.seed, "stream-times"));
    const double pulse_ps = 1e12 / sc.pulse_rate_hz;
    double t = 0.0;
    for (std::size_t r = 0; r < sims.size(); ++r) {
      t += gap_rng.exponential(sc.fourfold_rate_hz) * 1e12;
      schedule[r].t_ps = static_cast<std::uint64_t>(std::llround(t / pulse_ps)) *
                         static_cast<std::uint64_t>(std::llround(pulse_ps));
      for (int a = 0; a < config.agents; ++a) {
        schedule[r].channels[a] =
            map.encode(a + 1, sims[r].physical[a], sims[r].true_outcomes[a]);
      }
    }
    sc.duration_s = std::max(sc.duration_s, t / 1e12 + 1e-6);
    const auto stream = coincidence::generate_stream(sc, schedule, config.seed);
    const auto fourfolds = coincidence::run_pipeline(stream.events, sc.window_ps, map);

    std::vector<protocol::SimulatedRound> recovered(fourfolds.size());
    for (std::size_t i = 0; i < fourfolds.size(); ++i) {
      const auto d = coincidence::decode_fourfold(fourfolds[i], map);
      recovered[i].physical.assign(d.bases.begin(), d.bases.end());
      recovered[i].reported = recovered[i].physical;
      recovered[i].true_outcomes.assign(d.outcomes.begin(), d.outcomes.end());
      recovered[i].emitted.round = static_cast<int>(i);
    }
    result = protocol::complete_election(profiles, recovered, config.security, config.seed);
    res.summary = election_summary(config, result);
    res.summary["stream"] = json{{"events", stream.events.size()},
                                 {"planted", schedule.size()},
                                 {"recovered_fourfolds", fourfolds.size()}};
  } else {
    result = protocol::run_election(profiles, strategy, config.security, config.seed, nullptr,
                                    config.threads);
    res.summary = election_summary(config, result);
  }

  std::vector<RefValue> refs;
  if (config.source.value("kind", "") == "werner") {
    const auto* w = std::get_if<family::WernerEnsemble>(&strategy);
    refs.push_back({werner_pass_probability_oracle(w->p, config.agents), Provenance::Derived,
                    "exact enumeration over ensemble branches and basis combinations"});
    refs.push_back({0.87, Provenance::Paper,
                    "hardware demonstration pass rate 87% +/- 3%; includes implementation "
                    "losses this model omits"});
    refs.push_back({0.945, Provenance::Paper,
                    "pass-rate floor implied by attributing <= 5.5% of failures to state "
                    "fidelity alone"});
  }
  StatReport vr = verification_rate_report(result.transcript, refs);
  if (config.source.value("kind", "") == "werner" && vr.status == "ok") {
    // The fidelity-only model must agree with its exact oracle; the hardware
    // reference is context, not a target.
    const double oracle = refs.front().value;
    const double sigma = vr.std_error > 0 ? vr.std_error : 1e-12;
    if (std::abs(vr.estimate - oracle) > 3.0 * sigma) {
      vr.status = "violation";
      vr.details = "pass rate disagrees with the exact enumeration oracle by more than 3 sigma";
    } else if (vr.details.empty()) {
      vr.details = "matches the fidelity-only oracle; the gap to the hardware reference is "
                   "implementation losses, which are out of model";
    }
  }
  res.reports.push_back(vr);

  if (result.outcome.status == protocol::ElectionStatus::Completed) {
    StatReport intents;
    intents.metric = "recorded_intent_match";
    std::uint64_t okc = 0;
    for (auto f : result.outcome.voter_success) okc += f;
    intents.estimate =
        static_cast<double>(okc) / static_cast<double>(result.outcome.voter_success.size());
    res.reports.push_back(intents);
  }

  if (!config.transcript_path.empty()) {
    write_text_file(config.transcript_path, transcript_to_jsonl(result.transcript));
  }
  return res;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult res;
  if (config.mode == "attack") {
    if (config.scenario.empty()) throw std::runtime_error("attack mode needs a scenario name");
    res = run_attack_experiment(config);
  } else if (config.mode == "elect" || config.mode == "stream-elect") {
    res = run_election_experiment(config);
  } else {
    throw std::runtime_error("unknown mode: " + config.mode);
  }
  res.all_ok = std::all_of(res.reports.begin(), res.reports.end(),
                           [](const StatReport& r) { return r.ok(); });
  if (!config.summary_path.empty()) {
    write_text_file(config.summary_path, res.summary.dump(2) + "\n");
  }
  if (!config.report_path.empty()) {
    json j;
    j["all_ok"] = res.all_ok;
    json rows = json::array();
    for (const auto& r : res.reports) rows.push_back(report_to_json(r));
    j["reports"] = rows;
    write_text_file(config.report_path, j.dump(2) + "\n");
  }
  return res;
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write file: " + path);
  os << content;
}

}  // namespace qvote::harness
