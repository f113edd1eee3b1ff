#include "qvote/adversary.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "qvote/rng.hpp"

namespace qvote::adversary {

using json = nlohmann::json;
using protocol::BasesDecision;
using protocol::Classification;
using sim::LocalGate;

std::string provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Paper: return "paper";
    case Provenance::Trivial: return "trivial";
    case Provenance::Derived: return "derived";
  }
  return "derived";
}

double outcome_parity_odd_probability(const StateVector& state, const std::vector<int>& subset) {
  StateVector st = state;
  for (int q : subset) st = sim::apply_gate(st, LocalGate::Hadamard, q);
  double odd = 0.0;
  for (std::size_t y = 0; y < st.dim(); ++y) {
    if (sim::bit_parity(y)) odd += std::norm(st.amps[y]);
  }
  return odd;
}

DeterminismAnalysis analyze_parity_determinism(const StateVector& honest_state,
                                               int hadamard_parity, double tol) {
  if (hadamard_parity != 0 && hadamard_parity != 1) {
    throw ContractViolation("hadamard_parity must be 0 or 1");
  }
  const int k = honest_state.n_qubits;
  DeterminismAnalysis out;
  out.deterministic = true;
  out.constant_statistic = true;
  bool have_stat = false;
  for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << k); ++mask) {
    const int h = sim::hamming_weight(mask);
    if ((h & 1) != hadamard_parity) continue;
    std::vector<int> subset;
    for (int q = 0; q < k; ++q) {
      if ((mask >> q) & 1) subset.push_back(q);
    }
    const double p_odd = outcome_parity_odd_probability(honest_state, subset);
    if (p_odd > tol && p_odd < 1.0 - tol) {
      out.deterministic = false;
      out.constant_statistic = false;
      return out;
    }
    const int parity = p_odd > 0.5 ? 1 : 0;
    // Honest test statistic: (H/2 + parity) mod 2 for even Hadamard counts,
    // ((H+1)/2 + parity) mod 2 for odd. 0 means the honest test passes.
    const int stat = hadamard_parity == 0 ? (h / 2 + parity) % 2 : ((h + 1) / 2 + parity) % 2;
    if (!have_stat) {
      out.statistic = stat;
      have_stat = true;
    } else if (stat != out.statistic) {
      out.constant_statistic = false;
    }
  }
  return out;
}

namespace {

struct SideInfo {
  int parity = 0;  // Hadamard-count parity the colluders must report
  int offset = 0;  // constant of the honest parity statistic
};

SideInfo parse_side_info(const std::string& side_info) {
  if (side_info.empty()) return {};
  const json j = json::parse(side_info);
  SideInfo s;
  s.parity = j.value("parity", 0);
  s.offset = j.value("offset", 0);
  return s;
}

StateVector pad_with_zeros(const StateVector& honest, int n) {
  const int k = honest.n_qubits;
  if (k > n) throw ContractViolation("honest part larger than agent count");
  if (k == n) return honest;
  std::vector<sim::Amplitude> a(std::size_t(1) << n, sim::Amplitude(0, 0));
  for (std::size_t y = 0; y < honest.dim(); ++y) a[y] = honest.amps[y];
  return StateVector(n, std::move(a));
}

}  // namespace

FamilyColluderPolicy::FamilyColluderPolicy(std::vector<int> controlled_ids) {
  controlled = std::move(controlled_ids);
  std::sort(controlled.begin(), controlled.end());
  if (controlled.empty()) throw ContractViolation("policy controls no agents");
}

BasesDecision FamilyColluderPolicy::decide_bases(int /*round*/, const std::string& side_info,
                                                 std::uint64_t seed) const {
  const SideInfo s = parse_side_info(side_info);
  Rng rng(seed);
  BasesDecision d;
  d.physical.assign(controlled.size(), Basis::Computational);
  d.reported.resize(controlled.size());
  int h_d = 0;
  for (std::size_t i = 0; i < controlled.size(); ++i) {
    d.reported[i] = rng.coin() ? Basis::Hadamard : Basis::Computational;
    h_d += d.reported[i] == Basis::Hadamard;
  }
  if ((h_d & 1) != s.parity) {
    d.reported[0] = d.reported[0] == Basis::Hadamard ? Basis::Computational : Basis::Hadamard;
  }
  return d;
}

std::vector<std::uint8_t> FamilyColluderPolicy::decide_outcomes(
    int /*round*/, const std::string& side_info, const BasesDecision& bases,
    const std::vector<std::uint8_t>& true_outcomes, Classification /*cls*/) const {
  const SideInfo s = parse_side_info(side_info);
  int h_d = 0;
  for (Basis b : bases.reported) h_d += b == Basis::Hadamard;
  // Required reported outcome-sum parity; depends only on the coalition's own
  // reported Hadamard count and the honest statistic constant.
  const int target =
      s.parity == 0 ? (h_d / 2 + s.offset) % 2 : ((h_d - 1) / 2 + s.offset) % 2;
  std::vector<std::uint8_t> bits = true_outcomes;
  int sum = 0;
  for (auto b : bits) sum += b;
  if (sum % 2 != target) bits.back() ^= 1;
  return bits;
}

FixedColluderPolicy::FixedColluderPolicy(int controlled_id, Basis physical, Basis reported,
                                         ReportRule r)
    : FixedColluderPolicy(std::vector<int>{controlled_id}, {physical}, {reported}, {r}) {}

FixedColluderPolicy::FixedColluderPolicy(std::vector<int> controlled_ids,
                                         std::vector<Basis> physical,
                                         std::vector<Basis> reported,
                                         std::vector<ReportRule> report_rules)
    : physical_bases(std::move(physical)),
      reported_bases(std::move(reported)),
      rules(std::move(report_rules)) {
  controlled = std::move(controlled_ids);
  if (controlled.empty() || physical_bases.size() != controlled.size() ||
      reported_bases.size() != controlled.size() || rules.size() != controlled.size()) {
    throw ContractViolation("fixed policy needs one entry per controlled agent");
  }
}

BasesDecision FixedColluderPolicy::decide_bases(int /*round*/, const std::string& /*side_info*/,
                                                std::uint64_t /*seed*/) const {
  return {physical_bases, reported_bases};
}

std::vector<std::uint8_t> FixedColluderPolicy::decide_outcomes(
    int /*round*/, const std::string& /*side_info*/, const BasesDecision& /*bases*/,
    const std::vector<std::uint8_t>& true_outcomes, Classification /*cls*/) const {
  std::vector<std::uint8_t> out(true_outcomes.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    switch (rules[i]) {
      case ReportRule::Const0: out[i] = 0; break;
      case ReportRule::Const1: out[i] = 1; break;
      case ReportRule::TrueOutcome: out[i] = true_outcomes[i]; break;
      case ReportRule::FlippedOutcome: out[i] = true_outcomes[i] ^ 1; break;
    }
  }
  return out;
}

double exact_pass_probability(const StateVector& full_state, const std::string& side_info,
                              const DishonestPolicy& policy, int k, int n,
                              std::uint64_t policy_seed) {
  if (full_state.n_qubits != n) throw ContractViolation("state size != agent count");
  const BasesDecision decision = policy.decide_bases(0, side_info, policy_seed);
  int h_d = 0;
  for (Basis b : decision.reported) h_d += b == Basis::Hadamard;

  double total = 0.0;
  int combos = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << k); ++mask) {
    const int h_h = sim::hamming_weight(mask);
    if ((h_h & 1) != (h_d & 1)) continue;  // round would be discarded
    StateVector st = full_state;
    for (int q = 0; q < k; ++q) {
      if ((mask >> q) & 1) st = sim::apply_gate(st, LocalGate::Hadamard, q);
    }
    for (std::size_t c = 0; c < policy.controlled.size(); ++c) {
      if (decision.physical[c] == Basis::Hadamard) {
        st = sim::apply_gate(st, LocalGate::Hadamard, policy.controlled[c] - 1);
      }
    }
    const int h_p = h_h + h_d;
    double p_pass = 0.0;
    for (std::size_t y = 0; y < st.dim(); ++y) {
      const double p = std::norm(st.amps[y]);
      if (p == 0.0) continue;
      std::vector<std::uint8_t> own_true;
      int sum = 0;
      for (int q = 0; q < k; ++q) sum += (y >> q) & 1;
      for (int id : policy.controlled) own_true.push_back((y >> (id - 1)) & 1);
      const auto reported = policy.decide_outcomes(0, side_info, decision, own_true,
                                                   Classification::Verifying);
      for (auto b : reported) sum += b;
      if (sum % 2 == (h_p / 2) % 2) p_pass += p;
    }
    total += p_pass;
    ++combos;
  }
  if (combos == 0) throw ContractViolation("no usable basis combinations");
  return total / combos;
}

namespace {

// Pass probability with no dishonest agents: averaged over even Hadamard
// subsets of the full state.
double honest_pass_probability(const StateVector& state) {
  const int n = state.n_qubits;
  double total = 0.0;
  int combos = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << n); ++mask) {
    const int h = sim::hamming_weight(mask);
    if (h & 1) continue;
    std::vector<int> subset;
    for (int q = 0; q < n; ++q) {
      if ((mask >> q) & 1) subset.push_back(q);
    }
    const double p_odd = outcome_parity_odd_probability(state, subset);
    total += (h / 2) % 2 == 1 ? p_odd : 1.0 - p_odd;
    ++combos;
  }
  return total / combos;
}

}  // namespace

double scenario_pass_probability(const AttackScenario& scenario) {
  // One schedule period (adaptive emissions in this catalog cycle with period
  // <= 8); take the minimum across rounds so "pass rate 1" means every round.
  const int period = 8;
  double min_pass = 1.0;
  for (int r = 0; r < period; ++r) {
    const auto emitted =
        family::emit_round(scenario.source, scenario.n, r, derive_seed(7, "pass-oracle", r));
    double p;
    if (scenario.policy) {
      p = exact_pass_probability(emitted.state, emitted.side_info, *scenario.policy, scenario.k,
                                 scenario.n, derive_seed(7, "pass-policy", r));
    } else {
      p = honest_pass_probability(emitted.state);
    }
    min_pass = std::min(min_pass, p);
  }
  return min_pass;
}

AttackScenario family_attack(int k, int n, const std::vector<FamilyLabel>& variants,
                             const std::string& name) {
  if (k < 3) throw ContractViolation("family attack needs k >= 3 honest agents");
  if (n <= k) throw ContractViolation("family attack needs at least one colluder");
  if (variants.empty()) throw ContractViolation("family attack needs at least one variant");

  struct Entry {
    StateVector honest;
    std::string side_info;
  };
  auto entries = std::make_shared<std::vector<Entry>>();
  for (const FamilyLabel& label : variants) {
    if (label.n != k) throw ContractViolation("variant qubit count must equal k");
    Entry e;
    e.honest = family::make_family_state(label);
    const int parity =
        (label.kind == FamilyKind::Psi0 || label.kind == FamilyKind::Psi1) ? 1 : 0;
    const DeterminismAnalysis an = analyze_parity_determinism(e.honest, parity);
    if (!an.deterministic || !an.constant_statistic) {
      throw ContractViolation("family state is not parity-deterministic");
    }
    json j;
    j["family"] = family::family_kind_name(label.kind);
    j["sign"] = label.sign;
    j["parity"] = parity;
    j["offset"] = an.statistic;
    e.side_info = j.dump();
    entries->push_back(std::move(e));
  }

  AttackScenario sc;
  sc.name = name;
  sc.description = "source hands the honest agents a deterministic family state; "
                   "colluders adapt their reported bases and outcomes";
  sc.n = n;
  sc.k = k;
  family::AdaptiveMalicious src;
  src.name = name;
  const int nn = n;
  src.emit = [entries, nn](int round, std::uint64_t) {
    const Entry& e = (*entries)[round % entries->size()];
    family::EmittedRoundState out;
    out.round = round;
    out.state = pad_with_zeros(e.honest, nn);
    out.side_info = e.side_info;
    return out;
  };
  sc.source = src;
  std::vector<int> colluders;
  for (int id = k + 1; id <= n; ++id) colluders.push_back(id);
  sc.policy = std::make_shared<FamilyColluderPolicy>(colluders);
  sc.expected_pass_rate = scenario_pass_probability(sc);
  sc.expected_pass_provenance = Provenance::Derived;
  sc.expected_leak = false;
  return sc;
}

PolicySearchResult exhaustive_policy_search(const StateVector& honest_state, int k, int n) {
  const int colluders = n - k;
  if (colluders < 1) throw ContractViolation("policy search needs at least one colluder");
  const StateVector full = pad_with_zeros(honest_state, n);
  std::vector<int> ids;
  for (int id = k + 1; id <= n; ++id) ids.push_back(id);

  // 16 deterministic tuples per colluder: physical basis x reported basis x
  // report rule. Enumerate the product while it is small, sample otherwise.
  const int per = 16;
  std::uint64_t space = 1;
  for (int c = 0; c < colluders; ++c) space *= per;
  const std::uint64_t budget = 4096;
  PolicySearchResult best;
  best.best_pass_probability = -1.0;
  best.policy_space_size = space;
  best.exhaustive = space <= budget;
  best.policies_evaluated = best.exhaustive ? space : budget;

  Rng sampler(derive_seed(17, "policy-search", n, k));
  const auto decode = [&](std::uint64_t code) {
    std::vector<Basis> phys(colluders), rep(colluders);
    std::vector<ReportRule> rules(colluders);
    for (int c = 0; c < colluders; ++c) {
      const int t = static_cast<int>(code % per);
      code /= per;
      phys[c] = (t & 1) ? Basis::Hadamard : Basis::Computational;
      rep[c] = (t & 2) ? Basis::Hadamard : Basis::Computational;
      rules[c] = static_cast<ReportRule>(t >> 2);
    }
    return std::tuple{phys, rep, rules};
  };
  for (std::uint64_t i = 0; i < best.policies_evaluated; ++i) {
    const std::uint64_t code = best.exhaustive ? i : sampler.uniform_int(space);
    auto [phys, rep, rules] = decode(code);
    FixedColluderPolicy policy(ids, phys, rep, rules);
    const double p = exact_pass_probability(full, "", policy, k, n);
    if (p > best.best_pass_probability) {
      best.best_pass_probability = p;
      best.physical = phys;
      best.reported = rep;
      best.rules = rules;
    }
  }
  return best;
}

AttackScenario naive_attack(const StateVector& honest_state, int k, int n,
                            const std::string& name) {
  const PolicySearchResult search = exhaustive_policy_search(honest_state, k, n);
  AttackScenario sc;
  sc.name = name;
  sc.description = "non-family honest part with the best fixed colluder policy "
                   "found by exhaustive search";
  sc.n = n;
  sc.k = k;
  family::AdaptiveMalicious src;
  src.name = name;
  const int nn = n;
  auto honest = std::make_shared<StateVector>(honest_state);
  src.emit = [honest, nn](int round, std::uint64_t) {
    family::EmittedRoundState out;
    out.round = round;
    out.state = pad_with_zeros(*honest, nn);
    return out;
  };
  sc.source = src;
  std::vector<int> ids;
  for (int id = k + 1; id <= n; ++id) ids.push_back(id);
  sc.policy = std::make_shared<FixedColluderPolicy>(ids, search.physical, search.reported,
                                                    search.rules);
  sc.expected_pass_rate = search.best_pass_probability;
  sc.expected_pass_provenance = Provenance::Derived;
  sc.expected_leak = false;
  return sc;
}

namespace {

AttackScenario ideal_scenario() {
  AttackScenario sc;
  sc.name = "ideal";
  sc.description = "honest source and agents; audit baseline";
  sc.n = 4;
  sc.k = 4;
  sc.source = family::IdealSource{};
  sc.expected_pass_rate = 1.0;
  sc.expected_pass_provenance = Provenance::Trivial;
  return sc;
}

AttackScenario leak_control_scenario() {
  AttackScenario sc;
  sc.name = "leak-control";
  sc.description = "broken-by-construction source emitting |0...0>; the probed "
                   "voting round announces a deterministic string, so a flipped "
                   "bit localizes the voter";
  sc.n = 4;
  sc.k = 3;
  family::AdaptiveMalicious src;
  src.name = "leak-control";
  src.emit = [](int round, std::uint64_t) {
    family::EmittedRoundState out;
    out.round = round;
    out.state = StateVector::basis_state(4, 0);
    return out;
  };
  sc.source = src;
  sc.policy = std::make_shared<FixedColluderPolicy>(4, Basis::Computational,
                                                    Basis::Computational, ReportRule::TrueOutcome);
  sc.expected_pass_rate = scenario_pass_probability(sc);
  sc.expected_pass_provenance = Provenance::Derived;
  sc.expected_leak = true;
  sc.is_control = true;
  sc.force_computational_probe = true;
  return sc;
}

const std::vector<std::pair<FamilyKind, int>> kFamilyVariants = {
    {FamilyKind::Phi0, +1}, {FamilyKind::Phi0, -1}, {FamilyKind::Phi1, +1},
    {FamilyKind::Phi1, -1}, {FamilyKind::Psi0, +1}, {FamilyKind::Psi0, -1},
    {FamilyKind::Psi1, +1}, {FamilyKind::Psi1, -1},
};

std::string variant_scenario_name(FamilyKind kind, int sign) {
  return "family-" + family::family_kind_name(kind) + (sign > 0 ? "-plus" : "-minus");
}

}  // namespace

std::vector<std::string> scenario_names() {
  std::vector<std::string> names = {"ideal"};
  for (const auto& [kind, sign] : kFamilyVariants) {
    names.push_back(variant_scenario_name(kind, sign));
  }
  names.push_back("family-mixed");
  names.push_back("naive-w");
  names.push_back("naive-zeros");
  names.push_back("leak-control");
  return names;
}

AttackScenario make_scenario(const std::string& name) {
  if (name == "ideal") return ideal_scenario();
  if (name == "leak-control") return leak_control_scenario();
  if (name == "naive-w") return naive_attack(family::make_w(3), 3, 4, name);
  if (name == "naive-zeros") return naive_attack(StateVector::basis_state(3, 0), 3, 4, name);
  if (name == "family-mixed") {
    std::vector<FamilyLabel> all;
    for (const auto& [kind, sign] : kFamilyVariants) all.push_back({kind, sign, 3});
    return family_attack(3, 4, all, name);
  }
  for (const auto& [kind, sign] : kFamilyVariants) {
    if (name == variant_scenario_name(kind, sign)) {
      return family_attack(3, 4, {{kind, sign, 3}}, name);
    }
  }
  throw ContractViolation("unknown scenario: " + name);
}

AuditReport anonymity_audit(const AttackScenario& scenario, std::uint64_t trials,
                            std::uint64_t master_seed) {
  AuditReport report;
  report.scenario = scenario.name;
  report.trials = trials;
  report.pass_probability = scenario_pass_probability(scenario);

  if (!scenario.is_control && report.pass_probability < 1.0 - 1e-12) {
    report.refused = true;
    report.refusal_reason = "scenario does not pass verification with probability 1; "
                            "the anonymity claim only holds in that limit";
    return report;
  }

  const int n = scenario.n;
  const int k = scenario.k;
  std::vector<std::pair<int, int>> mi_samples;
  mi_samples.reserve(trials);

  for (std::uint64_t t = 0; t < trials; ++t) {
    const int voter_pos = static_cast<int>(t % static_cast<std::uint64_t>(k));
    Rng trial_rng(derive_seed(master_seed, "audit-trial", t));
    const protocol::Intent intent =
        trial_rng.coin() ? protocol::Intent::CandidateF : protocol::Intent::CandidateE;

    const auto emitted =
        family::emit_round(scenario.source, n, static_cast<int>(t),
                           derive_seed(master_seed, "audit-emit", t));
    BasesDecision decision;
    int h_d = 0;
    if (scenario.policy) {
      decision = scenario.policy->decide_bases(static_cast<int>(t), emitted.side_info,
                                               derive_seed(master_seed, "audit-policy", t));
      for (Basis b : decision.reported) h_d += b == Basis::Hadamard;
    }

    // Draw honest bases until the round is usable (Hadamard parity matches).
    std::vector<Basis> honest_bases(k, Basis::Computational);
    if (!scenario.force_computational_probe) {
      bool usable = false;
      for (std::uint64_t attempt = 0; attempt < 64 && !usable; ++attempt) {
        Rng rng(derive_seed(master_seed, "audit-bases", t, attempt));
        int h_h = 0;
        for (int i = 0; i < k; ++i) {
          honest_bases[i] = rng.coin() ? Basis::Hadamard : Basis::Computational;
          h_h += honest_bases[i] == Basis::Hadamard;
        }
        usable = (h_h & 1) == (h_d & 1);
      }
      if (!usable) throw ContractViolation("could not draw a usable basis combination");
    } else if ((h_d & 1) != 0) {
      throw ContractViolation("computational probe incompatible with odd reported parity");
    }

    StateVector measured = emitted.state;
    int h_h = 0;
    for (int i = 0; i < k; ++i) {
      if (honest_bases[i] == Basis::Hadamard) {
        measured = sim::apply_gate(measured, LocalGate::Hadamard, i);
        ++h_h;
      }
    }
    if (scenario.policy) {
      for (std::size_t c = 0; c < scenario.policy->controlled.size(); ++c) {
        if (decision.physical[c] == Basis::Hadamard) {
          measured =
              sim::apply_gate(measured, LocalGate::Hadamard, scenario.policy->controlled[c] - 1);
        }
      }
    }
    const auto outcome =
        sim::sample_computational(measured, derive_seed(master_seed, "audit-measure", t));

    std::vector<std::uint8_t> bits = outcome.bits;
    if (scenario.policy) {
      std::vector<std::uint8_t> own_true;
      for (int id : scenario.policy->controlled) own_true.push_back(bits[id - 1]);
      const auto reported = scenario.policy->decide_outcomes(
          static_cast<int>(t), emitted.side_info, decision, own_true, Classification::Voting);
      for (std::size_t c = 0; c < scenario.policy->controlled.size(); ++c) {
        bits[scenario.policy->controlled[c] - 1] = reported[c];
      }
    }
    const auto row = protocol::voting_round_to_row(bits, voter_pos, intent);

    std::uint64_t packed = 0;
    std::string announced(k, '0');
    for (int i = 0; i < k; ++i) {
      packed |= static_cast<std::uint64_t>(row[i]) << i;
      if (row[i]) announced[i] = '1';
    }
    report.announced[voter_pos + 1][announced] += 1;
    mi_samples.emplace_back(voter_pos, static_cast<int>(packed));
  }

  // Contingency table identity x announced string over the union of strings.
  std::map<std::string, std::size_t> col_of;
  for (const auto& [id, dist] : report.announced) {
    for (const auto& [s, c] : dist) col_of.emplace(s, 0);
  }
  std::size_t next = 0;
  for (auto& [s, idx] : col_of) idx = next++;
  std::vector<std::vector<std::uint64_t>> table(
      k, std::vector<std::uint64_t>(std::max<std::size_t>(next, 1), 0));
  for (const auto& [id, dist] : report.announced) {
    for (const auto& [s, c] : dist) table[id - 1][col_of[s]] = c;
  }
  report.homogeneity = stats::chi_square_homogeneity(table);
  report.mi = stats::mutual_information_bootstrap(mi_samples, 200,
                                                  derive_seed(master_seed, "audit-bootstrap"));
  report.flagged = report.homogeneity.p_value < report.p_threshold ||
                   report.mi.mi_bits > report.mi_threshold_bits;
  return report;
}

}  // namespace qvote::adversary
