#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qvote/protocol.hpp"
#include "qvote/stats.hpp"

namespace qvote::adversary {

using family::FamilyKind;
using family::FamilyLabel;
using family::SourceStrategy;
using protocol::Basis;
using protocol::DishonestPolicy;
using sim::StateVector;

enum class Provenance : std::uint8_t { Paper, Trivial, Derived };
std::string provenance_name(Provenance p);

// Deterministic-parity analysis of a k-qubit honest state: for every basis
// subset of the given Hadamard-count parity, is the outcome-sum parity fixed,
// and is the pass statistic the same constant across subsets?
struct DeterminismAnalysis {
  bool deterministic = false;     // every subset has outcome parity 0 or 1
  bool constant_statistic = false;  // the pass statistic agrees across subsets
  int statistic = 0;              // 0 = honest test passes, 1 = fails
};
DeterminismAnalysis analyze_parity_determinism(const StateVector& honest_state,
                                               int hadamard_parity, double tol = kDefaultTol);

// P(outcome-sum parity odd) when the state is measured with Hadamards on
// `subset` and computational measurements elsewhere.
double outcome_parity_odd_probability(const StateVector& state, const std::vector<int>& subset);

// Colluders that adapt their reported Hadamard-count parity and outcome sum
// to the family state named in the side information. Passes every verifying
// round when the honest part is a deterministic family state.
class FamilyColluderPolicy : public DishonestPolicy {
 public:
  explicit FamilyColluderPolicy(std::vector<int> controlled_ids);
  protocol::BasesDecision decide_bases(int round, const std::string& side_info,
                                       std::uint64_t seed) const override;
  std::vector<std::uint8_t> decide_outcomes(int round, const std::string& side_info,
                                            const protocol::BasesDecision& bases,
                                            const std::vector<std::uint8_t>& true_outcomes,
                                            protocol::Classification cls) const override;
};

// Fixed deterministic report rules, one per colluder: the unit of the
// policy search for non-family honest parts.
enum class ReportRule : std::uint8_t { Const0, Const1, TrueOutcome, FlippedOutcome };

class FixedColluderPolicy : public DishonestPolicy {
 public:
  FixedColluderPolicy(int controlled_id, Basis physical, Basis reported, ReportRule rule);
  FixedColluderPolicy(std::vector<int> controlled_ids, std::vector<Basis> physical,
                      std::vector<Basis> reported, std::vector<ReportRule> rules);
  protocol::BasesDecision decide_bases(int round, const std::string& side_info,
                                       std::uint64_t seed) const override;
  std::vector<std::uint8_t> decide_outcomes(int round, const std::string& side_info,
                                            const protocol::BasesDecision& bases,
                                            const std::vector<std::uint8_t>& true_outcomes,
                                            protocol::Classification cls) const override;
  std::vector<Basis> physical_bases;
  std::vector<Basis> reported_bases;
  std::vector<ReportRule> rules;
};

struct AttackScenario {
  std::string name;
  std::string description;
  int n = 4;  // total agents
  int k = 3;  // honest agents (ids 1..k); colluders hold ids k+1..n
  SourceStrategy source;
  std::shared_ptr<DishonestPolicy> policy;  // may be null (no dishonest agents)
  double expected_pass_rate = 1.0;
  Provenance expected_pass_provenance = Provenance::Derived;
  bool expected_leak = false;
  bool is_control = false;
  // Probe only all-computational voting rounds (used by the planted-leak
  // control, whose announced strings are then deterministic).
  bool force_computational_probe = false;
};

// Exact verification pass probability of one emitted round under the policy:
// enumeration over honest basis subsets and joint measurement outcomes, no
// sampling. Honest agents are ids 1..k.
double exact_pass_probability(const StateVector& full_state, const std::string& side_info,
                              const DishonestPolicy& policy, int k, int n,
                              std::uint64_t policy_seed = 0);

// Minimum exact pass probability over one period of the scenario's emissions.
double scenario_pass_probability(const AttackScenario& scenario);

// Appendix-style attack: the source hands the k honest agents a family state
// (with side information for the colluders), and the colluders adapt.
// `variants` lists the honest-part states cycled per round.
AttackScenario family_attack(int k, int n, const std::vector<FamilyLabel>& variants,
                             const std::string& name);

// Negative control: a non-family honest part plus the best fixed colluder
// policy found by policy search. The deterministic report-rule space is
// enumerated exhaustively while it stays small (16 per colluder, up to three
// colluders) and sampled with documented coverage beyond that.
struct PolicySearchResult {
  double best_pass_probability = 0.0;
  std::vector<Basis> physical;
  std::vector<Basis> reported;
  std::vector<ReportRule> rules;
  std::uint64_t policies_evaluated = 0;
  std::uint64_t policy_space_size = 0;
  bool exhaustive = true;
};
PolicySearchResult exhaustive_policy_search(const StateVector& honest_state, int k, int n);
AttackScenario naive_attack(const StateVector& honest_state, int k, int n,
                            const std::string& name);

// Scenario registry used by the CLI and the harness config loader.
std::vector<std::string> scenario_names();
AttackScenario make_scenario(const std::string& name);

// --- anonymity audit ----------------------------------------------------------

struct AuditReport {
  std::string scenario;
  std::uint64_t trials = 0;
  bool refused = false;
  std::string refusal_reason;
  // identity (agent id) -> announced honest bitstring -> count
  std::map<int, std::map<std::string, std::uint64_t>> announced;
  stats::ChiSquareResult homogeneity;
  stats::MiEstimate mi;
  double pass_probability = 1.0;  // exact, for the gate
  bool flagged = false;           // leak detected
  double mi_threshold_bits = 0.01;
  double p_threshold = 0.001;
};

// Runs `trials` probed voting rounds permuting which honest agent holds the
// voter index, with intent E/F randomized per trial, and tests whether the
// announced honest bitstrings carry identity information. Refuses scenarios
// that cannot pass verification with probability 1 unless marked as control.
AuditReport anonymity_audit(const AttackScenario& scenario, std::uint64_t trials,
                            std::uint64_t master_seed);

}  // namespace qvote::adversary
