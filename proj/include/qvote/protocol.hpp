#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qvote/family.hpp"
#include "qvote/qsim.hpp"

namespace qvote::protocol {

enum class Basis : std::uint8_t { Computational, Hadamard };
enum class Intent : std::uint8_t { CandidateE, CandidateF };
enum class Classification : std::uint8_t { Discarded, Voting, Verifying };

char basis_char(Basis b);
Basis basis_from_char(char c);
char intent_char(Intent i);
Intent intent_from_char(char c);

struct AgentProfile {
  int id = 0;  // 1..n
  bool honest = true;
  int voter_index = 0;  // secret; assigned by the UniqueIndex stub
  Intent intent = Intent::CandidateE;
};

std::vector<AgentProfile> make_profiles(const std::string& intents,
                                        const std::vector<int>& dishonest_ids = {});

struct SecurityParams {
  int m = 7;          // coin count; P(voting | usable) = 2^-m
  double tau = 0.05;  // allowed failure fraction before abort
  int rounds = 10000; // number of distributed states l
};

struct RoundRecord {
  std::uint64_t event_id = 0;
  std::vector<Basis> bases;          // reported
  std::vector<std::uint8_t> outcomes;  // announced bits where announced, else measured
  int verifier = 0;                  // agent id
  Classification classification = Classification::Discarded;
  std::optional<std::uint8_t> s_p;   // voting rounds
  std::optional<bool> pass;          // verifying rounds
  std::optional<int> voter_index;    // voting rounds: assigned board row
};

struct ResultsBoard {
  int n = 0;
  std::vector<std::vector<std::uint8_t>> rows;  // row j-1 = broadcast bits for voter index j
  std::vector<std::uint8_t> s_bits;             // S_p of the round backing each row
  std::vector<std::uint8_t> filled;

  explicit ResultsBoard(int n_agents = 0);
  bool complete() const;
};

enum class ElectionStatus : std::uint8_t {
  Completed,
  AbortedVerification,     // failed-verification fraction exceeded tau
  AbortedVoteFailures,     // voter-indicated failure fraction exceeded tau
  InsufficientVotingRounds // fewer usable voting rounds than voters
};

std::string status_name(ElectionStatus s);

struct ElectionOutcome {
  int votes_e = 0;
  int votes_f = 0;
  std::vector<std::uint8_t> voter_success;  // indexed by voter index - 1
  bool aborted = false;
  ElectionStatus status = ElectionStatus::Completed;
  double verification_pass_rate = 1.0;
  std::uint64_t verifying_rounds = 0;
  std::uint64_t failed_verifications = 0;
  std::uint64_t voting_rounds = 0;
  std::uint64_t discarded_rounds = 0;
};

// --- dishonest agent interface ----------------------------------------------

struct BasesDecision {
  std::vector<Basis> physical;  // what the controlled agents actually measure
  std::vector<Basis> reported;  // what they send the Verifier
};

// Joint policy of the colluding agents. Inputs are restricted to the
// coalition's own data plus the source side information; honest bases and
// outcomes are never passed in.
class DishonestPolicy {
 public:
  virtual ~DishonestPolicy() = default;

  std::vector<int> controlled;  // agent ids, ascending
  bool verifier_lies = false;   // dishonest Verifier may misreport the test result

  virtual BasesDecision decide_bases(int round, const std::string& side_info,
                                     std::uint64_t seed) const = 0;

  // Reported outcomes for verifying rounds / broadcast bits for voting rounds,
  // one per controlled agent.
  virtual std::vector<std::uint8_t> decide_outcomes(
      int round, const std::string& side_info, const BasesDecision& bases,
      const std::vector<std::uint8_t>& true_outcomes, Classification cls) const = 0;
};

// --- operations --------------------------------------------------------------

// Classical baseline with a trusted dealer; the oracle the quantum path must
// match. Returns outcome plus the public board.
struct BaselineResult {
  ElectionOutcome outcome;
  ResultsBoard board;
};
BaselineResult classical_baseline_election(const std::vector<AgentProfile>& profiles,
                                           std::uint64_t dealer_seed,
                                           const SecurityParams& params = {});

// Fair coin per (agent, round, master seed); deterministic replay.
Basis choose_basis(int agent_id, int round, std::uint64_t master_seed);

struct RoundClassification {
  Classification classification = Classification::Discarded;
  std::uint8_t s_p = 0;  // meaningful for voting rounds
};

// Odd Hadamard count -> Discarded; else all-heads among m coins -> Voting
// with S_p = (H_p/2) mod 2; else Verifying.
RoundClassification classify_round(const std::vector<Basis>& reported_bases,
                                   std::uint64_t coin_seed, int m);

// Pass iff H_p/2 == sum(outcomes) mod 2. H_p must be even.
bool verify_round(int h_p, const std::vector<std::uint8_t>& outcomes);

// Broadcast row for a voting round: everyone announces their bit; the voter
// flips theirs when voting for Candidate F.
std::vector<std::uint8_t> voting_round_to_row(const std::vector<std::uint8_t>& bits,
                                              int voter_pos, Intent intent);

struct TallyResult {
  int votes_e = 0;
  int votes_f = 0;
  std::vector<std::uint8_t> r;  // decoded vote bit per row
};
// r_j = xor(row j) xor S_j; 0 votes E, 1 votes F. Board must be complete.
TallyResult tally(const ResultsBoard& board);

// Classical sub-protocol stubs (trusted-coordinator semantics, seeded).
// Interfaces are isolated so cryptographic versions can replace them.
std::vector<int> classical_stub_unique_index(int n, std::uint64_t seed);
int classical_stub_random_agent(int n, std::uint64_t event_id, std::uint64_t seed);
std::uint8_t classical_stub_logical_or(const std::vector<std::uint8_t>& flags);

struct ElectionResult {
  ElectionOutcome outcome;
  std::vector<RoundRecord> transcript;
  ResultsBoard board;
  std::vector<int> voter_indices;  // agent position -> voter index
};

// Full quantum-assisted election over `params.rounds` distributed states.
// Deterministic for fixed inputs and seed; `threads` only shards the
// independent per-round simulation and never changes results.
ElectionResult run_election(const std::vector<AgentProfile>& profiles,
                            const family::SourceStrategy& strategy,
                            const SecurityParams& params, std::uint64_t master_seed,
                            const DishonestPolicy* policy = nullptr, int threads = 1);

// Per-round simulation shared by run_election and the anonymity audit.
struct SimulatedRound {
  family::EmittedRoundState emitted;
  std::vector<Basis> physical;            // actually measured
  std::vector<Basis> reported;            // sent to the Verifier
  std::vector<std::uint8_t> true_outcomes;
};
SimulatedRound simulate_round(int round, const std::vector<AgentProfile>& profiles,
                              const family::SourceStrategy& strategy,
                              const DishonestPolicy* policy, std::uint64_t master_seed);

// Classification, verification, board filling, and tally over prepared
// rounds. run_election is simulate_round over l rounds plus this; the
// stream-driven mode feeds rounds recovered from the coincidence pipeline.
ElectionResult complete_election(const std::vector<AgentProfile>& profiles,
                                 const std::vector<SimulatedRound>& rounds,
                                 const SecurityParams& params, std::uint64_t master_seed,
                                 const DishonestPolicy* policy = nullptr);

}  // namespace qvote::protocol
