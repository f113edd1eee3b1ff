#include "qvote/protocol.hpp"

#include <algorithm>
#include <thread>

#include "qvote/rng.hpp"

namespace qvote::protocol {

using family::SourceStrategy;
using sim::LocalGate;
using sim::StateVector;

char basis_char(Basis b) { return b == Basis::Computational ? 'C' : 'H'; }

Basis basis_from_char(char c) {
  if (c == 'C') return Basis::Computational;
  if (c == 'H') return Basis::Hadamard;
  throw ContractViolation(std::string("unknown basis character: ") + c);
}

char intent_char(Intent i) { return i == Intent::CandidateE ? 'E' : 'F'; }

Intent intent_from_char(char c) {
  if (c == 'E') return Intent::CandidateE;
  if (c == 'F') return Intent::CandidateF;
  throw ContractViolation(std::string("unknown intent character: ") + c);
}

std::vector<AgentProfile> make_profiles(const std::string& intents,
                                        const std::vector<int>& dishonest_ids) {
  std::vector<AgentProfile> out;
  for (std::size_t i = 0; i < intents.size(); ++i) {
    AgentProfile p;
    p.id = static_cast<int>(i) + 1;
    p.intent = intent_from_char(intents[i]);
    p.honest = std::find(dishonest_ids.begin(), dishonest_ids.end(), p.id) == dishonest_ids.end();
    out.push_back(p);
  }
  return out;
}

ResultsBoard::ResultsBoard(int n_agents)
    : n(n_agents),
      rows(n_agents, std::vector<std::uint8_t>(n_agents, 0)),
      s_bits(n_agents, 0),
      filled(n_agents, 0) {}

bool ResultsBoard::complete() const {
  return std::all_of(filled.begin(), filled.end(), [](std::uint8_t f) { return f != 0; });
}

std::string status_name(ElectionStatus s) {
  switch (s) {
    case ElectionStatus::Completed: return "completed";
    case ElectionStatus::AbortedVerification: return "aborted_verification";
    case ElectionStatus::AbortedVoteFailures: return "aborted_vote_failures";
    case ElectionStatus::InsufficientVotingRounds: return "insufficient_voting_rounds";
  }
  return "unknown";
}

std::vector<int> classical_stub_unique_index(int n, std::uint64_t seed) {
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i + 1;
  Rng rng(derive_seed(seed, "unique-index"));
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform_int(i + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

int classical_stub_random_agent(int n, std::uint64_t event_id, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "random-agent", event_id));
  return static_cast<int>(rng.uniform_int(n)) + 1;
}

std::uint8_t classical_stub_logical_or(const std::vector<std::uint8_t>& flags) {
  for (auto f : flags) {
    if (f) return 1;
  }
  return 0;
}

Basis choose_basis(int agent_id, int round, std::uint64_t master_seed) {
  Rng rng(derive_seed(master_seed, "basis", agent_id, round));
  return rng.coin() ? Basis::Hadamard : Basis::Computational;
}

RoundClassification classify_round(const std::vector<Basis>& reported_bases,
                                   std::uint64_t coin_seed, int m) {
  if (m < 1) throw ContractViolation("security parameter m must be >= 1");
  int h_p = 0;
  for (Basis b : reported_bases) h_p += b == Basis::Hadamard;
  RoundClassification out;
  if (h_p % 2 == 1) {
    out.classification = Classification::Discarded;
    return out;
  }
  Rng rng(coin_seed);
  bool all_heads = true;
  for (int i = 0; i < m; ++i) {
    if (!rng.coin()) {
      all_heads = false;
      break;
    }
  }
  if (all_heads) {
    out.classification = Classification::Voting;
    out.s_p = static_cast<std::uint8_t>((h_p / 2) % 2);
  } else {
    out.classification = Classification::Verifying;
  }
  return out;
}

bool verify_round(int h_p, const std::vector<std::uint8_t>& outcomes) {
  if (h_p % 2 != 0) {
    throw ContractViolation("verification requires an even Hadamard count");
  }
  int sum = 0;
  for (auto y : outcomes) sum += y;
  return (h_p / 2) % 2 == sum % 2;
}

std::vector<std::uint8_t> voting_round_to_row(const std::vector<std::uint8_t>& bits,
                                              int voter_pos, Intent intent) {
  if (voter_pos < 0 || voter_pos >= static_cast<int>(bits.size())) {
    throw ContractViolation("voter position out of range");
  }
  std::vector<std::uint8_t> row = bits;
  if (intent == Intent::CandidateF) row[voter_pos] ^= 1;
  return row;
}

TallyResult tally(const ResultsBoard& board) {
  if (!board.complete()) throw ContractViolation("results board has unfilled rows");
  TallyResult out;
  out.r.resize(board.n);
  for (int j = 0; j < board.n; ++j) {
    std::uint8_t parity = board.s_bits[j];
    for (auto b : board.rows[j]) parity ^= b;
    out.r[j] = parity;
    if (parity == 0) {
      ++out.votes_e;
    } else {
      ++out.votes_f;
    }
  }
  return out;
}

BaselineResult classical_baseline_election(const std::vector<AgentProfile>& profiles,
                                           std::uint64_t dealer_seed,
                                           const SecurityParams& params) {
  const int n = static_cast<int>(profiles.size());
  if (n < 3) throw ContractViolation("election needs at least 3 agents");
  const std::vector<int> voter_of = classical_stub_unique_index(n, dealer_seed);

  BaselineResult res;
  res.board = ResultsBoard(n);
  for (int j = 1; j <= n; ++j) {
    // Trusted dealer hands out a parity-even bitstring.
    Rng rng(derive_seed(dealer_seed, "dealer", j));
    std::vector<std::uint8_t> bits(n, 0);
    std::uint8_t parity = 0;
    for (int i = 0; i + 1 < n; ++i) {
      bits[i] = static_cast<std::uint8_t>(rng.coin());
      parity ^= bits[i];
    }
    bits[n - 1] = parity;

    int voter_pos = 0;
    for (int i = 0; i < n; ++i) {
      if (voter_of[i] == j) voter_pos = i;
    }
    const AgentProfile& voter = profiles[voter_pos];
    std::vector<std::uint8_t> row = voting_round_to_row(bits, voter_pos, voter.intent);
    if (!voter.honest) {
      // A dishonest voter may broadcast anything; model as seeded garbage.
      Rng g(derive_seed(dealer_seed, "garbage", j));
      for (auto& b : row) b = static_cast<std::uint8_t>(g.coin());
    }
    res.board.rows[j - 1] = std::move(row);
    res.board.s_bits[j - 1] = 0;
    res.board.filled[j - 1] = 1;
  }

  const TallyResult t = tally(res.board);
  res.outcome.votes_e = t.votes_e;
  res.outcome.votes_f = t.votes_f;
  res.outcome.voter_success.assign(n, 0);
  std::vector<std::uint8_t> failures(n, 0);
  for (int i = 0; i < n; ++i) {
    const int j = voter_of[i];
    const std::uint8_t want = profiles[i].intent == Intent::CandidateF ? 1 : 0;
    res.outcome.voter_success[j - 1] = t.r[j - 1] == want;
    failures[j - 1] = t.r[j - 1] != want;
  }
  const double fail_frac =
      static_cast<double>(std::count(failures.begin(), failures.end(), 1)) / n;
  if (classical_stub_logical_or(failures) && fail_frac > params.tau) {
    res.outcome.aborted = true;
    res.outcome.status = ElectionStatus::AbortedVoteFailures;
  }
  return res;
}

SimulatedRound simulate_round(int round, const std::vector<AgentProfile>& profiles,
                              const SourceStrategy& strategy, const DishonestPolicy* policy,
                              std::uint64_t master_seed) {
  const int n = static_cast<int>(profiles.size());
  SimulatedRound sr;
  sr.emitted = family::emit_round(strategy, n, round, derive_seed(master_seed, "emit", round));

  sr.physical.resize(n);
  sr.reported.resize(n);
  for (int i = 0; i < n; ++i) {
    sr.physical[i] = sr.reported[i] = choose_basis(profiles[i].id, round, master_seed);
  }
  if (policy != nullptr) {
    const BasesDecision d = policy->decide_bases(round, sr.emitted.side_info,
                                                 derive_seed(master_seed, "policy", round));
    if (d.physical.size() != policy->controlled.size() ||
        d.reported.size() != policy->controlled.size()) {
      throw ContractViolation("policy basis decision size mismatch");
    }
    for (std::size_t c = 0; c < policy->controlled.size(); ++c) {
      const int pos = policy->controlled[c] - 1;
      sr.physical[pos] = d.physical[c];
      sr.reported[pos] = d.reported[c];
    }
  }

  StateVector measured = sr.emitted.state;
  for (int i = 0; i < n; ++i) {
    if (sr.physical[i] == Basis::Hadamard) {
      measured = sim::apply_gate(measured, LocalGate::Hadamard, i);
    }
  }
  const auto outcome = sim::sample_computational(measured, derive_seed(master_seed, "measure", round));
  sr.true_outcomes = outcome.bits;
  return sr;
}

namespace {

std::vector<std::uint8_t> collect_reports(const std::vector<AgentProfile>& profiles,
                                          const DishonestPolicy* policy,
                                          const SimulatedRound& sr, int round,
                                          Classification cls) {
  std::vector<std::uint8_t> bits = sr.true_outcomes;
  if (policy == nullptr) return bits;
  std::vector<std::uint8_t> own_true;
  BasesDecision own_bases;
  for (int id : policy->controlled) {
    own_true.push_back(sr.true_outcomes[id - 1]);
    own_bases.physical.push_back(sr.physical[id - 1]);
    own_bases.reported.push_back(sr.reported[id - 1]);
  }
  const auto reported =
      policy->decide_outcomes(round, sr.emitted.side_info, own_bases, own_true, cls);
  if (reported.size() != policy->controlled.size()) {
    throw ContractViolation("policy outcome decision size mismatch");
  }
  for (std::size_t c = 0; c < policy->controlled.size(); ++c) {
    bits[policy->controlled[c] - 1] = reported[c];
  }
  return bits;
}

}  // namespace

ElectionResult complete_election(const std::vector<AgentProfile>& profiles,
                                 const std::vector<SimulatedRound>& sims,
                                 const SecurityParams& params, std::uint64_t master_seed,
                                 const DishonestPolicy* policy) {
  const int n = static_cast<int>(profiles.size());
  if (n < 4) throw ContractViolation("the quantum election needs at least 4 agents");
  if (sims.empty()) throw ContractViolation("need at least one round");

  ElectionResult res;
  res.board = ResultsBoard(n);
  res.voter_indices = classical_stub_unique_index(n, master_seed);
  std::vector<AgentProfile> agents = profiles;
  for (int i = 0; i < n; ++i) agents[i].voter_index = res.voter_indices[i];

  const int rounds = static_cast<int>(sims.size());
  res.transcript.reserve(rounds);
  std::vector<int> voting_rounds;  // transcript indices reserved for voting
  std::uint64_t verifying = 0, failed = 0, discarded = 0;
  for (int r = 0; r < rounds; ++r) {
    const SimulatedRound& sr = sims[r];
    RoundRecord rec;
    rec.event_id = static_cast<std::uint64_t>(r);
    rec.bases = sr.reported;
    rec.verifier = classical_stub_random_agent(n, r, master_seed);
    const RoundClassification cls =
        classify_round(sr.reported, derive_seed(master_seed, "coins", r), params.m);
    rec.classification = cls.classification;
    switch (cls.classification) {
      case Classification::Discarded:
        ++discarded;
        rec.outcomes = sr.true_outcomes;
        break;
      case Classification::Voting:
        rec.s_p = cls.s_p;
        rec.outcomes = sr.true_outcomes;  // broadcast assembled at assignment
        voting_rounds.push_back(static_cast<int>(res.transcript.size()));
        break;
      case Classification::Verifying: {
        ++verifying;
        rec.outcomes = collect_reports(agents, policy, sr, r, Classification::Verifying);
        int h_p = 0;
        for (Basis b : sr.reported) h_p += b == Basis::Hadamard;
        bool ok = verify_round(h_p, rec.outcomes);
        const bool verifier_dishonest =
            policy != nullptr && std::find(policy->controlled.begin(), policy->controlled.end(),
                                           rec.verifier) != policy->controlled.end();
        if (!ok && verifier_dishonest && policy->verifier_lies) ok = true;
        rec.pass = ok;
        if (!ok) ++failed;
        break;
      }
    }
    res.transcript.push_back(std::move(rec));
  }

  ElectionOutcome& out = res.outcome;
  out.verifying_rounds = verifying;
  out.failed_verifications = failed;
  out.discarded_rounds = discarded;
  out.verification_pass_rate =
      verifying == 0 ? 1.0 : 1.0 - static_cast<double>(failed) / static_cast<double>(verifying);
  out.voter_success.assign(n, 0);

  if (verifying > 0 &&
      static_cast<double>(failed) / static_cast<double>(verifying) > params.tau) {
    out.aborted = true;
    out.status = ElectionStatus::AbortedVerification;
    return res;
  }
  if (static_cast<int>(voting_rounds.size()) < n) {
    out.aborted = true;
    out.status = ElectionStatus::InsufficientVotingRounds;
    return res;
  }

  // The first n reserved voting rounds back voter indices 1..n in order.
  for (int j = 1; j <= n; ++j) {
    const int rec_idx = voting_rounds[j - 1];
    RoundRecord& rec = res.transcript[rec_idx];
    const int round = static_cast<int>(rec.event_id);
    int voter_pos = 0;
    for (int i = 0; i < n; ++i) {
      if (agents[i].voter_index == j) voter_pos = i;
    }
    std::vector<std::uint8_t> bits =
        collect_reports(agents, policy, sims[round], round, Classification::Voting);
    std::vector<std::uint8_t> row = voting_round_to_row(bits, voter_pos, agents[voter_pos].intent);
    rec.outcomes = row;
    rec.voter_index = j;
    res.board.rows[j - 1] = std::move(row);
    res.board.s_bits[j - 1] = *rec.s_p;
    res.board.filled[j - 1] = 1;
  }
  out.voting_rounds = voting_rounds.size();

  const TallyResult t = tally(res.board);
  out.votes_e = t.votes_e;
  out.votes_f = t.votes_f;
  std::vector<std::uint8_t> failures(n, 0);
  for (int i = 0; i < n; ++i) {
    const int j = agents[i].voter_index;
    const std::uint8_t want = agents[i].intent == Intent::CandidateF ? 1 : 0;
    out.voter_success[j - 1] = t.r[j - 1] == want;
    failures[j - 1] = t.r[j - 1] != want;
  }
  const double fail_frac =
      static_cast<double>(std::count(failures.begin(), failures.end(), 1)) / n;
  if (classical_stub_logical_or(failures) && fail_frac > params.tau) {
    out.aborted = true;
    out.status = ElectionStatus::AbortedVoteFailures;
  }
  return res;
}

ElectionResult run_election(const std::vector<AgentProfile>& profiles,
                            const SourceStrategy& strategy, const SecurityParams& params,
                            std::uint64_t master_seed, const DishonestPolicy* policy,
                            int threads) {
  const int n = static_cast<int>(profiles.size());
  if (n < 4) throw ContractViolation("the quantum election needs at least 4 agents");
  if (params.rounds < 1) throw ContractViolation("need at least one round");
  if (threads < 1) threads = 1;

  std::vector<AgentProfile> agents = profiles;
  const std::vector<int> voter_of = classical_stub_unique_index(n, master_seed);
  for (int i = 0; i < n; ++i) agents[i].voter_index = voter_of[i];

  // Independent per-round simulation, sharded over workers. Results land in
  // index order, so worker count never changes anything downstream.
  std::vector<SimulatedRound> sims(params.rounds);
  const auto worker = [&](int lo, int hi) {
    for (int r = lo; r < hi; ++r) {
      sims[r] = simulate_round(r, agents, strategy, policy, master_seed);
    }
  };
  if (threads == 1) {
    worker(0, params.rounds);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (params.rounds + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int lo = t * chunk;
      const int hi = std::min(params.rounds, lo + chunk);
      if (lo < hi) pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return complete_election(profiles, sims, params, master_seed, policy);
}

}  // namespace qvote::protocol
