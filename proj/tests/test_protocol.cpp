#include <doctest.h>

#include <cmath>
#include <set>

#include "qvote/harness.hpp"
#include "qvote/protocol.hpp"
#include "qvote/rng.hpp"

using namespace qvote;
using protocol::Basis;
using protocol::Classification;
using protocol::Intent;

TEST_CASE("classical baseline: unanimous E gives a 4-0 outcome with r_j = 0") {
  const auto res = protocol::classical_baseline_election(protocol::make_profiles("EEEE"), 11);
  CHECK(res.outcome.votes_e == 4);
  CHECK(res.outcome.votes_f == 0);
  CHECK_FALSE(res.outcome.aborted);
  const auto t = protocol::tally(res.board);
  for (auto r : t.r) CHECK(r == 0);
}

TEST_CASE("classical baseline: EFEF records everyone's intent") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto res = protocol::classical_baseline_election(protocol::make_profiles("EFEF"), seed);
    CHECK(res.outcome.votes_e == 2);
    CHECK(res.outcome.votes_f == 2);
    for (auto ok : res.outcome.voter_success) CHECK(ok == 1);
  }
}

TEST_CASE("classical baseline: a garbage-broadcasting voter is caught by LogicalOr") {
  // Agent 2 dishonest: its own row is seeded garbage, so with multiple seeds
  // some run flips that row's decoded vote and the voter flag reports failure.
  bool saw_failure = false;
  for (std::uint64_t seed = 0; seed < 20 && !saw_failure; ++seed) {
    const auto res =
        protocol::classical_baseline_election(protocol::make_profiles("EEEE", {2}), seed);
    for (std::size_t j = 0; j < res.outcome.voter_success.size(); ++j) {
      saw_failure = saw_failure || !res.outcome.voter_success[j];
    }
  }
  CHECK(saw_failure);
}

TEST_CASE("choose_basis replays deterministically and is a fair coin") {
  for (int agent = 1; agent <= 4; ++agent) {
    for (int round = 0; round < 50; ++round) {
      CHECK(protocol::choose_basis(agent, round, 123) ==
            protocol::choose_basis(agent, round, 123));
    }
  }
  const int rounds = 100000;
  int h1 = 0, odd = 0;
  for (int round = 0; round < rounds; ++round) {
    int h = 0;
    for (int agent = 1; agent <= 4; ++agent) {
      h += protocol::choose_basis(agent, round, 9) == Basis::Hadamard;
    }
    h1 += protocol::choose_basis(1, round, 9) == Basis::Hadamard;
    odd += h % 2;
  }
  const double sigma = 0.5 / std::sqrt(double(rounds));
  CHECK(std::abs(h1 / double(rounds) - 0.5) < 3 * sigma);
  CHECK(std::abs(odd / double(rounds) - 0.5) < 3 * sigma);
}

TEST_CASE("classify_round follows the announcement rules") {
  const std::vector<Basis> odd = {Basis::Hadamard, Basis::Computational, Basis::Computational,
                                  Basis::Computational};
  CHECK(protocol::classify_round(odd, 1, 7).classification == Classification::Discarded);

  // Find a coin seed that yields all heads for m=2 to force a voting round.
  const std::vector<Basis> hhcc = {Basis::Hadamard, Basis::Hadamard, Basis::Computational,
                                   Basis::Computational};
  std::uint64_t heads_seed = 0;
  for (std::uint64_t s = 0;; ++s) {
    Rng rng(s);
    if (rng.coin() && rng.coin()) {
      heads_seed = s;
      break;
    }
  }
  const auto voting = protocol::classify_round(hhcc, heads_seed, 2);
  CHECK(voting.classification == Classification::Voting);
  CHECK(voting.s_p == 1);  // H_p = 2 -> S_p = 1

  std::uint64_t tails_seed = 0;
  for (std::uint64_t s = 0;; ++s) {
    Rng rng(s);
    if (!rng.coin()) {
      tails_seed = s;
      break;
    }
  }
  const std::vector<Basis> cccc(4, Basis::Computational);
  CHECK(protocol::classify_round(cccc, tails_seed, 2).classification ==
        Classification::Verifying);
}

TEST_CASE("verify_round arithmetic") {
  CHECK(protocol::verify_round(0, {0, 0, 0, 0}));
  CHECK(protocol::verify_round(2, {1, 0, 0, 0}));
  CHECK_FALSE(protocol::verify_round(4, {1, 0, 0, 0}));
  CHECK_THROWS_AS(protocol::verify_round(1, {0, 0, 0, 0}), ContractViolation);
}

TEST_CASE("voting_round_to_row and tally compose as the XOR scheme") {
  // S_p = 1, honest string parity 1, intent E -> decoded vote 0 (Candidate E).
  protocol::ResultsBoard board(4);
  board.rows[0] = protocol::voting_round_to_row({1, 0, 0, 0}, 0, Intent::CandidateE);
  board.s_bits[0] = 1;
  board.filled[0] = 1;
  // Same bits but intent F flips the voter's bit -> decoded vote 1.
  board.rows[1] = protocol::voting_round_to_row({1, 0, 0, 0}, 1, Intent::CandidateF);
  board.s_bits[1] = 1;
  board.filled[1] = 1;
  // All-zero row with S = 0 -> vote E.
  board.rows[2] = protocol::voting_round_to_row({0, 0, 0, 0}, 2, Intent::CandidateE);
  board.s_bits[2] = 0;
  board.filled[2] = 1;
  // Single flip -> vote F.
  board.rows[3] = protocol::voting_round_to_row({0, 0, 0, 0}, 3, Intent::CandidateF);
  board.s_bits[3] = 0;
  board.filled[3] = 1;

  const auto t = protocol::tally(board);
  CHECK(t.r == std::vector<std::uint8_t>{0, 1, 0, 1});
  CHECK(t.votes_e == 2);
  CHECK(t.votes_f == 2);
}

TEST_CASE("tally refuses an incomplete board") {
  protocol::ResultsBoard board(4);
  CHECK_THROWS_AS(protocol::tally(board), ContractViolation);
}

TEST_CASE("ideal run: no aborts, pass rate one, intents recorded") {
  protocol::SecurityParams params;
  params.m = 3;
  params.rounds = 10000;
  const auto res = protocol::run_election(protocol::make_profiles("EFFE"),
                                          family::IdealSource{}, params, 21);
  CHECK_FALSE(res.outcome.aborted);
  CHECK(res.outcome.status == protocol::ElectionStatus::Completed);
  CHECK(res.outcome.verification_pass_rate == 1.0);
  CHECK(res.outcome.votes_e == 2);
  CHECK(res.outcome.votes_f == 2);
  for (auto ok : res.outcome.voter_success) CHECK(ok == 1);

  // Every voting row XOR S_p decodes to the voter's intent; rows backing the
  // ideal state with intent E satisfy xor(row) ^ S_p = 0.
  for (const auto& rec : res.transcript) {
    if (!rec.voter_index) continue;
    int parity = *rec.s_p;
    for (auto b : rec.outcomes) parity ^= b;
    const int pos = static_cast<int>(std::distance(
        res.voter_indices.begin(),
        std::find(res.voter_indices.begin(), res.voter_indices.end(), *rec.voter_index)));
    const Intent intent = std::string("EFFE")[pos] == 'E' ? Intent::CandidateE : Intent::CandidateF;
    CHECK(parity == (intent == Intent::CandidateF ? 1 : 0));
  }
}

TEST_CASE("all-phi1 source fails every verifying round and aborts") {
  family::FixedFamily phi1;
  phi1.schedule = {{family::FamilyKind::Phi1, +1, 4}};
  protocol::SecurityParams params;
  params.m = 3;
  params.rounds = 2000;
  const auto res =
      protocol::run_election(protocol::make_profiles("EEEE"), phi1, params, 5);
  CHECK(res.outcome.verification_pass_rate == 0.0);
  CHECK(res.outcome.aborted);
  CHECK(res.outcome.status == protocol::ElectionStatus::AbortedVerification);
}

TEST_CASE("Werner source pass rate matches the exact enumeration oracle") {
  const auto w = family::WernerEnsemble::from_fidelity(0.89, 4);
  protocol::SecurityParams params;
  params.m = 7;
  params.rounds = 8000;
  params.tau = 0.2;
  const auto res = protocol::run_election(protocol::make_profiles("EEEE"), w, params, 31);
  const double oracle = harness::werner_pass_probability_oracle(w.p, 4);
  const double sigma =
      std::sqrt(oracle * (1 - oracle) / double(res.outcome.verifying_rounds));
  CHECK(std::abs(res.outcome.verification_pass_rate - oracle) < 3 * sigma);
  // Closed form for the same quantity: 1 - (1-p)/2.
  CHECK(oracle == doctest::Approx(1.0 - (1.0 - w.p) / 2).epsilon(1e-12));
}

TEST_CASE("oracle equivalence: quantum ideal records the same candidates as the baseline") {
  protocol::SecurityParams params;
  params.m = 3;
  params.rounds = 6000;
  Rng rng(77);
  for (int trial = 0; trial < 6; ++trial) {
    std::string intents;
    for (int i = 0; i < 4; ++i) intents.push_back(rng.coin() ? 'F' : 'E');
    const auto profiles = protocol::make_profiles(intents);
    const auto q = protocol::run_election(profiles, family::IdealSource{}, params,
                                          derive_seed(3, "oracle-eq", trial));
    const auto c = protocol::classical_baseline_election(profiles, derive_seed(4, "oracle-eq", trial));
    REQUIRE_FALSE(q.outcome.aborted);
    CHECK(q.outcome.votes_e == c.outcome.votes_e);
    CHECK(q.outcome.votes_f == c.outcome.votes_f);
    CHECK(q.outcome.voter_success == c.outcome.voter_success);
  }
}

TEST_CASE("parity bookkeeping holds in every ideal non-discarded round") {
  protocol::SecurityParams params;
  params.m = 3;
  params.rounds = 3000;
  const auto res = protocol::run_election(protocol::make_profiles("EEEE"),
                                          family::IdealSource{}, params, 13);
  for (const auto& rec : res.transcript) {
    if (rec.classification == Classification::Discarded) continue;
    if (rec.voter_index) continue;  // broadcast rows include the voter flip
    int h = 0;
    for (Basis b : rec.bases) h += b == Basis::Hadamard;
    int sum = 0;
    for (auto y : rec.outcomes) sum += y;
    CHECK((h / 2) % 2 == sum % 2);
  }
}

TEST_CASE("classification fractions sit inside the 3-sigma binomial band") {
  protocol::SecurityParams params;
  params.m = 3;
  params.rounds = 20000;
  const auto res = protocol::run_election(protocol::make_profiles("EEEE"),
                                          family::IdealSource{}, params, 99);
  std::uint64_t voting = 0;
  for (const auto& rec : res.transcript) voting += rec.classification == Classification::Voting;
  const auto within = [&](double frac, double p) {
    return std::abs(frac - p) <= 3 * std::sqrt(p * (1 - p) / params.rounds);
  };
  CHECK(within(res.outcome.discarded_rounds / double(params.rounds), 0.5));
  CHECK(within(voting / double(params.rounds), 0.5 * std::pow(2.0, -params.m)));
  CHECK(within(res.outcome.verifying_rounds / double(params.rounds),
               0.5 * (1 - std::pow(2.0, -params.m))));
}

TEST_CASE("insufficient voting rounds is a first-class outcome") {
  protocol::SecurityParams params;
  params.m = 20;  // voting probability ~1e-6: no voting rounds in 200 draws
  params.rounds = 200;
  const auto res = protocol::run_election(protocol::make_profiles("EEEE"),
                                          family::IdealSource{}, params, 3);
  CHECK(res.outcome.aborted);
  CHECK(res.outcome.status == protocol::ElectionStatus::InsufficientVotingRounds);
}

TEST_CASE("stubs: unique index permutes, random agent is uniform, logical OR") {
  const auto perm = protocol::classical_stub_unique_index(4, 17);
  CHECK(std::set<int>(perm.begin(), perm.end()) == std::set<int>{1, 2, 3, 4});

  std::vector<std::uint64_t> counts(4, 0);
  const int draws = 100000;
  for (int e = 0; e < draws; ++e) {
    ++counts[protocol::classical_stub_random_agent(4, e, 23) - 1];
  }
  const auto gof = stats::chi_square_gof(counts, std::vector<double>(4, 0.25));
  CHECK(gof.p_value > 0.001);

  CHECK(protocol::classical_stub_logical_or({0, 0, 1, 0}) == 1);
  CHECK(protocol::classical_stub_logical_or({0, 0, 0, 0}) == 0);
}

TEST_CASE("elections are reproducible and worker-count independent") {
  protocol::SecurityParams params;
  params.m = 3;
  params.rounds = 800;
  const auto profiles = protocol::make_profiles("EFEF");
  const auto a = protocol::run_election(profiles, family::IdealSource{}, params, 1, nullptr, 1);
  const auto b = protocol::run_election(profiles, family::IdealSource{}, params, 1, nullptr, 1);
  const auto c = protocol::run_election(profiles, family::IdealSource{}, params, 1, nullptr, 4);
  CHECK(harness::transcript_to_jsonl(a.transcript) == harness::transcript_to_jsonl(b.transcript));
  CHECK(harness::transcript_to_jsonl(a.transcript) == harness::transcript_to_jsonl(c.transcript));
}
