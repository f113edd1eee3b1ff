#include <doctest.h>

#include <cmath>

#include "qvote/adversary.hpp"
#include "qvote/harness.hpp"

using namespace qvote;
using adversary::AttackScenario;
using adversary::ReportRule;
using family::FamilyKind;
using protocol::Basis;
using sim::StateVector;

TEST_CASE("every single-variant family attack passes with exact probability 1") {
  for (const FamilyKind kind :
       {FamilyKind::Phi0, FamilyKind::Phi1, FamilyKind::Psi0, FamilyKind::Psi1}) {
    for (int sign : {+1, -1}) {
      const std::string name =
          "family-" + family::family_kind_name(kind) + (sign > 0 ? "-plus" : "-minus");
      const auto sc = adversary::make_scenario(name);
      CHECK(sc.expected_pass_rate == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(adversary::scenario_pass_probability(sc) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("the mixed family attack also passes every round") {
  const auto sc = adversary::make_scenario("family-mixed");
  CHECK(adversary::scenario_pass_probability(sc) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("naive W-state attack tops out at 7/8") {
  const auto search = adversary::exhaustive_policy_search(family::make_w(3), 3, 4);
  CHECK(search.best_pass_probability == doctest::Approx(0.875).epsilon(1e-12));
  CHECK(search.best_pass_probability < 1.0 - 1e-9);
  const auto sc = adversary::make_scenario("naive-w");
  CHECK(sc.expected_pass_rate == doctest::Approx(0.875).epsilon(1e-12));
}

TEST_CASE("naive |000> attack tops out at 5/8") {
  const auto search =
      adversary::exhaustive_policy_search(StateVector::basis_state(3, 0), 3, 4);
  CHECK(search.best_pass_probability == doctest::Approx(0.625).epsilon(1e-12));
  CHECK(search.best_pass_probability < 1.0 - 1e-9);
}

TEST_CASE("a family state pushed through the same search recovers pass probability 1") {
  const auto search = adversary::exhaustive_policy_search(family::make_phi0(3), 3, 4);
  CHECK(search.best_pass_probability == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(search.exhaustive);
  CHECK(search.policy_space_size == 16);
}

TEST_CASE("two-colluder coalitions are searched exhaustively too") {
  const auto fam = adversary::exhaustive_policy_search(family::make_phi0(3), 3, 5);
  CHECK(fam.exhaustive);
  CHECK(fam.policy_space_size == 256);
  CHECK(fam.best_pass_probability == doctest::Approx(1.0).epsilon(1e-12));
  const auto w = adversary::exhaustive_policy_search(family::make_w(3), 3, 5);
  CHECK(w.best_pass_probability < 1.0 - 1e-9);
}

TEST_CASE("family attack survives a full election with zero failed verifications") {
  const auto sc = adversary::make_scenario("family-phi1-minus");
  protocol::SecurityParams params;
  params.m = 3;
  params.rounds = 2500;
  const auto profiles = protocol::make_profiles("EEEE", {4});
  const auto res =
      protocol::run_election(profiles, sc.source, params, 7, sc.policy.get());
  CHECK(res.outcome.verification_pass_rate == 1.0);
  CHECK(res.outcome.failed_verifications == 0);
}

TEST_CASE("discard-parity lemma holds on attack transcripts") {
  const auto sc = adversary::make_scenario("family-psi0-plus");
  protocol::SecurityParams params;
  params.m = 3;
  params.rounds = 1200;
  const auto res = protocol::run_election(protocol::make_profiles("EEEE", {4}), sc.source,
                                          params, 11, sc.policy.get());
  for (const auto& rec : res.transcript) {
    int h_h = 0, h_d = 0;
    for (int i = 0; i < 4; ++i) {
      if (rec.bases[i] == Basis::Hadamard) (i < 3 ? h_h : h_d) += 1;
    }
    if (rec.classification != protocol::Classification::Discarded) {
      CHECK((h_h & 1) == (h_d & 1));
    }
  }
}

TEST_CASE("anonymity audit: ideal source shows no identity leak") {
  const auto report = adversary::anonymity_audit(adversary::make_scenario("ideal"), 10000, 4242);
  REQUIRE_FALSE(report.refused);
  CHECK(report.homogeneity.p_value > 0.001);
  CHECK(report.mi.mi_bits <= 0.01);
  CHECK_FALSE(report.flagged);
}

TEST_CASE("anonymity audit: family attacks announce identity-independent strings") {
  for (const std::string name : {"family-phi0-plus", "family-psi1-minus", "family-mixed"}) {
    const auto report = adversary::anonymity_audit(adversary::make_scenario(name), 10000, 99);
    REQUIRE_FALSE(report.refused);
    CHECK(report.homogeneity.p_value > 0.001);
    CHECK(report.mi.mi_bits <= 0.01);
    CHECK_FALSE(report.flagged);
    // Announced strings in the flip direction land on the opposite parity
    // class; together the announced support covers both classes uniformly.
    CHECK(report.announced.size() == 3);
  }
}

TEST_CASE("anonymity audit flags the planted-leak control with the analytic MI") {
  const auto report =
      adversary::anonymity_audit(adversary::make_scenario("leak-control"), 10000, 7);
  REQUIRE_FALSE(report.refused);
  CHECK(report.flagged);
  CHECK(report.homogeneity.p_value < 0.001);
  // Exact MI of the toy: H(W) - H(W|V) = 1/2 log2(3) + ... = 0.79248 bits.
  CHECK(report.mi.mi_bits == doctest::Approx(0.79248125).epsilon(0.08));
  CHECK(report.mi.ci_lo > 0.5);
}

TEST_CASE("audit refuses scenarios that cannot pass verification") {
  const auto report = adversary::anonymity_audit(adversary::make_scenario("naive-w"), 100, 1);
  CHECK(report.refused);
  CHECK(report.refusal_reason.find("probability 1") != std::string::npos);
}

TEST_CASE("scenario catalog is loadable by name") {
  for (const auto& name : adversary::scenario_names()) {
    const auto sc = adversary::make_scenario(name);
    CHECK(sc.name == name);
  }
  CHECK_THROWS_AS(adversary::make_scenario("no-such-scenario"), ContractViolation);
}

TEST_CASE("fixed colluder policy report rules") {
  adversary::FixedColluderPolicy p(4, Basis::Computational, Basis::Hadamard,
                                   ReportRule::FlippedOutcome);
  const auto d = p.decide_bases(0, "", 0);
  CHECK(d.reported == std::vector<Basis>{Basis::Hadamard});
  CHECK(d.physical == std::vector<Basis>{Basis::Computational});
  CHECK(p.decide_outcomes(0, "", d, {1}, protocol::Classification::Verifying) ==
        std::vector<std::uint8_t>{0});
}
