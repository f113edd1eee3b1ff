#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qvote/adversary.hpp"
#include "qvote/coincidence.hpp"
#include "qvote/protocol.hpp"
#include "qvote/stats.hpp"

namespace qvote::harness {

using json = nlohmann::ordered_json;
using adversary::Provenance;

// A reference value a metric is compared against. Every reference carries a
// provenance tag; deserialization fails hard when the tag is missing.
struct RefValue {
  double value = 0.0;
  Provenance tag = Provenance::Derived;
  std::string note;
};
json ref_to_json(const RefValue& r);
RefValue ref_from_json(const json& j);

struct StatReport {
  std::string metric;
  double estimate = 0.0;
  double std_error = 0.0;
  std::optional<double> statistic;
  std::optional<double> p_value;
  std::optional<stats::Interval> interval;
  std::vector<RefValue> references;
  std::string status = "ok";  // ok | violation | insufficient_data
  std::string details;

  bool ok() const { return status != "violation"; }
};
json report_to_json(const StatReport& r);
StatReport report_from_json(const json& j);

struct ExperimentConfig {
  std::string mode = "elect";  // elect | stream-elect | attack
  int agents = 4;
  std::string intents = "EEEE";
  json source = json{{"kind", "ideal"}};
  protocol::SecurityParams security;
  std::string scenario;          // attack mode
  std::uint64_t trials = 10000;  // attack mode audit trials
  std::uint64_t seed = 1;
  int threads = 1;
  std::optional<coincidence::StreamConfig> stream;  // stream-elect
  std::string transcript_path;
  std::string summary_path;
  std::string report_path;
};
json config_to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const json& j);

// Source descriptor <-> strategy. Attack scenarios resolve through the
// adversary registry ({"kind":"scenario","name":...}).
family::SourceStrategy strategy_from_json(const json& j);
json strategy_to_json(const family::SourceStrategy& s);
json stream_config_to_json(const coincidence::StreamConfig& c);
coincidence::StreamConfig stream_config_from_json(const json& j);

// --- transcripts ---------------------------------------------------------------

json round_to_json(const protocol::RoundRecord& r);
std::string transcript_to_jsonl(const std::vector<protocol::RoundRecord>& transcript);
std::vector<protocol::RoundRecord> transcript_from_jsonl(const std::string& text);

json election_summary(const ExperimentConfig& config, const protocol::ElectionResult& result);
json audit_to_json(const adversary::AuditReport& report);

// --- statistical reports --------------------------------------------------------

// Chi-square goodness of fit of sampled basis-index strings against the
// uniform distribution over the expected support. Any sample outside the
// support is a hard violation naming the offending string.
StatReport uniformity_test(const std::vector<std::uint64_t>& samples,
                           const std::vector<std::uint64_t>& support, int n_bits);

// Wilson interval (z = 3) for the verification pass rate over the verifying
// rounds of a transcript, compared against the supplied references.
StatReport verification_rate_report(const std::vector<protocol::RoundRecord>& transcript,
                                    const std::vector<RefValue>& references = {});

struct ExperimentResult {
  std::vector<StatReport> reports;
  json summary;
  bool all_ok = true;
};

// Runs the configured pipeline and writes transcript/summary/report files
// when paths are set. Identical configs produce byte-identical outputs.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Invariant suite behind the `verify-properties` CLI subcommand. `quick`
// shrinks sample counts for smoke use.
std::vector<StatReport> run_property_checks(std::uint64_t seed, bool quick = false);

// Exact verification pass probability for a Werner source with n = 4 honest
// agents, by enumeration over ensemble branches and basis combinations.
double werner_pass_probability_oracle(double p, int n);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace qvote::harness
