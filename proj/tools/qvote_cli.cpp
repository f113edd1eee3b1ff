// Command-line front end: elections, attack scenarios with anonymity audits,
// the invariant suite, and coincidence-stream generation/filtering.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "qvote/harness.hpp"

namespace {

using qvote::harness::ExperimentConfig;
using json = qvote::harness::json;

int finish_reports(const std::vector<qvote::harness::StatReport>& reports) {
  int violations = 0;
  for (const auto& r : reports) {
    std::cout << (r.ok() ? "[ OK ] " : "[FAIL] ") << r.metric;
    if (!r.details.empty()) std::cout << " - " << r.details;
    std::cout << "\n";
    violations += !r.ok();
  }
  return violations == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qvote: anonymous quantum e-voting simulator"};
  app.require_subcommand(1);

  // --- elect ------------------------------------------------------------------
  auto* elect = app.add_subcommand("elect", "run an election");
  std::string config_path, intents = "EEEE", source = "ideal";
  std::string transcript_path, summary_path, report_path, mode = "elect";
  int agents = 4, m = 7, rounds = 10000, threads = 1;
  double tau = 0.05;
  std::uint64_t seed = 1;
  elect->add_option("--config", config_path, "JSON config file (overrides other flags)");
  elect->add_option("--agents", agents);
  elect->add_option("--intents", intents, "one of E/F per agent, e.g. EFEF");
  elect->add_option("--source", source,
                    "ideal | werner:<p> | werner-fidelity:<F> | dephasing:<sigma> | phi1");
  elect->add_option("--m", m, "coin count security parameter");
  elect->add_option("--tau", tau, "allowed failure fraction");
  elect->add_option("--rounds", rounds, "distributed states l");
  elect->add_option("--seed", seed);
  elect->add_option("--threads", threads);
  elect->add_option("--mode", mode, "elect | stream-elect");
  elect->add_option("--transcript", transcript_path, "JSON-lines transcript output");
  elect->add_option("--summary", summary_path, "summary JSON output");
  elect->add_option("--report", report_path, "statistical report JSON output");

  // --- attack -----------------------------------------------------------------
  auto* attack = app.add_subcommand("attack", "run an adversary scenario plus anonymity audit");
  std::string scenario;
  std::uint64_t trials = 10000;
  bool list_scenarios = false;
  std::string attack_out;
  attack->add_option("scenario", scenario, "scenario name (see --list)");
  attack->add_flag("--list", list_scenarios, "list scenario names");
  attack->add_option("--trials", trials);
  attack->add_option("--seed", seed);
  attack->add_option("--out", attack_out, "audit report JSON output");

  // --- verify-properties --------------------------------------------------------
  auto* verify = app.add_subcommand("verify-properties", "run the invariant suite");
  bool quick = false;
  std::string verify_out;
  verify->add_flag("--quick", quick, "smaller sample sizes");
  verify->add_option("--seed", seed);
  verify->add_option("--out", verify_out, "suite report JSON output");

  // --- coincidence ---------------------------------------------------------------
  auto* coin = app.add_subcommand("coincidence", "generate or filter timestamp streams");
  std::string coin_action = "generate", in_path, out_path;
  double duration_s = 10.0, dark_hz = 300.0, fourfold_hz = 0.3, jitter_ps = 50.0;
  std::uint64_t window_ps = 1000;
  coin->add_option("action", coin_action, "generate | filter");
  coin->add_option("--in", in_path, "input stream file (filter)");
  coin->add_option("--out", out_path, "output file");
  coin->add_option("--duration-s", duration_s);
  coin->add_option("--dark-hz", dark_hz, "dark counts per second per channel");
  coin->add_option("--fourfold-hz", fourfold_hz, "planted fourfold rate");
  coin->add_option("--jitter-ps", jitter_ps);
  coin->add_option("--window-ps", window_ps, "coincidence window");
  coin->add_option("--seed", seed);

  // --- report ---------------------------------------------------------------------
  auto* report = app.add_subcommand("report", "render a statistical report from a transcript");
  std::string report_transcript, report_out;
  bool with_hardware_refs = false;
  report->add_option("--transcript", report_transcript)->required();
  report->add_option("--out", report_out);
  report->add_flag("--hardware-refs", with_hardware_refs,
                   "include the hardware demonstration reference values");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*elect) {
      ExperimentConfig cfg;
      if (!config_path.empty()) {
        cfg = qvote::harness::config_from_json(
            json::parse(qvote::harness::read_text_file(config_path)));
      } else {
        cfg.mode = mode;
        cfg.agents = agents;
        cfg.intents = intents;
        cfg.security = {m, tau, rounds};
        cfg.seed = seed;
        cfg.threads = threads;
        if (source == "ideal") {
          cfg.source = json{{"kind", "ideal"}};
        } else if (source == "phi1") {
          cfg.source = json{{"kind", "fixed_family"},
                            {"schedule", json::array({json{{"family", "phi1"},
                                                           {"sign", 1},
                                                           {"n", agents}}})}};
        } else if (source.rfind("werner:", 0) == 0) {
          cfg.source = json{{"kind", "werner"}, {"p", std::stod(source.substr(7))}};
        } else if (source.rfind("werner-fidelity:", 0) == 0) {
          cfg.source = json{{"kind", "werner"},
                            {"fidelity", std::stod(source.substr(16))},
                            {"n", agents}};
        } else if (source.rfind("dephasing:", 0) == 0) {
          cfg.source = json{{"kind", "dephasing"}, {"sigma", std::stod(source.substr(10))}};
        } else {
          std::cerr << "unknown source: " << source << "\n";
          return 2;
        }
        if (cfg.mode == "stream-elect") cfg.stream = qvote::coincidence::StreamConfig{};
      }
      if (!transcript_path.empty()) cfg.transcript_path = transcript_path;
      if (!summary_path.empty()) cfg.summary_path = summary_path;
      if (!report_path.empty()) cfg.report_path = report_path;
      const auto res = qvote::harness::run_experiment(cfg);
      std::cout << res.summary.dump(2) << "\n";
      return finish_reports(res.reports);
    }

    if (*attack) {
      if (list_scenarios) {
        for (const auto& name : qvote::adversary::scenario_names()) std::cout << name << "\n";
        return 0;
      }
      if (scenario.empty()) {
        std::cerr << "need a scenario name (or --list)\n";
        return 2;
      }
      ExperimentConfig cfg;
      cfg.mode = "attack";
      cfg.scenario = scenario;
      cfg.trials = trials;
      cfg.seed = seed;
      if (!attack_out.empty()) cfg.report_path = attack_out;
      const auto res = qvote::harness::run_experiment(cfg);
      std::cout << res.summary.dump(2) << "\n";
      return finish_reports(res.reports);
    }

    if (*verify) {
      const auto reports = qvote::harness::run_property_checks(seed, quick);
      if (!verify_out.empty()) {
        json j;
        json rows = json::array();
        bool all_ok = true;
        for (const auto& r : reports) {
          rows.push_back(qvote::harness::report_to_json(r));
          all_ok = all_ok && r.ok();
        }
        j["all_ok"] = all_ok;
        j["reports"] = rows;
        qvote::harness::write_text_file(verify_out, j.dump(2) + "\n");
      }
      return finish_reports(reports);
    }

    if (*coin) {
      using namespace qvote::coincidence;
      if (coin_action == "generate") {
        if (out_path.empty()) {
          std::cerr << "generate needs --out\n";
          return 2;
        }
        StreamConfig sc;
        sc.duration_s = duration_s;
        sc.dark_rate_hz_per_channel = dark_hz;
        sc.fourfold_rate_hz = fourfold_hz;
        sc.jitter_ps = jitter_ps;
        sc.window_ps = window_ps;
        const ChannelMap map;
        const auto schedule = make_random_schedule(sc, map, seed);
        const auto stream = generate_stream(sc, schedule, seed);
        std::ofstream os(out_path, std::ios::binary);
        write_stream_file(os, stream.events, window_ps, map);
        std::cout << "events=" << stream.events.size() << " planted=" << schedule.size() << "\n";
        return 0;
      }
      if (coin_action == "filter") {
        if (in_path.empty()) {
          std::cerr << "filter needs --in\n";
          return 2;
        }
        std::ifstream is(in_path, std::ios::binary);
        const auto file = read_stream_file(is);
        const auto fourfolds = run_pipeline(file.events, file.window_ps, file.map);
        std::ostream* os = &std::cout;
        std::ofstream fo;
        if (!out_path.empty()) {
          fo.open(out_path, std::ios::binary);
          os = &fo;
        }
        for (const auto& f : fourfolds) {
          const auto d = decode_fourfold(f, file.map);
          json j;
          j["t_ps"] = d.t_ps;
          std::string bases;
          for (auto b : d.bases) bases.push_back(qvote::protocol::basis_char(b));
          j["bases"] = bases;
          j["outcomes"] = d.outcomes;
          (*os) << j.dump() << "\n";
        }
        std::cout << "fourfolds=" << fourfolds.size() << "\n";
        return 0;
      }
      std::cerr << "unknown coincidence action: " << coin_action << "\n";
      return 2;
    }

    if (*report) {
      const auto transcript = qvote::harness::transcript_from_jsonl(
          qvote::harness::read_text_file(report_transcript));
      std::vector<qvote::harness::RefValue> refs;
      if (with_hardware_refs) {
        refs.push_back({0.87, qvote::adversary::Provenance::Paper,
                        "hardware demonstration pass rate 87% +/- 3%"});
      }
      const auto rep = qvote::harness::verification_rate_report(transcript, refs);
      json j = qvote::harness::report_to_json(rep);
      if (!report_out.empty()) qvote::harness::write_text_file(report_out, j.dump(2) + "\n");
      std::cout << j.dump(2) << "\n";
      return rep.ok() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
