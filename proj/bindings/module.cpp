// Python bindings for the main operations: state constructors, local gates
// and sampling, elections, attack scenarios with audits, and the coincidence
// pipeline. Structured results cross the boundary as JSON strings; the
// package wrapper decodes them.

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qvote/harness.hpp"

namespace py = pybind11;
using namespace qvote;

namespace {

sim::StateVector to_state(const std::vector<std::complex<double>>& amps) {
  int n = 0;
  while ((std::size_t(1) << n) < amps.size()) ++n;
  return sim::StateVector(n, amps);
}

std::vector<sim::LocalGate> parse_gates(const std::string& gates) {
  std::vector<sim::LocalGate> out;
  for (char c : gates) {
    switch (c) {
      case 'I': out.push_back(sim::LocalGate::Identity); break;
      case 'H': out.push_back(sim::LocalGate::Hadamard); break;
      case 'Z': out.push_back(sim::LocalGate::PauliZ); break;
      case 'S': out.push_back(sim::LocalGate::SqrtZ); break;
      case 'X': out.push_back(sim::LocalGate::PauliX); break;
      default: throw ContractViolation(std::string("unknown gate character: ") + c);
    }
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "anonymous quantum e-voting simulator core";

  // --- states and the simulator -------------------------------------------------
  m.def("make_phi0", [](int n) { return family::make_phi0(n).amps; }, py::arg("n"));
  m.def("make_phi1", [](int n) { return family::make_phi1(n).amps; }, py::arg("n"));
  m.def("make_ghz", [](int n) { return family::make_ghz(n).amps; }, py::arg("n"));
  m.def("make_w", [](int n) { return family::make_w(n).amps; }, py::arg("n"));
  m.def(
      "make_psi",
      [](int k, const std::vector<int>& subset, const std::string& variant) {
        return family::make_psi(k, subset, family::family_kind_from_name(variant)).amps;
      },
      py::arg("k"), py::arg("hadamard_subset"), py::arg("variant"));

  m.def(
      "apply_local",
      [](const std::vector<std::complex<double>>& amps, const std::string& gates) {
        return sim::apply_local(to_state(amps), parse_gates(gates)).amps;
      },
      py::arg("amplitudes"), py::arg("gates"),
      "Apply one gate per qubit, given as a string over I/H/Z/S/X "
      "(qubit 0 = least significant index bit).");

  m.def(
      "sample_computational",
      [](const std::vector<std::complex<double>>& amps, std::uint64_t seed) {
        const auto r = sim::sample_computational(to_state(amps), seed);
        return py::make_tuple(r.bits, r.probability);
      },
      py::arg("amplitudes"), py::arg("seed"));

  m.def(
      "projector_expectation",
      [](const std::vector<std::complex<double>>& a, const std::vector<std::complex<double>>& b) {
        return sim::projector_expectation(to_state(a), to_state(b));
      },
      py::arg("state"), py::arg("target"));

  m.def(
      "marginal_state",
      [](const std::vector<std::complex<double>>& amps, const std::vector<int>& keep) {
        const auto rho = sim::marginal_state(to_state(amps), keep);
        std::vector<std::vector<std::complex<double>>> rows(rho.dim());
        for (std::size_t r = 0; r < rho.dim(); ++r) {
          rows[r].resize(rho.dim());
          for (std::size_t c = 0; c < rho.dim(); ++c) rows[r][c] = rho.at(r, c);
        }
        return rows;
      },
      py::arg("amplitudes"), py::arg("keep"));

  m.def(
      "transformation_property_check",
      [](int n, const std::vector<int>& subset) {
        const auto label = family::transformation_property_check(n, subset);
        return py::make_tuple(family::family_kind_name(label.kind), label.sign);
      },
      py::arg("n"), py::arg("hadamard_subset"));

  m.def("werner_p_for_fidelity",
        [](double f, int n) { return family::WernerEnsemble::from_fidelity(f, n).p; },
        py::arg("fidelity"), py::arg("n"));
  m.def("dephasing_fidelity_phi0", &family::dephasing_fidelity_phi0, py::arg("n"),
        py::arg("sigma"));

  // --- protocol -------------------------------------------------------------------
  m.def(
      "run_election_json",
      [](const std::string& config_json) {
        const auto cfg = harness::config_from_json(harness::json::parse(config_json));
        const auto res = harness::run_experiment(cfg);
        harness::json out;
        out["summary"] = res.summary;
        out["all_ok"] = res.all_ok;
        harness::json reports = harness::json::array();
        for (const auto& r : res.reports) reports.push_back(harness::report_to_json(r));
        out["reports"] = reports;
        return out.dump();
      },
      py::arg("config_json"),
      "Run an experiment from a JSON config; returns summary and reports as JSON.");

  m.def("scenario_names", [] { return adversary::scenario_names(); });
  m.def(
      "run_audit_json",
      [](const std::string& scenario, std::uint64_t trials, std::uint64_t seed) {
        const auto report =
            adversary::anonymity_audit(adversary::make_scenario(scenario), trials, seed);
        return harness::audit_to_json(report).dump();
      },
      py::arg("scenario"), py::arg("trials"), py::arg("seed"));
  m.def(
      "scenario_pass_probability",
      [](const std::string& scenario) {
        return adversary::scenario_pass_probability(adversary::make_scenario(scenario));
      },
      py::arg("scenario"));

  m.def(
      "verify_properties_json",
      [](std::uint64_t seed, bool quick) {
        harness::json rows = harness::json::array();
        for (const auto& r : harness::run_property_checks(seed, quick)) {
          rows.push_back(harness::report_to_json(r));
        }
        return rows.dump();
      },
      py::arg("seed") = 1, py::arg("quick") = true);

  // --- coincidence ------------------------------------------------------------------
  m.def(
      "generate_stream",
      [](double duration_s, double dark_hz, double fourfold_hz, double jitter_ps,
         std::uint64_t window_ps, std::uint64_t seed) {
        coincidence::StreamConfig cfg;
        cfg.duration_s = duration_s;
        cfg.dark_rate_hz_per_channel = dark_hz;
        cfg.fourfold_rate_hz = fourfold_hz;
        cfg.jitter_ps = jitter_ps;
        cfg.window_ps = window_ps;
        const coincidence::ChannelMap map;
        const auto schedule = coincidence::make_random_schedule(cfg, map, seed);
        const auto stream = coincidence::generate_stream(cfg, schedule, seed);
        std::vector<std::pair<std::uint64_t, int>> events;
        events.reserve(stream.events.size());
        for (const auto& e : stream.events) events.emplace_back(e.t_ps, e.channel);
        return py::make_tuple(events, schedule.size());
      },
      py::arg("duration_s"), py::arg("dark_hz"), py::arg("fourfold_hz"), py::arg("jitter_ps"),
      py::arg("window_ps"), py::arg("seed"));

  m.def(
      "run_pipeline",
      [](const std::vector<std::pair<std::uint64_t, int>>& events, std::uint64_t window_ps) {
        std::vector<coincidence::TimestampEvent> stream;
        stream.reserve(events.size());
        for (const auto& [t, ch] : events) {
          stream.push_back({t, static_cast<std::uint8_t>(ch)});
        }
        const coincidence::ChannelMap map;
        const auto folds = coincidence::run_pipeline(stream, window_ps, map);
        std::vector<std::vector<std::pair<std::uint64_t, int>>> out;
        out.reserve(folds.size());
        for (const auto& f : folds) {
          std::vector<std::pair<std::uint64_t, int>> row;
          for (const auto& e : f.by_agent) row.emplace_back(e.t_ps, e.channel);
          out.push_back(std::move(row));
        }
        return out;
      },
      py::arg("events"), py::arg("window_ps"),
      "Veto filter plus fourfold search; returns per-agent (t_ps, channel) rows.");

  m.def("analytic_accidental_rate", &coincidence::analytic_accidental_rate,
        py::arg("agent_rates_hz"), py::arg("window_s"));

  m.attr("__version__") = "0.1.0";
}
