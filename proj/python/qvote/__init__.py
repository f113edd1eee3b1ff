"""Anonymous quantum e-voting simulator: GHZ-family states, the voting
protocol with verification, adversary scenarios with anonymity audits, and
the coincidence-filtering pipeline."""

import json as _json


def _load_core():
    try:
        from . import _core  # packaged wheel layout
        return _core
    except ImportError:
        pass
    # Development layout: the extension sits in the CMake build tree.
    import importlib.util
    import os

    ext_dir = os.environ.get("QVOTE_EXT_DIR")
    if not ext_dir:
        raise ImportError(
            "qvote._core is not built; install the package or set QVOTE_EXT_DIR "
            "to the directory containing the compiled module"
        )
    for name in os.listdir(ext_dir):
        if name.startswith("_core") and (name.endswith(".so") or name.endswith(".pyd")):
            spec = importlib.util.spec_from_file_location(
                __name__ + "._core", os.path.join(ext_dir, name)
            )
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
            return module
    raise ImportError(f"no _core extension found in {ext_dir}")


_core = _load_core()

make_phi0 = _core.make_phi0
make_phi1 = _core.make_phi1
make_ghz = _core.make_ghz
make_w = _core.make_w
make_psi = _core.make_psi
apply_local = _core.apply_local
sample_computational = _core.sample_computational
projector_expectation = _core.projector_expectation
marginal_state = _core.marginal_state
transformation_property_check = _core.transformation_property_check
werner_p_for_fidelity = _core.werner_p_for_fidelity
dephasing_fidelity_phi0 = _core.dephasing_fidelity_phi0
scenario_names = _core.scenario_names
scenario_pass_probability = _core.scenario_pass_probability
generate_stream = _core.generate_stream
run_pipeline = _core.run_pipeline
analytic_accidental_rate = _core.analytic_accidental_rate

__version__ = _core.__version__


def run_election(config):
    """Run an election (or attack) experiment from a config dict."""
    return _json.loads(_core.run_election_json(_json.dumps(config)))


def run_audit(scenario, trials=10000, seed=1):
    """Anonymity audit of a named attack scenario."""
    return _json.loads(_core.run_audit_json(scenario, trials, seed))


def verify_properties(seed=1, quick=True):
    """Run the invariant suite; returns a list of report dicts."""
    return _json.loads(_core.verify_properties_json(seed, quick))
