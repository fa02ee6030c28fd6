"""End-to-end verify suites at grid sizes small enough for a test run."""

import json

import pytest

from contact_hj.config import from_dict
from contact_hj.run_experiment import run


def run_suite(tmp_path, suite, n, hamiltonian="quad_pendulum", **sections):
    cfg = from_dict({
        "experiment": "verify",
        "hamiltonian": {"name": hamiltonian},
        "grid": {"n": n},
        "params": {"suite": suite},
        "output": {"directory": str(tmp_path / suite)},
        **sections,
    })
    code = run(cfg)
    with open(tmp_path / suite / "verification.json") as f:
        checks = json.load(f)
    return code, checks


@pytest.mark.parametrize("suite, n", [
    ("cone", 256),
    ("plain_fundamental", 256),
    ("stationary_member", 256),
    ("uniqueness", 128),
    ("two_solutions", 128),
    ("non_monotone", 64),
    ("c_lipschitz", 128),
    ("comparison", 256),
    ("monotone_limit", 128),
    ("duality", 128),
    ("cross_solver", 256),
    ("min_commutation", 128),
    ("calibration", 128),
    ("properties", 64),
])
def test_suite_passes(tmp_path, suite, n):
    code, checks = run_suite(tmp_path, suite, n)
    failed = [c for c in checks if not c["passed"]]
    assert code == 0, failed
    assert checks and not failed


@pytest.mark.parametrize("suite, names", [
    ("uniqueness", {"seeds_converge", "limits_agree", "single_stationary_cluster", "fine_oracle_agrees"}),
    ("non_monotone", {"at_least_three_clusters", "two_roundtrip_images", "constant_cluster", "bowl_cluster"}),
])
def test_suite_reports_every_check(tmp_path, suite, names):
    _, checks = run_suite(tmp_path, suite, 64)
    assert names <= {c["name"] for c in checks}


def test_stationary_member_rejects_a_smeared_scheme(tmp_path):
    code, checks = run_suite(tmp_path, "stationary_member", 256, solver={"scheme": "lax_friedrichs"})
    member = next(c for c in checks if c["name"] == "stationary_member")
    assert code == 1
    assert not member["passed"]
    assert member["measured"] > member["bound"]


def test_failed_check_sets_exit_status(tmp_path):
    cfg = from_dict({
        "experiment": "verify",
        "grid": {"n": 64},
        "solver": {"ceiling": 1.0},
        "params": {"suite": "comparison"},
        "output": {"directory": str(tmp_path)},
    })
    assert run(cfg) == 1
    with open(tmp_path / "manifest.json") as f:
        manifest = json.load(f)
    assert manifest["status"] == "failed"
    assert manifest["reasons"]
