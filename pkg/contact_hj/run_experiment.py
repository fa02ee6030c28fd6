"""
Command-line front door.

    python -m contact_hj.run_experiment solve --hamiltonian eikonal_discount \
        --init point:y=0,c=1 --T 1 --solver dp
    python -m contact_hj.run_experiment classify --hamiltonian quad_drift --seeds spread:8
    python -m contact_hj.run_experiment verify --suite comparison --hamiltonian quad_pendulum

Every run writes manifest.json, verification.json and its result files to the
output directory. Exit status: 0 all checks pass, 1 a check failed, 2 usage,
configuration or I/O error.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import platform
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import networkx
import numpy as np
import pandas
import scipy

from . import __version__
from .cauchy_fd import Trajectory, shift_report, solve, solve_lsc, tol_scheme
from .config import RunConfig, apply_overrides, load_config, parse_init, parse_seeds
from .emit import emit
from .errors import CatalogError, ConfigError, ContactHJError, IntegrityError, ParameterError
from .extgrid import GridFn, Torus, constant, point_data, squared_distance, sup_metric
from .fundamental import c_lipschitz_report, cone_bounds_report, h_slice, min_stability_report, solve_slices
from .hamiltonians import Hamiltonian, audit, catalog_get, catalog_names
from .lax_oleinik import DpConfig, action, backtrack, solve_dp
from .legendre import fenchel_young_report
from .longtime import (
    CLUSTER_CSV, IMAGE_CSV, classify, cluster, contact_gap_report, duality_gap, stationary_limit, t_infinity,
)
from .oracles import closed_form, fine_oracle
from .reports import CheckResult

logger = logging.getLogger(__name__)

EXPERIMENTS = ["solve", "fundamental", "longtime", "classify", "verify", "audit"]


@dataclass
class RunContext:
    cfg: RunConfig
    h: Hamiltonian
    torus: Torus
    out_dir: str
    artifacts: List[str] = field(default_factory=list)
    checks: List[CheckResult] = field(default_factory=list)

    def emit(self, artifact, name: str, fmt: str) -> None:
        if fmt not in self.cfg.output.formats:
            return
        path = emit(artifact, fmt, os.path.join(self.out_dir, name))
        self.artifacts.append(path)
        print(f"📂 Wrote {path}")


def _hamiltonian(cfg: RunConfig, name: Optional[str] = None) -> Hamiltonian:
    params = dict(cfg.hamiltonian.params)
    params.setdefault("period", cfg.grid.period)
    if name is not None and name != cfg.hamiltonian.name:
        params = {"period": cfg.grid.period}
    return catalog_get(name or cfg.hamiltonian.name, params)


def _output_times(cfg: RunConfig) -> List[float]:
    times = {0.0, float(cfg.params.T)}
    times.update(float(t) for t in (cfg.params.times or ()))
    return sorted(times)


def cone_check(
    h: Hamiltonian, traj, y: int, c: float, name: str = "cone_closed_form",
    rtol: float = 0.02, margin_cells: float = 3.0,
) -> CheckResult:
    """Interior values against the closed-form cone, +inf beyond the margin outside."""
    oracle = "cone_discount" if h.name == "eikonal_discount" else "cone_plain"
    torus = traj.torus
    x = torus.nodes()
    dist = torus.distance(x, x[y])
    worst, outside_ok = 0.0, True
    for t, s in zip(traj.times[1:], traj.slices[1:]):
        ref = closed_form(oracle, {"c": c, "y": y}, torus, t).values
        inside = dist <= t - margin_cells * torus.dx
        if inside.any():
            err = np.abs(s.values[inside] - ref[inside]) / np.maximum(np.abs(ref[inside]), 1.0)
            worst = max(worst, float(np.max(err)) if np.isfinite(err).all() else math.inf)
        outside = dist >= t + margin_cells * torus.dx
        outside_ok &= bool(np.isinf(s.values[outside]).all())
    return CheckResult(name, worst <= rtol and outside_ok, worst, rtol, {"outside_infinite": outside_ok})


def output_check(name: str, traj: Trajectory, phi: GridFn, T: float) -> CheckResult:
    """Last slice at T and finite wherever phi is."""
    lost = int(np.count_nonzero(phi.finite_mask & ~traj.final.finite_mask))
    at_T = bool(traj.times[-1] == T)
    return CheckResult(name, lost == 0 and at_T, float(lost), 0.0,
                       {"t_final": float(traj.times[-1]), **traj.diagnostics})


def run_solve(ctx: RunContext) -> None:
    cfg, h = ctx.cfg, ctx.h
    phi = parse_init(cfg.params.init, ctx.torus)
    times = _output_times(cfg)
    trajs: Dict[str, Trajectory] = {}
    if cfg.solver.kind in ("fd", "both"):
        fd = cfg.fd_config()
        trajs["fd"] = solve(h, phi, cfg.params.T, fd, times) if phi.all_finite else solve_lsc(
            h, phi, cfg.params.T, fd, times)
    if cfg.solver.kind in ("dp", "both"):
        slices = solve_slices(h, phi, times, "dp", cfg.dp_config())
        trajs["dp"] = Trajectory(ctx.torus, np.array(times), slices, {"solver": "dp"})
    for solver, traj in trajs.items():
        ctx.emit(traj, f"solution_{solver}.csv", "csv")
        ctx.checks.append(output_check(f"{solver}_output_valid", traj, phi, float(cfg.params.T)))
    if len(trajs) == 2:
        gap = sup_metric(trajs["fd"].final, trajs["dp"].final)
        ctx.checks.append(CheckResult("cross_solver", gap <= 0.05, gap, 0.05))
    if cfg.params.init.startswith("point:") and h.name in ("eikonal_discount", "eikonal_plain"):
        y = int(np.flatnonzero(phi.finite_mask)[0]) if not phi.all_infinite else 0
        c = float(phi.values[y])
        if math.isfinite(c):
            for solver, traj in trajs.items():
                ctx.checks.append(cone_check(h, traj, y, c, f"cone_closed_form_{solver}"))


def run_fundamental(ctx: RunContext) -> None:
    cfg, h = ctx.cfg, ctx.h
    times = _output_times(cfg)
    solver = "fd" if cfg.solver.kind == "fd" else "dp"
    table = h_slice(h, ctx.torus, cfg.params.y, cfg.params.c, times, solver, cfg.dp_config(), cfg.fd_config())
    ctx.emit(table, f"h_y{cfg.params.y}_c{cfg.params.c:g}.csv", "csv")
    c = cfg.params.c
    ctx.checks.append(c_lipschitz_report(h, ctx.torus, None, times[1:], cfg.params.y,
                                         [(c - 1.0, c), (c, c + 1.0)], solver, cfg.dp_config()))
    bounds = cone_bounds_report(h, ctx.torus, cfg.params.y, cfg.params.T, solver, cfg.dp_config(), cfg.fd_config())
    ctx.checks.append(CheckResult("cone_lower", bounds.c_lower_ok, bounds.diagnostics["worst_lower"], 0.0,
                                  {"C0": bounds.c0}))
    ctx.checks.append(CheckResult("cone_upper", bounds.c_upper_ok, bounds.diagnostics["worst_upper"], 0.0,
                                  {"delta": bounds.delta, "C1": bounds.c1}))


def run_longtime(ctx: RunContext) -> None:
    cfg = ctx.cfg
    phi = parse_init(cfg.params.init, ctx.torus)
    res = stationary_limit(ctx.h, phi, cfg.longtime_config())
    ctx.emit(res.limit, "stationary_limit.csv", "csv")
    ctx.emit({"residual_history": res.residual_history, "t_final": res.t_final,
              "converged": res.converged, "diverged": res.diverged, "diagnostics": res.diagnostics},
             "stationary_limit.json", "json")
    last = res.residual_history[-1][1] if res.residual_history else 0.0
    ctx.checks.append(CheckResult("stationary_converged", res.converged, last, cfg.params.stop_tol,
                                  {"diverged": res.diverged}))


def run_classify(ctx: RunContext) -> None:
    cfg = ctx.cfg
    seeds = parse_seeds(cfg.params.seeds, ctx.torus)
    report = classify(ctx.h, seeds, cfg.longtime_config())
    ctx.emit(report, "class_report.json", "json")
    for i, rep in enumerate(report.stationary_reps):
        ctx.emit(rep, CLUSTER_CSV.format(i), "csv")
    for i, image in enumerate(report.images_ominus):
        ctx.emit(image, IMAGE_CSV.format(i), "csv")
    for seed, why in report.excluded.items():
        print(f"⚠ Seed {seed} excluded: {why}")
    print(f"Clusters: {report.counts[0]}, distinct images: {report.counts[1]}")
    ctx.checks.extend(report.checks)
    ctx.checks.append(CheckResult("clusters_found", report.counts[0] > 0, float(report.counts[0]), 1.0))


def run_audit(ctx: RunContext) -> None:
    rep = audit(ctx.h)
    ctx.emit(rep, "audit.json", "json")
    ctx.checks.append(CheckResult("audit", rep.passed, rep.estimated_lambda, ctx.h.lam,
                                  {"convexity_violations": rep.convexity_violations, "failed_r": rep.failed_r}))
    ctx.checks.append(fenchel_young_report(ctx.h))


# verify suites, one per acceptance check


def suite_cone(ctx: RunContext) -> List[CheckResult]:
    torus = Torus(ctx.torus.period, 1024)
    h = _hamiltonian(ctx.cfg, "eikonal_discount")
    times = [0.0, 0.25, 0.5, 1.0]
    slices = solve_slices(h, point_data(torus, 0, 1.0), times, "dp", DpConfig())
    return [cone_check(h, Trajectory(torus, np.array(times), slices), 0, 1.0, "cone_discount")]


def suite_plain_fundamental(ctx: RunContext) -> List[CheckResult]:
    torus = Torus(ctx.torus.period, 512)
    h = _hamiltonian(ctx.cfg, "eikonal_plain")
    out = []
    for c in (-2.0, 0.0, 3.0):
        table = h_slice(h, torus, 0, c, [0.0, 0.5, 1.0])
        out.append(cone_check(h, table, 0, c, f"plain_cone_c{c:g}", rtol=1e-9, margin_cells=1.0))
    return out


STATIONARY_T = 2.0
STATIONARY_FINE_N = 4096
STATIONARY_TARGET = 0.01


def stationary_member_gap(ctx: RunContext, torus: Torus) -> float:
    h = _hamiltonian(ctx.cfg, "quad_discount")
    phi = squared_distance(torus, [0.0])
    return sup_metric(solve(h, phi, STATIONARY_T, ctx.cfg.fd_config()).final, phi)


def suite_stationary_member(ctx: RunContext) -> List[CheckResult]:
    # first-order schemes sit O(dx) off the member, amplified by e^T on this expanding flow
    gap = stationary_member_gap(ctx, ctx.torus)
    bound = ctx.torus.dx * math.expm1(STATIONARY_T)
    fine = Torus(ctx.torus.period, STATIONARY_FINE_N)
    fine_gap = stationary_member_gap(ctx, fine)
    return [
        CheckResult("stationary_member", gap <= bound, gap, bound, {"n": ctx.torus.n}),
        CheckResult("stationary_member_fine", fine_gap <= STATIONARY_TARGET, fine_gap, STATIONARY_TARGET,
                    {"n": STATIONARY_FINE_N}),
    ]


UNIQUENESS_AGREE = 0.02
ORACLE_T = 0.5


def pendulum_seeds(torus: Torus) -> List[GridFn]:
    # both vanish at the well x = 0, where u(0, t) = phi(0) e^t
    return [constant(torus, 0.0), squared_distance(torus, [0.0], 0.25)]


def suite_uniqueness(ctx: RunContext) -> List[CheckResult]:
    h = _hamiltonian(ctx.cfg, "quad_pendulum")
    lt = ctx.cfg.longtime_config()
    seeds = pendulum_seeds(ctx.torus)
    runs = [stationary_limit(h, s, lt) for s in seeds]
    rates = [r.residual_history[-1][1] if r.residual_history else math.inf for r in runs]
    all_converged = all(r.converged for r in runs)
    agree = sup_metric(runs[0].limit, runs[1].limit) if all_converged else math.inf
    report = classify(h, seeds, lt)

    coarse = ctx.torus.n // 2 if ctx.torus.n % 2 == 0 else ctx.torus.n
    oracle = fine_oracle(h, lambda torus: constant(torus, 0.0), ORACLE_T, [coarse, 2 * coarse, 4 * coarse])
    fd = solve(h, constant(ctx.torus, 0.0), ORACLE_T, ctx.cfg.fd_config()).final
    fd_coarse = GridFn(oracle.value.torus, fd.values[:: ctx.torus.n // coarse])
    oracle_gap, oracle_bound = sup_metric(fd_coarse, oracle.value), tol_scheme(fd)
    return [
        CheckResult("seeds_converge", all_converged, max(rates), lt.stop_tol,
                    {"diverged": [r.diverged for r in runs]}),
        CheckResult("limits_agree", agree <= UNIQUENESS_AGREE, agree, UNIQUENESS_AGREE),
        CheckResult("single_stationary_cluster", report.counts[0] == 1 and not report.excluded,
                    float(report.counts[0]), 1.0, {"excluded": report.excluded}),
        CheckResult("fine_oracle_agrees", oracle.reliable and oracle_gap <= oracle_bound, oracle_gap, oracle_bound,
                    {"richardson_gaps": oracle.gaps, "reliable": oracle.reliable}),
    ]


def suite_two_solutions(ctx: RunContext) -> List[CheckResult]:
    h = _hamiltonian(ctx.cfg, "quad_drift")
    report = classify(h, parse_seeds("spread:8", ctx.torus), ctx.cfg.longtime_config())
    zero = constant(ctx.torus, 0.0)
    near_zero = min((sup_metric(r, zero) for r in report.stationary_reps), default=math.inf)
    return [
        CheckResult("two_stationary_clusters", report.counts[0] == 2, float(report.counts[0]), 2.0),
        CheckResult("zero_cluster", near_zero <= 0.02, near_zero, 0.02),
    ]


def even_well_seeds(torus: Torus) -> List[GridFn]:
    return [
        constant(torus, -1.0),
        constant(torus, 0.0),
        squared_distance(torus, [0.0]).shifted(1.0),
        squared_distance(torus, [0.5 * torus.period]).shifted(1.0),
        squared_distance(torus, [0.0, 0.5 * torus.period]).shifted(1.0),
    ]


def suite_non_monotone(ctx: RunContext) -> List[CheckResult]:
    h = _hamiltonian(ctx.cfg, "even_well")
    report = classify(h, even_well_seeds(ctx.torus), ctx.cfg.longtime_config())
    minus_one = constant(ctx.torus, -1.0)
    near = min((sup_metric(r, minus_one) for r in report.stationary_reps), default=math.inf)
    bowl = closed_form("even_well_family", {"K": [0]}, ctx.torus)
    near_bowl = min((sup_metric(r, bowl) for r in report.stationary_reps), default=math.inf)
    distinct = float(len(cluster(report.roundtrip, ctx.cfg.params.merge_tol)))
    return [
        CheckResult("at_least_three_clusters", report.counts[0] >= 3, float(report.counts[0]), 3.0),
        CheckResult("two_roundtrip_images", distinct == 2.0, distinct, 2.0),
        CheckResult("constant_cluster", near <= 0.02, near, 0.02),
        CheckResult("bowl_cluster", near_bowl <= 0.05, near_bowl, 0.05),
    ]


def suite_c_lipschitz(ctx: RunContext) -> List[CheckResult]:
    h = _hamiltonian(ctx.cfg, "eikonal_discount")
    pairs = [(-2.0, -1.0), (-1.0, 0.5), (0.5, 2.0), (-2.0, 2.0)]
    return [c_lipschitz_report(h, ctx.torus, None, [0.5, 1.0], 0, pairs)]


def suite_comparison(ctx: RunContext) -> List[CheckResult]:
    torus = Torus(ctx.torus.period, 512)
    phi = parse_init("sin", torus)
    return [shift_report(ctx.h, phi, 1.0, ctx.cfg.fd_config(), [0.25, 0.5, 0.75], c=1.0)]


def suite_monotone_limit(ctx: RunContext) -> List[CheckResult]:
    h = _hamiltonian(ctx.cfg, "quad_discount")
    u0 = squared_distance(ctx.torus, [0.0])
    lt = ctx.cfg.longtime_config()
    try:
        res = t_infinity(h, u0, "ominus", lt)
        mono = CheckResult("monotone_iterates", True, res.diagnostics.get("min_increment", 0.0),
                           -10.0 * tol_scheme(res.limit))
    except IntegrityError as err:
        mono = CheckResult("monotone_iterates", False, -math.inf, 0.0, {"reason": str(err)})
    return [mono, contact_gap_report(h, u0, [0.0, 0.5, 1.0, 2.0], lt)]


DUALITY_TOL = 0.05


def suite_duality(ctx: RunContext) -> List[CheckResult]:
    # duality_gap takes T_inf outputs, so feed it the classification roundtrips
    lt = ctx.cfg.longtime_config()
    out = []
    for name, seeds in (("quad_pendulum", pendulum_seeds(ctx.torus)),
                        ("quad_drift", parse_seeds("spread:8", ctx.torus)),
                        ("even_well", even_well_seeds(ctx.torus))):
        h = _hamiltonian(ctx.cfg, name)
        report = classify(h, seeds, lt)
        if not report.roundtrip:
            out.append(CheckResult(f"duality_{name}", False, math.inf, DUALITY_TOL, {"excluded": report.excluded}))
            continue
        for k, u in enumerate(report.roundtrip):
            try:
                res = duality_gap(h, u, lt)
            except ParameterError as err:
                out.append(CheckResult(f"duality_{name}_{k}", False, math.inf, DUALITY_TOL, {"reason": str(err)}))
                continue
            out.append(CheckResult(f"duality_{name}_{k}", res.gap <= DUALITY_TOL and res.converged, res.gap,
                                   DUALITY_TOL, {"converged": res.converged}))
    return out


def suite_cross_solver(ctx: RunContext) -> List[CheckResult]:
    torus = Torus(ctx.torus.period, 512)
    phi = parse_init("sin", torus)
    fd = solve(ctx.h, phi, 0.5, ctx.cfg.fd_config()).final
    dp = solve_dp(ctx.h, phi, 0.5, DpConfig(tau=4.0 * torus.dx))[0].final
    gap = sup_metric(fd, dp)
    return [CheckResult("cross_solver", gap <= 0.05, gap, 0.05)]


def suite_min_commutation(ctx: RunContext) -> List[CheckResult]:
    h = _hamiltonian(ctx.cfg, "eikonal_discount")
    n = ctx.torus.n
    phi, psi = point_data(ctx.torus, 0, 1.0), point_data(ctx.torus, n // 3, -0.5)
    return [min_stability_report(h, phi, psi, [0.5, 1.0])]


def suite_calibration(ctx: RunContext) -> List[CheckResult]:
    torus = Torus(ctx.torus.period, 128)
    h = _hamiltonian(ctx.cfg, "quad_discount")
    phi = squared_distance(torus, [0.0])
    traj, argmin = solve_dp(h, phi, 0.5, DpConfig())
    rng = np.random.default_rng(ctx.cfg.seed)
    final = traj.final
    scale = max(1.0, final.lipschitz_estimate(), final.sup_abs())
    bound = 5.0 * traj.diagnostics["tau"] * scale
    worst = 0.0
    for x in rng.choice(torus.n, size=20, replace=False):
        curve = backtrack(argmin, int(x), traj.t_final)
        worst = max(worst, abs(action(h, curve, traj, phi) - final.values[x]))
    return [CheckResult("calibration", worst <= bound, worst, bound)]


def deterministic_csv(h: Hamiltonian, phi: GridFn, cfg: RunConfig) -> bool:
    """Two identical runs must emit byte-identical solution files."""
    with tempfile.TemporaryDirectory() as tmp:
        paths = [emit(solve(h, phi, 0.5, cfg.fd_config()), "csv", os.path.join(tmp, f"run_{i}.csv"))
                 for i in range(2)]
        first, second = (Path(p).read_bytes() for p in paths)
    return first == second


def suite_properties(ctx: RunContext) -> List[CheckResult]:
    out = []
    for name in catalog_names():
        h = _hamiltonian(ctx.cfg, name)
        rep = audit(h)
        out.append(CheckResult(f"audit_{name}", rep.passed, rep.estimated_lambda, h.lam))
        out.append(fenchel_young_report(h))
        lsc = solve_lsc(h, point_data(ctx.torus, 0, 0.0), 0.5, ctx.cfg.fd_config())
        violations = lsc.diagnostics["ladder_violations"]
        out.append(CheckResult(f"ladder_monotone_{name}", not violations, float(len(violations)), 0.0))
        phi = squared_distance(ctx.torus, [0.0])
        same = deterministic_csv(h, phi, ctx.cfg)
        out.append(CheckResult(f"deterministic_{name}", same, 0.0 if same else 1.0, 0.0))
    return out


VERIFY_SUITES: Dict[str, Callable[[RunContext], List[CheckResult]]] = {
    "cone": suite_cone,
    "plain_fundamental": suite_plain_fundamental,
    "stationary_member": suite_stationary_member,
    "uniqueness": suite_uniqueness,
    "two_solutions": suite_two_solutions,
    "non_monotone": suite_non_monotone,
    "c_lipschitz": suite_c_lipschitz,
    "comparison": suite_comparison,
    "monotone_limit": suite_monotone_limit,
    "duality": suite_duality,
    "cross_solver": suite_cross_solver,
    "min_commutation": suite_min_commutation,
    "calibration": suite_calibration,
    "properties": suite_properties,
}


def run_verify(ctx: RunContext) -> None:
    suite = ctx.cfg.params.suite
    if suite != "all" and suite not in VERIFY_SUITES:
        raise ConfigError(f"unknown suite '{suite}'. Choose from: {['all'] + list(VERIFY_SUITES)}")
    names = list(VERIFY_SUITES) if suite == "all" else [suite]
    for name in names:
        print(f"🚀 Suite: {name}")
        results = VERIFY_SUITES[name](ctx)
        for r in results:
            print(f"{'✅' if r.passed else '❌'} {r.name}: measured {r.measured:.4g} vs bound {r.bound:.4g}")
        ctx.checks.extend(results)


RUNNERS = {
    "solve": run_solve,
    "fundamental": run_fundamental,
    "longtime": run_longtime,
    "classify": run_classify,
    "verify": run_verify,
    "audit": run_audit,
}


def versions() -> Dict[str, str]:
    return {
        "contact_hj": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pandas.__version__,
        "networkx": networkx.__version__,
    }


def _write_manifest(out_dir, cfg, started, status, reasons, artifacts, checks) -> None:
    manifest = {
        "experiment": cfg.experiment,
        "config": cfg.to_dict(),
        "versions": versions(),
        "wall_time_s": round(time.time() - started, 3),
        "status": status,
        "reasons": reasons,
        "artifacts": artifacts,
        "failed_checks": [c.name for c in checks if not c.passed],
    }
    emit(manifest, "json", os.path.join(out_dir, "manifest.json"))
    emit([c.to_dict() for c in checks], "json", os.path.join(out_dir, "verification.json"))


def run(cfg: RunConfig) -> int:
    """Execute the configured experiment and write its artifacts; returns the exit status."""
    if cfg.experiment not in EXPERIMENTS:
        print(f"❌ Error: Unknown experiment '{cfg.experiment}'. Choose from: {EXPERIMENTS}")
        return 2
    started = time.time()
    out_dir = cfg.output.directory
    print(f"🚀 Running experiment: {cfg.experiment} ({cfg.hamiltonian.name}, n={cfg.grid.n})")
    try:
        os.makedirs(out_dir, exist_ok=True)
        h = _hamiltonian(cfg)
        ctx = RunContext(cfg, h, cfg.torus(), out_dir)
    except (CatalogError, ParameterError, ConfigError, OSError) as err:
        print(f"❌ Error: {err}")
        return 2

    status, reasons, code = "passed", [], 0
    try:
        RUNNERS[cfg.experiment](ctx)
    except (ConfigError, CatalogError) as err:
        status, reasons, code = "error", [f"{type(err).__name__}: {err}"], 2
    except OSError as err:
        status, reasons, code = "error", [f"OSError: {err}"], 2
    except ContactHJError as err:
        status, reasons, code = "failed", [f"{type(err).__name__}: {err}"], 1
    if code == 0 and not all(c.passed for c in ctx.checks):
        status, code = "failed", 1
        reasons = [f"check '{c.name}' failed: {c.measured:g} vs {c.bound:g}" for c in ctx.checks if not c.passed]

    try:
        _write_manifest(out_dir, cfg, started, status, reasons, ctx.artifacts, ctx.checks)
    except OSError as err:
        print(f"❌ Error: could not write manifest: {err}")
        return 2
    if code == 0:
        print(f"✅ Experiment '{cfg.experiment}' completed successfully! Results saved in {out_dir}")
    else:
        for reason in reasons:
            print(f"❌ {reason}")
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Contact Hamilton-Jacobi experiments on the circle.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration; flags override its values")
        p.add_argument("--hamiltonian", dest="hamiltonian.name")
        p.add_argument("--n", dest="grid.n", type=int)
        p.add_argument("--period", dest="grid.period", type=float)
        p.add_argument("--solver", dest="solver.kind", choices=["fd", "dp", "both"])
        p.add_argument("--tau", dest="solver.tau", type=float)
        p.add_argument("--cfl", dest="solver.cfl_safety", type=float)
        p.add_argument("--ceiling", dest="solver.ceiling", type=float)
        p.add_argument("--scheme", dest="solver.scheme", choices=["godunov", "lax_friedrichs"])
        p.add_argument("--quadrature", dest="solver.quadrature", choices=["heun", "euler"])
        p.add_argument("--init", dest="params.init")
        p.add_argument("--T", dest="params.T", type=float)
        p.add_argument("--times", dest="params.times", type=_float_list)
        p.add_argument("--y", dest="params.y", type=int)
        p.add_argument("--c", dest="params.c", type=float)
        p.add_argument("--seeds", dest="params.seeds")
        p.add_argument("--suite", dest="params.suite")
        p.add_argument("--block-t", dest="params.block_t", type=float)
        p.add_argument("--stop-tol", dest="params.stop_tol", type=float)
        p.add_argument("--t-max", dest="params.t_max", type=float)
        p.add_argument("--merge-tol", dest="params.merge_tol", type=float)
        p.add_argument("--out", dest="output.directory")
        p.add_argument("--seed", dest="seed", type=int)
        p.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    return parser


def _float_list(text: str) -> List[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'") from None


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {k: v for k, v in vars(args).items() if k not in ("config", "log_level")}
    return apply_overrides(cfg, overrides)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=getattr(logging, args.log_level), format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
    except (ConfigError, OSError) as err:
        print(f"❌ Error: {err}")
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
