"""
Long-time behaviour of the semigroup.

Limits are reached by applying S over blocks of length ``block_t`` until the
sup change per unit time falls below ``stop_tol``. T_inf and its adjoint
evolve -v under H and under the adjoint Hamiltonian respectively; ``classify``
groups computed stationary solutions by their adjoint images.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .cauchy_fd import FdConfig, solve, solve_lsc, tol_scheme
from .errors import BlowUpError, IntegrityError, ParameterError
from .extgrid import GridFn, relaxed_lower_limit, sup_metric
from .hamiltonians import Hamiltonian, ominus
from .lax_oleinik import DpConfig, solve_dp
from .reports import CheckResult
from .workers import parallel_map

logger = logging.getLogger(__name__)

DIRECTIONS = ("forward", "ominus")
MONOTONE_SLACK = 10.0


@dataclass(frozen=True)
class LongtimeConfig:
    block_t: float = 1.0
    stop_tol: float = 1e-4
    t_max: float = 50.0
    merge_tol: float = 0.05
    solver: str = "fd"
    trailing_blocks: int = 3
    stencil_radius: int = 0
    check_t: float = 0.25
    escape: float = 100.0
    fd: FdConfig = FdConfig()
    dp: DpConfig = DpConfig()

    def __post_init__(self):
        if not self.block_t > 0:
            raise ParameterError(f"block_t must be positive, got {self.block_t}")
        if self.t_max < 2 * self.block_t:
            raise ParameterError(f"t_max must be at least two blocks, got {self.t_max}")
        if not self.stop_tol > 0 or not self.merge_tol > 0:
            raise ParameterError("stop_tol and merge_tol must be positive")
        if self.solver not in ("fd", "dp"):
            raise ParameterError(f"unknown solver '{self.solver}'. Choose from: ('fd', 'dp')")
        if self.trailing_blocks < 1 or self.stencil_radius < 0:
            raise ParameterError("trailing_blocks must be >= 1 and stencil_radius >= 0")
        if not self.escape > 0:
            raise ParameterError("escape must be positive")


@dataclass(frozen=True)
class StationaryResult:
    limit: GridFn
    converged: bool
    residual_history: List[Tuple[float, float]]
    t_final: float
    diverged: bool = False
    diagnostics: Dict = field(default_factory=dict)


def advance(h: Hamiltonian, u: GridFn, t: float, cfg: LongtimeConfig = LongtimeConfig()) -> GridFn:
    """S_t u with the configured solver."""
    if cfg.solver == "dp":
        traj, _ = solve_dp(h, u, t, cfg.dp)
        return traj.final
    if u.all_finite:
        return solve(h, u, t, cfg.fd).final
    return solve_lsc(h, u, t, cfg.fd).final


def _escaped(u: GridFn, bound: float) -> bool:
    fin = u.values[u.finite_mask]
    return bool(fin.size and np.max(np.abs(fin)) > bound)


def _iterate(h, start: GridFn, cfg: LongtimeConfig, monotone: bool) -> StationaryResult:
    ceiling = cfg.fd.ceiling
    u, t = start, 0.0
    tail = [start]
    history: List[Tuple[float, float]] = []
    min_increment = math.inf
    converged = diverged = False
    reason = None

    while t < cfg.t_max - 1e-12:
        step = min(cfg.block_t, cfg.t_max - t)
        try:
            nxt = advance(h, u, step, cfg)
        except BlowUpError as err:
            diverged, reason = True, str(err)
            break
        t += step
        if _escaped(nxt, cfg.escape):
            diverged, reason = True, f"values left [-{cfg.escape:g}, {cfg.escape:g}] at t={t:g}"
            break
        if monotone:
            both = u.finite_mask & nxt.finite_mask
            if both.any():
                inc = float(np.min(nxt.values[both] - u.values[both]))
                min_increment = min(min_increment, inc)
                if inc < -MONOTONE_SLACK * tol_scheme(nxt):
                    raise IntegrityError(
                        f"{h.name}: iterate decreased by {-inc:.3g} at t={t:g}, beyond {MONOTONE_SLACK:g} tol_scheme"
                    )
            # scheme dips at a smooth maximum would otherwise grow like e^t on the well
            nxt = nxt.maximum(u)
        rate = sup_metric(nxt, u, ceiling) / step
        history.append((t, rate))
        tail = (tail + [nxt])[-cfg.trailing_blocks:]
        u = nxt
        if logger.isEnabledFor(logging.DEBUG):
            logger.debug("%s: t=%g rate=%.3g", h.name, t, rate)
        if rate < cfg.stop_tol:
            converged = True
            break

    diagnostics: Dict = {"blocks": len(history)}
    if monotone:
        diagnostics["min_increment"] = min_increment if history else 0.0
    if diverged:
        logger.warning("%s: long-time iteration diverged (%s)", h.name, reason)
        diagnostics["reason"] = reason
        return StationaryResult(u, False, history, t, True, diagnostics)
    if not converged:
        logger.info("%s: no convergence by t_max=%g (last rate %.3g)", h.name, cfg.t_max, history[-1][1])
    limit = relaxed_lower_limit(tail, cfg.stencil_radius)
    return StationaryResult(limit, converged, history, t, False, diagnostics)


def stationary_limit(h: Hamiltonian, phi: GridFn, cfg: LongtimeConfig = LongtimeConfig()) -> StationaryResult:
    """Lower relaxed limit of S_t phi as t grows, over the trailing blocks."""
    return _iterate(h, phi, cfg, monotone=False)


def stationarity_residual(h: Hamiltonian, u: GridFn, cfg: LongtimeConfig = LongtimeConfig()) -> float:
    """Sup change per unit time over one short block of length ``check_t``."""
    try:
        moved = advance(h, u, cfg.check_t, cfg)
    except BlowUpError:
        return math.inf
    return sup_metric(moved, u, cfg.fd.ceiling) / cfg.check_t


def _precheck(h, u, cfg, what):
    rate = stationarity_residual(h, u, cfg)
    if rate * cfg.check_t > tol_scheme(u):
        logger.warning("%s: input does not look stationary for %s (residual rate %.3g)", h.name, what, rate)
    return rate


def t_infinity(
    h: Hamiltonian, v: GridFn, direction: str = "forward", cfg: LongtimeConfig = LongtimeConfig()
) -> StationaryResult:
    """
    forward: lim S_t(-v) for v stationary under the adjoint;
    ominus: lim of the adjoint semigroup on -v for v stationary under h.

    The block iterates must be nondecreasing up to MONOTONE_SLACK tol_scheme;
    each block is then lifted to the pointwise max with its predecessor.
    """
    if direction not in DIRECTIONS:
        raise ParameterError(f"unknown direction '{direction}'. Choose from: {DIRECTIONS}")
    adjoint = ominus(h)
    flow, stationary_for = (h, adjoint) if direction == "forward" else (adjoint, h)
    residual = _precheck(stationary_for, v, cfg, stationary_for.name)
    result = _iterate(flow, v.negated(), cfg, monotone=True)
    result.diagnostics.update({"direction": direction, "input_residual": residual})
    return result


def contact_gap(
    h: Hamiltonian, u0: GridFn, t_list: Sequence[float], cfg: LongtimeConfig = LongtimeConfig()
) -> np.ndarray:
    """min_x (S_t(-u0) - (-u0)) under the adjoint semigroup, one value per t."""
    _precheck(h, u0, cfg, h.name)
    start = u0.negated()
    adjoint = ominus(h)
    gaps = []
    for t in t_list:
        moved = start if t == 0 else advance(adjoint, start, float(t), cfg)
        gaps.append(float(np.min(moved.values - start.values)))
    return np.array(gaps)


def contact_gap_report(
    h: Hamiltonian, u0: GridFn, t_list: Sequence[float], cfg: LongtimeConfig = LongtimeConfig()
) -> CheckResult:
    gaps = contact_gap(h, u0, t_list, cfg)
    bound = tol_scheme(u0)
    worst = float(np.max(np.abs(gaps))) if gaps.size else 0.0
    return CheckResult("contact_gap", worst <= bound, worst, bound,
                       {"t": [float(t) for t in t_list], "gaps": gaps.tolist()})


@dataclass(frozen=True)
class DualityGap:
    gap: float
    converged: bool
    image_ominus: GridFn
    roundtrip: GridFn


def duality_gap(h: Hamiltonian, u: GridFn, cfg: LongtimeConfig = LongtimeConfig()) -> DualityGap:
    """
    sup distance between u and T_inf(T_inf^ominus u). u must be a T_inf output,
    so a u that is not stationary for h is rejected with ParameterError.
    """
    residual = stationarity_residual(h, u, cfg)
    if residual > tol_scheme(u):
        raise ParameterError(
            f"{h.name}: duality input is not stationary (residual rate {residual:.3g}), expected a T_inf output"
        )
    inner = t_infinity(h, u, "ominus", cfg)
    outer = t_infinity(h, inner.limit, "forward", cfg)
    converged = inner.converged and outer.converged
    if not converged:
        logger.warning("%s: duality roundtrip did not converge", h.name)
    return DualityGap(sup_metric(outer.limit, u, cfg.fd.ceiling), converged, inner.limit, outer.limit)


def cluster(functions: Sequence[GridFn], merge_tol: float) -> List[List[int]]:
    """Single-linkage groups: connected components of the graph joining pairs closer than merge_tol."""
    graph = nx.Graph()
    graph.add_nodes_from(range(len(functions)))
    for i in range(len(functions)):
        for j in range(i + 1, len(functions)):
            if sup_metric(functions[i], functions[j]) < merge_tol:
                graph.add_edge(i, j)
    return sorted((sorted(c) for c in nx.connected_components(graph)), key=lambda c: c[0])


# file names run_classify writes the cluster centers and their adjoint images to
CLUSTER_CSV = "cluster_{}.csv"
IMAGE_CSV = "image_{}.csv"


@dataclass(frozen=True)
class ClassReport:
    stationary_reps: List[GridFn]
    images_ominus: List[GridFn]
    classes: List[int]
    counts: Tuple[int, int]
    members: List[List[int]]
    roundtrip: List[GridFn]
    excluded: Dict[int, str] = field(default_factory=dict)
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> Dict:
        return {
            "counts": {"stationary_clusters": self.counts[0], "distinct_images": self.counts[1]},
            "clusters": [{"id": i, "members": m, "class": c,
                          "center_csv": CLUSTER_CSV.format(i), "image_csv": IMAGE_CSV.format(i)}
                         for i, (m, c) in enumerate(zip(self.members, self.classes))],
            "excluded": {str(k): v for k, v in self.excluded.items()},
            "checks": [c.to_dict() for c in self.checks],
        }


def classify(h: Hamiltonian, seeds: Sequence[GridFn], cfg: LongtimeConfig = LongtimeConfig()) -> ClassReport:
    """
    Partition the stationary limits of the seeds by their adjoint images.

    Diverged or non-converged seeds are excluded. Each class is checked
    against T_inf v: every member must dominate it up to tol_scheme.
    """
    if len(seeds) < 2:
        raise ParameterError("classify needs at least two seeds")
    results = parallel_map(lambda s: stationary_limit(h, s, cfg), seeds)
    excluded: Dict[int, str] = {}
    kept = []
    for i, r in enumerate(results):
        if r.diverged:
            excluded[i] = "diverged: " + r.diagnostics.get("reason", "")
        elif not r.converged:
            excluded[i] = f"not converged by t={r.t_final:g}"
        else:
            kept.append(i)
    for i, why in excluded.items():
        logger.warning("%s: seed %d excluded (%s)", h.name, i, why)
    if not kept:
        return ClassReport([], [], [], (0, 0), [], [], excluded, [])

    groups = cluster([results[i].limit for i in kept], cfg.merge_tol)
    members = [[kept[j] for j in g] for g in groups]
    reps = [results[m[0]].limit for m in members]

    image_runs = parallel_map(lambda w: t_infinity(h, w, "ominus", cfg), reps)
    images = [r.limit for r in image_runs]
    image_groups = cluster(images, cfg.merge_tol)
    classes = [0] * len(reps)
    for k, g in enumerate(image_groups):
        for j in g:
            classes[j] = k

    class_images = [images[g[0]] for g in image_groups]
    roundtrip = [r.limit for r in parallel_map(lambda v: t_infinity(h, v, "forward", cfg), class_images)]
    checks = []
    for k, u in enumerate(roundtrip):
        worst = min(float(np.min(reps[j].values - u.values)) for j in range(len(reps)) if classes[j] == k)
        bound = tol_scheme(u)
        checks.append(CheckResult("class_dominance", worst >= -bound, worst, -bound, {"class": k}))
    distinct = len(cluster(roundtrip, cfg.merge_tol))
    checks.append(CheckResult("image_count", distinct == len(image_groups), float(distinct),
                              float(len(image_groups)), {"roundtrip_clusters": distinct}))
    for r in image_runs:
        if not r.converged:
            logger.warning("%s: an adjoint image did not converge", h.name)
    return ClassReport(reps, images, classes, (len(reps), len(image_groups)), members, roundtrip, excluded, checks)


def sandwich_check(
    h: Hamiltonian, u: GridFn, v_list: Sequence[GridFn], phi: GridFn,
    cfg: LongtimeConfig = LongtimeConfig(), tol: Optional[float] = None,
) -> CheckResult:
    """
    Data clipped between min_i(-v_i) and u must flow to u; along the way the
    solution from min_i(-v_i) must equal min_i S_t(-v_i).
    """
    if not v_list:
        raise ParameterError("need at least one v")
    lows = [v.negated() for v in v_list]
    lower = lows[0]
    for w in lows[1:]:
        lower = lower.minimum(w)
    clipped = np.clip(phi.values, lower.values, u.values)
    n_clipped = int(np.count_nonzero(clipped != phi.values))
    if n_clipped:
        logger.info("%s: clipped %d nodes into the sandwich", h.name, n_clipped)
    tol = tol_scheme(u) if tol is None else tol

    cur, lows_t, lower_t = phi.with_values(clipped), lows, lower
    t, envelope_worst = 0.0, 0.0
    dist = sup_metric(cur, u)
    while dist >= tol and t < cfg.t_max - 1e-12:
        step = min(cfg.block_t, cfg.t_max - t)
        try:
            cur = advance(h, cur, step, cfg)
            lows_t = [advance(h, w, step, cfg) for w in lows_t]
            lower_t = advance(h, lower_t, step, cfg)
        except BlowUpError as err:
            logger.warning("%s: sandwich run blew up (%s)", h.name, err)
            return CheckResult("sandwich", False, math.inf, tol, {"t": t, "clipped_nodes": n_clipped})
        t += step
        env = lows_t[0]
        for w in lows_t[1:]:
            env = env.minimum(w)
        envelope_worst = max(envelope_worst, sup_metric(env, lower_t) - tol_scheme(lower_t))
        dist = sup_metric(cur, u)

    passed = dist < tol and envelope_worst <= 0.0
    return CheckResult("sandwich", passed, dist, tol,
                       {"t": t, "clipped_nodes": n_clipped, "envelope_excess": envelope_worst})


def mono_report(
    h: Hamiltonian, v: GridFn, direction: str = "forward", cfg: LongtimeConfig = LongtimeConfig(),
    result: Optional[StationaryResult] = None,
) -> CheckResult:
    """T_inf v >= -v (and the adjoint analogue) up to tol_scheme."""
    result = t_infinity(h, v, direction, cfg) if result is None else result
    worst = float(np.min(result.limit.values + v.values))
    bound = tol_scheme(result.limit)
    return CheckResult(f"mono_{direction}", worst >= -bound, worst, -bound, {"converged": result.converged})


def order_reversal_report(
    h: Hamiltonian, v1: GridFn, v2: GridFn, cfg: LongtimeConfig = LongtimeConfig()
) -> CheckResult:
    """v1 <= v2 stationary under the adjoint gives T_inf v1 >= T_inf v2 up to tol_scheme."""
    if np.any(v1.values > v2.values):
        raise ParameterError("order reversal needs v1 <= v2 pointwise")
    a = t_infinity(h, v1, "forward", cfg).limit
    b = t_infinity(h, v2, "forward", cfg).limit
    worst = float(np.min(a.values - b.values))
    bound = tol_scheme(b)
    return CheckResult("order_reversal", worst >= -bound, worst, -bound)
