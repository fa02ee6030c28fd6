"""
Fundamental solutions h(x, t, y, c): the solution issued from data equal to c
at the node y and +inf elsewhere.

Every solution is the lower envelope min_y h(x, t, y, phi(y)); the reports in
this module check that identity and the quantitative properties of h (Lipschitz
and monotone in c, cone barriers) on computed tables.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .cauchy_fd import FdConfig, solve_lsc, tol_scheme
from .errors import ParameterError
from .extgrid import ExtReal, GridFn, Torus, point_data, sup_metric
from .hamiltonians import Hamiltonian
from .lax_oleinik import DpConfig, dp_window, solve_dp
from .reports import CheckResult
from .workers import parallel_map

logger = logging.getLogger(__name__)

SOLVERS = ("dp", "fd")
SLOPE_TOL = 1e-6
CONE_MARGIN_CELLS = 3


@dataclass(frozen=True)
class HTable:
    torus: Torus
    y: int
    c: ExtReal
    times: np.ndarray
    slices: Tuple[GridFn, ...]

    def slice_at(self, t: float, tol: float = 1e-9) -> GridFn:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > tol * max(1.0, abs(t)):
            raise ParameterError(f"h-table for y={self.y} has no slice at t={t}")
        return self.slices[i]


def _as_ext(c) -> ExtReal:
    return c if isinstance(c, ExtReal) else ExtReal.from_float(c)


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.size == 0 or times[0] != 0.0 or np.any(np.diff(times) <= 0):
        raise ParameterError("times must be strictly ascending and start at 0")
    return times


def _dp_slice(h, phi, t, cfg):
    if t == 0:
        return phi
    traj, _ = solve_dp(h, phi, t, cfg)
    return traj.final


def solve_slices(
    h: Hamiltonian, phi: GridFn, times: Sequence[float], solver: str = "dp",
    dp_cfg: DpConfig = DpConfig(), fd_cfg: FdConfig = FdConfig(),
) -> List[GridFn]:
    """S_t phi at each requested time; DP restarts from phi per time so every t is hit exactly."""
    if solver not in SOLVERS:
        raise ParameterError(f"unknown solver '{solver}'. Choose from: {SOLVERS}")
    times = [float(t) for t in times]
    if solver == "fd":
        traj = solve_lsc(h, phi, max(times), fd_cfg, times)
        return [traj.slice_at(t) for t in times]
    return parallel_map(lambda t: _dp_slice(h, phi, t, dp_cfg), times)


def h_slice(
    h: Hamiltonian, torus: Torus, y: int, c, times: Sequence[float], solver: str = "dp",
    dp_cfg: DpConfig = DpConfig(), fd_cfg: FdConfig = FdConfig(),
) -> HTable:
    """
    Tabulate h(., t, y, c) at the given times.

    :param y: node index of the source point
    :param c: value at the source, float or ExtReal; +inf gives the +inf table
    :param solver: "dp" (default, sharp cones) or "fd" (ladder cross-check)
    """
    times = _check_times(times)
    c = _as_ext(c)
    data = point_data(torus, y, c)
    if c.infinite:
        slices = [data] * times.size
    else:
        slices = solve_slices(h, data, times, solver, dp_cfg, fd_cfg)
    return HTable(torus, int(y), c, times, tuple(slices))


def superpose(
    phi: GridFn, t: float, tables: Optional[Mapping[Tuple[int, float], HTable]] = None,
    h: Optional[Hamiltonian] = None, solver: str = "dp",
    dp_cfg: DpConfig = DpConfig(), fd_cfg: FdConfig = FdConfig(),
) -> GridFn:
    """
    x -> min over finite phi(y) of h(x, t, y, phi(y)).

    Tables are looked up by (y, phi(y)); missing ones are computed with ``h``
    and reported as a cost warning.
    """
    tables = dict(tables or {})
    torus = phi.torus
    ys = np.flatnonzero(phi.finite_mask)
    missing = [int(y) for y in ys if (int(y), float(phi.values[y])) not in tables]
    if missing:
        if h is None:
            raise ParameterError(f"{len(missing)} h-tables missing and no Hamiltonian to compute them")
        logger.warning("superpose: computing %d h-tables on demand", len(missing))
        built = parallel_map(
            lambda y: h_slice(h, torus, y, float(phi.values[y]), [0.0, t], solver, dp_cfg, fd_cfg), missing
        )
        for table in built:
            tables[(table.y, table.c.value)] = table

    out = np.full(torus.n, np.inf)
    for y in ys:
        table = tables[(int(y), float(phi.values[y]))]
        if table.torus != torus:
            raise ParameterError("h-table lives on a different torus")
        out = np.minimum(out, table.slice_at(t).values)
    return GridFn(torus, out)


def _shared_window(h, data: Sequence[GridFn], t: float, cfg: DpConfig) -> DpConfig:
    """Pin one DP window for several runs so their Bellman stencils coincide."""
    if cfg.window is not None or t <= 0:
        return cfg
    tau0 = cfg.tau if cfg.tau is not None else data[0].torus.dx
    tau = t / max(1, int(math.floor(t / tau0 + 1e-9)))
    return replace(cfg, window=max(dp_window(h, d, tau, cfg) for d in data))


def superposition_report(
    h: Hamiltonian, phi: GridFn, t: float, solver: str = "dp",
    dp_cfg: DpConfig = DpConfig(), fd_cfg: FdConfig = FdConfig(),
) -> CheckResult:
    """sup distance between the lower envelope of h-tables and a direct solve."""
    ys = np.flatnonzero(phi.finite_mask)
    if solver == "dp":
        dp_cfg = _shared_window(h, [phi] + [point_data(phi.torus, y, phi.values[y]) for y in ys], t, dp_cfg)
    env = superpose(phi, t, h=h, solver=solver, dp_cfg=dp_cfg, fd_cfg=fd_cfg)
    direct = solve_slices(h, phi, [0.0, t], solver, dp_cfg, fd_cfg)[-1]
    gap = sup_metric(env, direct)
    bound = tol_scheme(direct)
    return CheckResult("superposition", gap <= bound, gap, bound, {"t": t, "sources": int(ys.size)})


def min_stability_report(
    h: Hamiltonian, phi: GridFn, psi: GridFn, times: Sequence[float], solver: str = "dp",
    dp_cfg: DpConfig = DpConfig(), fd_cfg: FdConfig = FdConfig(),
) -> CheckResult:
    """S_t min(phi, psi) against min(S_t phi, S_t psi) at each time."""
    both = phi.minimum(psi)
    gaps: Dict[float, float] = {}
    passed = True
    worst, worst_bound = 0.0, 0.0
    for t in times:
        cfg = _shared_window(h, [phi, psi, both], t, dp_cfg) if solver == "dp" else dp_cfg
        s_phi, s_psi, s_both = (solve_slices(h, f, [0.0, t], solver, cfg, fd_cfg)[-1] for f in (phi, psi, both))
        gap = sup_metric(s_both, s_phi.minimum(s_psi))
        bound = tol_scheme(s_both)
        gaps[float(t)] = gap
        passed &= gap <= bound
        if gap - bound >= worst - worst_bound:
            worst, worst_bound = gap, bound
    return CheckResult("min_commutation", passed, worst, worst_bound, {"gap_by_t": gaps})


def c_lipschitz_report(
    h: Hamiltonian, torus: Torus, x_samples: Optional[Sequence[int]], t_samples: Sequence[float],
    y: int, c_pairs: Sequence[Tuple[float, float]], solver: str = "dp",
    dp_cfg: DpConfig = DpConfig(), tol: float = 0.05,
) -> CheckResult:
    """
    Difference quotients of h in c.

    Passes when every ratio stays below e^{lam t}(1 + tol) and no signed
    slope drops below -SLOPE_TOL.
    """
    for c1, c2 in c_pairs:
        if c1 == c2:
            raise ParameterError(f"c pair ({c1}, {c2}) is degenerate")
        if not (math.isfinite(c1) and math.isfinite(c2)):
            raise ParameterError("c pairs must be finite")
    xs = np.arange(torus.n) if x_samples is None else np.asarray(x_samples, dtype=int)
    times = [0.0] + sorted(float(t) for t in t_samples if t > 0)
    cs = sorted({float(c) for pair in c_pairs for c in pair})
    tables = {c: t for c, t in zip(cs, parallel_map(lambda c: h_slice(h, torus, y, c, times, solver, dp_cfg), cs))}

    ratios: Dict[float, float] = {}
    slopes: Dict[float, float] = {}
    passed = True
    for t in times[1:]:
        max_ratio, min_slope = 0.0, math.inf
        for c1, c2 in c_pairs:
            a = tables[c1].slice_at(t).values[xs]
            b = tables[c2].slice_at(t).values[xs]
            both = np.isfinite(a) & np.isfinite(b)
            if not both.any():
                continue
            slope = (b[both] - a[both]) / (c2 - c1)
            max_ratio = max(max_ratio, float(np.max(np.abs(slope))))
            min_slope = min(min_slope, float(np.min(slope)))
        ratios[t], slopes[t] = max_ratio, min_slope
        passed &= max_ratio <= math.exp(h.lam * t) * (1.0 + tol) and min_slope >= -SLOPE_TOL
    measured = max((ratios[t] / math.exp(h.lam * t) for t in ratios), default=0.0)
    return CheckResult("c_lipschitz", passed, measured, 1.0 + tol,
                       {"max_ratio_by_t": ratios, "min_slope_by_t": slopes, "y": int(y)})


def fit_linear_growth(
    h: Hamiltonian, x_samples: Optional[Sequence[float]] = None, r: float = 1.0, doublings: int = 8,
) -> Tuple[Optional[float], float]:
    """
    Constants with H(x, p, 0) >= delta |p| - C1.

    delta is half the smallest secant slope of |p| -> H(x, +-p, 0) over p = r, 2r, 4r, ...;
    None when some secant is not increasing.
    """
    x = np.linspace(0.0, h.period, 16, endpoint=False) if x_samples is None else np.asarray(x_samples, float)
    ps = r * 2.0 ** np.arange(doublings + 1)
    slopes = []
    for sign in (1.0, -1.0):
        vals = h.eval(x[:, None], sign * ps[None, :], 0.0)
        slopes.append(np.diff(vals, axis=1) / np.diff(ps)[None, :])
    min_slope = float(np.min(np.concatenate(slopes, axis=1)))
    if not min_slope > 0:
        return None, math.inf
    delta = 0.5 * min_slope
    p = np.linspace(-ps[-1], ps[-1], 8193)
    c1 = float(np.max(delta * np.abs(p)[None, :] - h.eval(x[:, None], p[None, :], 0.0)))
    return delta, max(0.0, c1)


def _barrier(c: float, lam: float, t: float) -> float:
    return c * t if lam == 0 else c / lam * (math.exp(lam * t) - 1.0)


@dataclass(frozen=True)
class ConeBoundsReport:
    c_lower_ok: bool
    delta: Optional[float]
    c_upper_ok: bool
    c0: float
    c1: float
    diagnostics: Dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.c_lower_ok and self.c_upper_ok


def cone_bounds_report(
    h: Hamiltonian, torus: Torus, y: int, T: float, solver: str = "dp",
    dp_cfg: DpConfig = DpConfig(), fd_cfg: FdConfig = FdConfig(), n_times: int = 4,
) -> ConeBoundsReport:
    """
    Lower barrier -C0/lam (e^{lam t} - 1) everywhere and upper barrier
    C1/lam (e^{lam t} - 1) on d(x, y) <= delta t for h(., t, y, 0).
    """
    if not T > 0:
        raise ParameterError(f"T must be positive, got {T}")
    x = torus.nodes()
    c0 = max(0.0, float(np.max(h.eval(x, 0.0, 0.0))))
    delta, c1 = fit_linear_growth(h)
    times = np.linspace(0.0, T, n_times + 1)
    table = h_slice(h, torus, y, 0.0, times, solver, dp_cfg, fd_cfg)
    dist = torus.distance(x, x[y])

    lower_ok, upper_ok = True, delta is not None
    worst_lower, worst_upper = 0.0, 0.0
    for t, s in zip(table.times[1:], table.slices[1:]):
        tol = tol_scheme(s)
        fin = s.finite_mask
        lo = float(np.min(s.values[fin] + _barrier(c0, h.lam, t))) if fin.any() else 0.0
        worst_lower = min(worst_lower, lo)
        lower_ok &= lo >= -tol
        if delta is None:
            continue
        inside = dist <= delta * t - CONE_MARGIN_CELLS * torus.dx
        if not inside.any():
            continue
        vals = s.values[inside]
        excess = float(np.max(vals - _barrier(c1, h.lam, t))) if np.isfinite(vals).all() else math.inf
        worst_upper = max(worst_upper, excess)
        upper_ok &= excess <= tol

    diagnostics = {"worst_lower": worst_lower, "worst_upper": worst_upper, "T": T, "y": int(y)}
    if delta is None:
        diagnostics["fit"] = "secant slopes of H(x, p, 0) not positive at the sampled scale"
        logger.warning("%s: linear-growth fit failed; upper cone barrier not checked", h.name)
    return ConeBoundsReport(lower_ok, delta, upper_ok, c0, c1, diagnostics)
