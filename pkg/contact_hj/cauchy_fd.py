"""
Monotone explicit finite differences for u_t + H(x, u_x, u) = 0.

``solve`` marches finite Lipschitz data; ``solve_lsc`` reaches lower
semicontinuous, possibly +inf data through the inf-convolution ladder and
takes the pointwise supremum over ladder levels.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import BlowUpError, ParameterError
from .extgrid import GridFn, Torus, lipschitz_ladder
from .hamiltonians import Hamiltonian
from .reports import CheckResult
from .workers import parallel_map

logger = logging.getLogger(__name__)

SCHEMES = ("godunov", "lax_friedrichs")

# relative growth over the last ladder doubling that marks a node as +inf
LADDER_GROWTH_TAG = 0.25


@dataclass(frozen=True)
class FdConfig:
    cfl_safety: float = 0.9
    ceiling: float = 1e6
    alpha_margin: float = 1.25
    ladder_levels: Tuple[float, ...] = tuple(float(2**k) for k in range(9))
    scheme: str = "godunov"

    def __post_init__(self):
        if not 0 < self.cfl_safety <= 1:
            raise ParameterError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if self.alpha_margin < 1:
            raise ParameterError(f"alpha_margin must be >= 1, got {self.alpha_margin}")
        if not self.ceiling > 0:
            raise ParameterError("ceiling must be positive")
        levels = tuple(float(k) for k in self.ladder_levels)
        if not levels or any(b <= a for a, b in zip(levels, levels[1:])) or levels[0] < 0:
            raise ParameterError(f"ladder_levels must be nonnegative and strictly increasing, got {levels}")
        object.__setattr__(self, "ladder_levels", levels)
        if self.scheme not in SCHEMES:
            raise ParameterError(f"unknown scheme '{self.scheme}'. Choose from: {SCHEMES}")


@dataclass(frozen=True)
class Trajectory:
    """Solution slices u(., t) at ascending times starting from 0."""

    torus: Torus
    times: np.ndarray
    slices: Tuple[GridFn, ...]
    diagnostics: Dict = field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.size != len(self.slices):
            raise ParameterError("times and slices differ in length")
        if times.size == 0 or times[0] != 0.0:
            raise ParameterError("a trajectory starts at t = 0")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "slices", tuple(self.slices))

    @property
    def final(self) -> GridFn:
        return self.slices[-1]

    @property
    def t_final(self) -> float:
        return float(self.times[-1])

    def slice_at(self, t: float, tol: float = 1e-9) -> GridFn:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > tol * max(1.0, abs(t)):
            raise ParameterError(f"no slice recorded at t={t}; nearest is {self.times[i]}")
        return self.slices[i]


def tol_scheme(u: GridFn, kinks: bool = True) -> float:
    """4 sqrt(dx) scale with kinks, 4 dx scale for smooth solutions."""
    dx = u.torus.dx
    scale = max(1.0, u.lipschitz_estimate(), u.sup_abs())
    return 4.0 * (math.sqrt(dx) if kinks else dx) * scale


def _p_max(v: np.ndarray, dx: float) -> float:
    return float(np.max(np.abs(np.roll(v, -1) - v))) / dx


def _dt_alpha(h: Hamiltonian, v: np.ndarray, dx: float, cfg: FdConfig):
    alpha = cfg.alpha_margin * float(h.p_bound(_p_max(v, dx), float(np.max(np.abs(v)))))
    denom = 2.0 * alpha + h.lam * dx
    dt = cfg.cfl_safety * dx / denom if denom > 0 else cfg.cfl_safety * dx
    if alpha == 0:
        dt = min(dt, cfg.cfl_safety * dx)
    return dt, alpha


def cfl_dt(h: Hamiltonian, u_slice: GridFn, cfg: FdConfig = FdConfig()) -> Tuple[float, float]:
    """
    Time step and artificial viscosity keeping the update monotone.

    :return: (dt, alpha) with dt = cfl dx / (2 alpha + lambda dx)
    """
    return _dt_alpha(h, u_slice.clamped(cfg.ceiling), u_slice.torus.dx, cfg)


def _lf_update(h, x, v, dt, alpha, dx):
    up, um = np.roll(v, -1), np.roll(v, 1)
    return v - dt * (h.eval(x, (up - um) / (2.0 * dx), v) - alpha * (up - 2.0 * v + um) / (2.0 * dx))


def _godunov_update(h, x, v, dt, dx):
    a = (v - np.roll(v, 1)) / dx
    b = (np.roll(v, -1) - v) / dx
    ps = h.p_star(x, v)
    flux = np.maximum(h.eval(x, np.maximum(a, ps), v), h.eval(x, np.minimum(b, ps), v))
    return v - dt * flux


def lf_step(h: Hamiltonian, u: GridFn, dt: float, alpha: float, cfg: FdConfig = FdConfig()) -> GridFn:
    """One Lax-Friedrichs step; +inf is clamped to the ceiling and re-tagged on output."""
    v = u.clamped(cfg.ceiling)
    out = _lf_update(h, u.torus.nodes(), v, dt, alpha, u.torus.dx)
    return GridFn.from_clamped(u.torus, out, cfg.ceiling)


def godunov_step(h: Hamiltonian, u: GridFn, dt: float, cfg: FdConfig = FdConfig()) -> GridFn:
    """One step with the Godunov flux of a convex Hamiltonian; needs ``h.p_star``."""
    if h.p_star is None:
        raise ParameterError(f"{h.name} has no momentum minimizer; use the lax_friedrichs scheme")
    v = u.clamped(cfg.ceiling)
    out = _godunov_update(h, u.torus.nodes(), v, dt, u.torus.dx)
    return GridFn.from_clamped(u.torus, out, cfg.ceiling)


def _output_times(T: float, times: Optional[Sequence[float]]) -> List[float]:
    wanted = {0.0, float(T)}
    if times is not None:
        for t in times:
            if t < 0 or t > T + 1e-12:
                raise ParameterError(f"output time {t} outside [0, {T}]")
            wanted.add(min(float(t), float(T)))
    return sorted(wanted)


def solve(
    h: Hamiltonian,
    phi: GridFn,
    T: float,
    cfg: FdConfig = FdConfig(),
    times: Optional[Sequence[float]] = None,
) -> Trajectory:
    """
    March finite data to time T, hitting every requested output time exactly.

    :param h: Hamiltonian
    :param phi: finite initial data
    :param T: final time
    :param times: extra output times in [0, T]
    """
    if T < 0:
        raise ParameterError(f"final time must be nonnegative, got {T}")
    if not phi.all_finite:
        raise ParameterError("solve needs finite data; use solve_lsc for +inf entries")
    scheme = cfg.scheme
    if scheme == "godunov" and h.p_star is None:
        logger.info("%s has no momentum minimizer, falling back to lax_friedrichs", h.name)
        scheme = "lax_friedrichs"

    torus = phi.torus
    x, dx = torus.nodes(), torus.dx
    outputs = _output_times(T, times)
    v = phi.values.copy()
    t = 0.0
    rec_times, rec_slices, p_hist = [0.0], [phi], [_p_max(v, dx)]
    n_steps, dt_min, alpha_max = 0, math.inf, 0.0
    dt_frozen, alpha = _dt_alpha(h, v, dx, cfg)
    alpha_updates = 1

    for target in outputs[1:]:
        while t < target:
            if float(h.p_bound(_p_max(v, dx), float(np.max(np.abs(v))))) > alpha:
                dt_frozen, alpha = _dt_alpha(h, v, dx, cfg)
                alpha_updates += 1
            dt = min(dt_frozen, target - t)
            if scheme == "godunov":
                v = _godunov_update(h, x, v, dt, dx)
            else:
                v = _lf_update(h, x, v, dt, alpha, dx)
            t = target if target - (t + dt) <= 1e-12 * max(1.0, target) else t + dt
            n_steps += 1
            dt_min, alpha_max = min(dt_min, dt), max(alpha_max, alpha)
            top = float(np.max(np.abs(v)))
            if not np.isfinite(top) or top > 0.5 * cfg.ceiling:
                raise BlowUpError(
                    f"{h.name}: |u| reached {top:.3g} at t={t:.4g}, beyond half the ceiling {cfg.ceiling:g}",
                    t=t, max_value=top,
                )
        rec_times.append(t)
        rec_slices.append(GridFn(torus, v))
        p_hist.append(_p_max(v, dx))

    if logger.isEnabledFor(logging.DEBUG):
        logger.debug("%s: %d steps to T=%g (%s, dt_min=%.3g)", h.name, n_steps, T, scheme, dt_min)
    diagnostics = {
        "solver": "fd",
        "scheme": scheme,
        "steps": n_steps,
        "dt_min": dt_min if n_steps else 0.0,
        "alpha_max": alpha_max,
        "alpha_updates": alpha_updates,
        "p_max": p_hist,
    }
    return Trajectory(torus, np.array(rec_times), rec_slices, diagnostics)


def solve_lsc(
    h: Hamiltonian,
    phi: GridFn,
    T: float,
    cfg: FdConfig = FdConfig(),
    times: Optional[Sequence[float]] = None,
) -> Trajectory:
    """
    Solve with lower semicontinuous data via the Lipschitz ladder.

    Slices are the pointwise supremum over levels. A node whose value still
    grows with the level at the top of the ladder (last increment above
    ``tol_scheme``) has no finite limit and is tagged +inf.
    """
    torus = phi.torus
    outputs = _output_times(T, times)
    if phi.all_infinite:
        inf = GridFn(torus, np.full(torus.n, np.inf))
        return Trajectory(torus, np.array(outputs), [phi] + [inf] * (len(outputs) - 1),
                          {"solver": "fd", "ladder_levels": [], "ladder_increment": 0.0})

    levels = []
    for k in cfg.ladder_levels:
        data = lipschitz_ladder(phi, k)
        levels.append((k, data))
        if np.array_equal(data.values, phi.values):
            break
    runs = parallel_map(lambda kd: solve(h, kd[1], T, cfg, outputs), levels)

    slices = [phi]
    violations = []
    top_k = levels[-1][0]
    increment = 0.0
    for i in range(1, len(outputs)):
        stack = np.vstack([run.slices[i].values for run in runs])
        tol = tol_scheme(runs[-1].slices[i])
        drops = np.min(np.diff(stack, axis=0), axis=1) if len(runs) > 1 else np.zeros(0)
        for (k, _), drop in zip(levels[1:], drops):
            if drop < -tol:
                violations.append({"t": outputs[i], "level": k, "drop": float(drop)})
        sup = np.max(stack, axis=0)
        if len(runs) > 1 and not np.array_equal(levels[-1][1].values, phi.values):
            last = stack[-1] - stack[-2]
            sup = np.where(last > LADDER_GROWTH_TAG * np.maximum(1.0, np.abs(stack[-2])), np.inf, sup)
            increment = max(increment, float(np.max(last)))
        slices.append(GridFn.from_clamped(torus, sup, cfg.ceiling))

    if violations:
        logger.warning("%s: ladder outputs not monotone in k at %d (t, level) pairs", h.name, len(violations))
    diagnostics = {
        "solver": "fd",
        "ladder_levels": [k for k, _ in levels],
        "ladder_top": top_k,
        "ladder_increment": increment,
        "ladder_violations": violations,
    }
    return Trajectory(torus, np.array(outputs), slices, diagnostics)


def shift_report(
    h: Hamiltonian, phi: GridFn, T: float, cfg: FdConfig = FdConfig(),
    times: Optional[Sequence[float]] = None, c: float = 1.0,
) -> CheckResult:
    """Both comparison shifts: c e^{-lam t} <= S_t(phi + c) - S_t(phi) <= c e^{lam t} within tol_scheme."""
    base = solve(h, phi, T, cfg, times)
    lifted = solve(h, phi.shifted(c), T, cfg, times)
    worst, worst_t = -math.inf, 0.0
    for t, lo_slice, hi_slice in zip(base.times, base.slices, lifted.slices):
        diff = hi_slice.values - lo_slice.values
        lower, upper = c * math.exp(-h.lam * t), c * math.exp(h.lam * t)
        excess = max(float(np.max(lower - diff)), float(np.max(diff - upper))) - tol_scheme(lo_slice)
        if excess > worst:
            worst, worst_t = excess, t
    return CheckResult("comparison_shift", worst <= 0.0, worst, 0.0,
                       {"c": c, "worst_t": worst_t, "times": base.times.tolist()})


def growth_constants(h: Hamiltonian, phi: GridFn) -> Tuple[float, float]:
    """C0 = max_x max(0, -min_p H(x, p, 0)) and C1 = sup |phi|."""
    x = phi.torus.nodes()
    if h.p_star is not None:
        hmin = h.eval(x, h.p_star(x, np.zeros_like(x)), np.zeros_like(x))
    else:
        p = np.linspace(-32.0, 32.0, 1025)
        hmin = np.min(h.eval(x[:, None], p[None, :], 0.0), axis=1)
    c0 = max(0.0, float(np.max(-np.asarray(hmin))))
    return c0, phi.sup_abs()


def growth_report(
    h: Hamiltonian, phi: GridFn, T: float, cfg: FdConfig = FdConfig(),
    times: Optional[Sequence[float]] = None,
) -> CheckResult:
    """u(x,t) <= phi(x) e^{lam t} + (C0/lam + 2 C1)(e^{lam t} - 1), with the t-linear limit at lam = 0."""
    traj = solve(h, phi, T, cfg, times)
    c0, c1 = growth_constants(h, phi)
    worst = -math.inf
    for t, s in zip(traj.times, traj.slices):
        if h.lam > 0:
            g = math.exp(h.lam * t)
            bound = phi.values * g + (c0 / h.lam + 2.0 * c1) * (g - 1.0)
        else:
            bound = phi.values + c0 * t
        worst = max(worst, float(np.max(s.values - bound)) - tol_scheme(s))
    return CheckResult("growth_bound", worst <= 0.0, worst, 0.0, {"C0": c0, "C1": c1})
