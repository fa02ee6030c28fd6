"""
Reference values for the checks.

``closed_form`` evaluates exact formulas on the grid and never calls a solver.
``fine_oracle`` is the brute-force fallback for quantities with no formula:
it solves at several resolutions and certifies the finest answer only when
the gaps between levels shrink.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from .cauchy_fd import FdConfig, solve, solve_lsc
from .errors import BlowUpError, ParameterError
from .extgrid import GridFn, Torus, sup_metric
from .hamiltonians import Hamiltonian
from .lax_oleinik import DpConfig, solve_dp

logger = logging.getLogger(__name__)

ORACLES = ("cone_discount", "cone_plain", "quad_family", "even_well_family")

Evaluator = Callable[[float], GridFn]


@dataclass(frozen=True)
class OracleSpec:
    name: str
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in ORACLES:
            raise ParameterError(f"unknown oracle '{self.name}'. Choose from: {ORACLES}")

    @property
    def time_dependent(self) -> bool:
        return self.name.startswith("cone_")


def _cone(torus: Torus, y: int, value: float, t: float) -> GridFn:
    if t < 0:
        raise ParameterError(f"t must be nonnegative, got {t}")
    x = torus.nodes()
    inside = torus.distance(x, x[int(y) % torus.n]) <= t + 1e-12
    return GridFn(torus, np.where(inside, value, np.inf))


def _half_dist_sq(torus: Torus, centers: Sequence[int]) -> np.ndarray:
    if len(centers) == 0:
        raise ParameterError("the center set K is empty")
    x = torus.nodes()
    ys = x[np.asarray(centers, dtype=int) % torus.n]
    return 0.5 * np.min(torus.distance(x[:, None], ys[None, :]), axis=1) ** 2


def _nearest_offset(torus: Torus, centers: Sequence[int]) -> np.ndarray:
    """Signed offset x - y to the nearest center; ½ d(x, K)^2 has slope equal to it off the cut locus."""
    x = torus.nodes()
    ys = x[np.asarray(centers, dtype=int) % torus.n]
    raw = np.mod(x[:, None] - ys[None, :] + 0.5 * torus.period, torus.period) - 0.5 * torus.period
    return raw[np.arange(torus.n), np.argmin(np.abs(raw), axis=1)]


def closed_form(name: str, params: Mapping, torus: Torus, t: Optional[float] = None) -> Union[GridFn, Evaluator]:
    """
    Exact solutions.

    cone_discount(c, y): c e^t on d(x, y) <= t, +inf outside (|p| - u)
    cone_plain(c, y): c on d(x, y) <= t, +inf outside (|p|)
    quad_family(K): ½ min_{y in K} d(x, y)^2, stationary for -u + p^2/2
    even_well_family(K) or (const): 1 + ½ d(x, K)^2, or the constant -1

    Cones return a GridFn at ``t`` or, without ``t``, a callable of t.
    """
    spec = OracleSpec(name, params)
    if spec.time_dependent:
        c, y = float(params.get("c", 0.0)), int(params.get("y", 0))
        if name == "cone_discount":
            ev = lambda s: _cone(torus, y, c * math.exp(s), s)  # noqa: E731
        else:
            ev = lambda s: _cone(torus, y, c, s)  # noqa: E731
        return ev if t is None else ev(float(t))
    if name == "quad_family":
        return GridFn(torus, _half_dist_sq(torus, params.get("K", ())))
    if params.get("const", False):
        return GridFn(torus, np.full(torus.n, -1.0))
    return GridFn(torus, 1.0 + _half_dist_sq(torus, params.get("K", ())))


def _smooth_mask(torus: Torus, spec: OracleSpec, t: Optional[float]) -> np.ndarray:
    """Nodes at least two cells away from kinks and cone boundaries."""
    n = torus.n
    if spec.time_dependent:
        x = torus.nodes()
        d = torus.distance(x, x[int(spec.params.get("y", 0)) % n])
        return d <= t - 2.0 * torus.dx
    if spec.params.get("const", False):
        return np.ones(n, dtype=bool)
    s = _nearest_offset(torus, spec.params.get("K", ()))
    jump = np.abs(np.roll(s, -1) - s) > 2.0 * torus.dx
    bad = jump | np.roll(jump, 1)
    for r in (1, 2):
        bad = bad | np.roll(bad, r) | np.roll(bad, -r)
    return ~bad


def closed_form_residual(h: Hamiltonian, name: str, params: Mapping, torus: Torus, t: Optional[float] = None) -> float:
    """Max |u_t + H(x, Du, u)| over smooth nodes, with centered differences in x and t."""
    spec = OracleSpec(name, params)
    dx = torus.dx
    x = torus.nodes()
    if spec.time_dependent:
        if t is None or t <= 2.0 * dx:
            raise ParameterError("cone residuals need t > 2 dx")
        ev = closed_form(name, params, torus)
        u, before, after = ev(t).values, ev(t - dx).values, ev(t + dx).values
        mask = _smooth_mask(torus, spec, t - dx)
        with np.errstate(invalid="ignore"):
            u_t = (after - before) / (2.0 * dx)
    else:
        u = closed_form(name, params, torus).values
        mask = _smooth_mask(torus, spec, t)
        u_t = np.zeros(torus.n)
    du = (np.roll(u, -1) - np.roll(u, 1)) / (2.0 * dx)
    if not mask.any():
        return 0.0
    res = u_t[mask] + h.eval(x[mask], du[mask], u[mask])
    return float(np.max(np.abs(res)))


@dataclass(frozen=True)
class OracleResult:
    value: GridFn
    gaps: List[float]
    fd_dp_gaps: List[Optional[float]]
    reliable: bool
    diagnostics: Dict = field(default_factory=dict)


def _restrict(f: GridFn, coarse: Torus) -> GridFn:
    return GridFn(coarse, f.values[:: f.torus.n // coarse.n])


def fine_oracle(
    h: Hamiltonian,
    phi: Callable[[Torus], GridFn],
    T: float,
    levels: Sequence[int],
    period: Optional[float] = None,
    tau_scale: float = 0.5,
) -> OracleResult:
    """
    Brute-force reference for S_T phi.

    :param phi: builds the initial data on a given torus
    :param levels: ascending node counts, each a multiple of the first
    :param tau_scale: DP step tau = tau_scale sqrt(dx), so quantized speeds
        resolve the velocity range as the grid refines
    :return: OracleResult; the finest DP slice restricted to the coarsest grid
    """
    levels = [int(n) for n in levels]
    if len(levels) < 2:
        raise ParameterError("fine_oracle needs at least two resolutions")
    if any(b <= a for a, b in zip(levels, levels[1:])) or any(n % levels[0] for n in levels):
        raise ParameterError(f"levels must ascend and be multiples of the coarsest, got {levels}")
    period = h.period if period is None else period
    coarse = Torus(period, levels[0])

    dp_slices, fd_gaps = [], []
    for n in levels:
        torus = Torus(period, n)
        data = phi(torus)
        traj, _ = solve_dp(h, data, T, DpConfig(tau=tau_scale * math.sqrt(torus.dx)))
        dp = _restrict(traj.final, coarse)
        dp_slices.append(dp)
        try:
            fd_run = solve(h, data, T, FdConfig()) if data.all_finite else solve_lsc(h, data, T, FdConfig())
            fd_gaps.append(sup_metric(_restrict(fd_run.final, coarse), dp))
        except BlowUpError as err:
            logger.warning("fine_oracle: FD blew up at n=%d (%s)", n, err)
            fd_gaps.append(None)
        logger.debug("fine_oracle: level n=%d done", n)

    gaps = [sup_metric(a, b) for a, b in zip(dp_slices, dp_slices[1:])]
    # shrinkage needs two gaps, so three levels at least
    reliable = len(gaps) >= 2 and all(b < a or b <= 1e-12 for a, b in zip(gaps, gaps[1:]))
    if len(gaps) < 2:
        logger.warning("%s: fine_oracle with %d levels cannot show shrinking gaps", h.name, len(levels))
    elif not reliable:
        logger.warning("%s: fine_oracle gaps %s do not shrink; oracle unreliable", h.name, gaps)
    return OracleResult(dp_slices[-1], gaps, fd_gaps, reliable, {"levels": levels, "T": T})
