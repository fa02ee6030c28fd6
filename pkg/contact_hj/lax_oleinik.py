"""
Variational solver: dynamic programming on the representation formula.

The value is carried in the variables v = e^{lam t} u, where the weighted
Lagrangian L~(x, xi, t, v) = e^{lam t} L(x, xi, e^{-lam t} v) + lam v is
nondecreasing in v, so every Bellman step is monotone. Predecessors are grid
nodes, velocities are displacement / tau, and the recorded argmin field lets
minimizing curves be walked back to t = 0.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .cauchy_fd import Trajectory
from .errors import IntegrityError, ParameterError
from .extgrid import GridFn, Torus
from .hamiltonians import Hamiltonian
from .legendre import P_STEPS, P_WINDOW, lagrangian_tilde_values, lagrangian_values, velocity_bound

logger = logging.getLogger(__name__)

QUADRATURES = ("heun", "euler")


@dataclass(frozen=True)
class DpConfig:
    tau: Optional[float] = None
    quadrature: str = "heun"
    lambda_shift: Optional[float] = None
    min_speed: float = 4.0
    window: Optional[int] = None
    p_window: float = P_WINDOW
    p_steps: int = P_STEPS

    def __post_init__(self):
        if self.tau is not None and not self.tau > 0:
            raise ParameterError(f"tau must be positive, got {self.tau}")
        if self.quadrature not in QUADRATURES:
            raise ParameterError(f"unknown quadrature '{self.quadrature}'. Choose from: {QUADRATURES}")
        if self.window is not None and self.window < 1:
            raise ParameterError("window must be at least one cell")


@dataclass(frozen=True)
class ArgminField:
    """pred[s, i]: node at time times[s] feeding node i at times[s+1]; -1 where the value is +inf."""

    torus: Torus
    times: np.ndarray
    pred: np.ndarray
    window: int

    def step_index(self, t: float) -> int:
        s = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[s] - t) > 1e-9 * max(1.0, abs(t)):
            raise ParameterError(f"t={t} is not a DP time level")
        return s


@dataclass(frozen=True)
class Curve:
    times: np.ndarray
    nodes: np.ndarray


def dp_lambda_shift(h: Hamiltonian, cfg: DpConfig = DpConfig()) -> float:
    """lam + 1 for u-dependent H; 0 when H ignores u, so that L~ = L."""
    if cfg.lambda_shift is not None:
        if cfg.lambda_shift < h.lam:
            raise ParameterError(f"lambda_shift {cfg.lambda_shift} below the Lipschitz bound {h.lam}")
        return float(cfg.lambda_shift)
    return h.lam + 1.0 if h.lam > 0 else 0.0


def _step_costs(h, torus, vals, k, t_n, tau, lam, quadrature, tkw):
    """Candidate values for target nodes i reached from j = i - k."""
    n, dx = torus.n, torus.dx
    js = (np.arange(n) - k) % n
    vj = vals[js]
    fin = np.isfinite(vj)
    v_safe = np.where(fin, vj, 0.0)
    xmid = np.mod(torus.nodes()[js] + 0.5 * k * dx, torus.period)
    xi = k * dx / tau
    c1 = lagrangian_tilde_values(h, xmid, xi, t_n, v_safe, lam, **tkw)
    ok = fin & np.isfinite(c1)
    if quadrature == "euler":
        cand = v_safe + tau * np.where(ok, c1, 0.0)
    else:
        vstar = v_safe + tau * np.where(ok, c1, 0.0)
        c2 = lagrangian_tilde_values(h, xmid, xi, t_n + tau, vstar, lam, **tkw)
        ok &= np.isfinite(c2)
        cand = v_safe + 0.5 * tau * (np.where(ok, c1, 0.0) + np.where(ok, c2, 0.0))
    return np.where(ok, cand, np.inf), js


def _dp_core(h, torus, vals, t_n, tau, window, lam, quadrature, tkw):
    n = torus.n
    best, arg = _step_costs(h, torus, vals, 0, t_n, tau, lam, quadrature, tkw)
    arg = arg.copy()
    for d in range(1, min(window, n // 2) + 1):
        ca, ja = _step_costs(h, torus, vals, d, t_n, tau, lam, quadrature, tkw)
        cb, jb = _step_costs(h, torus, vals, -d, t_n, tau, lam, quadrature, tkw)
        pick_b = (cb < ca) | ((cb == ca) & (jb < ja))
        pair = np.where(pick_b, cb, ca)
        pair_j = np.where(pick_b, jb, ja)
        better = pair < best
        best = np.where(better, pair, best)
        arg = np.where(better, pair_j, arg)
    arg = np.where(np.isfinite(best), arg, -1)
    return best, arg


def dp_step(
    h: Hamiltonian, v: GridFn, t_n: float, tau: float, window: int,
    lambda_shift: float, quadrature: str = "heun", **transform_kwargs,
) -> Tuple[GridFn, np.ndarray]:
    """
    One Bellman step in transformed variables.

    Ties go to the smaller displacement, then to the smaller source index.
    """
    if not tau > 0:
        raise ParameterError(f"tau must be positive, got {tau}")
    if window < 1:
        raise ParameterError("window must be at least one cell")
    _warn_dual_range(h, v.torus, tau, window, transform_kwargs.get("p_window", P_WINDOW))
    best, arg = _dp_core(h, v.torus, v.values, t_n, tau, window, lambda_shift, quadrature, transform_kwargs)
    return GridFn(v.torus, best), arg


def _warn_dual_range(h, torus, tau, window, p_window):
    if h.closed_lagrangian is None and window * torus.dx / tau > p_window:
        logger.warning(
            "%s: DP speeds up to %.3g exceed the transform window %.3g; Lagrangian accuracy degraded",
            h.name, window * torus.dx / tau, p_window,
        )


def dp_window(h: Hamiltonian, phi: GridFn, tau: float, cfg: DpConfig = DpConfig()) -> int:
    """Cells per step from the velocity bound at the action level of speed max(min_speed, H_p bound)."""
    torus = phi.torus
    if cfg.window is not None:
        return min(int(cfg.window), torus.n // 2)
    u_window = phi.sup_abs() + 1.0
    v_ref = max(cfg.min_speed, float(h.p_bound(phi.lipschitz_estimate() + 1.0, u_window)))
    x = np.linspace(0.0, torus.period, 8, endpoint=False)[:, None, None]
    xi = np.linspace(-v_ref, v_ref, 65)[None, :, None]
    u = np.linspace(-u_window, u_window, 9)[None, None, :]
    L = lagrangian_values(h, x, xi, u, p_window=cfg.p_window, p_steps=cfg.p_steps)
    finite = L[np.isfinite(L)]
    budget = float(np.max(finite)) if finite.size else 0.0
    v_max = velocity_bound(h, budget, u_window)
    if not math.isfinite(v_max):
        return torus.n // 2
    return max(1, min(int(math.ceil(v_max * tau / torus.dx - 1e-9)) + 1, torus.n // 2))


def solve_dp(
    h: Hamiltonian, phi: GridFn, T: float, cfg: DpConfig = DpConfig()
) -> Tuple[Trajectory, ArgminField]:
    """
    u(., t_n) = e^{-lam t_n} v_n with v_0 = phi and one dp_step per time level.

    tau is adjusted to T / m with m = max(1, floor(T / tau0)), so one-cell moves
    never exceed the nominal grid speed.
    """
    if T < 0:
        raise ParameterError(f"final time must be nonnegative, got {T}")
    torus = phi.torus
    if T == 0:
        return (Trajectory(torus, np.zeros(1), [phi], {"solver": "dp", "steps": 0}),
                ArgminField(torus, np.zeros(1), np.zeros((0, torus.n), dtype=int), 0))

    tau0 = cfg.tau if cfg.tau is not None else torus.dx
    m = max(1, int(math.floor(T / tau0 + 1e-9)))
    tau = T / m
    lam = dp_lambda_shift(h, cfg)
    window = dp_window(h, phi, tau, cfg)
    tkw = {"p_window": cfg.p_window, "p_steps": cfg.p_steps}
    _warn_dual_range(h, torus, tau, window, cfg.p_window)

    times = tau * np.arange(m + 1)
    times[-1] = T
    vals = phi.values.copy()
    slices, preds = [phi], []
    for s in range(m):
        vals, arg = _dp_core(h, torus, vals, times[s], tau, window, lam, cfg.quadrature, tkw)
        preds.append(arg)
        slices.append(GridFn(torus, vals * math.exp(-lam * times[s + 1])))

    logger.debug("%s: DP %d steps, tau=%.4g, window=%d, lambda=%g", h.name, m, tau, window, lam)
    diagnostics = {"solver": "dp", "steps": m, "tau": tau, "window": window,
                   "lambda_shift": lam, "quadrature": cfg.quadrature}
    traj = Trajectory(torus, times, slices, diagnostics)
    return traj, ArgminField(torus, times, np.array(preds, dtype=int), window)


def backtrack(argmin: ArgminField, x: int, t: float) -> Curve:
    """Follow recorded predecessors from (x, t) down to t = 0."""
    s = argmin.step_index(t)
    node = int(x)
    if s > 0 and argmin.pred[s - 1, node] < 0:
        raise ParameterError(f"u is +inf at node {node}, t={t}; nothing to backtrack")
    nodes = [node]
    for step in range(s - 1, -1, -1):
        node = int(argmin.pred[step, node])
        if node < 0:
            raise IntegrityError(f"argmin field hits a +inf node at step {step}")
        nodes.append(node)
    return Curve(argmin.times[: s + 1].copy(), np.array(nodes[::-1], dtype=int))


def _curve_steps(curve: Curve, torus: Torus):
    a, b = curve.nodes[:-1], curve.nodes[1:]
    k = torus.displacement(b, a)
    taus = np.diff(curve.times)
    xmid = np.mod(torus.nodes()[a] + 0.5 * k * torus.dx, torus.period)
    return a, xmid, k * torus.dx / taus, taus


def _values_along(curve: Curve, trajectory: Trajectory) -> np.ndarray:
    out = []
    for t, node in zip(curve.times[:-1], curve.nodes[:-1]):
        out.append(trajectory.slice_at(t).values[node])
    return np.array(out)


def action(h: Hamiltonian, curve: Curve, trajectory: Trajectory, phi: GridFn) -> float:
    """Left-endpoint quadrature of L(gamma, gamma', u(gamma, s)) plus phi(gamma(0)); +inf if inadmissible."""
    start = phi.values[curve.nodes[0]]
    if len(curve.nodes) == 1:
        return float(start)
    _, xmid, xi, taus = _curve_steps(curve, trajectory.torus)
    u = _values_along(curve, trajectory)
    if not np.isfinite(u).all() or not np.isfinite(start):
        return math.inf
    L = lagrangian_values(h, xmid, xi, u)
    if not np.isfinite(L).all():
        return math.inf
    return float(np.sum(taus * L) + start)


def admissible(h: Hamiltonian, curve: Curve, trajectory: Trajectory, lambda_shift: Optional[float] = None) -> bool:
    """
    Finite L(., ., 0) on every step and finite u along the curve; cross-checked
    against finiteness of the exponentially weighted action.
    """
    if len(curve.nodes) == 1:
        return bool(np.isfinite(trajectory.slice_at(curve.times[0]).values[curve.nodes[0]]))
    _, xmid, xi, taus = _curve_steps(curve, trajectory.torus)
    u = _values_along(curve, trajectory)
    u_fin = np.isfinite(u)
    plain = bool(u_fin.all() and np.isfinite(lagrangian_values(h, xmid, xi, 0.0)).all())

    lam = dp_lambda_shift(h, DpConfig(lambda_shift=lambda_shift))
    s = curve.times[:-1]
    v = np.where(u_fin, u * np.exp(lam * s), 0.0)
    weighted_steps = lagrangian_tilde_values(h, xmid, xi, s, v, lam)
    weighted = bool(u_fin.all() and np.isfinite(np.sum(taus * weighted_steps)))
    if plain != weighted:
        raise IntegrityError("finite Lagrangian along the curve disagrees with finite weighted action")
    return plain
