"""
Lagrangians L(x, xi, u) = sup_p (p xi - H(x, p, u)) and the exponentially
weighted Lagrangian used by the dynamic-programming solver.

Catalog Hamiltonians carry exact conjugates; everything else goes through a
uniform momentum grid refined around its maximizer.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ParameterError
from .extgrid import ExtReal
from .hamiltonians import Hamiltonian
from .reports import CheckResult

logger = logging.getLogger(__name__)

P_WINDOW = 32.0
P_STEPS = 1025
DIVERGENCE_CEILING = 1e12
_REFINE_STEPS = 65
_CHUNK = 2048


@dataclass(frozen=True)
class LagrangianEval:
    value: ExtReal
    argmax_p: Optional[float] = None


def _check_window(p_window, p_steps):
    if not p_window > 0:
        raise ParameterError(f"p_window must be positive, got {p_window}")
    if p_steps < 3:
        raise ParameterError(f"p_steps must be at least 3, got {p_steps}")


def lagrangian(
    h: Hamiltonian, x: float, xi: float, u: float,
    p_window: float = P_WINDOW, p_steps: int = P_STEPS,
) -> LagrangianEval:
    """
    Legendre transform of H in the momentum slot at one point.

    :param h: Hamiltonian
    :param x: position on the circle
    :param xi: velocity
    :param u: value slot
    :return: LagrangianEval; +inf when p xi - H still increases at the window edge
    """
    _check_window(p_window, p_steps)
    if h.closed_lagrangian is not None:
        return LagrangianEval(ExtReal.from_float(float(h.closed_lagrangian(x, xi, u))))

    p = np.linspace(-p_window, p_window, p_steps)
    vals = p * xi - np.broadcast_to(h.eval(x, p, u), p.shape)
    i = int(np.argmax(vals))
    if (i == p_steps - 1 and vals[-1] > vals[-2]) or (i == 0 and vals[0] > vals[1]):
        return LagrangianEval(ExtReal.plus_infinity())

    best, arg = float(vals[i]), float(p[i])
    if 0 < i < p_steps - 1:
        try:
            res = minimize_scalar(
                lambda q: -(q * xi - float(h.eval(x, q, u))),
                bracket=(p[i - 1], p[i], p[i + 1]),
                method="golden",
            )
            if -res.fun > best:
                best, arg = float(-res.fun), float(res.x)
        except ValueError:
            # flat top, the grid maximum is already the supremum on this bracket
            pass
    if best > DIVERGENCE_CEILING:
        return LagrangianEval(ExtReal.plus_infinity())
    return LagrangianEval(ExtReal.from_float(best), arg)


def _grid_conjugate(h, x, xi, u, p_window, p_steps):
    p = np.linspace(-p_window, p_window, p_steps)
    vals = p[None, :] * xi[:, None] - h.eval(x[:, None], p[None, :], u[:, None])
    i = np.argmax(vals, axis=1)
    rows = np.arange(x.size)
    best = vals[rows, i]
    diverged = ((i == p_steps - 1) & (vals[:, -1] > vals[:, -2])) | ((i == 0) & (vals[:, 0] > vals[:, 1]))

    dp = p[1] - p[0]
    center = p[i]
    q = center[:, None] + np.linspace(-dp, dp, _REFINE_STEPS)[None, :]
    fine = q * xi[:, None] - h.eval(x[:, None], q, u[:, None])
    best = np.maximum(best, np.max(fine, axis=1))
    return np.where(diverged | (best > DIVERGENCE_CEILING), np.inf, best)


def lagrangian_values(
    h: Hamiltonian, x, xi, u,
    p_window: float = P_WINDOW, p_steps: int = P_STEPS,
) -> np.ndarray:
    """Vectorized L(x, xi, u) as floats with +inf; the batch path refines on a finer local grid."""
    x, xi, u = np.broadcast_arrays(np.asarray(x, float), np.asarray(xi, float), np.asarray(u, float))
    if h.closed_lagrangian is not None:
        return np.broadcast_to(np.asarray(h.closed_lagrangian(x, xi, u), dtype=float), x.shape).copy()
    _check_window(p_window, p_steps)
    shape = x.shape
    xf, xif, uf = x.ravel(), xi.ravel(), u.ravel()
    out = np.empty(xf.size)
    for start in range(0, xf.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        out[sl] = _grid_conjugate(h, xf[sl], xif[sl], uf[sl], p_window, p_steps)
    return out.reshape(shape)


def default_lambda_shift(h: Hamiltonian) -> float:
    return h.lam + 1.0


def _checked_shift(h, lambda_shift):
    if lambda_shift is None:
        return default_lambda_shift(h)
    if lambda_shift < h.lam:
        raise ParameterError(
            f"lambda_shift {lambda_shift} below the Lipschitz bound {h.lam}; L~ would not be monotone in u"
        )
    return float(lambda_shift)


def lagrangian_tilde_values(
    h: Hamiltonian, x, xi, t, u, lambda_shift: Optional[float] = None, **transform_kwargs
) -> np.ndarray:
    """e^{lam t} L(x, xi, e^{-lam t} u) + lam u, vectorized."""
    lam = _checked_shift(h, lambda_shift)
    growth = np.exp(lam * np.asarray(t, dtype=float))
    L = lagrangian_values(h, x, xi, np.asarray(u, float) / growth, **transform_kwargs)
    with np.errstate(invalid="ignore"):
        return np.where(np.isinf(L), np.inf, growth * L + lam * np.asarray(u, float))


def lagrangian_tilde(
    h: Hamiltonian, x: float, xi: float, t: float, u: float,
    lambda_shift: Optional[float] = None, **transform_kwargs
) -> ExtReal:
    lam = _checked_shift(h, lambda_shift)
    growth = math.exp(lam * t)
    L = lagrangian(h, x, xi, u / growth, **transform_kwargs).value
    if L.infinite:
        return L
    return ExtReal.from_float(growth * L.value + lam * u)


def velocity_bound(
    h: Hamiltonian,
    action_budget: float,
    u_window: float,
    x_samples: Optional[Sequence[float]] = None,
    xi_samples: int = 2049,
    cap: float = 1e4,
) -> float:
    """
    Speed beyond which L(x, xi, u) exceeds ``action_budget`` for every sampled x and |u| <= u_window.

    Returns +inf when the sublevel set still touches the window at ``cap``.
    """
    if not math.isfinite(action_budget):
        raise ParameterError("action budget must be finite")
    if x_samples is None:
        x_samples = np.linspace(0.0, h.period, 8, endpoint=False)
    if h.closed_lagrangian is None:
        xi_samples = min(xi_samples, 513)
    x = np.asarray(x_samples, dtype=float)[:, None, None]
    u = np.linspace(-abs(u_window), abs(u_window), 9)[None, None, :]
    v = 1.0
    while v <= cap:
        xi = np.linspace(-v, v, xi_samples)
        inside = np.any(lagrangian_values(h, x, xi[None, :, None], u) <= action_budget, axis=(0, 2))
        if inside[0] or inside[-1]:
            v *= 2.0
            continue
        if not inside.any():
            return 0.0
        return float(np.max(np.abs(xi[inside])) + (xi[1] - xi[0]))
    logger.info("%s: no finite velocity bound below %g for budget %g", h.name, cap, action_budget)
    return math.inf


def fenchel_young_report(
    h: Hamiltonian, p_window: float = 4.0, xi_window: float = 4.0, u_window: float = 2.0,
    count: int = 17, tol: float = 1e-6,
) -> CheckResult:
    """L(x, xi, u) + H(x, p, u) >= p xi - tol on a sampled box."""
    x = np.linspace(0.0, h.period, 8, endpoint=False)[:, None, None, None]
    p = np.linspace(-p_window, p_window, count)[None, :, None, None]
    xi = np.linspace(-xi_window, xi_window, count)[None, None, :, None]
    u = np.linspace(-u_window, u_window, 9)[None, None, None, :]
    L = lagrangian_values(h, x, xi, u)
    slack = L + h.eval(x, p, u) - p * xi
    worst = float(np.min(slack[np.isfinite(slack)]))
    return CheckResult("fenchel_young", worst >= -tol, worst, -tol, {"hamiltonian": h.name})
