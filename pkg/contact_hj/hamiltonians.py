"""
Hamiltonian catalog for u_t + H(x, u_x, u) = 0 on the circle R / P Z.

Each entry:
    name : {
        "builder"     : callable(period, **params) -> Hamiltonian,
        "params"      : extra parameter names accepted besides ``period``,
        "description" : str
    }

Usage:
    from contact_hj.hamiltonians import catalog_get
    h = catalog_get("quad_pendulum")
    h.eval(0.0, 1.0, 0.5)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Optional, Sequence

import numpy as np

from .errors import CatalogError, ParameterError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# |xi| <= 1 is tested with this slack so that one-cell moves at unit grid speed stay admissible
SPEED_SLACK = 1e-9


@dataclass(frozen=True)
class Hamiltonian:
    """An immutable Hamiltonian; ``eval`` and the Lagrangian broadcast over numpy arrays."""

    name: str
    eval: Callable
    lam: float
    p_bound: Callable[[float, float], float]
    closed_lagrangian: Optional[Callable] = None
    period: float = TWO_PI
    p_star: Optional[Callable] = None
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if not self.period > 0:
            raise ParameterError(f"period must be positive, got {self.period}")
        if self.lam < 0:
            raise ParameterError(f"Lipschitz bound in u must be nonnegative, got {self.lam}")

    def __call__(self, x, p, u):
        return self.eval(x, p, u)


@dataclass(frozen=True)
class AssumptionReport:
    estimated_lambda: float
    convexity_violations: int
    coercivity_witness: Dict[float, Optional[float]]
    passed: bool

    @property
    def failed_r(self):
        return [r for r, k in self.coercivity_witness.items() if k is None]


def _cone_lagrangian(value_inside):
    def lagrangian(x, xi, u):
        x, xi, u = np.broadcast_arrays(np.asarray(x, float), np.asarray(xi, float), np.asarray(u, float))
        return np.where(np.abs(xi) <= 1.0 + SPEED_SLACK, value_inside(u), np.inf)
    return lagrangian


def _zero_p_star(x, u):
    return np.zeros(np.broadcast(np.asarray(x), np.asarray(u)).shape)


def even_well_bridge(u):
    """3/4 - u^2 on |u| <= 1/2 and 1 - |u| beyond; C^1, even, |f'| <= 1, zero at u = -1."""
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= 0.5, 0.75 - u**2, 1.0 - np.abs(u))


def _eikonal_plain(period):
    return Hamiltonian(
        name="eikonal_plain",
        eval=lambda x, p, u: np.abs(p) + 0.0 * np.asarray(u, float) + 0.0 * np.asarray(x, float),
        lam=0.0,
        p_bound=lambda p_max, u_max: 1.0,
        closed_lagrangian=_cone_lagrangian(lambda u: np.zeros_like(u)),
        period=period,
        p_star=_zero_p_star,
    )


def _eikonal_discount(period):
    return Hamiltonian(
        name="eikonal_discount",
        eval=lambda x, p, u: np.abs(p) - u + 0.0 * np.asarray(x, float),
        lam=1.0,
        p_bound=lambda p_max, u_max: 1.0,
        closed_lagrangian=_cone_lagrangian(lambda u: u),
        period=period,
        p_star=_zero_p_star,
    )


def _quad_discount(period):
    return Hamiltonian(
        name="quad_discount",
        eval=lambda x, p, u: -u + 0.5 * np.square(p) + 0.0 * np.asarray(x, float),
        lam=1.0,
        p_bound=lambda p_max, u_max: p_max,
        closed_lagrangian=lambda x, xi, u: 0.5 * np.square(xi) + u + 0.0 * np.asarray(x, float),
        period=period,
        p_star=_zero_p_star,
    )


def _quad_pendulum(period):
    k = TWO_PI / period
    return Hamiltonian(
        name="quad_pendulum",
        eval=lambda x, p, u: -u + 0.5 * np.square(p) + np.cos(k * np.asarray(x, float)) - 1.0,
        lam=1.0,
        p_bound=lambda p_max, u_max: p_max,
        closed_lagrangian=lambda x, xi, u: 0.5 * np.square(xi) + u - np.cos(k * np.asarray(x, float)) + 1.0,
        period=period,
        p_star=_zero_p_star,
    )


def _quad_drift(period, drift=None):
    k = TWO_PI / period
    if drift is None:
        def drift(x):
            return np.sin(k * np.asarray(x, float))
    v_max = float(np.max(np.abs(drift(np.linspace(0.0, period, 4097)))))

    def p_star(x, u):
        return -drift(x) + 0.0 * np.asarray(u, float)

    return Hamiltonian(
        name="quad_drift",
        eval=lambda x, p, u: -u + 0.5 * np.square(p) + p * drift(x),
        lam=1.0,
        p_bound=lambda p_max, u_max: p_max + v_max,
        closed_lagrangian=lambda x, xi, u: 0.5 * np.square(xi - drift(x)) + u,
        period=period,
        p_star=p_star,
        params={"drift": drift},
    )


def _even_well(period):
    return Hamiltonian(
        name="even_well",
        eval=lambda x, p, u: even_well_bridge(u) + 0.5 * np.square(p) + 0.0 * np.asarray(x, float),
        lam=1.0,
        p_bound=lambda p_max, u_max: p_max,
        closed_lagrangian=lambda x, xi, u: 0.5 * np.square(xi) - even_well_bridge(u) + 0.0 * np.asarray(x, float),
        period=period,
        p_star=_zero_p_star,
    )


CATALOG = {
    "eikonal_plain": {
        "builder": _eikonal_plain,
        "params": (),
        "description": "|p|; u-independent, conjugate is 0 on |xi| <= 1.",
    },
    "eikonal_discount": {
        "builder": _eikonal_discount,
        "params": (),
        "description": "|p| - u; point data grow like c e^t on the unit-speed cone.",
    },
    "quad_discount": {
        "builder": _quad_discount,
        "params": (),
        "description": "-u + p^2/2; stationary family 1/2 d(x, K)^2.",
    },
    "quad_pendulum": {
        "builder": _quad_pendulum,
        "params": (),
        "description": "-u + p^2/2 + cos x - 1; exactly one stationary solution.",
    },
    "quad_drift": {
        "builder": _quad_drift,
        "params": ("drift",),
        "description": "-u + p^2/2 + p V(x), V = sin by default; two stationary solutions.",
    },
    "even_well": {
        "builder": _even_well,
        "params": (),
        "description": "f(u) + p^2/2 with the even bridge f; two long-time images.",
    },
}


def catalog_names():
    return sorted(CATALOG)


def catalog_get(name: str, params: Optional[Mapping] = None) -> Hamiltonian:
    """
    Build a catalog Hamiltonian.

    :param name: catalog key
    :param params: ``period`` (default 2 pi) and, for quad_drift, ``drift`` (callable V)
    """
    if name not in CATALOG:
        raise CatalogError(f"unknown Hamiltonian '{name}'. Choose from: {catalog_names()}")
    params = dict(params or {})
    period = float(params.pop("period", TWO_PI))
    if not period > 0:
        raise ParameterError(f"period must be positive, got {period}")
    entry = CATALOG[name]
    unknown = set(params) - set(entry["params"])
    if unknown:
        raise ParameterError(f"unknown parameters for {name}: {sorted(unknown)}")
    return entry["builder"](period, **params)


def ominus(h: Hamiltonian) -> Hamiltonian:
    """Adjoint Hamiltonian H(x, -p, -u)."""
    closed = None
    if h.closed_lagrangian is not None:
        def closed(x, xi, u):
            return h.closed_lagrangian(x, -np.asarray(xi, float), -np.asarray(u, float))
    p_star = None
    if h.p_star is not None:
        def p_star(x, u):
            return -h.p_star(x, -np.asarray(u, float))
    return Hamiltonian(
        name=f"ominus({h.name})",
        eval=lambda x, p, u: h.eval(x, -np.asarray(p, float), -np.asarray(u, float)),
        lam=h.lam,
        p_bound=h.p_bound,
        closed_lagrangian=closed,
        period=h.period,
        p_star=p_star,
        params=h.params,
    )


def viscous(h: Hamiltonian, gamma: float) -> Hamiltonian:
    """H + gamma p^2, the regularized equation; the Lagrangian falls back to the numerical transform."""
    if gamma < 0:
        raise ParameterError(f"gamma must be nonnegative, got {gamma}")
    if gamma == 0:
        return Hamiltonian(
            name=f"viscous({h.name},0)",
            eval=h.eval,
            lam=h.lam,
            p_bound=h.p_bound,
            closed_lagrangian=h.closed_lagrangian,
            period=h.period,
            p_star=h.p_star,
            params=h.params,
        )
    return Hamiltonian(
        name=f"viscous({h.name},{gamma:g})",
        eval=lambda x, p, u: h.eval(x, p, u) + gamma * np.square(p),
        lam=h.lam,
        p_bound=lambda p_max, u_max: h.p_bound(p_max, u_max) + 2.0 * gamma * p_max,
        closed_lagrangian=None,
        period=h.period,
        p_star=None,
        params=dict(h.params, gamma=gamma),
    )


def audit(
    h: Hamiltonian,
    x_samples: Optional[Sequence[float]] = None,
    p_window: float = 8.0,
    u_window: float = 2.0,
    r_samples: Sequence[float] = (1.0, 2.0, 4.0, 8.0),
    p_count: int = 41,
    u_count: int = 21,
    tol: float = 1e-6,
    k_cap: float = 1e6,
) -> AssumptionReport:
    """
    Sampled falsifier for the standing assumptions: Lipschitz in u, convex in p, coercive.

    A passing report is evidence at the sampled scale, not a proof.
    """
    if p_window <= 0 or u_window <= 0:
        raise ParameterError("audit windows must be positive")
    if p_count < 3 or u_count < 3:
        raise ParameterError("audit needs at least 3 samples per axis")
    if x_samples is None:
        x_samples = np.linspace(0.0, h.period, 16, endpoint=False)
    x = np.asarray(x_samples, dtype=float)
    if x.size < 3:
        raise ParameterError("audit needs at least 3 x samples")
    p = np.linspace(-p_window, p_window, p_count)
    u = np.linspace(-u_window, u_window, u_count)

    X, P, U = np.meshgrid(x, p, u, indexing="ij")
    H = np.broadcast_to(h.eval(X, P, U), X.shape)
    dH = np.abs(H[..., :, None] - H[..., None, :])
    du = np.abs(u[:, None] - u[None, :])
    off = du > 0
    estimated_lambda = float(np.max(dH[..., off] / du[off]))

    ia, ib = np.triu_indices(p_count, k=1)
    pa, pb = p[ia], p[ib]
    Xc, Uc = x[:, None, None], u[None, None, :]
    mid = np.broadcast_to(h.eval(Xc, 0.5 * (pa + pb)[None, :, None], Uc), (x.size, ia.size, u.size))
    avg = 0.5 * (np.broadcast_to(h.eval(Xc, pa[None, :, None], Uc), mid.shape)
                 + np.broadcast_to(h.eval(Xc, pb[None, :, None], Uc), mid.shape))
    convexity_violations = int(np.count_nonzero(mid > avg + 1e-9 * (1.0 + np.abs(avg))))

    witness = {}
    for r in r_samples:
        ring_u = np.linspace(-r, r, u_count)
        k = 1.0
        witness[float(r)] = None
        while k <= k_cap:
            ring = np.concatenate([
                np.ravel(h.eval(x[:, None], k, ring_u[None, :]) + np.zeros((x.size, ring_u.size))),
                np.ravel(h.eval(x[:, None], -k, ring_u[None, :]) + np.zeros((x.size, ring_u.size))),
            ])
            if np.min(ring) > r:
                witness[float(r)] = k
                break
            k *= 2.0
        if witness[float(r)] is None:
            logger.warning("%s: no coercivity witness below %g for R=%g", h.name, k_cap, r)

    passed = (
        estimated_lambda <= h.lam * (1.0 + tol) + 1e-9
        and convexity_violations == 0
        and all(k is not None for k in witness.values())
    )
    return AssumptionReport(estimated_lambda, convexity_violations, witness, bool(passed))
