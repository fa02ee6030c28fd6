"""
Run configuration: a JSON file parsed into frozen sections, with command-line
overrides applied on top (flags win).

Example file:

    {
        "hamiltonian": {"name": "quad_pendulum"},
        "grid": {"n": 512},
        "solver": {"kind": "dp", "tau": 0.01},
        "experiment": "solve",
        "params": {"init": "sin", "T": 0.5},
        "output": {"directory": "results"}
    }

Initial data strings:
    point:y=<node>,c=<value>      c at one node, +inf elsewhere (c may be inf)
    const:<value>
    quad:y=<x>[|<x>...][,a=<amp>]  amp * ½ d(x, K)^2
    sin                            sin(2 pi x / P)
    shift:<value>+<init>           init + value
Positions accept a trailing ``pi`` ("pi", "0.5pi"). Seed lists are either
``spread:<k>`` or initial data strings separated by ``;``.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from .cauchy_fd import FdConfig
from .errors import ConfigError, ContactHJError
from .extgrid import GridFn, Torus, constant, from_function, point_data
from .lax_oleinik import DpConfig
from .longtime import LongtimeConfig

SOLVER_KINDS = ("fd", "dp", "both")
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class HamiltonianSection:
    name: str = "quad_pendulum"
    params: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class GridSection:
    n: int = 256
    period: float = 2.0 * math.pi


@dataclass(frozen=True)
class SolverSection:
    kind: str = "fd"
    cfl_safety: float = 0.9
    tau: Optional[float] = None
    ceiling: float = 1e6
    scheme: str = "godunov"
    quadrature: str = "heun"


@dataclass(frozen=True)
class ExperimentParams:
    init: str = "quad:y=0"
    T: float = 1.0
    times: Optional[List[float]] = None
    y: int = 0
    c: float = 0.0
    seeds: str = "spread:8"
    suite: str = "all"
    block_t: float = 1.0
    stop_tol: float = 1e-4
    t_max: float = 50.0
    merge_tol: float = 0.05


@dataclass(frozen=True)
class OutputSection:
    directory: str = "results"
    formats: Tuple[str, ...] = FORMATS


@dataclass(frozen=True)
class RunConfig:
    hamiltonian: HamiltonianSection = HamiltonianSection()
    grid: GridSection = GridSection()
    solver: SolverSection = SolverSection()
    experiment: str = "solve"
    params: ExperimentParams = ExperimentParams()
    output: OutputSection = OutputSection()
    seed: int = 0

    def torus(self) -> Torus:
        return Torus(self.grid.period, self.grid.n)

    def fd_config(self) -> FdConfig:
        return FdConfig(cfl_safety=self.solver.cfl_safety, ceiling=self.solver.ceiling, scheme=self.solver.scheme)

    def dp_config(self) -> DpConfig:
        return DpConfig(tau=self.solver.tau, quadrature=self.solver.quadrature)

    def longtime_config(self) -> LongtimeConfig:
        return LongtimeConfig(
            block_t=self.params.block_t, stop_tol=self.params.stop_tol, t_max=self.params.t_max,
            merge_tol=self.params.merge_tol, solver="dp" if self.solver.kind == "dp" else "fd",
            fd=self.fd_config(), dp=self.dp_config(),
        )

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


_SECTIONS = {
    "hamiltonian": HamiltonianSection,
    "grid": GridSection,
    "solver": SolverSection,
    "params": ExperimentParams,
    "output": OutputSection,
}


def _section(cls, raw: Mapping[str, Any], where: str):
    if not isinstance(raw, Mapping):
        raise ConfigError(f"section '{where}' must be an object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(raw) - names
    if unknown:
        raise ConfigError(f"unknown keys in '{where}': {sorted(unknown)}")
    values = dict(raw)
    if "formats" in values:
        values["formats"] = tuple(values["formats"])
    return cls(**values)


def from_dict(raw: Mapping[str, Any]) -> RunConfig:
    unknown = set(raw) - {f.name for f in dataclasses.fields(RunConfig)}
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    kwargs: Dict[str, Any] = {}
    for key, value in raw.items():
        kwargs[key] = _section(_SECTIONS[key], value, key) if key in _SECTIONS else value
    return validate(RunConfig(**kwargs))


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as f:
            raw = json.load(f)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path} is not valid JSON: {err}") from err
    return from_dict(raw)


def apply_overrides(cfg: RunConfig, overrides: Mapping[str, Any]) -> RunConfig:
    """Overrides are keyed "section.key" (or a top-level key); None values are skipped."""
    sections: Dict[str, Dict[str, Any]] = {}
    top: Dict[str, Any] = {}
    for dotted, value in overrides.items():
        if value is None:
            continue
        if "." in dotted:
            section, key = dotted.split(".", 1)
            if section not in _SECTIONS:
                raise ConfigError(f"unknown section in override '{dotted}'")
            sections.setdefault(section, {})[key] = value
        else:
            top[dotted] = value
    for section, values in sections.items():
        current = dataclasses.asdict(getattr(cfg, section))
        current.update(values)
        top[section] = _section(_SECTIONS[section], current, section)
    bad = set(top) - {f.name for f in dataclasses.fields(RunConfig)}
    if bad:
        raise ConfigError(f"unknown override keys: {sorted(bad)}")
    return validate(dataclasses.replace(cfg, **top))


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.solver.kind not in SOLVER_KINDS:
        raise ConfigError(f"solver.kind must be one of {SOLVER_KINDS}, got '{cfg.solver.kind}'")
    if any(f not in FORMATS for f in cfg.output.formats):
        raise ConfigError(f"output.formats must be drawn from {FORMATS}")
    try:
        cfg.torus()
        cfg.fd_config()
        cfg.dp_config()
    except ContactHJError as err:
        raise ConfigError(str(err)) from err
    return cfg


def parse_number(text: str) -> float:
    text = text.strip()
    try:
        if text.endswith("pi"):
            head = text[:-2]
            return (float(head) if head else 1.0) * math.pi
        return float(text)
    except ValueError:
        raise ConfigError(f"not a number: '{text}'") from None


def _kv(body: str) -> Dict[str, str]:
    out = {}
    for part in body.split(","):
        if "=" not in part:
            raise ConfigError(f"expected key=value, got '{part}'")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_init(text: str, torus: Torus) -> GridFn:
    """Build initial data from the mini-language in the module docstring."""
    text = text.strip()
    kind, _, body = text.partition(":")
    try:
        if kind == "point":
            kv = _kv(body)
            return point_data(torus, int(kv["y"]), parse_number(kv.get("c", "0")))
        if kind == "const":
            return constant(torus, parse_number(body))
        if kind == "quad":
            kv = _kv(body)
            centers = np.array([parse_number(c) for c in kv["y"].split("|")])
            amp = parse_number(kv.get("a", "1"))
            x = torus.nodes()
            d = np.min(torus.distance(x[:, None], centers[None, :]), axis=1)
            return GridFn(torus, 0.5 * amp * d**2)
        if kind == "sin":
            return from_function(torus, lambda x: np.sin(2.0 * math.pi * x / torus.period))
        if kind == "shift":
            value, _, rest = body.partition("+")
            return parse_init(rest, torus).shifted(parse_number(value))
    except KeyError as err:
        raise ConfigError(f"initial data '{text}' is missing {err}") from None
    except ContactHJError as err:
        raise ConfigError(f"initial data '{text}': {err}") from err
    except ValueError as err:
        raise ConfigError(f"initial data '{text}': {err}") from err
    raise ConfigError(f"unknown initial data '{text}'")


def spread_seeds(torus: Torus, k: int) -> List[GridFn]:
    """(j / k) ½ d(x, y_j)^2 with y_j = j P / k, j = 0..k-1."""
    if k < 1:
        raise ConfigError("spread needs k >= 1")
    x = torus.nodes()
    out = []
    for j in range(k):
        y = j * torus.period / k
        out.append(GridFn(torus, (j / k) * 0.5 * torus.distance(x, y) ** 2))
    return out


def parse_seeds(text: str, torus: Torus) -> List[GridFn]:
    text = text.strip()
    if text.startswith("spread:"):
        try:
            return spread_seeds(torus, int(text.split(":", 1)[1]))
        except ValueError:
            raise ConfigError(f"bad spread count in '{text}'") from None
    return [parse_init(s, torus) for s in text.split(";") if s.strip()]
