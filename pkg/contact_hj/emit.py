"""
Plot-ready output.

CSV columns:
    GridFn               x,value,is_infinite
    Trajectory / HTable  t,x,value,is_infinite
+inf is written as the literal ``inf``. JSON is indented by 4 with sorted keys
so identical results give identical bytes.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import os
from typing import Any

import numpy as np
import pandas as pd

from .cauchy_fd import Trajectory
from .errors import ParameterError
from .extgrid import ExtReal, GridFn
from .fundamental import HTable

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"


def grid_frame(f: GridFn) -> pd.DataFrame:
    return pd.DataFrame({
        "x": f.torus.nodes(),
        "value": f.values,
        "is_infinite": f.infinite_mask,
    })


def trajectory_frame(traj) -> pd.DataFrame:
    """Long format over all slices of a Trajectory or HTable."""
    frames = []
    for t, s in zip(traj.times, traj.slices):
        frame = grid_frame(s)
        frame.insert(0, "t", float(t))
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def to_jsonable(obj: Any) -> Any:
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return "inf" if value == math.inf else value
    if isinstance(obj, GridFn):
        return {"n": obj.torus.n, "period": obj.torus.period, "values": to_jsonable(obj.values)}
    if isinstance(obj, ExtReal):
        return to_jsonable(obj.to_float())
    if dataclasses.is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    return obj


def write_csv(frame: pd.DataFrame, path: str) -> str:
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def write_json(obj: Any, path: str) -> str:
    with open(path, "w") as f:
        json.dump(to_jsonable(obj), f, indent=4, sort_keys=True)
        f.write("\n")
    return path


def emit(artifact: Any, fmt: str, path: str) -> str:
    """Write ``artifact`` as csv or json and return the path."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    if fmt == "json":
        path = write_json(artifact, path)
    elif fmt == "csv":
        if isinstance(artifact, GridFn):
            path = write_csv(grid_frame(artifact), path)
        elif isinstance(artifact, (Trajectory, HTable)):
            path = write_csv(trajectory_frame(artifact), path)
        else:
            raise ParameterError(f"no CSV layout for {type(artifact).__name__}")
    else:
        raise ParameterError(f"unknown format '{fmt}'")
    logger.debug("wrote %s", path)
    return path
