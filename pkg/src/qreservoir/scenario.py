"""Scenario documents: system, grid, initial datum and final time.

A scenario is a JSON object::

    {
      "system": {"preset": "dirac3d"}            # or "matrices" / "eigenvalues"+"transitions"
      "grid": {"qubits": [2, 2, 2], "dx": 0.01, "origin": [0, 0, 0]},
      "initial": {"kind": "gaussian", "center": [...], "sharpness": [...], "amplitudes": [...]},
      "T": 0.01,
      "flags": {"decompose": false, "dump_state": false}
    }

Presets for every field can be pulled in with ``{"preset": name}`` at the
top level; explicit keys override the preset's.
"""
from __future__ import annotations

import copy
import json
import logging
import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .classical import Grid, HyperbolicSystem
from .circuit.build import PAULI

log = logging.getLogger(__name__)

R2 = math.sqrt(2.0)


class ScenarioError(ValueError):
    """Invalid scenario configuration."""


def dirac_transition(gamma: str) -> np.ndarray:
    p = PAULI[gamma]
    return np.block([[np.eye(2), p], [p, -np.eye(2)]]) / R2


SYSTEM_PRESETS: dict[str, Callable[[], HyperbolicSystem]] = {
    "dirac3d": lambda: HyperbolicSystem.from_transition(
        [[-1, -1, R2, R2], [-2, -2, 2 * R2, 2 * R2], [-4, -4, 4 * R2, 4 * R2]],
        [dirac_transition(g) for g in "xyz"],
    ),
    "example2d": lambda: HyperbolicSystem.from_transition(
        [[1, 2], [1, 4]],
        [
            np.array([[1, -1], [1, 1]]) / R2,
            np.array([[2, 1], [-1, 2]]) / math.sqrt(5),
        ],
    ),
    "diag2d": lambda: HyperbolicSystem.from_matrices([np.diag([1.0, 4.0, 8.0]), np.diag([1.0, 2.0, 4.0])]),
    "diag1d": lambda: HyperbolicSystem.from_matrices([np.diag([1.0, -3.0])]),
    "three_fields": lambda: HyperbolicSystem.from_matrices([np.diag([0.1, 1.0, 1.1])]),
}

SCENARIO_PRESETS: dict[str, dict[str, Any]] = {
    "three_fields": {
        "system": {"preset": "three_fields"},
        "grid": {"qubits": [7], "dx": 0.01},
        "initial": {"kind": "step", "threshold": 0.1},
        "T": 0.1,
    },
    "diag1d": {
        "system": {"preset": "diag1d"},
        "grid": {"qubits": [4], "dx": 0.01},
        "initial": {"kind": "gaussian", "center": [0.08], "sharpness": [2000.0, 500.0]},
        "T": 0.1,
    },
    "example2d": {
        "system": {"preset": "example2d"},
        "grid": {"qubits": [7, 7], "dx": 0.1},
        "initial": {"kind": "gaussian", "center": [2.5, 2.5], "sharpness": [4.0, 4.0]},
        "T": 1.0,
    },
    "diag2d": {
        "system": {"preset": "diag2d"},
        "grid": {"qubits": [7, 7], "dx": 0.1},
        "initial": {"kind": "gaussian", "center": [2.5, 2.5], "sharpness": [2.0, 4.0, 8.0]},
        "T": 0.75,
    },
    "dirac3d": {
        "system": {"preset": "dirac3d"},
        "grid": {"qubits": [2, 2, 2], "dx": 0.01},
        "initial": {"kind": "gaussian", "center": [0.02, 0.02, 0.02], "sharpness": [3000.0, 2000.0, 1000.0, 500.0]},
        "T": 0.01,
    },
}


@dataclass(frozen=True)
class Scenario:
    system: HyperbolicSystem
    grid: Grid
    initial: Callable[..., list[np.ndarray]]
    T: float
    decompose: bool = False
    dump_state: bool = False
    name: str = ""


def gaussian(center, sharpness, amplitudes=None):
    center = [float(c) for c in center]
    sharp = [float(s) for s in sharpness]
    amps = [1.0] * len(sharp) if amplitudes is None else [float(a) for a in amplitudes]

    def u0(*xs):
        r2 = sum((x - c) ** 2 for x, c in zip(xs, center))
        return [a * np.exp(-s * r2) for a, s in zip(amps, sharp)]

    return u0


def step(threshold: float, amplitudes):
    amps = [float(a) for a in amplitudes]

    def u0(x, *rest):
        inside = np.where(x <= threshold, 1.0, 0.0)
        return [a * inside for a in amps]

    return u0


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and "preset" not in v:
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _system(cfg: dict) -> HyperbolicSystem:
    if "preset" in cfg:
        name = cfg["preset"]
        if name not in SYSTEM_PRESETS:
            raise ScenarioError(f"unknown system preset {name!r}; choose from {sorted(SYSTEM_PRESETS)}")
        return SYSTEM_PRESETS[name]()
    if "matrices" in cfg:
        mats = [np.array(a, dtype=float) for a in cfg["matrices"]]
        for i, a in enumerate(mats, start=1):
            if a.ndim != 2 or a.shape[0] != a.shape[1]:
                raise ScenarioError(f"matrix {i} is not square")
            asym = float(np.max(np.abs(a - a.T)))
            if asym > 1e-12:
                raise ScenarioError(f"matrix {i} is not symmetric (asymmetry {asym:.3e})")
            if asym > 0:
                log.warning("matrix %d symmetrized (asymmetry %.3e)", i, asym)
        return HyperbolicSystem.from_matrices(mats)
    if "eigenvalues" in cfg and "transitions" in cfg:
        trans = [_complex_matrix(t) for t in cfg["transitions"]]
        return HyperbolicSystem.from_transition(cfg["eigenvalues"], trans)
    raise ScenarioError("system needs 'preset', 'matrices', or 'eigenvalues' with 'transitions'")


def _complex_matrix(rows) -> np.ndarray:
    # entries are numbers or [re, im] pairs
    return np.array([[complex(*e) if isinstance(e, list) else complex(e) for e in row] for row in rows])


def build(doc: dict) -> Scenario:
    """Validate a scenario document and materialize its objects."""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    name = ""
    if "preset" in doc:
        name = doc["preset"]
        if name not in SCENARIO_PRESETS:
            raise ScenarioError(f"unknown scenario preset {name!r}; choose from {sorted(SCENARIO_PRESETS)}")
        doc = _merge(SCENARIO_PRESETS[name], {k: v for k, v in doc.items() if k != "preset"})
    for key in ("system", "grid", "initial", "T"):
        if key not in doc:
            raise ScenarioError(f"missing required key {key!r}")
    try:
        system = _system(doc["system"])
        g = doc["grid"]
        grid = Grid(tuple(g["qubits"]), float(g["dx"]), tuple(g["origin"]) if "origin" in g else None)
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"invalid system or grid: {exc}") from exc
    if grid.d != system.d:
        raise ScenarioError(f"grid has {grid.d} axes but system has {system.d}")
    T = float(doc["T"])
    if not T >= 0:
        raise ScenarioError("T must be nonnegative")
    init = doc["initial"]
    amps = init.get("amplitudes", [1.0] * system.m)
    if len(amps) != system.m:
        raise ScenarioError(f"need {system.m} amplitudes, got {len(amps)}")
    kind = init.get("kind")
    if kind == "gaussian":
        center = init.get("center", [0.5 * L for L in grid.lengths])
        sharp = init.get("sharpness", [1.0] * system.m)
        if len(center) != grid.d or len(sharp) != system.m:
            raise ScenarioError("gaussian needs one center per axis and one sharpness per component")
        u0 = gaussian(center, sharp, amps)
    elif kind == "step":
        u0 = step(float(init.get("threshold", 0.0)), amps)
    else:
        raise ScenarioError(f"unknown initial datum kind {kind!r}")
    flags = doc.get("flags", {})
    return Scenario(system, grid, u0, T, bool(flags.get("decompose", False)), bool(flags.get("dump_state", False)), name)


def load(path: str) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return build(doc)


def preset(name: str, **overrides) -> Scenario:
    return build({"preset": name, **overrides})
