"""Gate counts, ASAP depth, width and scaling fits for elementary circuits."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .circuit.build import DECREMENT, INCREMENT, build_shift, build_step_circuit, register_layout
from .circuit.decompose import clifford_t, decompose, elementary_kind
from .circuit.gates import Circuit, concat
from .classical import HyperbolicSystem
from .scheduler import Schedule

KIND_ORDER = ("X", "H", "T", "Tdg", "CNOT", "Toffoli", "U", "CU")

# elementary kinds folded into four reporting categories
CATEGORY_MAP = {
    "H": "Hadamard",
    "Toffoli": "Toffoli",
    "CNOT": "CNOT",
    "X": "Clifford",
    "T": "Clifford",
    "Tdg": "Clifford",
    "U": "Clifford",
    "CU": "Clifford",
}


@dataclass(frozen=True)
class ResourceReport:
    width: int
    data_width: int
    ancillas: int
    total: int
    depth: int
    counts: dict[str, int]
    categories: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> str:
        doc = asdict(self)
        doc["category_map"] = CATEGORY_MAP
        return json.dumps(doc, indent=2, sort_keys=True)


def asap_depth(circ: Circuit) -> int:
    """Greedy layering: each gate goes one layer after the latest of its qubits."""
    level = [0] * circ.width
    depth = 0
    for g in circ.gates:
        layer = 1 + max(level[q] for q in g.qubits)
        for q in g.qubits:
            level[q] = layer
        depth = max(depth, layer)
    return depth


def count(circ: Circuit) -> ResourceReport:
    """Tally an elementary circuit; raises on any non-elementary gate."""
    tally = Counter(elementary_kind(g) for g in circ.gates)
    counts = {k: tally.get(k, 0) for k in KIND_ORDER}
    cats = Counter()
    for k, n in counts.items():
        cats[CATEGORY_MAP[k]] += n
    return ResourceReport(
        width=circ.width,
        data_width=circ.layout.data_width,
        ancillas=circ.layout.ancillas,
        total=len(circ.gates),
        depth=asap_depth(circ),
        counts=counts,
        categories=dict(sorted(cats.items())),
    )


def schedule_circuit(sys: HyperbolicSystem, axis_qubits: Sequence[int], schedule: Schedule) -> Circuit:
    """Full-run circuit: every step's circuit in order, IR level."""
    layout = register_layout(sys.m, axis_qubits)
    transitions = [d.transition for d in sys.decomps]
    return concat(layout, (build_step_circuit(s, transitions, layout) for s in schedule.steps if s.updates))


def report_run(sys: HyperbolicSystem, axis_qubits: Sequence[int], schedule: Schedule, toffoli_view: bool = False) -> ResourceReport:
    circ = decompose(schedule_circuit(sys, axis_qubits, schedule))
    return count(clifford_t(circ) if toffoli_view else circ)


def shift_gate_count(n: int, direction: str = INCREMENT) -> int:
    return count(decompose(build_shift(n, direction))).total


def loglog_slope(xs: Iterable[float], ys: Iterable[float]) -> float:
    """Least-squares slope of log y against log x."""
    lx = np.log(np.asarray(list(xs), dtype=float))
    ly = np.log(np.asarray(list(ys), dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


def classical_ops_per_step(m: int, cells: int, rotated: bool) -> int:
    """Multiply-adds and moves of one streaming step on a classical machine.

    A rotation pair costs 2 m^2 operations per cell, the shift one move per
    cell of the streamed field.
    """
    return (2 * m * m * cells if rotated else 0) + cells


@dataclass(frozen=True)
class ScalingRow:
    n: int
    cells: int
    total_gates: int
    gates_per_step: float
    classical_ops_per_step: int
    ratio: float


def scaling_study(sys: HyperbolicSystem, schedule: Schedule, sizes: Sequence[int]) -> tuple[list[ScalingRow], dict[str, float]]:
    """Gate counts of the full run per grid size, with log-log fits against n and N."""
    if len(sizes) < 3:
        raise ValueError("need at least three sizes")
    rows = []
    steps = sum(1 for s in schedule.steps if s.updates)
    rotated = any(not np.allclose(d.transition, np.eye(sys.m)) for d in sys.decomps)
    for n in sizes:
        rep = report_run(sys, [n] * sys.d, schedule)
        cells = 2 ** (n * sys.d)
        classical = classical_ops_per_step(sys.m, cells, rotated)
        per_step = rep.total / max(steps, 1)
        rows.append(ScalingRow(n, cells, rep.total, per_step, classical, classical / per_step))
    fits = {
        "slope_gates_vs_n": loglog_slope([r.n for r in rows], [r.gates_per_step for r in rows]),
        "slope_classical_vs_cells": loglog_slope([r.cells for r in rows], [r.classical_ops_per_step for r in rows]),
        "slope_gates_vs_cells": loglog_slope([r.cells for r in rows], [r.gates_per_step for r in rows]),
    }
    return rows, fits


def rows_to_csv(rows: Sequence[ScalingRow]) -> str:
    head = "n,cells,total_gates,gates_per_step,classical_ops_per_step,ratio\n"
    return head + "".join(
        f"{r.n},{r.cells},{r.total_gates},{r.gates_per_step!r},{r.classical_ops_per_step},{r.ratio!r}\n" for r in rows
    )


def shift_counts(sizes: Sequence[int]) -> dict[int, int]:
    return {n: shift_gate_count(n) for n in sizes}


