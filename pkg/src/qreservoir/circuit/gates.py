"""Gate and circuit intermediate representation.

Qubit 0 is the most significant bit of a basis label.  A register is laid
out as the component block, then each spatial axis in order, then any
ancillas introduced by decomposition.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

X_MATRIX = np.array([[0, 1], [1, 0]], dtype=complex)
H_MATRIX = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

KINDS = ("X", "H", "PHASE", "UNITARY")


@dataclass(frozen=True)
class Gate:
    """A possibly multi-controlled gate.

    ``controls`` holds ``(qubit, on_one)`` pairs: ``on_one`` True is a filled
    control (fires on |1>), False an open control (fires on |0>).
    """

    kind: str
    targets: tuple[int, ...]
    controls: tuple[tuple[int, bool], ...] = ()
    phase: float | None = None
    matrix: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        targets = tuple(int(t) for t in self.targets)
        controls = tuple((int(q), bool(p)) for q, p in self.controls)
        qubits = list(targets) + [q for q, _ in controls]
        if len(set(qubits)) != len(qubits) or any(q < 0 for q in qubits):
            raise ValueError(f"gate qubits must be distinct and nonnegative: {qubits}")
        if self.kind in ("X", "H", "PHASE") and len(targets) != 1:
            raise ValueError(f"{self.kind} acts on exactly one target")
        if self.kind == "PHASE" and self.phase is None:
            raise ValueError("PHASE needs an angle")
        if self.kind == "UNITARY":
            u = np.asarray(self.matrix, dtype=complex)
            dim = 2 ** len(targets)
            if u.shape != (dim, dim):
                raise ValueError(f"matrix shape {u.shape} does not fit {len(targets)} targets")
            if np.max(np.abs(u.conj().T @ u - np.eye(dim))) > 1e-12:
                raise ValueError("UNITARY matrix is not unitary")
            u = u.copy()
            u.setflags(write=False)
            object.__setattr__(self, "matrix", u)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "controls", controls)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Gate):
            return NotImplemented
        same = (self.kind, self.targets, self.controls, self.phase) == (
            other.kind, other.targets, other.controls, other.phase
        )
        if not same or self.kind != "UNITARY":
            return same
        return bool(np.array_equal(self.matrix, other.matrix))

    def __hash__(self) -> int:
        return hash((self.kind, self.targets, self.controls, self.phase))

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + tuple(q for q, _ in self.controls)

    @property
    def n_controls(self) -> int:
        return len(self.controls)

    def target_matrix(self) -> np.ndarray:
        if self.kind == "X":
            return X_MATRIX
        if self.kind == "H":
            return H_MATRIX
        if self.kind == "PHASE":
            return np.diag([1.0, np.exp(1j * self.phase)])
        return self.matrix

    def adjoint(self) -> "Gate":
        if self.kind in ("X", "H"):
            return self
        if self.kind == "PHASE":
            return replace(self, phase=-self.phase)
        return replace(self, matrix=self.matrix.conj().T)

    def with_controls(self, extra: Iterable[tuple[int, bool]]) -> "Gate":
        return replace(self, controls=tuple(extra) + self.controls)

    def relabel(self, mapping: Sequence[int]) -> "Gate":
        return replace(
            self,
            targets=tuple(mapping[t] for t in self.targets),
            controls=tuple((mapping[q], p) for q, p in self.controls),
        )


def x(target: int, controls: Iterable[tuple[int, bool]] = ()) -> Gate:
    return Gate("X", (target,), tuple(controls))


def cnot(control: int, target: int) -> Gate:
    return Gate("X", (target,), ((control, True),))


def toffoli(c1: int, c2: int, target: int) -> Gate:
    return Gate("X", (target,), ((c1, True), (c2, True)))


def h(target: int) -> Gate:
    return Gate("H", (target,))


def phase(target: int, angle: float) -> Gate:
    return Gate("PHASE", (target,), phase=float(angle))


def unitary(targets: Sequence[int], matrix, controls: Iterable[tuple[int, bool]] = ()) -> Gate:
    return Gate("UNITARY", tuple(targets), tuple(controls), matrix=np.asarray(matrix, dtype=complex))


@dataclass(frozen=True)
class Layout:
    """Register split: component qubits, per-axis position qubits, ancillas."""

    component_qubits: int
    axis_qubits: tuple[int, ...]
    ancillas: int = 0

    def __post_init__(self) -> None:
        if self.component_qubits < 0 or self.ancillas < 0 or any(n < 1 for n in self.axis_qubits):
            raise ValueError(f"invalid layout {self}")
        object.__setattr__(self, "axis_qubits", tuple(int(n) for n in self.axis_qubits))

    @property
    def data_width(self) -> int:
        return self.component_qubits + sum(self.axis_qubits)

    @property
    def width(self) -> int:
        return self.data_width + self.ancillas

    @property
    def component_register(self) -> tuple[int, ...]:
        return tuple(range(self.component_qubits))

    def axis_register(self, axis: int) -> tuple[int, ...]:
        """Qubits of a 1-based axis, most significant first."""
        start = self.component_qubits + sum(self.axis_qubits[: axis - 1])
        return tuple(range(start, start + self.axis_qubits[axis - 1]))

    def with_ancillas(self, count: int) -> "Layout":
        return replace(self, ancillas=count)


@dataclass(frozen=True)
class Circuit:
    layout: Layout
    gates: tuple[Gate, ...] = ()

    def __post_init__(self) -> None:
        gates = tuple(self.gates)
        w = self.layout.width
        for g in gates:
            if max(g.qubits) >= w:
                raise ValueError(f"gate {g} exceeds circuit width {w}")
        object.__setattr__(self, "gates", gates)

    @property
    def width(self) -> int:
        return self.layout.width

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def then(self, other: "Circuit") -> "Circuit":
        """Sequential composition: self first, then other."""
        layout = self.layout if self.layout.width >= other.layout.width else other.layout
        if self.layout.with_ancillas(0) != other.layout.with_ancillas(0):
            raise ValueError("cannot concatenate circuits with different data layouts")
        return Circuit(layout, self.gates + other.gates)

    def adjoint(self) -> "Circuit":
        return Circuit(self.layout, tuple(g.adjoint() for g in reversed(self.gates)))


def concat(layout: Layout, parts: Iterable[Circuit]) -> Circuit:
    gates: list[Gate] = []
    anc = layout.ancillas
    for c in parts:
        gates.extend(c.gates)
        anc = max(anc, c.layout.ancillas)
    return Circuit(layout.with_ancillas(anc), tuple(gates))
