"""Lowering to an elementary gate set.

Elementary gates: H, X, PHASE(+-pi/4), CNOT, Toffoli, single-qubit
UNITARY with at most one (filled) control.  Wider controls are reduced with
a Toffoli ladder into clean ancillas that are uncomputed right away, so the
ancilla count only grows to the widest single gate.
"""
from __future__ import annotations

import math
from typing import Iterator

import numpy as np

from .gates import Circuit, Gate, cnot, h, phase, toffoli, unitary, x

T_ANGLE = math.pi / 4


def is_elementary(g: Gate) -> bool:
    if any(not on for _, on in g.controls):
        return False
    if g.kind == "X":
        return g.n_controls <= 2
    if g.kind == "H":
        return g.n_controls == 0
    if g.kind == "PHASE":
        return g.n_controls == 0 and math.isclose(abs(g.phase), T_ANGLE, rel_tol=0, abs_tol=1e-15)
    return len(g.targets) == 1 and g.n_controls <= 1


def elementary_kind(g: Gate) -> str:
    """Reporting category of an elementary gate."""
    if not is_elementary(g):
        raise ValueError(f"gate is not elementary: {g}")
    if g.kind == "X":
        return ("X", "CNOT", "Toffoli")[g.n_controls]
    if g.kind == "PHASE":
        return "T" if g.phase > 0 else "Tdg"
    if g.kind == "UNITARY":
        return "CU" if g.n_controls else "U"
    return g.kind


class _Lowering:
    def __init__(self, data_width: int) -> None:
        self.data_width = data_width
        self.peak = 0

    def ancillas(self, count: int) -> list[int]:
        self.peak = max(self.peak, count)
        return list(range(self.data_width, self.data_width + count))

    def lower(self, g: Gate) -> Iterator[Gate]:
        if is_elementary(g):
            yield g
            return
        opened = [q for q, on in g.controls if not on]
        if opened:
            flips = [x(q) for q in opened]
            yield from flips
            filled = Gate(g.kind, g.targets, tuple((q, True) for q, _ in g.controls), g.phase, g.matrix)
            yield from self.lower(filled)
            yield from flips
            return
        if g.kind == "UNITARY" and len(g.targets) > 1:
            for piece in two_level_gates(g.matrix, g.targets):
                yield from self.lower(piece.with_controls(g.controls))
            return
        if g.kind != "X":
            # H, PHASE or a one-qubit UNITARY with several controls
            g = unitary(g.targets, g.target_matrix(), g.controls)
            if g.n_controls <= 1:
                yield g
                return
        yield from self._ladder(g)

    def _ladder(self, g: Gate) -> Iterator[Gate]:
        ctrl = [q for q, _ in g.controls]
        c = len(ctrl)
        anc = self.ancillas(c - 1)
        compute = [toffoli(ctrl[0], ctrl[1], anc[0])]
        compute += [toffoli(ctrl[i + 1], anc[i - 1], anc[i]) for i in range(1, c - 1)]
        yield from compute
        top = anc[-1]
        if g.kind == "X":
            yield cnot(top, g.targets[0])
        else:
            yield unitary(g.targets, g.matrix, [(top, True)])
        yield from reversed(compute)


def decompose(circ: Circuit) -> Circuit:
    """Rewrite a circuit into elementary gates, adding ladder ancillas as needed."""
    # ancillas already present stay reserved for the input circuit's own use
    low = _Lowering(circ.layout.width)
    gates = [e for g in circ.gates for e in low.lower(g)]
    layout = circ.layout.with_ancillas(circ.layout.ancillas + low.peak)
    return Circuit(layout, tuple(gates))


def gray_code(bits: int) -> list[int]:
    return [i ^ (i >> 1) for i in range(2**bits)]


def two_level_gates(u: np.ndarray, targets: tuple[int, ...]) -> list[Gate]:
    """Factor a dense unitary into controlled single-qubit gates.

    Rows are visited in Gray-code order so each Givens rotation mixes two
    basis states that differ in one bit; it becomes a single-qubit gate on
    that bit controlled by all others.  The returned gates, applied in order,
    reproduce ``u``.
    """
    q = len(targets)
    dim = 2**q
    order = gray_code(q)
    work = np.asarray(u, dtype=complex)[np.ix_(order, order)].copy()
    factors: list[tuple[int, np.ndarray]] = []  # (upper row, 2x2 acting on rows r-1, r)
    for col in range(dim - 1):
        for row in range(dim - 1, col, -1):
            a, b = work[row - 1, col], work[row, col]
            if abs(b) < 1e-15:
                if row - 1 == col and abs(a - 1) > 1e-15:
                    g = np.diag([np.conj(a), a])
                else:
                    continue
            else:
                n = math.hypot(abs(a), abs(b))
                g = np.array([[np.conj(a), np.conj(b)], [-b, a]]) / n
            work[[row - 1, row], :] = g @ work[[row - 1, row], :]
            factors.append((row - 1, g))
    last = work[dim - 1, dim - 1]
    if abs(last - 1) > 1e-15:
        fix = np.diag([1.0, np.conj(last)])
        if factors and factors[-1][0] == dim - 2:
            r, g = factors.pop()
            factors.append((r, fix @ g))
        else:
            factors.append((dim - 2, fix))
        work[dim - 1, :] *= np.conj(last)
    gates = []
    for r, g in reversed(factors):
        gates.append(_gray_pair_gate(order[r], order[r + 1], g.conj().T, targets))
    return gates


def _gray_pair_gate(s: int, t: int, mat: np.ndarray, targets: tuple[int, ...]) -> Gate:
    q = len(targets)
    diff = s ^ t
    bit = q - 1 - (diff.bit_length() - 1)  # position counted from the most significant qubit
    if s & diff:
        # s has the bit set: reorder the 2x2 so row 0 is the |0> state
        mat = mat[::-1, ::-1]
    controls = [
        (targets[i], bool((s >> (q - 1 - i)) & 1)) for i in range(q) if i != bit
    ]
    return unitary((targets[bit],), mat, controls)


def expand_toffoli(g: Gate) -> list[Gate]:
    """Clifford+T network for a Toffoli: 6 CNOT, 7 T/T-dagger, 2 H."""
    (c1, _), (c2, _) = g.controls
    t = g.targets[0]
    tdg = -T_ANGLE
    return [
        h(t),
        cnot(c2, t), phase(t, tdg),
        cnot(c1, t), phase(t, T_ANGLE),
        cnot(c2, t), phase(t, tdg),
        cnot(c1, t), phase(c2, T_ANGLE), phase(t, T_ANGLE),
        h(t),
        cnot(c1, c2), phase(c1, T_ANGLE), phase(c2, tdg),
        cnot(c1, c2),
    ]


def clifford_t(circ: Circuit) -> Circuit:
    """Expand every Toffoli of an elementary circuit into Clifford+T gates."""
    gates: list[Gate] = []
    for g in circ.gates:
        if g.kind == "X" and g.n_controls == 2:
            gates.extend(expand_toffoli(g))
        else:
            gates.append(g)
    return Circuit(circ.layout, tuple(gates))
