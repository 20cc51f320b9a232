"""Circuit builders for cyclic shifts, component-selected translations and basis rotations."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..scheduler import Step, UpdateKey
from .gates import Circuit, Gate, Layout, concat, h, unitary, x

INCREMENT = "increment"
DECREMENT = "decrement"

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def shift_gates(qubits: Sequence[int], direction: str) -> list[Gate]:
    """Cascade of multi-controlled X gates adding or subtracting one mod 2^n.

    ``qubits`` lists the register most significant first.  The most
    significant bit flips first, conditioned on every lower bit being 1 (for
    +1) or 0 (for -1).
    """
    if direction not in (INCREMENT, DECREMENT):
        raise ValueError(f"direction must be {INCREMENT!r} or {DECREMENT!r}")
    on_one = direction == INCREMENT
    n = len(qubits)
    return [x(qubits[t], [(qubits[c], on_one) for c in range(t + 1, n)]) for t in range(n)]


def build_shift(n: int, direction: str) -> Circuit:
    if n < 1:
        raise ValueError("shift register needs at least one qubit")
    return Circuit(Layout(0, (n,)), tuple(shift_gates(range(n), direction)))


def component_controls(component: int, layout: Layout) -> list[tuple[int, bool]]:
    """Controls selecting basis state |component - 1> of the component register."""
    p = layout.component_qubits
    if not 1 <= component <= 2**p:
        raise ValueError(f"component {component} does not fit in {p} qubits")
    bits = format(component - 1, f"0{p}b") if p else ""
    return [(q, b == "1") for q, b in zip(layout.component_register, bits)]


def build_translation(key: UpdateKey, sign: int, layout: Layout) -> Circuit:
    """Move one field by one cell along ``key.axis``: +1 streams towards larger index."""
    if not 1 <= key.axis <= len(layout.axis_qubits):
        raise ValueError(f"axis {key.axis} not in layout")
    ctrl = component_controls(key.component, layout)
    direction = INCREMENT if sign > 0 else DECREMENT
    gates = [g.with_controls(ctrl) for g in shift_gates(layout.axis_register(key.axis), direction)]
    return Circuit(layout, tuple(gates))


def embed(s: np.ndarray, p: int) -> np.ndarray:
    """Block-diagonal embedding of an m x m matrix into 2^p dimensions."""
    m = s.shape[0]
    dim = 2**p
    if m > dim:
        raise ValueError(f"{m} components do not fit in {p} qubits")
    out = np.eye(dim, dtype=complex)
    out[:m, :m] = s
    return out


def _pauli_pattern(s: np.ndarray) -> str | None:
    """Name of the Pauli matrix when s = (1/sqrt2)[[I, P], [P, -I]], else None."""
    if s.shape != (4, 4):
        return None
    r = math.sqrt(2.0)
    eye = np.eye(2)
    if not (np.allclose(s[:2, :2] * r, eye, atol=1e-12) and np.allclose(s[2:, 2:] * r, -eye, atol=1e-12)):
        return None
    for name, p in PAULI.items():
        if np.allclose(s[:2, 2:] * r, p, atol=1e-12) and np.allclose(s[2:, :2] * r, p, atol=1e-12):
            return name
    return None


def build_rotation(s, layout: Layout) -> Circuit:
    """Apply a component-space change of basis.

    Identity yields an empty circuit.  The two-qubit block form with a Pauli
    off-diagonal is emitted as controlled-Pauli, Hadamard, controlled-Pauli;
    anything else is a single dense UNITARY on the component register.
    """
    s = np.asarray(s, dtype=complex)
    dim = s.shape[0]
    if s.ndim != 2 or s.shape[1] != dim:
        raise ValueError("rotation must be square")
    if np.max(np.abs(s.conj().T @ s - np.eye(dim))) > 1e-10:
        raise ValueError("rotation matrix is not unitary")
    p = layout.component_qubits
    full = embed(s, p)
    if np.allclose(full, np.eye(2**p), atol=1e-14):
        return Circuit(layout)
    reg = layout.component_register
    name = _pauli_pattern(full)
    if name is not None:
        cp = unitary((reg[1],), PAULI[name], [(reg[0], True)])
        return Circuit(layout, (cp, h(reg[0]), cp))
    return Circuit(layout, (unitary(reg, full),))


def build_step_circuit(step: Step, system, layout: Layout) -> Circuit:
    """Per axis: rotate into the eigenbasis, translate the scheduled fields, rotate back.

    ``system`` is a hyperbolic system or a sequence of per-axis transition matrices.
    """
    transitions = [d.transition for d in system.decomps] if hasattr(system, "decomps") else system
    parts: list[Circuit] = []
    for axis, comps in step.by_axis().items():
        s = np.asarray(transitions[axis - 1], dtype=complex)
        parts.append(build_rotation(s.conj().T, layout))
        parts.extend(build_translation(UpdateKey(c, axis), sign, layout) for c, sign in comps)
        parts.append(build_rotation(s, layout))
    return concat(layout, parts)


def register_layout(m: int, axis_qubits: Sequence[int]) -> Layout:
    p = max(0, math.ceil(math.log2(m))) if m > 1 else 0
    return Layout(p, tuple(axis_qubits))
