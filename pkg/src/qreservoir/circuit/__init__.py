"""Gate-level IR, circuit builders and decomposition to elementary gates."""

from .build import (
    DECREMENT,
    INCREMENT,
    build_rotation,
    build_shift,
    build_step_circuit,
    build_translation,
    register_layout,
)
from .decompose import clifford_t, decompose, is_elementary, two_level_gates
from .gates import Circuit, Gate, Layout
from .textio import dumps, loads

__all__ = [
    "Circuit",
    "DECREMENT",
    "Gate",
    "INCREMENT",
    "Layout",
    "build_rotation",
    "build_shift",
    "build_step_circuit",
    "build_translation",
    "clifford_t",
    "decompose",
    "dumps",
    "is_elementary",
    "loads",
    "register_layout",
    "two_level_gates",
]
