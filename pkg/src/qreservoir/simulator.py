"""Dense state-vector simulation with amplitude encoding of field data."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .circuit.build import build_step_circuit, register_layout
from .circuit.decompose import decompose
from .circuit.gates import Circuit, Gate, Layout
from .classical import FieldState, Grid, HyperbolicSystem, InitialDatum, project_initial
from .scheduler import Schedule

ANCILLA_ATOL = 1e-10


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    scale: float = 1.0

    def __post_init__(self) -> None:
        a = np.asarray(self.amplitudes, dtype=complex)
        width = int(round(math.log2(a.shape[0]))) if a.ndim == 1 and a.shape[0] else -1
        if width < 0 or 2**width != a.shape[0]:
            raise ValueError("amplitude count must be a power of two")
        object.__setattr__(self, "amplitudes", a)

    @property
    def width(self) -> int:
        return int(round(math.log2(self.amplitudes.shape[0])))

    def norm_squared(self) -> float:
        return math.fsum(np.abs(self.amplitudes) ** 2)

    @classmethod
    def basis(cls, width: int, index: int = 0) -> "StateVector":
        a = np.zeros(2**width, dtype=complex)
        a[index] = 1.0
        return cls(a)


def padded_components(m: int) -> int:
    return 2 ** register_layout(m, (1,)).component_qubits


def encode(state: FieldState) -> StateVector:
    """Normalize the component-major flattened field into amplitudes."""
    m_pad = padded_components(state.m)
    flat = np.zeros(m_pad * state.grid.n_cells, dtype=complex)
    flat[: state.values.size] = state.flat()
    scale = math.sqrt(math.fsum(np.abs(flat) ** 2))
    if scale == 0.0:
        raise ValueError("cannot encode the zero field")
    return StateVector(flat / scale, scale)


def decode(sv: StateVector, grid: Grid, m: int, real: bool = True) -> FieldState:
    """Undo the encoding; padded components must hold no amplitude."""
    n = m * grid.n_cells
    vals = sv.amplitudes[: grid.n_cells * padded_components(m)] * sv.scale
    tail = vals[n:]
    if tail.size and np.max(np.abs(tail)) > ANCILLA_ATOL * max(1.0, sv.scale):
        raise ValueError("padded components acquired amplitude")
    body = vals[:n].reshape((m,) + grid.shape)
    return FieldState(grid, body.real.copy() if real else body.copy())


def apply(sv: StateVector, g: Gate) -> StateVector:
    """Apply one gate; amplitudes whose controls do not match are untouched."""
    width = sv.width
    if max(g.qubits) >= width:
        raise ValueError(f"gate {g} acts outside a {width}-qubit register")
    psi = sv.amplitudes.reshape((2,) * width).copy()
    _apply_inplace(psi, g)
    return StateVector(psi.reshape(-1), sv.scale)


def _apply_inplace(psi: np.ndarray, g: Gate) -> None:
    width = psi.ndim
    index: list = [slice(None)] * width
    for q, on in g.controls:
        index[q] = 1 if on else 0
    sub = psi[tuple(index)]
    # axes of the targets inside the control-sliced view
    free = [q for q in range(width) if not isinstance(index[q], int)]
    axes = [free.index(t) for t in g.targets]
    k = len(axes)
    if g.kind == "X":
        t = axes[0]
        lo = [slice(None)] * sub.ndim
        hi = [slice(None)] * sub.ndim
        lo[t], hi[t] = 0, 1
        tmp = sub[tuple(lo)].copy()
        sub[tuple(lo)] = sub[tuple(hi)]
        sub[tuple(hi)] = tmp
    else:
        moved = np.moveaxis(sub, axes, range(k))
        shape = moved.shape
        out = g.target_matrix() @ moved.reshape(2**k, -1)
        sub[...] = np.moveaxis(out.reshape(shape), range(k), axes)
    psi[tuple(index)] = sub


def run_circuit(sv: StateVector, circ: Circuit) -> StateVector:
    """Run a circuit on the data register, borrowing and returning clean ancillas."""
    data = circ.layout.data_width
    if sv.width != data:
        raise ValueError(f"state has {sv.width} qubits, circuit data register has {data}")
    anc = circ.layout.ancillas
    psi = np.zeros((2**data, 2**anc), dtype=complex)
    psi[:, 0] = sv.amplitudes
    psi = psi.reshape((2,) * (data + anc))
    for g in circ.gates:
        _apply_inplace(psi, g)
    psi = psi.reshape(2**data, 2**anc)
    if anc and np.max(np.abs(psi[:, 1:]), initial=0.0) > ANCILLA_ATOL:
        raise RuntimeError("ancillas were not returned to |0>")
    return StateVector(psi[:, 0].copy(), sv.scale)


def circuit_unitary(circ: Circuit) -> np.ndarray:
    """Dense action on the data register (columns are images of basis states)."""
    dim = 2**circ.layout.data_width
    cols = [run_circuit(StateVector.basis(circ.layout.data_width, i), circ).amplitudes for i in range(dim)]
    return np.stack(cols, axis=1)


@dataclass(frozen=True)
class QuantumRun:
    state: StateVector
    field: FieldState
    schedule: Schedule
    gate_count: int
    norm_drift: float

    def __iter__(self):
        # allows ``sv, field = run_quantum(...)``
        return iter((self.state, self.field))


def step_circuits(sys: HyperbolicSystem, layout: Layout, schedule: Schedule, elementary: bool = False) -> Iterable[Circuit]:
    transitions = [d.transition for d in sys.decomps]
    cache: dict[tuple, Circuit] = {}
    for step in schedule.steps:
        if not step.updates:
            continue
        key = (step.updates, step.signs)
        if key not in cache:
            circ = build_step_circuit(step, transitions, layout)
            cache[key] = decompose(circ) if elementary else circ
        yield cache[key]


def run_quantum(
    sys: HyperbolicSystem,
    u0: InitialDatum | FieldState,
    grid: Grid,
    T: float,
    elementary: bool = False,
    schedule: Schedule | None = None,
) -> QuantumRun:
    """Encode, apply every step circuit of the schedule, decode."""
    state = u0 if isinstance(u0, FieldState) else project_initial(u0, grid, sys.m)
    if schedule is None:
        schedule = sys.schedule(grid.dx, T) if T > 0 else Schedule(())
    layout = register_layout(sys.m, grid.qubits)
    sv = encode(state)
    start = sv.norm_squared()
    drift = 0.0
    gates = 0
    for circ in step_circuits(sys, layout, schedule, elementary):
        sv = run_circuit(sv, circ)
        gates += len(circ)
        drift = max(drift, abs(sv.norm_squared() - start))
    real = sys.is_real and not np.iscomplexobj(state.values)
    out = decode(sv, grid, sys.m, real=real)
    return QuantumRun(sv, out, schedule, gates, drift)


def measure_observable(sv: StateVector, weights) -> float:
    """Expectation of a diagonal observable."""
    w = np.asarray(weights, dtype=float)
    if w.shape != sv.amplitudes.shape:
        raise ValueError("weights must match the number of amplitudes")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    return math.fsum(w * np.abs(sv.amplitudes) ** 2)
