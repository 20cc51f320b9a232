"""Classical finite-volume reference solvers on periodic power-of-two grids.

Values are stored as arrays of shape ``(m, N_1, ..., N_d)``; flattening in
C order gives the component-major, axis-1-most-significant layout used by
the quantum register.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .linalg import EigenDecomposition, SymMatrix, eig_sym, riemann_intermediate, sign_matrix
from .scheduler import HIT_TOL, NonUniformMesh, Schedule, Step, UpdateKey, build_schedule, build_schedule_varvel

InitialDatum = Callable[..., Sequence[np.ndarray] | np.ndarray]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(4)


@dataclass(frozen=True)
class Grid:
    qubits: tuple[int, ...]
    dx: float
    origin: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        qubits = tuple(int(n) for n in self.qubits)
        if not 1 <= len(qubits) <= 3:
            raise ValueError("grid dimension must be 1, 2 or 3")
        if any(n < 1 for n in qubits):
            raise ValueError("each axis needs at least one qubit")
        if not self.dx > 0:
            raise ValueError("dx must be positive")
        origin = tuple(float(o) for o in self.origin) if self.origin is not None else (0.0,) * len(qubits)
        if len(origin) != len(qubits):
            raise ValueError("origin length does not match grid dimension")
        object.__setattr__(self, "qubits", qubits)
        object.__setattr__(self, "origin", origin)

    @property
    def d(self) -> int:
        return len(self.qubits)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(2**n for n in self.qubits)

    @property
    def n_cells(self) -> int:
        return math.prod(self.shape)

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(n * self.dx for n in self.shape)

    def centers(self, axis: int) -> np.ndarray:
        """Cell centers along a 1-based axis."""
        n = self.shape[axis - 1]
        return self.origin[axis - 1] + (np.arange(n) + 0.5) * self.dx


@dataclass(frozen=True)
class FieldState:
    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values)
        if v.ndim != self.grid.d + 1 or v.shape[1:] != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field has non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def with_values(self, values: np.ndarray) -> "FieldState":
        return FieldState(self.grid, values)


@dataclass(frozen=True)
class HyperbolicSystem:
    """Constant-coefficient system du/dt + sum_i A_i du/dx_i = 0."""

    matrices: tuple[np.ndarray, ...]
    decomps: tuple[EigenDecomposition, ...]

    def __post_init__(self) -> None:
        if not self.matrices or len(self.matrices) != len(self.decomps):
            raise ValueError("need one decomposition per matrix")
        m = self.decomps[0].m
        for a, dec in zip(self.matrices, self.decomps):
            if a.shape != (m, m) or dec.m != m:
                raise ValueError("all matrices must share the component count")
            scale = max(1.0, float(np.max(np.abs(a))))
            if np.max(np.abs(dec.matrix() - a)) > 1e-10 * scale:
                raise ValueError("eigendecomposition does not reconstruct its matrix")

    @classmethod
    def from_matrices(cls, matrices: Sequence) -> "HyperbolicSystem":
        syms = [m if isinstance(m, SymMatrix) else SymMatrix(m) for m in matrices]
        return cls(tuple(s.entries for s in syms), tuple(eig_sym(s) for s in syms))

    @classmethod
    def from_transition(cls, eigenvalues: Sequence[Sequence[float]], transitions: Sequence) -> "HyperbolicSystem":
        """Build A_i = S_i diag(lambda_i) S_i^H from a prescribed eigenbasis."""
        decs = tuple(EigenDecomposition.from_transition(l, s) for l, s in zip(eigenvalues, transitions))
        return cls(tuple(d.matrix() for d in decs), decs)

    @property
    def d(self) -> int:
        return len(self.matrices)

    @property
    def m(self) -> int:
        return self.decomps[0].m

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([d.eigenvalues for d in self.decomps])

    @property
    def is_real(self) -> bool:
        return all(d.is_real for d in self.decomps)

    def schedule(self, dx: float, T: float) -> Schedule:
        return build_schedule(self.eigenvalues, dx, T)


def _eval_components(u0: InitialDatum, coords: Sequence[np.ndarray], m: int) -> np.ndarray:
    out = u0(*coords)
    arr = np.stack([np.broadcast_to(np.asarray(c), coords[0].shape) for c in out]) if isinstance(out, (list, tuple)) else np.asarray(out)
    if arr.shape[0] != m:
        raise ValueError(f"initial datum returned {arr.shape[0]} components, expected {m}")
    return np.broadcast_to(arr, (m,) + coords[0].shape)


def project_initial(u0: InitialDatum, grid: Grid, m: int) -> FieldState:
    """Cell averages by tensorized 4-point Gauss-Legendre quadrature."""
    axes = []
    for i in range(1, grid.d + 1):
        c = grid.centers(i)
        axes.append((c[:, None] + 0.5 * grid.dx * _GL_NODES[None, :]).reshape(-1))
    coords = np.meshgrid(*axes, indexing="ij")
    vals = _eval_components(u0, coords, m)
    split = (m,) + tuple(x for n in grid.shape for x in (n, 4))
    vals = vals.reshape(split)
    w = 0.5 * _GL_WEIGHTS
    for i in range(grid.d):
        vals = np.tensordot(vals, w, axes=([2 + i], [0]))
    return FieldState(grid, np.ascontiguousarray(vals))


def _rotate(values: np.ndarray, s: np.ndarray) -> np.ndarray:
    # apply a component-space matrix at every grid point
    return np.tensordot(s, values, axes=([1], [0]))


def _maybe_real(values: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(values) and np.max(np.abs(values.imag), initial=0.0) == 0.0:
        return values.real
    return values


def step_upwind(state: FieldState, sys: HyperbolicSystem, axis: int, dt: float) -> FieldState:
    """First-order upwind flux update along one axis, periodic wrap."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    dx = state.grid.dx
    cfl = dt * float(np.max(np.abs(sys.eigenvalues[axis - 1]))) / dx
    if cfl > 1.0 + 1e-12:
        raise ValueError(f"CFL number {cfl:.6f} exceeds 1")
    if dt == 0:
        return state
    a = sys.matrices[axis - 1]
    v = sign_matrix(sys.decomps[axis - 1]).entries
    eye = np.eye(sys.m)
    u = state.values
    ax = axis
    fwd = np.roll(u, -1, axis=ax) - u
    bwd = u - np.roll(u, 1, axis=ax)
    flux = _rotate(fwd, a @ (eye - v)) + _rotate(bwd, a @ (eye + v))
    return state.with_values(_maybe_real(u - dt / (2 * dx) * flux))


def _shift(values: np.ndarray, components: Sequence[tuple[int, int]], axis: int) -> np.ndarray:
    out = values.copy()
    for comp, sign in components:
        out[comp - 1] = np.roll(values[comp - 1], sign, axis=axis - 1)
    return out


def step_streaming(state: FieldState, sys: HyperbolicSystem, key: UpdateKey, sign: int) -> FieldState:
    """Stream one characteristic field by one cell along ``key.axis``."""
    return apply_step(state, sys, Step(0.0, (key,), (sign,)))


def apply_step(state: FieldState, sys: HyperbolicSystem, step: Step) -> FieldState:
    """Apply every update of a schedule step, grouped by ascending axis."""
    u = state.values
    for axis, comps in step.by_axis().items():
        s = sys.decomps[axis - 1].transition
        if np.array_equal(s, np.eye(sys.m)):
            u = _shift(u, comps, axis)
        else:
            w = _rotate(u, s.conj().T)
            w = _shift(w, comps, axis)
            u = _rotate(w, s)
    return state.with_values(_maybe_real(u))


def run_classical(
    sys: HyperbolicSystem,
    u0: InitialDatum | FieldState,
    grid: Grid,
    T: float,
    schedule: Schedule | None = None,
) -> FieldState:
    """Streaming reservoir solve from the projected initial data up to time T."""
    state = u0 if isinstance(u0, FieldState) else project_initial(u0, grid, sys.m)
    if sys.d != grid.d:
        raise ValueError("system and grid dimensions differ")
    if schedule is None:
        schedule = sys.schedule(grid.dx, T) if T > 0 else Schedule(())
    for step in schedule.steps:
        if step.updates:
            state = apply_step(state, sys, step)
    return state


def run_upwind(sys: HyperbolicSystem, state: FieldState, T: float, cfl: float = 1.0) -> FieldState:
    """Upwind solve with dt = cfl * dx / max|lambda|, axes split in order, last step truncated."""
    lam_max = float(np.max(np.abs(sys.eigenvalues)))
    dt_full = cfl * state.grid.dx / lam_max
    t = 0.0
    while t < T * (1 - 1e-12):
        dt = min(dt_full, T - t)
        for axis in range(1, sys.d + 1):
            state = step_upwind(state, sys, axis, dt)
        t += dt
    return state


@dataclass
class ReservoirBank:
    """Flux-difference reservoirs, one m-vector per field and interface.

    ``reservoirs[k][:, j]`` lives on the interface between cells j and j+1.
    """

    reservoirs: np.ndarray
    counters: np.ndarray

    @classmethod
    def empty(cls, m: int, n_cells: int, dtype=float) -> "ReservoirBank":
        return cls(np.zeros((m, m, n_cells), dtype=dtype), np.zeros(m))


def step_reservoir_full_1d(
    state: FieldState, sys: HyperbolicSystem, bank: ReservoirBank, dt: float
) -> tuple[FieldState, list[int]]:
    """One step of the reservoir scheme with explicit Riemann-fan reservoirs.

    Returns the new state and the 0-based fields flushed in this step.  The
    bank is updated in place.
    """
    if sys.d != 1:
        raise ValueError("full reservoir scheme is implemented for one dimension")
    dec = sys.decomps[0]
    a = sys.matrices[0]
    lam = dec.eigenvalues
    dx = state.grid.dx
    u = state.values
    right = np.roll(u, -1, axis=1)
    waves = [riemann_intermediate(dec, u, right, r) for r in range(sys.m + 1)]
    rank = {k: r for r, k in enumerate(_signed_order(lam), start=1)}
    new = u.copy()
    flushed = []
    for k in range(sys.m):
        if lam[k] == 0:
            continue
        jump = waves[rank[k]] - waves[rank[k] - 1]
        bank.reservoirs[k] -= dt / dx * (a @ jump)
        filled = bank.counters[k] + abs(lam[k]) * dt / dx
        if filled >= 1.0 - HIT_TOL:
            # right-movers feed cell j from interface j-1/2, left-movers from j+1/2
            inflow = np.roll(bank.reservoirs[k], 1, axis=1) if lam[k] > 0 else bank.reservoirs[k]
            new = new + inflow
            bank.reservoirs[k] = 0.0
            bank.counters[k] = 0.0
            flushed.append(k)
        else:
            bank.counters[k] = filled
    return state.with_values(_maybe_real(new)), flushed


def _signed_order(lam: np.ndarray) -> list[int]:
    return sorted(range(lam.shape[0]), key=lambda k: lam[k])


def run_reservoir_full_1d(sys: HyperbolicSystem, state: FieldState, schedule: Schedule) -> FieldState:
    """Drive the full reservoir scheme with the time steps of ``schedule``."""
    bank = ReservoirBank.empty(sys.m, state.grid.shape[0], dtype=complex if not sys.is_real else float)
    for step in schedule.steps:
        state, flushed = step_reservoir_full_1d(state, sys, bank, step.dt)
        expected = sorted(k.component - 1 for k in step.updates)
        if sorted(flushed) != expected:
            raise RuntimeError(f"reservoir flushes {flushed} disagree with schedule {expected}")
    return state


@dataclass(frozen=True)
class VarvelResult:
    """Shifted cell values on the mesh and their continuation past its right end."""

    values: np.ndarray
    lattice: np.ndarray
    n_steps: int


def project_nonuniform(u0: Callable[[np.ndarray], np.ndarray], mesh: NonUniformMesh) -> np.ndarray:
    left = mesh.nodes[:-1]
    width = mesh.widths
    pts = left[:, None] + 0.5 * width[:, None] * (1.0 + _GL_NODES[None, :])
    return np.asarray(u0(pts), dtype=float) @ (0.5 * _GL_WEIGHTS)


def run_varvel(mesh: NonUniformMesh, u0: Callable[[np.ndarray], np.ndarray], T: float) -> VarvelResult:
    """Variable-speed transport on a constant-ratio mesh: one cell per 1/ratio.

    The mesh keeps zero inflow on the left.  ``lattice`` extends the mesh by
    one cell per step on the right so no mass leaves the register.
    """
    schedule = build_schedule_varvel(mesh, T)
    u = project_nonuniform(u0, mesh)
    n = schedule.n_steps
    lattice = np.zeros(mesh.n_cells + n)
    lattice[:mesh.n_cells] = u
    for _ in schedule.steps:
        lattice[1:] = lattice[:-1].copy()
        lattice[0] = 0.0
    return VarvelResult(lattice[:mesh.n_cells].copy(), lattice, n)


def step_upwind_varvel(values: np.ndarray, speeds: np.ndarray, dx: float, dt: float) -> np.ndarray:
    """Upwind step for positive interface speeds on a uniform mesh, zero inflow.

    ``speeds[j]`` is the speed on the left interface of cell j.
    """
    speeds = np.asarray(speeds, dtype=float)
    if np.any(speeds < 0):
        raise ValueError("speeds must be nonnegative")
    if dt * float(np.max(speeds, initial=0.0)) / dx > 1.0 + 1e-12:
        raise ValueError("CFL number exceeds 1")
    v = np.asarray(values, dtype=float)
    left = np.concatenate(([0.0], v[:-1]))
    return v - speeds * dt / dx * (v - left)


def l1_error(state: FieldState, reference: FieldState) -> float:
    if state.values.shape != reference.values.shape:
        raise ValueError("state shapes differ")
    return float(state.grid.dx**state.grid.d * np.sum(np.abs(state.values - reference.values)))


def l2_norm(state: FieldState | np.ndarray) -> float:
    v = state.values if isinstance(state, FieldState) else np.asarray(state)
    return float(np.sqrt(math.fsum(np.abs(v.reshape(-1)) ** 2)))


def exact_translation(u0: InitialDatum, grid: Grid, sys: HyperbolicSystem, T: float) -> FieldState:
    """Cell averages of the exact solution of a diagonal system, periodic in the domain."""
    if any(not np.allclose(d.transition, np.eye(sys.m)) for d in sys.decomps):
        raise ValueError("exact translation needs a diagonal system")
    lam = sys.eigenvalues
    out = np.empty((sys.m,) + grid.shape)
    for k in range(sys.m):
        def shifted(*xs, k=k):
            moved = [
                grid.origin[i] + np.mod(x - lam[i, k] * T - grid.origin[i], grid.lengths[i])
                for i, x in enumerate(xs)
            ]
            return _eval_components(u0, moved, sys.m)
        out[k] = project_initial(shifted, grid, sys.m).values[k]
    return FieldState(grid, out)


def spectral_solution(state: FieldState, sys: HyperbolicSystem, T: float) -> FieldState:
    """Evolve periodic cell data exactly in Fourier space.

    Each wavevector evolves by exp(-i T sum_i kappa_i A_i); this equals the
    exact evolution of the underlying band-limited interpolant.
    """
    grid = state.grid
    uhat = np.fft.fftn(state.values, axes=tuple(range(1, grid.d + 1)))
    kappa = np.meshgrid(
        *[2 * np.pi * np.fft.fftfreq(n, d=grid.dx) for n in grid.shape], indexing="ij"
    )
    flat = uhat.reshape(sys.m, -1)
    gen = sum(k.reshape(-1)[:, None, None] * a[None] for k, a in zip(kappa, sys.matrices))
    lam, vec = np.linalg.eigh(gen)
    coef = np.einsum("kji,jk->ki", vec.conj(), flat)
    out = np.einsum("kij,kj->ik", vec, np.exp(-1j * T * lam) * coef)
    u = np.fft.ifftn(out.reshape(uhat.shape), axes=tuple(range(1, grid.d + 1)))
    return state.with_values(u.real if sys.is_real and not np.iscomplexobj(state.values) else u)


def to_csv(state: FieldState) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    complex_values = np.iscomplexobj(state.values)
    header = [f"axis{i}" for i in range(1, state.grid.d + 1)] + ["component", "value"]
    writer.writerow(header + (["imag"] if complex_values else []))
    for k in range(state.m):
        for idx in np.ndindex(*state.grid.shape):
            v = state.values[(k,) + idx]
            row = list(idx) + [k + 1, repr(float(v.real))]
            if complex_values:
                row.append(repr(float(v.imag)))
            writer.writerow(row)
    return buf.getvalue()


def from_csv(text: str, grid: Grid) -> FieldState:
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    d = grid.d
    if header[:d] != [f"axis{i}" for i in range(1, d + 1)] or header[d:d + 2] != ["component", "value"]:
        raise ValueError(f"unexpected CSV header {header}")
    has_imag = len(header) > d + 2
    m = max(int(r[d]) for r in body)
    values = np.zeros((m,) + grid.shape, dtype=complex if has_imag else float)
    for r in body:
        idx = (int(r[d]) - 1,) + tuple(int(x) for x in r[:d])
        values[idx] = float(r[d + 1]) + (1j * float(r[d + 2]) if has_imag else 0.0)
    return FieldState(grid, values)


def boundary_touched(state: FieldState, atol: float = 0.0) -> bool:
    """True when any first or last cell along any axis holds a nonzero value."""
    v = np.abs(state.values)
    for axis in range(1, state.grid.d + 1):
        if np.max(np.take(v, [0, -1], axis=axis)) > atol:
            return True
    return False
