"""CFL-counter schedules: time steps plus the ordered (component, axis, sign) updates.

Each characteristic field ``k`` on axis ``i`` carries a counter that fills at
rate ``|lambda| / dx``.  A step lasts until the fullest counter reaches one;
every field that fills in that step is streamed by one cell and its counter
emptied.  The resulting lists fully determine the constant-coefficient
evolution, so they can be computed classically ahead of any circuit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

HIT_TOL = 1e-9
TIME_RTOL = 1e-12


@dataclass(frozen=True, order=True)
class UpdateKey:
    component: int
    axis: int = 1

    def __post_init__(self) -> None:
        if self.component < 1 or self.axis < 1:
            raise ValueError(f"component and axis are 1-based, got {self}")


@dataclass(frozen=True)
class Step:
    dt: float
    updates: tuple[UpdateKey, ...]
    signs: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.updates) != len(self.signs):
            raise ValueError("updates and signs differ in length")
        if len(set(self.updates)) != len(self.updates):
            raise ValueError("duplicate update within a step")
        if any(s not in (1, -1) for s in self.signs):
            raise ValueError("signs must be +1 or -1")

    def by_axis(self) -> dict[int, list[tuple[int, int]]]:
        """Group (component, sign) pairs by axis, axes ascending."""
        groups: dict[int, list[tuple[int, int]]] = {}
        for key, sign in zip(self.updates, self.signs):
            groups.setdefault(key.axis, []).append((key.component, sign))
        return dict(sorted(groups.items()))


@dataclass(frozen=True)
class Schedule:
    steps: tuple[Step, ...]

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    @property
    def total_time(self) -> float:
        return math.fsum(s.dt for s in self.steps)

    @property
    def updates(self) -> list[UpdateKey]:
        """Flattened update list across all steps."""
        return [k for s in self.steps for k in s.updates]

    @property
    def signs(self) -> list[int]:
        return [g for s in self.steps for g in s.signs]

    @property
    def n_updates(self) -> int:
        return sum(len(s.updates) for s in self.steps)

    @property
    def dts(self) -> list[float]:
        return [s.dt for s in self.steps]

    def to_text(self) -> str:
        lines = []
        for s in self.steps:
            ups = ",".join(
                f"({k.axis},{k.component},{'+' if g > 0 else '-'})"
                for k, g in zip(s.updates, s.signs)
            )
            lines.append(f"{s.dt!r};{ups}")
        return "".join(line + "\n" for line in lines)

    @classmethod
    def from_text(cls, text: str) -> "Schedule":
        steps = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                dt_s, _, rest = line.partition(";")
                dt = float(dt_s)
                updates, signs = [], []
                for item in filter(None, rest.replace(" ", "").split("),")):
                    axis, comp, sign = item.strip("()").split(",")
                    updates.append(UpdateKey(int(comp), int(axis)))
                    signs.append(1 if sign == "+" else -1 if sign == "-" else _bad(sign))
                steps.append(Step(dt, tuple(updates), tuple(signs)))
            except (ValueError, TypeError) as exc:
                raise ValueError(f"line {lineno}: cannot parse schedule entry {raw!r}: {exc}") from exc
        return cls(tuple(steps))


def _bad(token: str) -> int:
    raise ValueError(f"bad sign {token!r}")


def _update_order(key: UpdateKey, sign: int) -> tuple[int, int, int]:
    # left-moving fields first, then component, then axis
    return (0 if sign < 0 else 1, key.component, key.axis)


def build_schedule(eigenvalues, dx: float, T: float) -> Schedule:
    """Counter-driven schedule for a d x m array of signed eigenvalues.

    The magnitudes are the streaming speeds and the signs the streaming
    directions.  A 1-D input may be given as a flat length-m sequence.
    """
    lam = np.atleast_2d(np.asarray(eigenvalues, dtype=float))
    if lam.size == 0 or not np.all(np.isfinite(lam)):
        raise ValueError("eigenvalues must be a non-empty finite array")
    if dx <= 0:
        raise ValueError("dx must be positive")
    if T < 0:
        raise ValueError("T must be nonnegative")
    speeds = np.abs(lam)
    active = speeds > 0
    if not np.any(active):
        raise ValueError("all speeds are zero; nothing to schedule")
    d, m = lam.shape
    counters = np.zeros((d, m))
    rate = speeds / dx
    steps: list[Step] = []
    t = 0.0
    while t < T * (1.0 - TIME_RTOL):
        remaining = np.where(active, (1.0 - counters) / np.where(active, rate, 1.0), np.inf)
        dt = float(np.min(remaining))
        if t + dt >= T * (1.0 - TIME_RTOL):
            dt = T - t
        filled = counters + rate * dt
        hit = active & (filled >= 1.0 - HIT_TOL)
        counters = np.where(hit, 0.0, filled)
        pairs = [
            (UpdateKey(k + 1, i + 1), 1 if lam[i, k] > 0 else -1)
            for i in range(d)
            for k in range(m)
            if hit[i, k]
        ]
        pairs.sort(key=lambda p: _update_order(*p))
        steps.append(Step(dt, tuple(p[0] for p in pairs), tuple(p[1] for p in pairs)))
        t += dt
    return Schedule(tuple(steps))


@dataclass(frozen=True)
class NonUniformMesh:
    """Cells whose widths divide the local speed into an integer ratio."""

    nodes: np.ndarray
    speeds: np.ndarray
    ratios: np.ndarray
    x_end: float

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def n_cells(self) -> int:
        return self.widths.shape[0]

    @property
    def overshoot(self) -> float:
        return float(self.nodes[-1] - self.x_end)

    @property
    def constant_ratio(self) -> int | None:
        r = np.unique(self.ratios)
        return int(r[0]) if r.size == 1 else None


def build_nonuniform_mesh(
    speed: Callable[[float], float] | Iterable[float],
    x_start: float,
    x_end: float,
    ratio: int | None = None,
) -> NonUniformMesh:
    """Lay out cells left to right from the speed at each running left node.

    ``speed`` is either a function of position or an iterator yielding one
    sample per cell.  Without ``ratio`` the width is ``a / (1 + floor(a))``
    for ``a > 1`` and ``a`` otherwise; with an integer ``ratio`` every width
    is ``a / ratio``.
    """
    if x_end <= x_start:
        raise ValueError("x_end must exceed x_start")
    if ratio is not None and (int(ratio) != ratio or ratio < 1):
        raise ValueError("ratio must be a positive integer")
    sample = speed if callable(speed) else _sampler(iter(speed))
    nodes, speeds, ratios = [float(x_start)], [], []
    x = float(x_start)
    while x < x_end:
        a = float(sample(x))
        if not a > 0:
            raise ValueError(f"speed must be positive, got {a} at x={x}")
        if ratio is not None:
            ell = int(ratio)
        elif a > 1:
            ell = 1 + math.floor(a)
        else:
            ell = 1
        width = a / ell
        x = x + width
        nodes.append(x)
        speeds.append(a)
        ratios.append(ell)
    return NonUniformMesh(np.array(nodes), np.array(speeds), np.array(ratios, dtype=int), float(x_end))


def _sampler(it):
    def sample(_x: float) -> float:
        try:
            return next(it)
        except StopIteration:
            raise ValueError("speed samples exhausted before reaching x_end") from None

    return sample


def build_schedule_varvel(mesh: NonUniformMesh, T: float) -> Schedule:
    """Whole-field unit shifts every ``1/ratio`` time units."""
    ell = mesh.constant_ratio
    if ell is None:
        raise ValueError("mesh ratio is not constant; the space-independent schedule does not apply")
    if T < 0:
        raise ValueError("T must be nonnegative")
    n = math.floor(T * ell + 1e-9)
    key = (UpdateKey(1, 1),)
    return Schedule(tuple(Step(1.0 / ell, key, (1,)) for _ in range(n)))


def schedule_from_lists(dts: Sequence[float], groups: Sequence[Sequence[tuple[int, int, int]]]) -> Schedule:
    """Assemble a schedule from explicit (component, axis, sign) groups."""
    return Schedule(
        tuple(
            Step(float(dt), tuple(UpdateKey(c, a) for c, a, _ in g), tuple(s for _, _, s in g))
            for dt, g in zip(dts, groups)
        )
    )
