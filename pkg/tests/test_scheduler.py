import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qreservoir.scheduler import (
    Schedule,
    UpdateKey,
    build_nonuniform_mesh,
    build_schedule,
    build_schedule_varvel,
)

R2 = math.sqrt(2)
DIRAC_EIGS = [[-1, -1, R2, R2], [-2, -2, 2 * R2, 2 * R2], [-4, -4, 4 * R2, 4 * R2]]


def event_oracle(eigs, dx, T, merge_tol=1e-9):
    """Independent schedule: every counter hits at j*dx/|lambda|; merge coincident times.

    Returns a list of (time, set of (component, axis, sign)).
    """
    events = []
    lam = np.atleast_2d(eigs)
    for i, row in enumerate(lam, start=1):
        for k, l in enumerate(row, start=1):
            if l == 0:
                continue
            period = dx / abs(l)
            j = 1
            while j * period <= T * (1 + 1e-12):
                events.append((j * period, (k, i, 1 if l > 0 else -1)))
                j += 1
    events.sort()
    merged = []
    for t, key in events:
        if merged and abs(t - merged[-1][0]) <= merge_tol * dx / np.max(np.abs(lam)):
            merged[-1][1].add(key)
        else:
            merged.append((t, {key}))
    return merged


def keys(schedule):
    return [(k.component, k.axis) for k in schedule.updates]


def test_three_field_example_first_steps():
    sched = build_schedule([0.1, 1.0, 1.1], 1e-2, 0.1)
    assert [float(f"{dt:.3g}") for dt in sched.dts[:4]] == [9.09e-3, 9.09e-4, 8.18e-3, 1.82e-3]
    assert all(s > 0 for s in sched.signs)


def test_left_and_right_movers_pattern():
    sched = build_schedule([1.0, -3.0], 1e-2, 0.1)
    assert [k.component for k in sched.updates] == [2, 2, 2, 1] * 10
    assert sched.signs == [-1, -1, -1, 1] * 10


def test_dirac_list_and_signs():
    sched = build_schedule(DIRAC_EIGS, 1e-2, 1e-2)
    expected = [
        (3, 3), (4, 3), (1, 3), (2, 3), (3, 2), (3, 3), (4, 2), (4, 3), (1, 2), (1, 3),
        (2, 2), (2, 3), (3, 3), (4, 3), (3, 1), (3, 2), (3, 3), (4, 1), (4, 2), (4, 3),
        (1, 3), (2, 3), (3, 3), (4, 3), (1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3),
    ]
    assert keys(sched) == expected
    assert "".join("+" if s > 0 else "-" for s in sched.signs) == "++--++++----++++++++--++------"


def test_dirac_steps_match_event_oracle():
    sched = build_schedule(DIRAC_EIGS, 1e-2, 1e-2)
    events = event_oracle(DIRAC_EIGS, 1e-2, 1e-2)
    times = np.cumsum(sched.dts)
    assert len(events) == sched.n_steps
    for (t, ks), t_sched, step in zip(events, times, sched.steps):
        assert t_sched == pytest.approx(t, rel=1e-12)
        assert {(k.component, k.axis, s) for k, s in zip(step.updates, step.signs)} == ks
    # hand values for the first six steps: y/z hits at multiples of dx/(4 sqrt2), dx/4, dx/(2 sqrt2)
    first = [0.01 / (4 * R2), 0.01 / 4, 0.01 / (2 * R2), 0.01 / 2, 0.03 / (4 * R2), 0.01 / R2]
    assert times[:6] == pytest.approx(first, rel=1e-12)


def test_commensurable_speeds_period_two():
    sched = build_schedule([1.0, 2.0], 1.0, 4.0)
    groups = [[k.component for k in s.updates] for s in sched.steps]
    assert groups == [[2], [1, 2]] * 4
    assert sched.dts == pytest.approx([0.5] * 8)


def test_final_step_truncated_with_empty_update():
    sched = build_schedule([1.0], 1.0, 2.5)
    assert sched.dts == pytest.approx([1.0, 1.0, 0.5])
    assert sched.steps[-1].updates == ()
    assert sched.total_time == pytest.approx(2.5, rel=1e-14)


def test_zero_speed_never_scheduled_and_all_zero_rejected():
    sched = build_schedule([0.0, 1.0], 1.0, 3.0)
    assert {k.component for k in sched.updates} == {2}
    with pytest.raises(ValueError):
        build_schedule([0.0, 0.0], 1.0, 1.0)


def test_zero_time_is_empty():
    assert build_schedule([1.0], 0.1, 0.0).n_steps == 0


@settings(max_examples=150, deadline=None)
@given(
    st.lists(st.floats(0.05, 5.0), min_size=1, max_size=3),
    st.lists(st.sampled_from([-1, 1]), min_size=3, max_size=3),
    st.floats(0.01, 1.0),
    st.integers(1, 60),
)
def test_time_conservation_and_update_counts(speeds, signs, dx, n_cells):
    lam = [s * g for s, g in zip(speeds, signs)]
    T = n_cells * dx / max(speeds) * 0.73
    sched = build_schedule(lam, dx, T)
    assert sched.total_time == pytest.approx(T, rel=1e-10)
    assert all(dt > 0 for dt in sched.dts)
    oracle = event_oracle(lam, dx, T)
    for k, s in enumerate(speeds, start=1):
        count = sum(1 for key in sched.updates if key.component == k)
        expected = sum(1 for _, ks in oracle for c, _, _ in ks if c == k)
        assert count == expected
        assert abs(count - s * T / dx) < 1.0 + 1e-6


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.1, 3.0), min_size=1, max_size=4), st.floats(0.01, 2.0))
def test_deterministic_and_round_trips(speeds, T):
    a = build_schedule(speeds, 0.1, T)
    b = build_schedule(speeds, 0.1, T)
    assert a.to_text() == b.to_text()
    assert Schedule.from_text(a.to_text()) == a


def test_schedule_text_format():
    sched = build_schedule([1.0, -3.0], 1e-2, 1e-2)
    lines = sched.to_text().splitlines()
    assert lines[0].endswith(";(1,2,-)")
    assert lines[-1].endswith(";(1,2,-),(1,1,+)")
    with pytest.raises(ValueError, match="line 1"):
        Schedule.from_text("0.1;(1,1,*)\n")


def test_update_key_is_one_based():
    with pytest.raises(ValueError):
        UpdateKey(0, 1)


def test_mesh_slow_speed_cells():
    mesh = build_nonuniform_mesh(lambda x: 0.5, 0.0, 1.0)
    assert mesh.widths == pytest.approx([0.5, 0.5])
    assert list(mesh.ratios) == [1, 1]


def test_mesh_fast_speed_cells():
    mesh = build_nonuniform_mesh(lambda x: 2.5, 0.0, 5.0)
    assert mesh.widths[0] == pytest.approx(2.5 / 3)
    assert set(mesh.ratios) == {3}
    assert np.allclose(mesh.speeds / mesh.widths, 3.0)


def test_mesh_random_speeds_width_equals_speed():
    rng = np.random.default_rng(3)
    samples = rng.uniform(0.0, 1.0, size=1000)
    mesh = build_nonuniform_mesh(iter(samples), 0.0, 70.0, ratio=1)
    n = mesh.n_cells
    assert np.array_equal(mesh.widths, np.diff(mesh.nodes))
    assert mesh.widths == pytest.approx(samples[:n], rel=1e-12)
    assert mesh.nodes[-1] >= 70.0 > mesh.nodes[-2]
    assert mesh.constant_ratio == 1


def test_mesh_rejects_nonpositive_speed():
    with pytest.raises(ValueError):
        build_nonuniform_mesh(lambda x: 0.0, 0.0, 1.0)


def test_varvel_schedules():
    unit = build_nonuniform_mesh(lambda x: 0.5, 0.0, 1.0)
    sched = build_schedule_varvel(unit, 400)
    assert sched.n_steps == 400 and set(sched.dts) == {1.0}
    assert build_schedule_varvel(unit, 0).n_steps == 0
    quarter = build_nonuniform_mesh(lambda x: 1.0, 0.0, 1.0, ratio=4)
    assert build_schedule_varvel(quarter, 1.0).dts == [0.25] * 4


def test_varvel_rejects_mixed_ratios():
    mesh = build_nonuniform_mesh(lambda x: 0.5 if x < 1 else 2.5, 0.0, 3.0)
    assert mesh.constant_ratio is None
    with pytest.raises(ValueError):
        build_schedule_varvel(mesh, 1.0)
