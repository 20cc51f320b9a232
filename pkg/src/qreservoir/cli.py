"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 numerical tolerance failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import classical, resources, scenario
from .circuit import decompose, dumps
from .circuit.build import build_step_circuit, register_layout
from .circuit.gates import concat
from .scheduler import Schedule
from .simulator import run_quantum

log = logging.getLogger("qreservoir")

EXIT_OK, EXIT_CONFIG, EXIT_TOLERANCE = 0, 1, 2
COMPARE_TOL = 1e-8


def _emit(text: str, out: Path | None, name: str) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text, encoding="utf-8")
    log.info("wrote %s", out / name)


def _schedule(sc: scenario.Scenario) -> Schedule:
    return sc.system.schedule(sc.grid.dx, sc.T) if sc.T > 0 else Schedule(())


def _warn_boundary(state: classical.FieldState, label: str) -> None:
    if classical.boundary_touched(state, atol=1e-300):
        log.warning("%s: nonzero values in a boundary cell; the compact-support assumption may not hold", label)


def cmd_schedule(sc, args) -> int:
    _emit(_schedule(sc).to_text(), args.out, "schedule.txt")
    return EXIT_OK


def _initial(sc):
    return classical.project_initial(sc.initial, sc.grid, sc.system.m)


def cmd_solve_classical(sc, args) -> int:
    out = classical.run_classical(sc.system, _initial(sc), sc.grid, sc.T, _schedule(sc))
    _warn_boundary(out, "solve-classical")
    _emit(classical.to_csv(out), args.out, "classical.csv")
    return EXIT_OK


def cmd_solve_quantum(sc, args) -> int:
    run = run_quantum(sc.system, _initial(sc), sc.grid, sc.T, elementary=args.decompose or sc.decompose, schedule=_schedule(sc))
    _warn_boundary(run.field, "solve-quantum")
    _emit(classical.to_csv(run.field), args.out, "quantum.csv")
    if args.dump_state or sc.dump_state:
        amps = run.state.amplitudes
        text = "basis_index,re,im\n" + "".join(f"{i},{a.real!r},{a.imag!r}\n" for i, a in enumerate(amps))
        _emit(text, args.out, "state.csv")
    return EXIT_OK


def cmd_compare(sc, args) -> int:
    init = _initial(sc)
    sched = _schedule(sc)
    ref = classical.run_classical(sc.system, init, sc.grid, sc.T, sched)
    run = run_quantum(sc.system, init, sc.grid, sc.T, elementary=args.decompose or sc.decompose, schedule=sched)
    diff = run.field.values - ref.values
    report = {
        "quantum_vs_classical": {
            "max": float(np.max(np.abs(diff))),
            "l1": classical.l1_error(run.field, ref),
            "l2": classical.l2_norm(diff),
        },
        "norm_drift": run.norm_drift,
        "steps": sched.n_steps,
        "updates": sched.n_updates,
    }
    if sc.system.is_real and sc.T > 0:
        upwind = classical.run_upwind(sc.system, init, sc.T)
        report["reservoir_vs_upwind"] = {
            "max": float(np.max(np.abs(upwind.values - ref.values))),
            "l1": classical.l1_error(upwind, ref),
        }
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out, "compare.json")
    if report["quantum_vs_classical"]["max"] > COMPARE_TOL:
        log.error("quantum and classical results differ by %.3e", report["quantum_vs_classical"]["max"])
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_resources(sc, args) -> int:
    sched = _schedule(sc)
    rep = resources.report_run(sc.system, sc.grid.qubits, sched)
    ct = resources.report_run(sc.system, sc.grid.qubits, sched, toffoli_view=True)
    sizes = [2, 4, 6, 8]
    shifts = resources.shift_counts(sizes)
    doc = json.loads(rep.to_json())
    doc["clifford_t"] = {"total": ct.total, "depth": ct.depth, "counts": ct.counts, "categories": ct.categories}
    doc["shift_scaling"] = {
        "sizes": sizes,
        "gates": [shifts[n] for n in sizes],
        "gates_per_n2": [shifts[n] / n**2 for n in sizes],
        "loglog_slope": resources.loglog_slope(sizes[1:], [shifts[n] for n in sizes[1:]]),
    }
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out, "resources.json")
    return EXIT_OK


def cmd_emit_circuit(sc, args) -> int:
    sched = _schedule(sc)
    steps = [s for s in sched.steps if s.updates]
    lo, hi = _range(args.steps, len(steps))
    layout = register_layout(sc.system.m, sc.grid.qubits)
    circ = concat(layout, (build_step_circuit(s, sc.system, layout) for s in steps[lo:hi]))
    if args.decompose or sc.decompose:
        circ = decompose(circ)
    _emit(dumps(circ), args.out, "circuit.txt")
    return EXIT_OK


def _range(text: str | None, n: int) -> tuple[int, int]:
    if not text:
        return 0, n
    a, _, b = text.partition(":")
    try:
        lo = int(a) if a else 0
        hi = int(b) if b else n
    except ValueError:
        raise scenario.ScenarioError(f"step range {text!r} is not lo:hi") from None
    if not 0 <= lo <= hi <= n:
        raise scenario.ScenarioError(f"step range {text!r} outside 0..{n}")
    return lo, hi


COMMANDS = {
    "schedule": cmd_schedule,
    "solve-classical": cmd_solve_classical,
    "solve-quantum": cmd_solve_quantum,
    "compare": cmd_compare,
    "resources": cmd_resources,
    "emit-circuit": cmd_emit_circuit,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qreservoir", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--scenario", type=Path, help="scenario JSON file")
        src.add_argument("--preset", choices=sorted(scenario.SCENARIO_PRESETS), help="built-in scenario")
        p.add_argument("--out", type=Path, default=None, help="output directory (default: stdout)")
        p.add_argument("--decompose", action="store_true", help="lower circuits to elementary gates")
        p.add_argument("--dump-state", action="store_true", help="also write raw amplitudes")
        p.add_argument("--T", dest="final_time", type=float, default=None, help="override final time")
        if name == "emit-circuit":
            p.add_argument("--steps", default=None, help="step range lo:hi (non-empty steps)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        doc = json.loads(args.scenario.read_text(encoding="utf-8")) if args.scenario else {"preset": args.preset}
    except json.JSONDecodeError as exc:
        log.error("%s:%d:%d: %s", args.scenario, exc.lineno, exc.colno, exc.msg)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("cannot read scenario: %s", exc)
        return EXIT_CONFIG
    if args.final_time is not None:
        doc["T"] = args.final_time
    try:
        sc = scenario.build(doc)
        return COMMANDS[args.command](sc, args)
    except scenario.ScenarioError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
