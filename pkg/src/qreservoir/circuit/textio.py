"""Line-oriented circuit serialization.

Header::

    circuit components=<p> axes=<n1,n2,...> ancillas=<a>

then one gate per line::

    X 5 +0 -1            # target 5, control on |1> of qubit 0, on |0> of qubit 1
    PHASE 2 phi=0.7853981633974483
    UNITARY 0,1 m=re,im,re,im,...   (row-major)
"""
from __future__ import annotations

import numpy as np

from .gates import Circuit, Gate, Layout


def _fmt(v: float) -> str:
    return repr(float(v))


def gate_line(g: Gate) -> str:
    parts = [g.kind, ",".join(str(t) for t in g.targets)]
    parts += [("+" if on else "-") + str(q) for q, on in g.controls]
    if g.kind == "PHASE":
        parts.append("phi=" + _fmt(g.phase))
    if g.kind == "UNITARY":
        flat = g.matrix.reshape(-1)
        parts.append("m=" + ",".join(f"{_fmt(z.real)},{_fmt(z.imag)}" for z in flat))
    return " ".join(parts)


def dumps(circ: Circuit) -> str:
    lay = circ.layout
    head = (
        f"circuit components={lay.component_qubits} "
        f"axes={','.join(str(n) for n in lay.axis_qubits)} ancillas={lay.ancillas}"
    )
    return "\n".join([head] + [gate_line(g) for g in circ.gates]) + "\n"


def loads(text: str) -> Circuit:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("circuit "):
        raise ValueError("line 1: missing circuit header")
    fields = dict(tok.split("=", 1) for tok in lines[0].split()[1:])
    layout = Layout(int(fields["components"]), tuple(int(n) for n in fields["axes"].split(",")), int(fields["ancillas"]))
    gates = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            gates.append(_parse_gate(line))
        except (ValueError, KeyError, IndexError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
    return Circuit(layout, tuple(gates))


def _parse_gate(line: str) -> Gate:
    toks = line.split()
    kind, targets = toks[0], tuple(int(t) for t in toks[1].split(","))
    controls, angle, matrix = [], None, None
    for tok in toks[2:]:
        if tok[0] in "+-":
            controls.append((int(tok[1:]), tok[0] == "+"))
        elif tok.startswith("phi="):
            angle = float(tok[4:])
        elif tok.startswith("m="):
            nums = np.array([float(v) for v in tok[2:].split(",")])
            dim = 2 ** len(targets)
            matrix = (nums[0::2] + 1j * nums[1::2]).reshape(dim, dim)
        else:
            raise ValueError(f"unexpected token {tok!r}")
    return Gate(kind, targets, tuple(controls), angle, matrix)
