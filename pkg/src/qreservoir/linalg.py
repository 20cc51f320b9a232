"""Small dense symmetric eigenproblems, sign matrices and linear Riemann fans.

Matrices here are tiny (a handful of characteristic fields), so a cyclic
Jacobi sweep is fast enough and, more importantly, fully deterministic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_SWEEPS = 100
OFFDIAG_RTOL = 1e-14
ZERO_EIG_RTOL = 1e-12
SYMMETRY_ATOL = 1e-12


class ConvergenceError(RuntimeError):
    """Raised when the Jacobi iteration fails to reach its tolerance."""


@dataclass(frozen=True)
class SymMatrix:
    """Real symmetric m x m matrix.

    Inputs with asymmetry up to ``SYMMETRY_ATOL`` (relative to the largest
    entry) are symmetrized; anything worse is rejected.
    """

    entries: np.ndarray

    def __post_init__(self) -> None:
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(a))))
        asym = float(np.max(np.abs(a - a.T)))
        if asym > SYMMETRY_ATOL * scale:
            raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def m(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues ordered by magnitude with paired transition matrix columns.

    ``transition`` is real orthogonal when produced by :func:`eig_sym`.  A
    complex unitary transition may be supplied directly through
    :meth:`from_transition` for systems defined by their eigenbasis.
    """

    eigenvalues: np.ndarray
    transition: np.ndarray

    def __post_init__(self) -> None:
        lam = np.array(self.eigenvalues, dtype=float)
        s = np.array(self.transition)
        if not np.iscomplexobj(s) or np.allclose(s.imag, 0.0, atol=0.0):
            s = s.real.astype(float)
        m = lam.shape[0]
        if s.shape != (m, m):
            raise ValueError("transition shape does not match eigenvalue count")
        if np.any(np.diff(np.abs(lam)) < -1e-14 * max(1.0, float(np.max(np.abs(lam))))):
            raise ValueError("eigenvalues must be ordered by nondecreasing magnitude")
        gram = s.conj().T @ s
        if np.max(np.abs(gram - np.eye(m))) > 1e-10:
            raise ValueError("transition matrix is not unitary")
        lam.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "transition", s)

    @classmethod
    def from_transition(cls, eigenvalues, transition) -> "EigenDecomposition":
        return cls(np.asarray(eigenvalues, dtype=float), np.asarray(transition))

    @property
    def m(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.transition)

    def matrix(self) -> np.ndarray:
        """Reassemble S diag(lambda) S^H."""
        s = self.transition
        a = (s * self.eigenvalues) @ s.conj().T
        return a.real if self.is_real else a


@dataclass(frozen=True)
class SignMatrix:
    entries: np.ndarray


def _jacobi(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = a.shape[0]
    a = a.copy()
    v = np.eye(m)
    tol = OFFDIAG_RTOL * np.linalg.norm(a)
    for _ in range(MAX_SWEEPS):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol:
            return np.diag(a).copy(), v
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                diff = a[q, q] - a[p, p]
                if apq == 0.0:
                    continue
                if abs(apq) * 1e18 < abs(diff):
                    # tiny rotation angle; avoids overflow in theta
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0)) if theta != 0 else 1.0
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) plane rotation
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
    if off <= tol:
        return np.diag(a).copy(), v
    raise ConvergenceError(
        f"Jacobi did not converge in {MAX_SWEEPS} sweeps (off-diagonal norm {off:.3e})"
    )


def _fix_signs(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    for k in range(v.shape[1]):
        col = np.abs(v[:, k])
        # first entry within rounding of the column maximum
        lead = int(np.argmax(col >= col.max() - 1e-12))
        if v[lead, k] < 0:
            v[:, k] = -v[:, k]
    return v


def eig_sym(a: SymMatrix | np.ndarray) -> EigenDecomposition:
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi sweeps.

    Eigenvalues come out ordered by ``|lambda|`` ascending, ties by signed
    value ascending, exact duplicates in Jacobi order.
    """
    if not isinstance(a, SymMatrix):
        a = SymMatrix(a)
    lam, v = _jacobi(a.entries)
    order = sorted(range(lam.shape[0]), key=lambda k: (abs(lam[k]), lam[k]))
    lam = lam[order]
    v = _fix_signs(v[:, order])
    return EigenDecomposition(lam, v)


def sign_matrix(decomp: EigenDecomposition) -> SignMatrix:
    """V = S diag(sgn lambda) S^T; zero eigenvalues are rejected."""
    lam = decomp.eigenvalues
    scale = float(np.max(np.abs(lam))) if lam.size else 0.0
    if scale == 0.0 or np.any(np.abs(lam) <= ZERO_EIG_RTOL * scale):
        raise ValueError("sign matrix undefined: zero eigenvalue present")
    s = decomp.transition
    v = (s * np.sign(lam)) @ s.conj().T
    if decomp.is_real:
        v = v.real
    return SignMatrix(v)


def wave_order(decomp: EigenDecomposition) -> list[int]:
    """Field indices sorted by signed eigenvalue (stable)."""
    lam = decomp.eigenvalues
    return sorted(range(lam.shape[0]), key=lambda k: lam[k])


def riemann_intermediate(decomp: EigenDecomposition, u, w, k: int) -> np.ndarray:
    """k-th intermediate state of the linear Riemann fan between ``u`` and ``w``.

    Waves are crossed in order of increasing signed speed.  ``k == 0`` and
    ``k == m`` return the end states exactly.
    """
    m = decomp.m
    if not 0 <= k <= m:
        raise ValueError(f"k must lie in [0, {m}], got {k}")
    u = np.asarray(u)
    w = np.asarray(w)
    if k == 0:
        return u.copy()
    if k == m:
        return w.copy()
    s = decomp.transition
    beta = s.conj().T @ (w - u)
    idx = wave_order(decomp)[:k]
    out = u + s[:, idx] @ beta[idx]
    if decomp.is_real and not np.iscomplexobj(u) and not np.iscomplexobj(w):
        out = np.real(out)
    return out
