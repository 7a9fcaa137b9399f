"""Passive linear-optics unitaries acting on coherent superpositions.

A splitter ``T`` maps a product coherent state ``|alpha>`` to ``|T alpha>``, so on
a :class:`~csrank.core.SuperpositionState` it only moves the points. For states
that are only available in the Fock basis, :func:`apply_splitter_fock` applies
the same unitary through ``a_j^dag -> sum_k T[k, j] a_k^dag``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    DROP_TOL,
    MERGE_TOL,
    FockArray,
    PureEnsemble,
    SuperpositionState,
    _check_size,
    canonicalize,
)
from .errors import NonUnitaryError, ShapeMismatchError, SpecFormatError

UNITARITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SplitterUnitary:
    entries: np.ndarray
    unitarity_defect: float

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, other: "SplitterUnitary") -> "SplitterUnitary":
        return from_matrix(self.entries @ other.entries)


def unitarity_defect(t: np.ndarray) -> float:
    return float(np.max(np.abs(t.conj().T @ t - np.eye(t.shape[0]))))


def from_matrix(entries, tol: float = UNITARITY_TOL) -> SplitterUnitary:
    """Validate a square matrix as a splitter unitary.

    Raises:
        NonUnitaryError: when ``max |T^dag T - I|`` exceeds ``tol``.
    """
    t = np.array(entries, dtype=complex)
    if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] < 1:
        raise ShapeMismatchError(f"splitter matrix must be square, got shape {t.shape}")
    defect = unitarity_defect(t)
    if defect > tol:
        raise NonUnitaryError(f"unitarity defect {defect:.3e} exceeds {tol:.1e}")
    t.setflags(write=False)
    return SplitterUnitary(t, defect)


def balanced_bs() -> SplitterUnitary:
    """50:50 beam splitter with ``(alpha, 0) -> (alpha, alpha)/sqrt(2)``.

    The second column is fixed to ``(-1, 1)/sqrt(2)``, so a general input maps
    as ``(alpha, beta) -> ((alpha - beta), (alpha + beta))/sqrt(2)``.
    """
    s = 1 / math.sqrt(2)
    return from_matrix([[s, -s], [s, s]])


def dft_splitter(n: int) -> SplitterUnitary:
    """``T[j, k] = exp(2 pi i j k / n) / sqrt(n)``; every first-column entry is nonzero."""
    if n < 2:
        raise ValueError(f"an N-splitter needs n >= 2, got {n}")
    jk = np.outer(np.arange(n), np.arange(n)) % n
    return from_matrix(np.exp(2j * np.pi * jk / n) / math.sqrt(n))


def apply_splitter(
    t: SplitterUnitary,
    s: SuperpositionState,
    merge_tol: float = MERGE_TOL,
    drop_tol: float = DROP_TOL,
) -> SuperpositionState:
    if t.size != s.modes:
        raise ShapeMismatchError(f"{t.size}-mode splitter applied to a {s.modes}-mode state")
    out = SuperpositionState(s.kappas, s.points @ t.entries.T)
    # unitaries cannot make distinct points coincide; this only reorders
    return canonicalize(out, merge_tol, drop_tol)


def extend_with_vacuum(s: SuperpositionState, total_modes: int) -> SuperpositionState:
    if total_modes < s.modes:
        raise ShapeMismatchError(f"cannot shrink {s.modes} modes to {total_modes}")
    pad = np.zeros((len(s), total_modes - s.modes), dtype=complex)
    return SuperpositionState(s.kappas, np.concatenate([s.points, pad], axis=1))


def extend_with_coherent(s: SuperpositionState, ancillas) -> SuperpositionState:
    """Append fixed coherent ancilla modes ``|beta_1, ...>`` to every term."""
    anc = np.broadcast_to(np.asarray(ancillas, dtype=complex), (len(s), len(ancillas)))
    return SuperpositionState(s.kappas, np.concatenate([s.points, anc], axis=1))


def apply_splitter_ensemble(t: SplitterUnitary, e: PureEnsemble, **kw) -> PureEnsemble:
    return PureEnsemble(tuple((w, apply_splitter(t, s, **kw)) for w, s in e.members))


def _raise_photon(poly: np.ndarray, column: np.ndarray, out_axes: int) -> np.ndarray:
    """Apply ``sum_k column[k] a_k^dag`` to a Fock tensor (photons kept below the cutoff)."""
    res = np.zeros_like(poly)
    n = poly.shape[0]
    sq = np.sqrt(np.arange(1, n))
    for k in range(out_axes):
        if column[k] == 0:
            continue
        shape = [1] * out_axes
        shape[k] = n - 1
        src = [slice(None)] * out_axes
        dst = [slice(None)] * out_axes
        src[k] = slice(0, n - 1)
        dst[k] = slice(1, n)
        res[tuple(dst)] += column[k] * sq.reshape(shape) * poly[tuple(src)]
    return res


def apply_splitter_fock(t: SplitterUnitary, f: FockArray) -> FockArray:
    """Apply a splitter to a truncated Fock-basis state.

    Photon number is conserved, so the output cutoff in every mode is one more
    than the largest total photon number present in the input; nothing is lost
    and ``tail_bound`` carries over unchanged.
    """
    if t.size != f.modes:
        raise ShapeMismatchError(f"{t.size}-mode splitter applied to a {f.modes}-mode state")
    c = f.coefficients
    m = f.modes
    support = np.argwhere(np.abs(c) > 0)
    nmax = int(support.sum(axis=1).max()) if len(support) else 0
    cut = nmax + 1
    _check_size((cut,) * m)
    out = np.zeros((cut,) * m, dtype=complex)
    vac = np.zeros((cut,) * m, dtype=complex)
    vac[(0,) * m] = 1.0
    cols = [t.entries[:, j] for j in range(m)]

    def walk(mode: int, poly: np.ndarray, block: np.ndarray):
        nonlocal out
        if mode == m:
            out += block * poly
            return
        cur = poly
        for n in range(block.shape[0]):
            if n > 0:
                cur = _raise_photon(cur, cols[mode], m) / math.sqrt(n)
            sub = block[n]
            if np.any(sub != 0):
                walk(mode + 1, cur, sub)

    walk(0, vac, c)
    return FockArray(out, f.tail_bound)


# --- unitary spec files -----------------------------------------------------


def unitary_from_dict(d: dict, tol: float = UNITARITY_TOL) -> SplitterUnitary:
    if not isinstance(d, dict) or set(d) != {"size", "entries"}:
        raise SpecFormatError("unitary spec needs exactly the fields 'size' and 'entries'")
    n = d["size"]
    rows = d["entries"]
    if not isinstance(n, int) or n < 1 or not isinstance(rows, list) or len(rows) != n:
        raise SpecFormatError(f"entries must be a {n}x{n} nested list of [re, im] pairs")
    mat = np.zeros((n, n), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise SpecFormatError(f"row {i} must have {n} entries")
        for j, x in enumerate(row):
            if not (isinstance(x, list) and len(x) == 2):
                raise SpecFormatError(f"entry ({i}, {j}) must be a [re, im] pair")
            mat[i, j] = complex(float(x[0]), float(x[1]))
    return from_matrix(mat, tol)


def unitary_to_dict(t: SplitterUnitary) -> dict:
    return {
        "size": t.size,
        "entries": [[[z.real, z.imag] for z in row] for row in t.entries.tolist()],
    }


def load_unitary(path: str | Path) -> SplitterUnitary:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise SpecFormatError(f"{path}: {e}") from e
    return unitary_from_dict(d)
