"""Finite superpositions of multimode coherent states and their Fock expansions.

A :class:`SuperpositionState` stores terms ``kappa_i |alpha_i>`` where each
``alpha_i`` is a point in ``C^M``. Coherent states are not orthogonal, so norms
and ranks go through the Gram matrix of pairwise overlaps rather than through
the coefficients alone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammainc, gammaln

from .errors import (
    DegenerateStateError,
    EmptyStateError,
    FockOverflowError,
    ShapeMismatchError,
    SpecFormatError,
    TruncationError,
)

MERGE_TOL = 1e-10
DROP_TOL = 1e-12
TRUNCATION_TOL = 1e-12
# relative to (sum |kappa|)^2, below which kappa^H G kappa is treated as zero
POSITIVITY_TOL = 1e-13
# largest dense Fock tensor we are willing to allocate
MAX_FOCK_ENTRIES = 2**25
MAX_TRUNCATION = 4096


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SuperpositionState:
    """Sum of ``kappas[i] * |points[i]>`` over ``modes`` bosonic modes.

    Attributes:
        kappas: complex coefficients, shape ``(r,)``.
        points: coherent amplitudes, shape ``(r, modes)``.
    """

    kappas: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        kappas = np.array(self.kappas, dtype=complex).reshape(-1)
        points = np.array(self.points, dtype=complex)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        if points.ndim != 2 or points.shape[0] != kappas.shape[0]:
            raise ShapeMismatchError(
                f"{kappas.shape[0]} coefficients but points of shape {points.shape}"
            )
        if points.shape[1] < 1:
            raise ShapeMismatchError("a state needs at least one mode")
        if not (np.all(np.isfinite(kappas)) and np.all(np.isfinite(points))):
            raise ValueError("coefficients and amplitudes must be finite")
        object.__setattr__(self, "kappas", _readonly(kappas))
        object.__setattr__(self, "points", _readonly(points))

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[complex, Sequence[complex] | complex]]):
        terms = list(terms)
        if not terms:
            raise EmptyStateError("no terms given")
        kappas = [complex(k) for k, _ in terms]
        points = [np.atleast_1d(np.asarray(p, dtype=complex)) for _, p in terms]
        return cls(np.array(kappas), np.array(points))

    @classmethod
    def coherent(cls, *alphas: complex) -> "SuperpositionState":
        """Single product coherent state ``|alpha_1, ..., alpha_M>``."""
        return cls(np.array([1.0 + 0j]), np.array([alphas], dtype=complex))

    @property
    def modes(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.kappas.shape[0]

    def terms(self) -> list[tuple[complex, tuple[complex, ...]]]:
        return [(complex(k), tuple(complex(a) for a in p)) for k, p in zip(self.kappas, self.points)]

    def __repr__(self) -> str:
        return f"SuperpositionState(modes={self.modes}, terms={self.terms()})"


@dataclass(frozen=True, eq=False)
class FockArray:
    """Dense Fock-basis coefficients of an ``M``-mode state.

    ``truncation[j]`` is the exclusive photon-number cutoff of mode ``j``;
    ``tail_bound`` bounds the squared norm of everything that was cut away.
    """

    coefficients: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex)
        if c.ndim < 1:
            raise ShapeMismatchError("Fock coefficients need at least one mode axis")
        if self.tail_bound < 0 or not math.isfinite(self.tail_bound):
            raise ValueError(f"invalid tail bound {self.tail_bound}")
        object.__setattr__(self, "coefficients", _readonly(c))

    @property
    def modes(self) -> int:
        return self.coefficients.ndim

    @property
    def truncation(self) -> tuple[int, ...]:
        return tuple(self.coefficients.shape)

    def norm_squared(self) -> float:
        return float(np.vdot(self.coefficients, self.coefficients).real)

    def adequate(self, truncation_tol: float = TRUNCATION_TOL) -> bool:
        """True when the discarded weight is negligible relative to the kept weight."""
        return self.tail_bound <= truncation_tol * self.norm_squared()

    def tensor(self, other: "FockArray") -> "FockArray":
        c = np.multiply.outer(self.coefficients, other.coefficients)
        # ||a (x) b - a' (x) b'|| <= ||a|| ||b - b'|| + ||a - a'|| ||b'||
        na, nb = math.sqrt(self.norm_squared()), math.sqrt(other.norm_squared())
        ta, tb = math.sqrt(self.tail_bound), math.sqrt(other.tail_bound)
        tail = ((na + ta) * tb + ta * nb) ** 2
        return FockArray(c, tail)


@dataclass(frozen=True)
class PureEnsemble:
    """Explicit decomposition of a mixed state into weighted superposition states."""

    members: tuple[tuple[float, SuperpositionState], ...]

    def __post_init__(self):
        members = tuple((float(w), s) for w, s in self.members)
        if not members:
            raise EmptyStateError("ensemble has no members")
        for w, _ in members:
            if not 0.0 < w <= 1.0:
                raise ValueError(f"ensemble weight {w} outside (0, 1]")
        total = sum(w for w, _ in members)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"ensemble weights sum to {total!r}, not 1")
        object.__setattr__(self, "members", members)


def coherent_overlap(a: complex, b: complex) -> complex:
    """Inner product ``<a|b>`` of two single-mode coherent states.

    Evaluated as ``exp(-|a - b|^2 / 2 + i Im(conj(a) b))``: the same exponent
    without cancellation, so the modulus never exceeds 1.
    """
    a, b = complex(a), complex(b)
    return complex(np.exp(-0.5 * abs(a - b) ** 2 + 1j * (a.conjugate() * b).imag))


def gram_matrix(s: SuperpositionState) -> np.ndarray:
    """Matrix of overlaps ``G[i, j] = <alpha_i|alpha_j>`` (product over modes)."""
    p = s.points
    dist = np.sum(np.abs(p[:, None, :] - p[None, :, :]) ** 2, axis=2)
    g = np.exp(-0.5 * dist + 1j * (p.conj() @ p.T).imag)
    np.fill_diagonal(g, 1.0)
    return g


def norm(s: SuperpositionState) -> float:
    """Norm from the Gram quadratic form.

    The absolute error is about ``eps * (sum |kappa|)^2`` in the squared norm, so
    heavily cancelling superpositions (difference quotients at small steps)
    lose relative accuracy; compute fidelities from Fock arrays there.
    """
    k = s.kappas
    n2 = float(np.real(k.conj() @ gram_matrix(s) @ k))
    scale = float(np.sum(np.abs(k))) ** 2
    if n2 <= POSITIVITY_TOL * scale:
        raise DegenerateStateError(
            f"squared norm {n2:.3e} is at round-off level for coefficient scale {scale:.3e}; "
            "the points are numerically dependent, try a coarser merge tolerance"
        )
    return math.sqrt(n2)


def normalize(s: SuperpositionState) -> SuperpositionState:
    return SuperpositionState(s.kappas / norm(s), s.points)


def _lex_order(points: np.ndarray) -> np.ndarray:
    # np.lexsort treats the last key as primary
    keys = []
    for m in range(points.shape[1]):
        keys.extend([points[:, m].real, points[:, m].imag])
    return np.lexsort(keys[::-1])


def canonicalize(
    s: SuperpositionState, merge_tol: float = MERGE_TOL, drop_tol: float = DROP_TOL
) -> SuperpositionState:
    """Merge coincident points, drop vanishing coefficients, sort terms.

    Points closer than ``merge_tol`` in max-norm over modes are merged
    transitively; the lexicographically first point of each cluster is kept and
    the coefficients are summed.

    Raises:
        EmptyStateError: every coefficient cancelled or fell below ``drop_tol``.
    """
    if merge_tol <= 0 or drop_tol <= 0:
        raise ValueError("merge_tol and drop_tol must be positive")
    order = _lex_order(s.points)
    points = s.points[order]
    kappas = s.kappas[order]
    r = len(kappas)

    parent = list(range(r))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    if r > 1:
        dist = np.max(np.abs(points[:, None, :] - points[None, :, :]), axis=2)
        for i, j in zip(*np.nonzero(np.triu(dist <= merge_tol, k=1))):
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)

    merged: dict[int, complex] = {}
    for i in range(r):
        root = find(i)
        merged[root] = merged.get(root, 0j) + kappas[i]
    keep = [i for i in sorted(merged) if abs(merged[i]) > drop_tol]
    if not keep:
        raise EmptyStateError("all terms cancelled during canonicalization")
    return SuperpositionState(np.array([merged[i] for i in keep]), points[keep])


def tensor_product(a: SuperpositionState, b: SuperpositionState) -> SuperpositionState:
    kappas = np.multiply.outer(a.kappas, b.kappas).reshape(-1)
    ra, rb = len(a), len(b)
    points = np.concatenate(
        [np.repeat(a.points, rb, axis=0), np.tile(b.points, (ra, 1))], axis=1
    )
    return SuperpositionState(kappas, points)


def poisson_tail(alpha: complex, cutoff: int) -> float:
    """Squared norm of ``|alpha>`` carried by photon numbers ``>= cutoff``."""
    lam = abs(alpha) ** 2
    if cutoff <= 0:
        return 1.0
    if lam == 0.0:
        return 0.0
    return float(gammainc(cutoff, lam))


def coherent_fock_vector(alpha: complex, cutoff: int) -> np.ndarray:
    """``exp(-|a|^2/2) a^n / sqrt(n!)`` for ``n < cutoff``, evaluated in log space."""
    alpha = complex(alpha)
    n = np.arange(cutoff)
    out = np.zeros(cutoff, dtype=complex)
    if alpha == 0:
        out[0] = 1.0
        return out
    r = abs(alpha)
    logmag = -0.5 * r * r + n * math.log(r) - 0.5 * gammaln(n + 1)
    out[:] = np.exp(logmag + 1j * n * np.angle(alpha))
    return out


def default_truncation(s: SuperpositionState) -> tuple[int, ...]:
    amax = np.max(np.abs(s.points), axis=0)
    return tuple(int(math.ceil(a * a + 6 * a + 12)) for a in amax)


def _check_size(truncation: Sequence[int]) -> None:
    size = math.prod(truncation)
    if size > MAX_FOCK_ENTRIES:
        raise FockOverflowError(
            f"Fock tensor with cutoffs {tuple(truncation)} has {size} entries "
            f"(limit {MAX_FOCK_ENTRIES})"
        )


def to_fock(s: SuperpositionState, truncation: Sequence[int] | int | None = None) -> FockArray:
    """Expand ``s`` in the truncated Fock basis.

    ``truncation`` may be a single cutoff for every mode, one cutoff per mode,
    or ``None`` for :func:`default_truncation`. The returned ``tail_bound`` is
    ``(sum_i |kappa_i| sqrt(sum_m tail_m(alpha_i)))**2`` with exact Poisson tails.
    """
    if truncation is None:
        truncation = default_truncation(s)
    elif isinstance(truncation, (int, np.integer)):
        truncation = (int(truncation),) * s.modes
    truncation = tuple(int(t) for t in truncation)
    if len(truncation) == 1:
        truncation = truncation * s.modes
    if len(truncation) != s.modes:
        raise ShapeMismatchError(f"{len(truncation)} cutoffs for a {s.modes}-mode state")
    if any(t < 1 for t in truncation):
        raise TruncationError(f"cutoffs must be >= 1, got {truncation}")
    _check_size(truncation)

    r = len(s)
    acc = s.kappas
    tails = np.zeros(r)
    for m, cut in enumerate(truncation):
        vecs = np.array([coherent_fock_vector(a, cut) for a in s.points[:, m]])
        acc = acc[..., None] * vecs.reshape(r, *([1] * m), cut)
        tails += [poisson_tail(a, cut) for a in s.points[:, m]]
    coeffs = acc.sum(axis=0)
    if not np.all(np.isfinite(coeffs)):
        raise FockOverflowError("non-finite Fock coefficients")
    tail = float(np.sum(np.abs(s.kappas) * np.sqrt(tails))) ** 2
    return FockArray(coeffs, tail)


def auto_fock(s: SuperpositionState, truncation_tol: float = TRUNCATION_TOL) -> FockArray:
    """:func:`to_fock` with the default cutoffs, grown until the tail is adequate."""
    truncation = default_truncation(s)
    while True:
        f = to_fock(s, truncation)
        if f.adequate(truncation_tol):
            return f
        truncation = tuple(t + max(4, t // 4) for t in truncation)
        if max(truncation) > MAX_TRUNCATION:
            raise TruncationError(
                f"tail bound {f.tail_bound:.3e} still above tolerance at cutoffs {f.truncation}"
            )


def fock_inner(a: FockArray, b: FockArray) -> complex:
    if a.coefficients.shape != b.coefficients.shape:
        raise ShapeMismatchError(
            f"truncations differ: {a.coefficients.shape} vs {b.coefficients.shape}"
        )
    return complex(np.vdot(a.coefficients, b.coefficients))


def fidelity(a: FockArray, b: FockArray) -> float:
    """``|<a|b>|^2 / (<a|a><b|b>)``."""
    return abs(fock_inner(a, b)) ** 2 / (a.norm_squared() * b.norm_squared())


# --- state spec files -------------------------------------------------------

_STATE_FIELDS = {"modes", "terms"}
_TERM_FIELDS = {"kappa", "point"}


def _pair(x, what: str) -> complex:
    if not (isinstance(x, (list, tuple)) and len(x) == 2):
        raise SpecFormatError(f"{what} must be a [re, im] pair, got {x!r}")
    try:
        return complex(float(x[0]), float(x[1]))
    except (TypeError, ValueError) as e:
        raise SpecFormatError(f"{what} is not numeric: {x!r}") from e


def state_from_dict(d: dict) -> SuperpositionState:
    if not isinstance(d, dict):
        raise SpecFormatError("state spec must be a mapping")
    unknown = set(d) - _STATE_FIELDS
    if unknown:
        raise SpecFormatError(f"unknown state fields: {sorted(unknown)}")
    if set(d) != _STATE_FIELDS:
        raise SpecFormatError(f"state spec needs fields {sorted(_STATE_FIELDS)}")
    modes = d["modes"]
    if not isinstance(modes, int) or isinstance(modes, bool) or modes < 1:
        raise SpecFormatError(f"modes must be a positive integer, got {modes!r}")
    if not isinstance(d["terms"], list) or not d["terms"]:
        raise SpecFormatError("terms must be a non-empty list")
    kappas, points = [], []
    for i, t in enumerate(d["terms"]):
        if not isinstance(t, dict):
            raise SpecFormatError(f"term {i} must be a mapping")
        unknown = set(t) - _TERM_FIELDS
        if unknown:
            raise SpecFormatError(f"unknown fields in term {i}: {sorted(unknown)}")
        if set(t) != _TERM_FIELDS:
            raise SpecFormatError(f"term {i} needs fields {sorted(_TERM_FIELDS)}")
        kappas.append(_pair(t["kappa"], f"term {i} kappa"))
        pt = t["point"]
        if not isinstance(pt, list) or len(pt) != modes:
            raise SpecFormatError(f"term {i} point must list {modes} amplitudes")
        points.append([_pair(a, f"term {i} amplitude") for a in pt])
    try:
        return SuperpositionState(np.array(kappas), np.array(points).reshape(len(kappas), modes))
    except ValueError as e:
        raise SpecFormatError(str(e)) from e


def state_to_dict(s: SuperpositionState) -> dict:
    return {
        "modes": s.modes,
        "terms": [
            {
                "kappa": [k.real, k.imag],
                "point": [[a.real, a.imag] for a in p],
            }
            for k, p in s.terms()
        ],
    }


def load_state(path: str | Path) -> SuperpositionState:
    text = Path(path).read_text()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecFormatError(f"{path}: {e}") from e
    return state_from_dict(d)


def dump_state(s: SuperpositionState, path: str | Path) -> None:
    Path(path).write_text(json.dumps(state_to_dict(s), indent=2) + "\n")
