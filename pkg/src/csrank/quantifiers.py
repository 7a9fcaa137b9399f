"""Rank-based quantifiers: superposition count, Gram rank, Schmidt ranks.

All rank decisions are relative: a singular value (or Gram eigenvalue) counts
when it exceeds ``rank_rel_tol`` times the largest one. Reports keep the full
spectra so the threshold can be audited after the fact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .core import (
    DROP_TOL,
    MERGE_TOL,
    TRUNCATION_TOL,
    FockArray,
    PureEnsemble,
    SuperpositionState,
    auto_fock,
    canonicalize,
    coherent_fock_vector,
    gram_matrix,
    normalize,
    poisson_tail,
    to_fock,
)
from .errors import BipartitionError, ShapeMismatchError, TruncationError

# below this pairwise distance double precision may under-report a rank
ILL_CONDITIONED_SEPARATION = 1e-4
FULL_BIPARTITION_LIMIT = 10
VANDERMONDE_CROSSCHECK_MAX = 6
VANDERMONDE_CROSSCHECK_RTOL = 1e-8
# Gram spectra come from the Fock factor when it has at most this many entries
GRAM_FACTOR_MAX_ENTRIES = 2**22
GRAM_FACTOR_TAIL = 1e-30


@dataclass(frozen=True)
class Tolerances:
    merge_tol: float = MERGE_TOL
    drop_tol: float = DROP_TOL
    rank_rel_tol: float = 1e-8
    truncation_tol: float = TRUNCATION_TOL

    def __post_init__(self):
        for name in ("merge_tol", "drop_tol", "rank_rel_tol", "truncation_tol"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
        if self.rank_rel_tol >= 1:
            raise ValueError(f"rank_rel_tol must be < 1, got {self.rank_rel_tol}")


DEFAULT_TOL = Tolerances()


class VandermondeCertificate(NamedTuple):
    value: complex
    passed: bool
    direct: complex | None = None


class BoundCheck(NamedTuple):
    R: int
    schmidt: int
    holds: bool


@dataclass
class RankReport:
    nonclassicality_rank: int
    gram_eigenvalues: list[float]
    gram_rank: int
    schmidt_spectra: dict[str, list[float]] = field(default_factory=dict)
    schmidt_ranks: dict[str, int] = field(default_factory=dict)
    vandermonde_certificate: VandermondeCertificate | None = None
    local_certificates: dict[int, VandermondeCertificate] = field(default_factory=dict)
    tolerances: Tolerances = DEFAULT_TOL
    truncation_used: tuple[int, ...] = ()
    tail_bound: float = 0.0
    warnings: list[str] = field(default_factory=list)

    @property
    def ghz_certified(self) -> bool:
        """All bipartition Schmidt ranks equal the superposition count."""
        return bool(self.schmidt_ranks) and all(
            r == self.nonclassicality_rank for r in self.schmidt_ranks.values()
        )

    @property
    def min_schmidt_rank(self) -> int | None:
        return min(self.schmidt_ranks.values()) if self.schmidt_ranks else None


def nonclassicality_rank(s: SuperpositionState, tol: Tolerances = DEFAULT_TOL) -> int:
    """Number of distinct coherent components after canonicalization.

    For multimode states this is the multimode count ``R``.
    """
    return len(canonicalize(s, tol.merge_tol, tol.drop_tol))


def _factor_cutoff(amplitudes: np.ndarray) -> int:
    a = float(np.max(np.abs(amplitudes)))
    if a == 0.0:
        return 1
    n = math.ceil(a * a + 6 * a + 12)
    while poisson_tail(a, n) > GRAM_FACTOR_TAIL:
        n += max(4, n // 4)
    return n


def gram_factor(s: SuperpositionState) -> np.ndarray | None:
    """Matrix whose rows are the truncated Fock vectors of the product coherent states.

    ``A A^dag`` reproduces the Gram matrix up to Poisson tails below
    ``GRAM_FACTOR_TAIL``. Returns ``None`` when ``A`` would exceed
    ``GRAM_FACTOR_MAX_ENTRIES`` entries.
    """
    cuts = [_factor_cutoff(s.points[:, m]) for m in range(s.modes)]
    if len(s) * math.prod(cuts) > GRAM_FACTOR_MAX_ENTRIES:
        return None
    rows = []
    for p in s.points:
        v = coherent_fock_vector(p[0], cuts[0])
        for m in range(1, s.modes):
            v = np.multiply.outer(v, coherent_fock_vector(p[m], cuts[m])).ravel()
        rows.append(v)
    return np.array(rows)


def gram_eigenvalues(s: SuperpositionState) -> np.ndarray:
    """Eigenvalues of the Gram matrix, descending.

    When the Fock factor fits, they are the squared singular values of
    :func:`gram_factor`; the small ones are then accurate down to about
    ``eps^2 * lambda_max`` rather than ``eps * lambda_max`` for a direct
    eigensolve, which matters for points closer than ~1e-7.
    """
    a = gram_factor(s)
    if a is None:
        return np.linalg.eigvalsh(gram_matrix(s))[::-1]
    return np.linalg.svd(a, compute_uv=False) ** 2


def relative_rank(values: Sequence[float], rel_tol: float) -> int:
    values = np.asarray(values, dtype=float)
    if values.size == 0 or values[0] <= 0:
        return 0
    return int(np.count_nonzero(values / values[0] > rel_tol))


def gram_rank(s: SuperpositionState, tol: Tolerances = DEFAULT_TOL) -> int:
    return relative_rank(gram_eigenvalues(s), tol.rank_rel_tol)


def min_separation(points: np.ndarray) -> float:
    """Smallest pairwise max-norm distance between rows of ``points``; inf for one row."""
    points = np.asarray(points, dtype=complex)
    if points.ndim == 1:
        points = points[:, None]
    if len(points) < 2:
        return math.inf
    d = np.max(np.abs(points[:, None, :] - points[None, :, :]), axis=2)
    return float(np.min(d[np.triu_indices(len(points), k=1)]))


def vandermonde_matrix(points: Sequence[complex]) -> np.ndarray:
    """``V[j, n] = alpha_j ** n`` for ``n < len(points)``."""
    p = np.asarray(points, dtype=complex)
    return np.vander(p, N=len(p), increasing=True)


def coherent_fock_matrix(points: Sequence[complex]) -> np.ndarray:
    """Fock coefficients ``M[j, n] = exp(-|a_j|^2/2) a_j^n / sqrt(n!)`` truncated at ``n < r``."""
    p = np.asarray(points, dtype=complex)
    r = len(p)
    d1 = np.sqrt([math.factorial(n) for n in range(r)])
    d2 = np.exp(-0.5 * np.abs(p) ** 2)
    return d2[:, None] * vandermonde_matrix(p) / d1[None, :]


def vandermonde_product(points: Sequence[complex]) -> complex:
    """Closed form ``prod_{i<j} (a_i - a_j)``."""
    p = [complex(x) for x in points]
    out = 1 + 0j
    for i, j in itertools.combinations(range(len(p)), 2):
        out *= p[i] - p[j]
    return out


def _lex_sorted(points: Sequence[complex]) -> list[complex]:
    return sorted((complex(x) for x in points), key=lambda z: (z.real, z.imag))


def vandermonde_certificate(
    points: Sequence[complex], merge_tol: float = MERGE_TOL
) -> VandermondeCertificate:
    """Certify linear independence of single-mode coherent states.

    Points are put in lexicographic order first. The product passes when the
    geometric mean of the pairwise distances exceeds ``merge_tol``. For up to
    six points it is also compared against an LU determinant of the
    Vandermonde matrix; ``det V`` carries the sign ``(-1)^(r(r-1)/2)`` relative
    to the product, and a mismatch fails the certificate.
    """
    p = _lex_sorted(points)
    r = len(p)
    value = vandermonde_product(p)
    pairs = r * (r - 1) // 2
    if pairs == 0:
        passed = True
    else:
        logs = [abs(p[i] - p[j]) for i, j in itertools.combinations(range(r), 2)]
        passed = min(logs) > 0 and sum(map(math.log, logs)) > pairs * math.log(merge_tol)
    direct = None
    if r <= VANDERMONDE_CROSSCHECK_MAX:
        direct = complex(np.linalg.det(vandermonde_matrix(p))) if r else 1 + 0j
        expected = value * (-1) ** pairs
        scale = max(abs(value), abs(direct))
        if scale > 0 and abs(direct - expected) > VANDERMONDE_CROSSCHECK_RTOL * scale:
            passed = False
    return VandermondeCertificate(value, bool(passed), direct)


# --- Schmidt decomposition ---------------------------------------------------


def _check_bipartition(modes: int, part: Sequence[int]) -> tuple[int, ...]:
    part = tuple(sorted(set(int(m) for m in part)))
    if not part or len(part) >= modes or part[0] < 0 or part[-1] >= modes:
        raise BipartitionError(f"{part} is not a proper nonempty subset of {modes} modes")
    return part


def bipartition_label(part: Sequence[int], modes: int) -> str:
    rest = [m for m in range(modes) if m not in part]
    return ",".join(map(str, part)) + "|" + ",".join(map(str, rest))


def bipartitions(modes: int) -> list[tuple[int, ...]]:
    """Nontrivial cuts, one per complementary pair.

    Up to ``FULL_BIPARTITION_LIMIT`` modes every cut is listed (``2^(N-1) - 1`` of
    them); beyond that only single mode versus rest.
    """
    if modes < 2:
        return []
    if modes > FULL_BIPARTITION_LIMIT:
        return [(m,) for m in range(modes)]
    out = []
    for size in range(1, modes // 2 + 1):
        for part in itertools.combinations(range(modes), size):
            comp = tuple(m for m in range(modes) if m not in part)
            # an even split shows up twice; keep the side holding mode 0
            if len(part) == len(comp) and 0 not in part:
                continue
            out.append(part)
    return out


def schmidt_spectrum(
    f: FockArray,
    bipartition: Sequence[int] = (0,),
    tol: Tolerances = DEFAULT_TOL,
    check_truncation: bool = True,
) -> np.ndarray:
    """Normalized singular values of the coefficient tensor across a cut.

    Rows are indexed by the modes in ``bipartition``, columns by the rest.

    Raises:
        TruncationError: ``f`` is not adequately truncated.
        BipartitionError: the cut is empty or the whole system.
    """
    part = _check_bipartition(f.modes, bipartition)
    if check_truncation and not f.adequate(tol.truncation_tol):
        raise TruncationError(
            f"tail bound {f.tail_bound:.3e} too large for cutoffs {f.truncation}"
        )
    rest = tuple(m for m in range(f.modes) if m not in part)
    c = np.transpose(f.coefficients, part + rest)
    rows = math.prod(f.truncation[m] for m in part)
    sv = np.linalg.svd(c.reshape(rows, -1), compute_uv=False)
    total = math.sqrt(float(np.sum(sv**2)))
    if total == 0:
        raise ShapeMismatchError("zero Fock array has no Schmidt spectrum")
    return sv / total


def schmidt_rank(
    f: FockArray,
    bipartition: Sequence[int] = (0,),
    tol: Tolerances = DEFAULT_TOL,
    check_truncation: bool = True,
) -> int:
    return relative_rank(schmidt_spectrum(f, bipartition, tol, check_truncation), tol.rank_rel_tol)


def _fock_of(s: SuperpositionState, tol: Tolerances, truncation) -> FockArray:
    if truncation is None:
        return auto_fock(s, tol.truncation_tol)
    return to_fock(s, truncation)


def analyze(
    s: SuperpositionState,
    tol: Tolerances = DEFAULT_TOL,
    truncation=None,
    with_schmidt: bool = True,
) -> RankReport:
    """Full rank report for a superposition state (normalized internally)."""
    c = normalize(canonicalize(s, tol.merge_tol, tol.drop_tol))
    ev = gram_eigenvalues(c)
    report = RankReport(
        nonclassicality_rank=len(c),
        gram_eigenvalues=[float(x) for x in ev],
        gram_rank=relative_rank(ev, tol.rank_rel_tol),
        tolerances=tol,
    )
    sep = min_separation(c.points)
    if sep < ILL_CONDITIONED_SEPARATION:
        report.warnings.append(
            f"ill-conditioned: minimum point separation {sep:.3e} < {ILL_CONDITIONED_SEPARATION:g}"
        )
    if report.gram_rank < report.nonclassicality_rank:
        report.warnings.append(
            f"ill-conditioned: Gram rank {report.gram_rank} below term count "
            f"{report.nonclassicality_rank} at rank_rel_tol={tol.rank_rel_tol:g}"
        )
    if c.modes == 1:
        report.vandermonde_certificate = vandermonde_certificate(c.points[:, 0], tol.merge_tol)
    else:
        report.local_certificates = {
            m: vandermonde_certificate(c.points[:, m], tol.merge_tol) for m in range(c.modes)
        }
    if with_schmidt and c.modes >= 2:
        f = _fock_of(c, tol, truncation)
        report.truncation_used = f.truncation
        report.tail_bound = f.tail_bound
        for part in bipartitions(c.modes):
            label = bipartition_label(part, c.modes)
            sv = schmidt_spectrum(f, part, tol)
            report.schmidt_spectra[label] = [float(x) for x in sv]
            report.schmidt_ranks[label] = relative_rank(sv, tol.rank_rel_tol)
    return report


def multipartite_report(
    s: SuperpositionState, tol: Tolerances = DEFAULT_TOL, truncation=None
) -> RankReport:
    """Schmidt ranks over every cut of an ``N >= 2`` mode state plus GHZ certification."""
    if s.modes < 2:
        raise BipartitionError("multipartite report needs at least two modes")
    return analyze(s, tol, truncation)


def bound_check(
    s: SuperpositionState, tol: Tolerances = DEFAULT_TOL, truncation=None
) -> BoundCheck:
    """Compare the two-mode superposition count with the Schmidt rank across 0|1."""
    if s.modes != 2:
        raise BipartitionError(f"bound check is implemented for two modes, got {s.modes}")
    c = normalize(canonicalize(s, tol.merge_tol, tol.drop_tol))
    big_r = len(c)
    k = schmidt_rank(_fock_of(c, tol, truncation), (0,), tol)
    return BoundCheck(big_r, k, big_r >= k)


def ensemble_schmidt_ranks(
    e: PureEnsemble, tol: Tolerances = DEFAULT_TOL, bipartition: Sequence[int] = (0,)
) -> list[int]:
    out = []
    for _, s in e.members:
        c = normalize(canonicalize(s, tol.merge_tol, tol.drop_tol))
        out.append(schmidt_rank(auto_fock(c, tol.truncation_tol), bipartition, tol))
    return out


def apply_local_unitary(f: FockArray, mode: int, u: np.ndarray) -> FockArray:
    """Act with a matrix on one mode's truncated Fock index."""
    c = np.moveaxis(np.tensordot(u, f.coefficients, axes=([1], [mode])), 0, mode)
    return FockArray(c, f.tail_bound)
