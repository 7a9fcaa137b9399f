"""Named states: cat states, Fock approximants, squeezed vacuum, reference outputs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    MERGE_TOL,
    TRUNCATION_TOL,
    FockArray,
    SuperpositionState,
    canonicalize,
    norm,
    tensor_product,
)
from .errors import ConditioningError, DegenerateStateError, SamplingError, TruncationError
from .transforms import apply_splitter, balanced_bs

RANK_REL_TOL = 1e-8
# candidate difference-quotient steps, tried in order
_DQ_STEPS = (0.05, 0.1, 0.2, 0.4, 0.6, 0.8)


def coherent(alpha: complex) -> SuperpositionState:
    return SuperpositionState.coherent(alpha)


def cat_state(alpha: complex, sign: int = -1, merge_tol: float = MERGE_TOL) -> SuperpositionState:
    """Normalized ``|alpha> + sign |-alpha>``; ``sign=-1`` is the odd cat.

    Raises:
        DegenerateStateError: odd cat with ``|alpha|`` below ``merge_tol``.
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    alpha = complex(alpha)
    if abs(alpha) <= merge_tol:
        if sign == -1:
            raise DegenerateStateError("odd cat state is undefined at alpha = 0")
        return coherent(0)
    n = 1.0 / math.sqrt(2.0 * (1.0 + sign * math.exp(-2.0 * abs(alpha) ** 2)))
    return canonicalize(SuperpositionState(np.array([n, sign * n]), np.array([alpha, -alpha])))


def odd_cat_normalization(alpha: complex) -> float:
    """``[2 (1 - exp(-2|alpha|^2))]^(-1/2)``."""
    return (2.0 * (1.0 - math.exp(-2.0 * abs(alpha) ** 2))) ** -0.5


def dq_conditioning(n: int, h: float) -> float:
    """Cancellation factor ``n! exp((n h)^2 / 2) / h^n`` of the difference quotient."""
    return math.exp(math.lgamma(n + 1) + 0.5 * (n * h) ** 2 - n * math.log(h))


def default_dq_step(n: int, rank_rel_tol: float = RANK_REL_TOL) -> float:
    """Smallest candidate step that passes the conditioning guard."""
    for h in _DQ_STEPS:
        try:
            _dq_state(n, h, rank_rel_tol)
        except ConditioningError:
            continue
        return h
    raise ConditioningError(f"no difference-quotient step resolves n = {n} in double precision")


def _dq_state(n: int, h: float, rank_rel_tol: float) -> SuperpositionState:
    j = np.arange(n + 1)
    binom = np.array([math.comb(n, int(k)) for k in j], dtype=float)
    kappas = binom * (-1.0) ** (n - j) * np.exp(0.5 * (j * h) ** 2)
    kappas /= math.sqrt(math.factorial(n)) * h**n
    s = SuperpositionState(kappas, (j * h).astype(complex))
    factor = dq_conditioning(n, h)
    try:
        nrm = norm(s)
    except DegenerateStateError:
        nrm = 0.0
    if nrm == 0.0:
        raise ConditioningError(
            f"difference quotient n={n}, h={h}: coefficients (cancellation factor "
            f"{factor:.3e}) cancel below round-off"
        )
    if factor > nrm / rank_rel_tol:
        raise ConditioningError(
            f"difference quotient n={n}, h={h}: cancellation factor {factor:.3e} "
            f"exceeds norm / rank_rel_tol = {nrm / rank_rel_tol:.3e}"
        )
    return s


def fock_difference_quotient(
    n: int, h: float | None = None, rank_rel_tol: float = RANK_REL_TOL
) -> SuperpositionState:
    """Approximant of ``|n>`` from ``n + 1`` coherent states at ``0, h, ..., n h``.

    The terms are ``C(n, j) (-1)^(n-j) exp(|j h|^2 / 2) |j h> / (sqrt(n!) h^n)``.
    The result is not normalized. Its leading error is an ``O(h)`` admixture of
    ``|n + 1>``, so the infidelity falls as ``h^2``.

    Raises:
        ConditioningError: the coefficients cancel beyond double precision, i.e.
            ``n! exp((n h)^2/2) / h^n`` exceeds ``norm / rank_rel_tol``.
    """
    if n < 0:
        raise ValueError(f"photon number must be >= 0, got {n}")
    if h is not None and not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    if n == 0:
        return coherent(0)
    if h is None:
        h = default_dq_step(n, rank_rel_tol)
    return _dq_state(n, h, rank_rel_tol)


def fock_exact(n: int, truncation: int) -> FockArray:
    if truncation <= n:
        raise TruncationError(f"cutoff {truncation} cannot hold |{n}>")
    c = np.zeros(truncation, dtype=complex)
    c[n] = 1.0
    return FockArray(c)


def vacuum_fock(modes: int = 1, truncation: int = 1) -> FockArray:
    c = np.zeros((truncation,) * modes, dtype=complex)
    c[(0,) * modes] = 1.0
    return FockArray(c)


def fock_split_reference(n: int, truncation: int | None = None) -> FockArray:
    """``2^(-n/2) sum_j C(n, j)^(1/2) |j, n - j>``, the split ``n``-photon state."""
    if truncation is None:
        truncation = n + 1
    if truncation <= n:
        raise TruncationError(f"cutoff {truncation} cannot hold {n} photons in one mode")
    c = np.zeros((truncation, truncation), dtype=complex)
    for j in range(n + 1):
        c[j, n - j] = math.sqrt(math.comb(n, j) / 2.0**n)
    return FockArray(c)


@dataclass(frozen=True)
class SqueezedVacuumParams:
    """``mu >= 1`` and complex ``nu`` with ``|nu|^2 = mu^2 - 1``."""

    mu: float
    nu: complex

    def __post_init__(self):
        if not self.mu >= 1:
            raise ValueError(f"mu must be >= 1, got {self.mu}")
        if abs(abs(self.nu) ** 2 - (self.mu**2 - 1)) > 1e-12 * max(1.0, self.mu**2):
            raise ValueError(f"|nu|^2 = {abs(self.nu) ** 2!r} differs from mu^2 - 1")

    @classmethod
    def from_mu(cls, mu: float, phase: float = 0.0) -> "SqueezedVacuumParams":
        return cls(mu, math.sqrt(max(mu * mu - 1.0, 0.0)) * complex(math.cos(phase), math.sin(phase)))

    @classmethod
    def from_squeezing(cls, r: float, phase: float = 0.0) -> "SqueezedVacuumParams":
        return cls(math.cosh(r), math.sinh(r) * complex(math.cos(phase), math.sin(phase)))


def squeezed_vacuum_tail(p: SqueezedVacuumParams, c_first: complex) -> float:
    """Geometric bound on the squared norm from the first dropped coefficient on.

    ``|c_{2m+2}/c_{2m}|^2 = |nu/mu|^2 (2m+1)/(2m+2) < |nu/mu|^2``.
    """
    q = abs(p.nu / p.mu) ** 2
    return abs(c_first) ** 2 / (1.0 - q)


def squeezed_vacuum_fock(
    p: SqueezedVacuumParams, truncation: int, truncation_tol: float | None = TRUNCATION_TOL
) -> FockArray:
    """``mu^(-1/2) exp(-nu/(2 mu) a^dag^2)|0>`` on photon numbers below ``truncation``.

    ``c_{2m} = mu^(-1/2) (-nu/(2 mu))^m sqrt((2m)!) / m!``; odd entries are zero.
    Pass ``truncation_tol=None`` to skip the adequacy check (the tail bound is
    still recorded).

    Raises:
        TruncationError: tail bound exceeds ``truncation_tol``.
    """
    if truncation < 1:
        raise TruncationError("cutoff must be >= 1")
    x = -p.nu / (2.0 * p.mu)
    c = np.zeros(truncation, dtype=complex)
    cur = complex(p.mu**-0.5)
    m = 0
    while 2 * m < truncation:
        c[2 * m] = cur
        cur = cur * x * math.sqrt((2 * m + 2) * (2 * m + 1)) / (m + 1)
        m += 1
    tail = squeezed_vacuum_tail(p, cur) if p.nu != 0 else 0.0
    if truncation_tol is not None and tail > truncation_tol:
        raise TruncationError(f"squeezed-vacuum tail {tail:.3e} exceeds {truncation_tol:.1e} at cutoff {truncation}")
    return FockArray(c, tail)


def odd_cat_raw(alpha: complex) -> SuperpositionState:
    """Unnormalized ``|alpha> - |-alpha>``."""
    return SuperpositionState(np.array([1.0, -1.0]), np.array([alpha, -alpha]))


def two_copy_experiment(
    alpha: complex, merge_tol: float = MERGE_TOL
) -> tuple[SuperpositionState, SuperpositionState]:
    """Two unnormalized odd cats through the balanced beam splitter.

    Returns ``(input, output)``; the output has points ``(+-sqrt(2) alpha, 0)`` and
    ``(0, +-sqrt(2) alpha)``.
    """
    if abs(alpha) <= merge_tol:
        raise DegenerateStateError("two-copy experiment needs alpha != 0")
    cat = canonicalize(odd_cat_raw(alpha), merge_tol)
    inp = canonicalize(tensor_product(cat, cat), merge_tol)
    return inp, apply_splitter(balanced_bs(), inp, merge_tol)


@dataclass(frozen=True)
class RandomBounds:
    radius: float = 2.0
    min_sep: float = 0.1
    kappa_min: float = 0.1
    kappa_max: float = 1.0
    max_attempts: int = 100_000


def random_state(r: int, seed: int, bounds: RandomBounds = RandomBounds()) -> SuperpositionState:
    """``r`` coherent points uniform in a disk, pairwise at least ``min_sep`` apart.

    Coefficients are uniform over the annulus ``kappa_min <= |kappa| <= kappa_max``.
    Deterministic in ``seed``.
    """
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    rng = np.random.default_rng(seed)
    pts: list[complex] = []
    attempts = 0
    while len(pts) < r:
        attempts += 1
        if attempts > bounds.max_attempts:
            raise SamplingError(f"could not place {r} points with separation {bounds.min_sep}")
        rad = bounds.radius * math.sqrt(rng.random())
        z = rad * np.exp(2j * np.pi * rng.random())
        if all(abs(z - q) >= bounds.min_sep for q in pts):
            pts.append(complex(z))
    lo, hi = bounds.kappa_min**2, bounds.kappa_max**2
    mags = np.sqrt(lo + (hi - lo) * rng.random(r))
    kappas = mags * np.exp(2j * np.pi * rng.random(r))
    return SuperpositionState(kappas, np.array(pts))
