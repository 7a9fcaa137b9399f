import math

import numpy as np
import pytest

from csrank.core import auto_fock, fidelity, fock_inner, norm, normalize, to_fock
from csrank.errors import ConditioningError, DegenerateStateError, SamplingError, TruncationError
from csrank.quantifiers import gram_rank, nonclassicality_rank, schmidt_rank
from csrank.states import (
    RandomBounds,
    SqueezedVacuumParams,
    cat_state,
    default_dq_step,
    dq_conditioning,
    fock_difference_quotient,
    fock_exact,
    fock_split_reference,
    odd_cat_raw,
    random_state,
    squeezed_vacuum_fock,
    two_copy_experiment,
    vacuum_fock,
)
from csrank.transforms import apply_splitter, balanced_bs, extend_with_vacuum

from oracles import fock_coeffs, squeezed_vacuum_expm


def fidelity_with_fock(s, n, cut=40):
    return fidelity(fock_exact(n, cut), to_fock(s, cut))


# --- cats -------------------------------------------------------------------------


def test_odd_cat_norm_and_terms():
    c = cat_state(1.0)
    assert len(c) == 2
    assert norm(c) == pytest.approx(1, abs=1e-14)


def test_odd_cat_zero_rejected():
    with pytest.raises(DegenerateStateError):
        cat_state(0.0)
    with pytest.raises(ValueError):
        cat_state(1.0, sign=2)


@pytest.mark.parametrize("alpha,defect", [(0.5, 0.0305), (0.1, 5e-5), (0.01, 5e-9)])
def test_even_cat_vacuum_limit(alpha, defect):
    # frozen from the Fock-coefficient oracle
    ref = fock_coeffs(alpha, 40) + fock_coeffs(-alpha, 40)
    ref_defect = 1 - abs(ref[0]) ** 2 / np.vdot(ref, ref).real
    assert ref_defect == pytest.approx(defect, rel=0.02)
    assert 1 - fidelity_with_fock(cat_state(alpha, +1), 0) == pytest.approx(ref_defect, rel=1e-6)


def test_even_cat_at_zero_is_vacuum():
    assert len(cat_state(0.0, +1)) == 1


def test_odd_cat_small_alpha_is_one_photon():
    assert fidelity_with_fock(cat_state(0.01), 1) >= 0.999
    # oracle value 0.9999999983
    assert fidelity_with_fock(cat_state(0.01), 1) == pytest.approx(0.9999999983, abs=1e-9)


def test_odd_cat_parity():
    for a in (0.3, 1.2, 2.0 + 1j):
        f = auto_fock(cat_state(a))
        assert np.max(np.abs(f.coefficients[0::2])) <= 1e-15


# --- difference quotient -----------------------------------------------------------


def test_dq_n0_is_vacuum():
    s = fock_difference_quotient(0, 0.3)
    assert len(s) == 1 and s.points[0, 0] == 0


def test_dq_n1():
    s = fock_difference_quotient(1, 0.01)
    defect = 1 - fidelity_with_fock(s, 1)
    assert defect <= 1e-4
    # oracle: h^2 n^2 (n + 1) / 4 = 5e-5 to leading order
    assert defect == pytest.approx(4.9999e-5, rel=1e-3)


@pytest.mark.parametrize("n", range(9))
def test_dq_default_rank(n):
    s = fock_difference_quotient(n)
    assert nonclassicality_rank(s) == n + 1
    assert schmidt_rank(auto_fock(normalize(apply_splitter(balanced_bs(), extend_with_vacuum(s, 2))))) == n + 1


def test_dq_n3_points_and_rank():
    s = fock_difference_quotient(3, 0.05)
    np.testing.assert_allclose(s.points[:, 0], [0, 0.05, 0.1, 0.15])
    assert nonclassicality_rank(s) == 4


def test_dq_coefficients():
    n, h = 2, 0.1
    s = fock_difference_quotient(n, h)
    expected = [
        math.comb(n, j) * (-1) ** (n - j) * math.exp((j * h) ** 2 / 2) / (math.sqrt(2) * h**2)
        for j in range(3)
    ]
    np.testing.assert_allclose(s.kappas.real, expected, rtol=1e-14)


def test_dq_convergence_order():
    def defect(h):
        return 1 - fidelity_with_fock(fock_difference_quotient(2, h), 2)

    ratio = defect(0.1) / defect(0.05)
    assert 3.2 <= ratio <= 4.8


def test_dq_conditioning_guard():
    with pytest.raises(ConditioningError):
        fock_difference_quotient(5, 0.05)
    with pytest.raises(ConditioningError):
        fock_difference_quotient(9)


def test_dq_default_step():
    assert [default_dq_step(n) for n in range(1, 9)] == [0.05] * 4 + [0.1, 0.2, 0.4, 0.4]
    assert dq_conditioning(3, 0.05) == pytest.approx(6 * math.exp(0.01125) / 0.05**3)


def test_dq_invalid():
    with pytest.raises(ValueError):
        fock_difference_quotient(-1, 0.1)
    with pytest.raises(ValueError):
        fock_difference_quotient(2, 0.0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_split_reference_vs_approximant(n):
    s = fock_difference_quotient(n, 0.05)
    approx_defect = 1 - fidelity_with_fock(s, n)
    out = to_fock(apply_splitter(balanced_bs(), extend_with_vacuum(s, 2)), 30)
    fid = fidelity(fock_split_reference(n, 30), out)
    assert fid >= 1 - 10 * approx_defect


# --- exact Fock / references --------------------------------------------------------


def test_fock_exact():
    np.testing.assert_array_equal(fock_exact(0, 3).coefficients, [1, 0, 0])
    np.testing.assert_array_equal(fock_exact(1, 3).coefficients, [0, 1, 0])
    for n in range(4):
        for m in range(4):
            assert fock_inner(fock_exact(n, 5), fock_exact(m, 5)) == (n == m)
    with pytest.raises(TruncationError):
        fock_exact(3, 3)


def test_vacuum_fock():
    assert vacuum_fock(2, 3).coefficients[0, 0] == 1


def test_split_reference_examples():
    np.testing.assert_allclose(fock_split_reference(1).coefficients, [[0, 1 / math.sqrt(2)], [1 / math.sqrt(2), 0]])
    np.testing.assert_array_equal(fock_split_reference(0).coefficients, [[1]])
    c = fock_split_reference(2).coefficients
    np.testing.assert_allclose([c[0, 2], c[1, 1], c[2, 0]], [0.5, 1 / math.sqrt(2), 0.5])
    for n in range(6):
        assert fock_split_reference(n).norm_squared() == pytest.approx(1, abs=1e-14)
    with pytest.raises(TruncationError):
        fock_split_reference(2, 2)


# --- squeezed vacuum ----------------------------------------------------------------


def test_sv_params():
    p = SqueezedVacuumParams.from_squeezing(0.5)
    assert p.mu == pytest.approx(math.cosh(0.5))
    with pytest.raises(ValueError):
        SqueezedVacuumParams(0.5, 0)
    with pytest.raises(ValueError):
        SqueezedVacuumParams(2.0, 1.0)


def test_sv_no_squeezing_is_vacuum():
    f = squeezed_vacuum_fock(SqueezedVacuumParams(1.0, 0), 4)
    np.testing.assert_array_equal(f.coefficients, [1, 0, 0, 0])
    assert f.tail_bound == 0


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0])
@pytest.mark.parametrize("phase", [0.0, 1.3])
def test_sv_matches_expm_oracle(r, phase):
    p = SqueezedVacuumParams.from_squeezing(r, phase)
    f = squeezed_vacuum_fock(p, 60, truncation_tol=None)
    ref = squeezed_vacuum_expm(p.mu, p.nu, 60)
    np.testing.assert_allclose(f.coefficients, ref, atol=1e-10)


def test_sv_parity_and_norm():
    p = SqueezedVacuumParams.from_mu(math.cosh(0.5))
    f = squeezed_vacuum_fock(p, 60)
    assert np.all(f.coefficients[1::2] == 0)
    assert 1 - f.norm_squared() <= f.tail_bound + 1e-15
    assert f.norm_squared() == pytest.approx(1, abs=1e-12)


def test_sv_tail_bound_is_rigorous():
    p = SqueezedVacuumParams.from_squeezing(0.8)
    short = squeezed_vacuum_fock(p, 20, truncation_tol=None)
    long = squeezed_vacuum_fock(p, 400, truncation_tol=None)
    assert long.norm_squared() - short.norm_squared() <= short.tail_bound


def test_sv_inadequate_truncation():
    with pytest.raises(TruncationError):
        squeezed_vacuum_fock(SqueezedVacuumParams.from_squeezing(1.0), 10)


# --- two-copy / random ---------------------------------------------------------------


def test_two_copy():
    inp, out = two_copy_experiment(1.0)
    assert len(inp) == 4 and len(out) == 4
    np.testing.assert_allclose(np.max(np.abs(out.points), axis=1), math.sqrt(2))
    assert np.all(np.min(np.abs(out.points), axis=1) < 1e-15)
    assert schmidt_rank(auto_fock(normalize(out))) == 2
    with pytest.raises(DegenerateStateError):
        two_copy_experiment(0)


def test_odd_cat_raw():
    s = odd_cat_raw(0.5)
    np.testing.assert_array_equal(s.kappas, [1, -1])


def test_random_state_single():
    s = random_state(1, seed=0)
    assert len(s) == 1 and abs(s.points[0, 0]) <= 2


def test_random_state_deterministic():
    a, b = random_state(5, seed=42), random_state(5, seed=42)
    np.testing.assert_array_equal(a.points, b.points)
    np.testing.assert_array_equal(a.kappas, b.kappas)
    assert not np.array_equal(a.points, random_state(5, seed=43).points)


def test_random_state_bounds():
    for seed in range(20):
        s = random_state(6, seed)
        assert np.all(np.abs(s.points) <= 2)
        assert np.all((np.abs(s.kappas) >= 0.1) & (np.abs(s.kappas) <= 1))
        d = np.abs(s.points[:, 0][:, None] - s.points[:, 0][None, :])
        assert np.min(d[np.triu_indices(6, 1)]) >= 0.1
        assert gram_rank(s) == 6


def test_random_state_sampling_failure():
    with pytest.raises(SamplingError):
        random_state(50, 0, RandomBounds(radius=0.1, min_sep=0.1, max_attempts=1000))
