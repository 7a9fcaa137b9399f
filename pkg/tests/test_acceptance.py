"""Acceptance criteria, one or more ``test_cNN_*`` tests per criterion.

The terminal summary (see conftest) prints one PASS/FAIL line per criterion.
"""

import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from csrank.cli import main
from csrank.core import FockArray, SuperpositionState, fidelity, to_fock
from csrank.quantifiers import (
    DEFAULT_TOL,
    analyze,
    bound_check,
    multipartite_report,
    nonclassicality_rank,
    relative_rank,
    schmidt_spectrum,
    vandermonde_matrix,
    vandermonde_product,
)
from csrank.states import (
    cat_state,
    fock_difference_quotient,
    fock_exact,
    random_state,
    two_copy_experiment,
)
from csrank.transforms import apply_splitter, apply_splitter_fock, balanced_bs, dft_splitter, extend_with_vacuum

from oracles import fock_coeffs, singular_values, split_single_mode

GOLDEN = Path(__file__).parent / "golden"
BELL = 1 / math.sqrt(2)


def cli(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def spectrum_line(out, label="0|1"):
    for line in out.splitlines():
        if line.startswith(f"output_schmidt[{label}]:"):
            return [float(x) for x in line.split("spectrum=")[1].split()]
    raise AssertionError(f"no spectrum for {label}")


def bs_out(s):
    return apply_splitter(balanced_bs(), extend_with_vacuum(s, 2))


# 1 ------------------------------------------------------------------------------


def test_c01_bell_mapping_fockdq_proxy(capsys, record_property):
    code, out = cli(capsys, "split", "fockdq:1:0.01")
    sv = spectrum_line(out)
    dev = max(abs(sv[0] - BELL), abs(sv[1] - BELL))
    record_property("detail", f"sigma=({sv[0]:.6f}, {sv[1]:.6f}) max deviation {dev:.2e} (tol 1e-6)")
    assert code == 0
    assert dev <= 1e-6


def test_c01_bell_mapping_odd_cat_small_alpha(capsys, record_property):
    code, out = cli(capsys, "split", "cat:odd:0.01")
    sv = spectrum_line(out)
    dev = max(abs(sv[0] - BELL), abs(sv[1] - BELL))
    record_property("detail", f"sigma=({sv[0]:.15f}, {sv[1]:.15f}) max deviation {dev:.2e}")
    assert code == 0
    assert dev <= 1e-6


# 2 ------------------------------------------------------------------------------


@pytest.mark.parametrize("alpha", [0.3, 1.2, 2.0])
def test_c02_odd_cat_rank(alpha, record_property):
    cat = cat_state(alpha)
    rep = analyze(bs_out(cat))
    sv = rep.schmidt_spectra["0|1"]
    ratio = sv[2] / sv[0] if len(sv) > 2 else 0.0
    record_property("detail", f"ncl={nonclassicality_rank(cat)} schmidt={rep.schmidt_ranks['0|1']} "
                              f"s3/s1={ratio:.1e} cutoffs={rep.truncation_used}")
    assert nonclassicality_rank(cat) == 2
    assert rep.schmidt_ranks["0|1"] == 2
    assert ratio < 1e-10


# 3 ------------------------------------------------------------------------------


@pytest.mark.parametrize("n", range(6))
def test_c03_fock_splitting(n, record_property):
    src = np.zeros((n + 1, 1), dtype=complex)
    src[n, 0] = 1
    out = apply_splitter_fock(balanced_bs(), FockArray(src))
    sv = schmidt_spectrum(out)
    rank = relative_rank(sv, DEFAULT_TOL.rank_rel_tol)
    expected = sorted((math.comb(n, j) / 2**n for j in range(n + 1)), reverse=True)
    err = float(np.max(np.abs(sv[: n + 1] ** 2 - expected)))
    # independent route: per-sector matrix exponential of the splitter generator
    psi = np.zeros(n + 1)
    psi[n] = 1
    oracle = singular_values(split_single_mode(psi, n + 1)) ** 2
    record_property("detail", f"rank={rank} max |sigma^2 - C(n,j)/2^n|={err:.1e}")
    assert rank == n + 1
    assert err <= 1e-10
    np.testing.assert_allclose(oracle[: n + 1], expected, atol=1e-10)


# 4 ------------------------------------------------------------------------------


def test_c04_theorem_campaign(capsys, record_property):
    code, out = cli(capsys, "verify-theorem", "--trials", "200", "--r-max", "6", "--radius", "2",
                    "--min-sep", "0.1", "--seed", "0", "--tol-rank", "1e-8")
    last = out.strip().splitlines()[-1]
    record_property("detail", last)
    trials = [line for line in out.splitlines() if line.startswith("trial ")]
    assert len(trials) == 200
    seeds = sorted(int(t.split("seed=")[1].split()[0]) for t in trials)
    assert seeds == list(range(200))
    assert code == 0
    assert last == "TRIALS=200 PASSED=200 FAILED=0 CONDITIONING=0"


# 5 ------------------------------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("source", ["odd_cat", "random_r3"])
def test_c05_ghz_extension(n, source, record_property):
    s = cat_state(1.0) if source == "odd_cat" else random_state(3, seed=2024)
    r = nonclassicality_rank(s)
    rep = multipartite_report(apply_splitter(dft_splitter(n), extend_with_vacuum(s, n)))
    record_property("detail", f"input r={r} ranks={sorted(set(rep.schmidt_ranks.values()))} "
                              f"cuts={len(rep.schmidt_ranks)}")
    assert len(rep.schmidt_ranks) == 2 ** (n - 1) - 1
    assert all(k == r for k in rep.schmidt_ranks.values())
    assert rep.ghz_certified


# 6 ------------------------------------------------------------------------------


def test_c06_vandermonde(record_property):
    rng = np.random.default_rng(6)
    worst = 0.0
    for i in range(1000):
        r = 1 + i % 6
        pts = 2 * np.sqrt(rng.random(r)) * np.exp(2j * np.pi * rng.random(r))
        closed = vandermonde_product(pts) * (-1) ** (r * (r - 1) // 2)
        direct = complex(np.linalg.det(vandermonde_matrix(pts)))
        worst = max(worst, abs(closed - direct) / max(abs(direct), abs(closed)))
    record_property("detail", f"worst relative mismatch {worst:.1e} over 1000 sets")
    assert worst <= 1e-8


# 7 ------------------------------------------------------------------------------


def test_c07_two_copy(record_property):
    _, out = two_copy_experiment(1.0)
    check = bound_check(out)
    record_property("detail", f"R={check.R} schmidt={check.schmidt}")
    assert check.R == 4
    assert check.schmidt == 2


def test_c07_bound_random(record_property):
    rng = np.random.default_rng(7)
    held = 0
    for i in range(100):
        r = 1 + i % 6
        a = random_state(r, 1000 + i)
        b = random_state(r, 2000 + i)
        kappas = a.kappas * np.exp(2j * np.pi * rng.random(r))
        s = SuperpositionState(kappas, np.stack([a.points[:, 0], b.points[:, 0]], axis=1))
        check = bound_check(s)
        held += check.holds
    record_property("detail", f"bound held on {held}/100")
    assert held == 100


# 8 ------------------------------------------------------------------------------


def _sweep_ranks(capsys, spec, lo, hi):
    code, out = cli(capsys, "sweep", spec, "--truncations", f"{lo}..{hi}")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))[1:]
    return {int(r[0]): int(r[1]) for r in rows}


def test_c08_squeezed_vacuum(capsys, record_property):
    golden = json.loads((GOLDEN / "sv_sweep.json").read_text())
    mu = golden["mu"]
    assert mu == pytest.approx(math.cosh(0.5), rel=1e-15)
    ranks = _sweep_ranks(capsys, f"sv:{mu!r}", 10, 60)
    seq = [ranks[t] for t in range(10, 61)]
    record_property("detail", f"ranks 10..60: {seq[0]}..{seq[-1]}, at 40: {ranks[40]}")
    assert all(x <= y for x, y in zip(seq, seq[1:]))
    assert ranks[40] >= 5
    assert {row["truncation"]: row["rank"] for row in golden["rows"]} == ranks


def test_c08_coherent_stays_separable(capsys, record_property):
    ranks = _sweep_ranks(capsys, "coherent:1:0", 10, 60)
    record_property("detail", f"ranks {sorted(set(ranks.values()))}")
    assert set(ranks.values()) == {1}


# 9 ------------------------------------------------------------------------------


def _dq_defect(n, h):
    return 1 - fidelity(fock_exact(n, 60), to_fock(fock_difference_quotient(n, h), 60))


def _dq_defect_oracle(n, h):
    # Fock-overlap oracle built from the explicit coefficient formula
    vec = np.zeros(60, dtype=complex)
    for j in range(n + 1):
        k = math.comb(n, j) * (-1) ** (n - j) * math.exp((j * h) ** 2 / 2)
        vec += k * fock_coeffs(j * h, 60)
    return 1 - abs(vec[n]) ** 2 / np.vdot(vec, vec).real


def test_c09_fidelity(record_property):
    defect = _dq_defect(3, 0.05)
    record_property("detail", f"fidelity {1 - defect:.6f} (need >= 0.999); oracle {1 - _dq_defect_oracle(3, 0.05):.6f}")
    assert defect == pytest.approx(_dq_defect_oracle(3, 0.05), rel=1e-6)
    assert 1 - defect >= 0.999


def test_c09_convergence_order(record_property):
    ratio = _dq_defect(3, 0.05) / _dq_defect(3, 0.025)
    oracle = _dq_defect_oracle(3, 0.05) / _dq_defect_oracle(3, 0.025)
    record_property("detail", f"defect ratio {ratio:.4f} (oracle {oracle:.4f})")
    assert ratio == pytest.approx(oracle, rel=1e-6)
    assert 3.2 <= ratio <= 4.8


# 10 -----------------------------------------------------------------------------


@pytest.mark.parametrize(
    "argv",
    [
        ["split", "random:5:17", "--splitter", "dft:3"],
        ["verify-theorem", "--trials", "24", "--seed", "9"],
        ["sweep", "sv:1.1276259652063807", "--truncations", "10..30", "--step", "5"],
    ],
)
def test_c10_determinism(argv, tmp_path, record_property):
    outputs = []
    for k in range(2):
        rep, table = tmp_path / f"r{k}.txt", tmp_path / f"c{k}.csv"
        res = subprocess.run(
            [sys.executable, "-m", "csrank", *argv, "--report", str(rep), "--csv", str(table)],
            capture_output=True,
        )
        assert res.returncode == 0, res.stderr
        outputs.append((res.stdout, rep.read_bytes(), table.read_bytes()))
    record_property("detail", f"{argv[0]}: {len(outputs[0][0])} report bytes identical")
    assert outputs[0] == outputs[1]
