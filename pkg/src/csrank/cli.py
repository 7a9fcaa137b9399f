"""Command-line front end.

Exit codes: 0 success, 1 theorem violation, 2 input error, 3 conditioning
warnings under ``--strict``.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import core, states
from .core import FockArray, SuperpositionState
from .errors import CSRankError, SpecFormatError, TruncationError
from .quantifiers import (
    DEFAULT_TOL,
    RankReport,
    Tolerances,
    analyze,
    bipartition_label,
    gram_rank,
    relative_rank,
    schmidt_spectrum,
)
from .transforms import (
    SplitterUnitary,
    apply_splitter,
    apply_splitter_fock,
    balanced_bs,
    dft_splitter,
    extend_with_vacuum,
    load_unitary,
)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2
EXIT_STRICT = 3

SWEEP_SIGMAS = 8


def fmt(x: float) -> str:
    # + 0.0 turns -0.0 into 0.0
    return f"{x + 0.0:.17g}"


def fmt_c(z: complex) -> str:
    return f"({fmt(z.real)}, {fmt(z.imag)})"


@dataclass
class RunConfig:
    command: str
    state_spec: str
    splitter_spec: str = "bs"
    tolerances: Tolerances = DEFAULT_TOL
    truncation_override: tuple[int, ...] | None = None
    report_path: str | None = None
    csv_path: str | None = None
    seed: int = 0
    trials: int = 100
    strict: bool = False
    r_max: int = 6
    radius: float = 2.0
    min_sep: float = 0.1
    truncations: tuple[int, ...] = ()
    alphas: tuple[float, ...] = ()


@dataclass
class Outcome:
    code: int
    report: str
    csv_rows: list[list[str]] = field(default_factory=list)
    csv_header: list[str] = field(default_factory=list)
    rank_report: RankReport | None = None


# --- spec parsing -------------------------------------------------------------


def _num(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError as e:
        raise SpecFormatError(f"{what} must be a number, got {text!r}") from e


def _cnum(text: str, what: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as e:
        raise SpecFormatError(f"{what} must be a (complex) number, got {text!r}") from e


def _int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError as e:
        raise SpecFormatError(f"{what} must be an integer, got {text!r}") from e


def parse_state(spec: str, tol: Tolerances = DEFAULT_TOL) -> SuperpositionState | states.SqueezedVacuumParams:
    """Named state or path to a JSON state file.

    Squeezed vacuum has no finite coherent expansion and comes back as its
    parameters.
    """
    parts = spec.split(":")
    kind = parts[0]
    args = parts[1:]
    if kind == "cat" and len(args) == 2 and args[0] in ("odd", "even"):
        return states.cat_state(
            _cnum(args[1], "cat amplitude"), -1 if args[0] == "odd" else 1, tol.merge_tol
        )
    if kind == "fockdq" and len(args) in (1, 2):
        n = _int(args[0], "photon number")
        h = _num(args[1], "step") if len(args) == 2 else None
        return states.fock_difference_quotient(n, h, tol.rank_rel_tol)
    if kind == "coherent" and len(args) == 2:
        return states.coherent(complex(_num(args[0], "re"), _num(args[1], "im")))
    if kind == "random" and len(args) == 2:
        return states.random_state(_int(args[0], "term count"), _int(args[1], "seed"))
    if kind == "sv" and len(args) in (1, 2):
        mu = _num(args[0], "mu")
        phase = _num(args[1], "phase") if len(args) == 2 else 0.0
        try:
            return states.SqueezedVacuumParams.from_mu(mu, phase)
        except ValueError as e:
            raise SpecFormatError(str(e)) from e
    path = Path(spec)
    if path.is_file():
        return core.load_state(path)
    if kind in ("cat", "fockdq", "coherent", "random", "sv"):
        raise SpecFormatError(f"malformed named state {spec!r}")
    raise FileNotFoundError(f"{spec!r} is neither a named state nor an existing file")


def parse_splitter(spec: str, modes_hint: int = 2) -> SplitterUnitary:
    if spec == "bs":
        return balanced_bs()
    if spec.startswith("dft:"):
        n = _int(spec[4:], "splitter size")
        if n < 2:
            raise SpecFormatError("dft splitter needs N >= 2")
        return dft_splitter(n)
    if spec.startswith("file:"):
        return load_unitary(spec[5:])
    raise SpecFormatError(f"unknown splitter {spec!r}; use bs, dft:N or file:PATH")


def parse_range(text: str, kind=int) -> tuple[float, float]:
    if ".." not in text:
        raise SpecFormatError(f"range must look like LO..HI, got {text!r}")
    lo, hi = text.split("..", 1)
    conv = _int if kind is int else _num
    return conv(lo, "range start"), conv(hi, "range end")


def parse_truncation(text: str) -> tuple[int, ...]:
    return tuple(_int(t, "truncation") for t in text.split(","))


# --- report text --------------------------------------------------------------


def _tol_line(tol: Tolerances) -> str:
    return (
        f"tolerances: merge_tol={fmt(tol.merge_tol)} drop_tol={fmt(tol.drop_tol)} "
        f"rank_rel_tol={fmt(tol.rank_rel_tol)} truncation_tol={fmt(tol.truncation_tol)}"
    )


def _state_lines(prefix: str, s: SuperpositionState) -> list[str]:
    out = [f"{prefix}_modes: {s.modes}", f"{prefix}_terms: {len(s)}"]
    for i, (k, p) in enumerate(s.terms()):
        out.append(f"{prefix}_term[{i}]: kappa={fmt_c(k)} point=[{', '.join(fmt_c(a) for a in p)}]")
    return out


def _report_lines(rep: RankReport, prefix: str) -> list[str]:
    out = [
        f"{prefix}_ncl_rank: {rep.nonclassicality_rank}",
        f"{prefix}_gram_rank: {rep.gram_rank}",
        f"{prefix}_gram_eigenvalues: {' '.join(fmt(x) for x in rep.gram_eigenvalues)}",
    ]
    if rep.vandermonde_certificate is not None:
        v = rep.vandermonde_certificate
        out.append(
            f"{prefix}_vandermonde: value={fmt_c(v.value)} "
            f"passed={'true' if v.passed else 'false'}"
        )
    for m, v in rep.local_certificates.items():
        out.append(
            f"{prefix}_vandermonde[mode {m}]: value={fmt_c(v.value)} "
            f"passed={'true' if v.passed else 'false'}"
        )
    if rep.schmidt_ranks:
        out.append(f"{prefix}_truncation: {','.join(map(str, rep.truncation_used))}")
        out.append(f"{prefix}_tail_bound: {fmt(rep.tail_bound)}")
        for label, rank in rep.schmidt_ranks.items():
            spec = " ".join(fmt(x) for x in rep.schmidt_spectra[label])
            out.append(f"{prefix}_schmidt[{label}]: rank={rank} spectrum={spec}")
    for w in rep.warnings:
        out.append(f"{prefix}_warning: {w}")
    return out


def _spectra_rows(rep: RankReport) -> list[list[str]]:
    rows = []
    for label, spec in rep.schmidt_spectra.items():
        for i, x in enumerate(spec):
            rows.append([label, str(i), fmt(x)])
    return rows


def _superposition(cfg: RunConfig):
    s = parse_state(cfg.state_spec, cfg.tolerances)
    if not isinstance(s, SuperpositionState):
        raise SpecFormatError(
            "squeezed vacuum has no finite coherent expansion; use the sweep command"
        )
    return s


# --- commands -----------------------------------------------------------------


def cmd_analyze(cfg: RunConfig) -> Outcome:
    tol = cfg.tolerances
    s = _superposition(cfg)
    rep = analyze(s, tol, cfg.truncation_override)
    lines = ["command: analyze", f"state: {cfg.state_spec}", _tol_line(tol)]
    lines += _state_lines("input", core.canonicalize(s, tol.merge_tol, tol.drop_tol))
    lines += _report_lines(rep, "input")
    cert = rep.vandermonde_certificate
    if cert is not None:
        ok = cert.passed
    else:
        ok = all(c.passed for c in rep.local_certificates.values())
    summary = f"NCL_RANK={rep.nonclassicality_rank} GRAM_RANK={rep.gram_rank}"
    if rep.schmidt_ranks:
        summary += f" SCHMIDT_RANK={rep.min_schmidt_rank}"
    summary += f" CERTIFICATE={'pass' if ok else 'fail'}"
    lines.append(summary)
    code = EXIT_STRICT if cfg.strict and rep.warnings else EXIT_OK
    return Outcome(code, "\n".join(lines) + "\n", _spectra_rows(rep),
                   ["bipartition", "sigma_index", "sigma_value"], rep)


def split_state(
    s: SuperpositionState, t: SplitterUnitary, tol: Tolerances, truncation=None
) -> tuple[SuperpositionState, RankReport, int]:
    """Embed a single-mode state with vacua, split it, and rank the output."""
    if s.modes != 1:
        raise SpecFormatError(f"split expects a single-mode input, got {s.modes} modes")
    c = core.canonicalize(s, tol.merge_tol, tol.drop_tol)
    out = apply_splitter(t, extend_with_vacuum(c, t.size), tol.merge_tol, tol.drop_tol)
    rep = analyze(out, tol, truncation)
    return out, rep, len(c)


def cmd_split(cfg: RunConfig) -> Outcome:
    tol = cfg.tolerances
    s = _superposition(cfg)
    t = parse_splitter(cfg.splitter_spec)
    out, rep, ncl = split_state(s, t, tol, cfg.truncation_override)
    in_rep = analyze(s, tol, with_schmidt=False)
    passed = rep.ghz_certified
    lines = [
        "command: split",
        f"state: {cfg.state_spec}",
        f"splitter: {cfg.splitter_spec}",
        f"splitter_unitarity_defect: {fmt(t.unitarity_defect)}",
        _tol_line(tol),
    ]
    lines += _report_lines(in_rep, "input")
    lines += _state_lines("output", out)
    lines += _report_lines(rep, "output")
    lines.append(f"NCL_RANK={ncl} SCHMIDT_RANK={rep.min_schmidt_rank} "
                 f"CERTIFICATE={'pass' if passed else 'fail'}")
    if not passed:
        code = EXIT_VIOLATION
    elif cfg.strict and (rep.warnings or in_rep.warnings):
        code = EXIT_STRICT
    else:
        code = EXIT_OK
    return Outcome(code, "\n".join(lines) + "\n", _spectra_rows(rep),
                   ["bipartition", "sigma_index", "sigma_value"], rep)


@dataclass
class TrialResult:
    index: int
    seed: int
    r: int
    ncl: int
    gram: int
    schmidt: int
    conditioned: bool

    @property
    def agrees(self) -> bool:
        return self.ncl == self.gram == self.schmidt


def run_trial(index: int, cfg: RunConfig, t: SplitterUnitary) -> TrialResult:
    r = 1 + index % cfg.r_max
    seed = cfg.seed + index
    bounds = states.RandomBounds(radius=cfg.radius, min_sep=cfg.min_sep)
    s = states.random_state(r, seed, bounds)
    tol = cfg.tolerances
    _, rep, ncl = split_state(s, t, tol, cfg.truncation_override)
    return TrialResult(
        index, seed, r, ncl, gram_rank(s, tol), rep.min_schmidt_rank, bool(rep.warnings)
    )


def cmd_verify_theorem(cfg: RunConfig) -> Outcome:
    if cfg.trials < 1:
        raise SpecFormatError("trials must be >= 1")
    t = parse_splitter(cfg.splitter_spec)
    results = [run_trial(i, cfg, t) for i in range(cfg.trials)]
    failed = [x for x in results if not x.agrees and not x.conditioned]
    conditioned = [x for x in results if x.conditioned]
    lines = [
        "command: verify-theorem",
        f"splitter: {cfg.splitter_spec}",
        _tol_line(cfg.tolerances),
        f"r_max: {cfg.r_max} radius: {fmt(cfg.radius)} min_sep: {fmt(cfg.min_sep)}",
    ]
    for x in results:
        status = "pass" if x.agrees else ("conditioned" if x.conditioned else "FAIL")
        lines.append(
            f"trial {x.index} seed={x.seed} r={x.r} ncl={x.ncl} gram={x.gram} "
            f"schmidt={x.schmidt} {status}{' (ill-conditioned)' if x.conditioned else ''}"
        )
    for x in failed:
        lines.append(f"failure: trial {x.index} reproduce with random:{x.r}:{x.seed}")
    lines.append(
        f"TRIALS={len(results)} PASSED={sum(x.agrees for x in results)} "
        f"FAILED={len(failed)} CONDITIONING={len(conditioned)}"
    )
    if failed:
        code = EXIT_VIOLATION
    elif cfg.strict and conditioned:
        code = EXIT_STRICT
    else:
        code = EXIT_OK
    rows = [[str(x.index), str(x.seed), str(x.r), str(x.ncl), str(x.gram), str(x.schmidt),
             "pass" if x.agrees else "fail"] for x in results]
    return Outcome(code, "\n".join(lines) + "\n", rows,
                   ["trial", "seed", "r", "ncl_rank", "gram_rank", "schmidt_rank", "status"])


def _box(f: FockArray, cut: int) -> FockArray:
    """Restrict (or zero-pad) a two-or-more-mode array to ``cut`` photons per mode."""
    c = f.coefficients
    out = np.zeros((cut,) * f.modes, dtype=complex)
    idx = tuple(slice(0, min(cut, n)) for n in c.shape)
    out[idx] = c[idx]
    return FockArray(out)


def _sv_source(p: states.SqueezedVacuumParams, tol: Tolerances, at_least: int) -> FockArray:
    # cutting before the splitter moves amplitudes inside the output box by
    # ~sqrt(tail), which must sit well below the relative rank threshold
    target = min(tol.truncation_tol, (1e-3 * tol.rank_rel_tol) ** 2)
    cut = max(at_least, 2)
    while True:
        try:
            return states.squeezed_vacuum_fock(p, cut, target)
        except TruncationError:
            cut += max(4, cut // 4)
            if cut > core.MAX_TRUNCATION:
                raise


def sweep_truncation_row(
    state, t: SplitterUnitary, cut: int, tol: Tolerances
) -> tuple[int, float, np.ndarray]:
    """Schmidt rank (first mode vs rest) of the split state seen in a ``cut``-photon box.

    The split state is computed to within ``truncation_tol`` first and only then
    restricted, so the rank reflects the state and not artefacts of cutting the
    input before the splitter.
    """
    if isinstance(state, SuperpositionState):
        out = apply_splitter(t, extend_with_vacuum(core.normalize(state), t.size))
        full = core.to_fock(out, cut)
        tail = full.tail_bound
    else:
        src = _sv_source(state, tol, cut)
        vac = FockArray(np.ones((1,) * (t.size - 1), dtype=complex))
        full = apply_splitter_fock(t, src.tensor(vac))
        boxed = _box(full, cut)
        outside = np.ones(full.coefficients.shape, dtype=bool)
        outside[tuple(slice(0, cut) for _ in range(full.modes))] = False
        tail = full.tail_bound + float(np.sum(np.abs(full.coefficients[outside]) ** 2))
        full = boxed
    sv = schmidt_spectrum(full, (0,), tol, check_truncation=False)
    return relative_rank(sv, tol.rank_rel_tol), tail, sv


def cmd_sweep(cfg: RunConfig) -> Outcome:
    tol = cfg.tolerances
    t = parse_splitter(cfg.splitter_spec)
    header = ["parameter", "schmidt_rank", "tail_bound"] + [
        f"sigma_{k + 1}" for k in range(SWEEP_SIGMAS)
    ]
    rows = []
    if cfg.truncations:
        state = parse_state(cfg.state_spec, tol)
        if isinstance(state, SuperpositionState) and state.modes != 1:
            raise SpecFormatError("sweep expects a single-mode state")
        for cut in cfg.truncations:
            rank, tail, sv = sweep_truncation_row(state, t, cut, tol)
            rows.append([str(cut), str(rank), fmt(tail)] + _sigma_cells(sv))
    elif cfg.alphas:
        family = cfg.state_spec
        for a in cfg.alphas:
            s = _family_member(family, a, tol)
            _, rep, _ = split_state(s, t, tol, cfg.truncation_override)
            sv = np.array(rep.schmidt_spectra[bipartition_label((0,), t.size)])
            rank = rep.schmidt_ranks[bipartition_label((0,), t.size)]
            rows.append([fmt(a), str(rank), fmt(rep.tail_bound)] + _sigma_cells(sv))
    else:
        raise SpecFormatError("sweep needs --truncations LO..HI or --alphas LO..HI")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return Outcome(EXIT_OK, buf.getvalue(), rows, header)


def _sigma_cells(sv: np.ndarray) -> list[str]:
    cells = [fmt(x) for x in sv[:SWEEP_SIGMAS]]
    return cells + [""] * (SWEEP_SIGMAS - len(cells))


def _family_member(family: str, alpha: float, tol: Tolerances) -> SuperpositionState:
    if family in ("cat:odd", "cat:even"):
        return states.cat_state(alpha, -1 if family == "cat:odd" else 1, tol.merge_tol)
    if family == "coherent":
        return states.coherent(alpha)
    raise SpecFormatError(f"alpha sweeps support cat:odd, cat:even and coherent, got {family!r}")


COMMANDS = {
    "analyze": cmd_analyze,
    "split": cmd_split,
    "verify-theorem": cmd_verify_theorem,
    "sweep": cmd_sweep,
}


# --- argument handling ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--splitter", default="bs", help="bs, dft:N or file:PATH")
    common.add_argument("--tol-rank", type=float, default=DEFAULT_TOL.rank_rel_tol)
    common.add_argument("--tol-merge", type=float, default=DEFAULT_TOL.merge_tol)
    common.add_argument("--truncation", type=parse_truncation, default=None,
                        help="Fock cutoff, one value or one per mode (comma separated)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--strict", action="store_true",
                        help="treat conditioning warnings as failures (exit 3)")
    common.add_argument("--csv", dest="csv_path", default=None)
    common.add_argument("--report", dest="report_path", default=None)

    parser = argparse.ArgumentParser(
        prog="csrank",
        description="Superposition rank of coherent-state superpositions and "
                    "Schmidt rank after beam splitters.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("analyze", "split"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("state")
    p = sub.add_parser("verify-theorem", parents=[common])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--r-max", type=int, default=6)
    p.add_argument("--radius", type=float, default=2.0)
    p.add_argument("--min-sep", type=float, default=0.1)
    p = sub.add_parser("sweep", parents=[common])
    p.add_argument("state", help="named state, or a family (cat:odd, cat:even, coherent) with --alphas")
    p.add_argument("--truncations", default=None, help="LO..HI, inclusive")
    p.add_argument("--step", type=int, default=1)
    p.add_argument("--alphas", default=None, help="LO..HI")
    p.add_argument("--num", type=int, default=10, help="points in the alpha range")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    try:
        tol = Tolerances(merge_tol=ns.tol_merge, rank_rel_tol=ns.tol_rank)
    except ValueError as e:
        raise SpecFormatError(str(e)) from e
    cfg = RunConfig(
        command=ns.command,
        state_spec=getattr(ns, "state", ""),
        splitter_spec=ns.splitter,
        tolerances=tol,
        truncation_override=ns.truncation,
        report_path=ns.report_path,
        csv_path=ns.csv_path,
        seed=ns.seed,
        strict=ns.strict,
    )
    if ns.command == "verify-theorem":
        cfg.trials, cfg.r_max = ns.trials, ns.r_max
        cfg.radius, cfg.min_sep = ns.radius, ns.min_sep
        if cfg.r_max < 1:
            raise SpecFormatError("--r-max must be >= 1")
    if ns.command == "sweep":
        if ns.truncations:
            lo, hi = parse_range(ns.truncations, int)
            if lo < 1 or hi < lo or ns.step < 1:
                raise SpecFormatError(f"bad truncation range {ns.truncations!r}")
            cfg.truncations = tuple(range(lo, hi + 1, ns.step))
        if ns.alphas:
            lo, hi = parse_range(ns.alphas, float)
            if ns.num < 1:
                raise SpecFormatError("--num must be >= 1")
            cfg.alphas = tuple(float(x) for x in np.linspace(lo, hi, ns.num))
    return cfg


def run(cfg: RunConfig) -> Outcome:
    return COMMANDS[cfg.command](cfg)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        outcome = run(cfg)
    except (CSRankError, FileNotFoundError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(outcome.report)
    if cfg.report_path:
        Path(cfg.report_path).write_text(outcome.report)
    if cfg.csv_path:
        with open(cfg.csv_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(outcome.csv_header)
            w.writerows(outcome.csv_rows)
    return outcome.code


if __name__ == "__main__":
    sys.exit(main())
