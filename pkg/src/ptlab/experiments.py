"""Experiments comparing exact predictions with Monte Carlo estimates, and their reports."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

import numpy as np

from . import diagrams
from .errors import ArgumentError, ConfigError
from .freeprob import (
    circular_moment,
    cumulants_from_moments,
    haar_unitary_moment,
    limit_functional,
    marchenko_pastur_moment,
    positivity_support_check,
    semicircle_moments,
)
from .limits import LIMITS
from .matrices import (
    EnsembleSpec,
    WordSpec,
    estimate_from_values,
    haar_from_ginibre,
    _complex_gaussian,
    mc_word_values,
    stream,
    unitary_invariance_probe,
)
from .partitions import STAR, EpsilonMap
from .weingarten import haar_entry_moment_interleaved

EXPERIMENTS = ("entry-moments", "limit-distribution", "freeness", "blocks", "invariance")
ALIASES = {"limit-dist": "limit-distribution"}
CSV_COLUMNS = [
    "experiment", "word", "b", "d", "samples", "seed", "predicted_re", "predicted_im",
    "estimated_re", "estimated_im", "std_error", "tolerance", "pass",
]
ABS_FLOOR = 1e-12  # absorbs rounding when a standard error is exactly zero


@dataclass
class TolerancePolicy:
    se_multiplier: float = 4.0
    finite_size_constant: float = 2.0
    cumulant: float = 0.05


@dataclass
class ExperimentConfig:
    experiment: str
    ensembles: dict = field(default_factory=dict)
    words: list = field(default_factory=list)
    cumulant_words: list = field(default_factory=list)
    dims: list = field(default_factory=lambda: [(32, 32)])
    samples: int = 32
    seed: int = 0
    threads: int = 1
    tolerance: TolerancePolicy = field(default_factory=TolerancePolicy)
    matrix: str | None = None  # limit-distribution: which matrix
    max_order: int = 4
    max_length: int = 4  # entry-moments: enumerate words up to this length
    indices: int = 2  # entry-moments: row/column indices range over 1..indices
    m: int | None = None  # blocks
    grid: list = field(default_factory=lambda: list(diagrams.DEFAULT_GRID))

    @classmethod
    def from_dict(cls, obj: Mapping[str, Any]) -> ExperimentConfig:
        if not isinstance(obj, Mapping):
            raise ConfigError("config must be a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        extra = set(obj) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        kw = dict(obj)
        if "experiment" not in kw:
            raise ConfigError("config needs 'experiment'")
        kw["experiment"] = ALIASES.get(kw["experiment"], kw["experiment"])
        tol = kw.pop("tolerance", {}) or {}
        try:
            kw["tolerance"] = TolerancePolicy(**tol)
        except TypeError as exc:
            raise ConfigError(f"bad tolerance policy: {exc}") from None
        if "dims" in kw:
            kw["dims"] = [tuple(int(x) for x in pair) for pair in kw["dims"]]
        cfg = cls(**kw)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if not self.dims:
            raise ConfigError("dims ladder must be nonempty")
        for pair in self.dims:
            if len(pair) != 2 or min(pair) < 1:
                raise ConfigError(f"bad dims entry {pair}")
        if self.samples < 2:
            raise ConfigError("samples must be at least 2")
        if self.threads < 1:
            raise ConfigError("threads must be positive")
        if self.experiment == "blocks":
            if self.m is None and not self.words:
                raise ConfigError("blocks needs 'm' or 'words'")
        elif self.experiment != "entry-moments" and not self.ensembles:
            raise ConfigError(f"{self.experiment} needs 'ensembles'")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["dims"] = [list(p) for p in self.dims]
        return out


@dataclass(frozen=True)
class VerdictRow:
    experiment: str
    word: str
    b: int
    d: int
    samples: int
    seed: int
    predicted: complex
    estimated: complex
    std_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return (
            abs(self.estimated.real - self.predicted.real) <= self.tolerance
            and abs(self.estimated.imag - self.predicted.imag) <= self.tolerance
        )

    def to_record(self) -> dict:
        return {
            "experiment": self.experiment, "word": self.word, "b": self.b, "d": self.d,
            "samples": self.samples, "seed": self.seed,
            "predicted_re": self.predicted.real, "predicted_im": self.predicted.imag,
            "estimated_re": self.estimated.real, "estimated_im": self.estimated.imag,
            "std_error": self.std_error, "tolerance": self.tolerance, "pass": self.passed,
        }

    @classmethod
    def from_record(cls, rec: Mapping) -> VerdictRow:
        row = cls(
            rec["experiment"], rec["word"], int(rec["b"]), int(rec["d"]), int(rec["samples"]), int(rec["seed"]),
            complex(float(rec["predicted_re"]), float(rec["predicted_im"])),
            complex(float(rec["estimated_re"]), float(rec["estimated_im"])),
            float(rec["std_error"]), float(rec["tolerance"]),
        )
        return row


@dataclass
class Report:
    experiment: str
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    block_rows: list | None = None  # blocks experiment only

    @property
    def all_pass(self) -> bool:
        if self.block_rows is not None:
            return (
                all(r.consistent for r in self.block_rows)
                and self.meta.get("gamma_survivors_match", True)
                and self.meta.get("gamma_signs_match", True)
            )
        return all(r.passed for r in self.rows)

    @property
    def exit_code(self) -> int:
        return 0 if self.all_pass else 1


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def report_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if report.block_rows is not None:
        header, body = diagrams.block_rows_table(report.block_rows, report.meta.get("with_word", False))
        w.writerow(header)
        w.writerows(body)
        return buf.getvalue()
    w.writerow(CSV_COLUMNS)
    for r in report.rows:
        rec = r.to_record()
        w.writerow([_fmt(rec[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    return x


def report_json(report: Report) -> str:
    if report.block_rows is not None:
        header, body = diagrams.block_rows_table(report.block_rows, report.meta.get("with_word", False))
        rows = [dict(zip(header, line)) for line in body]
    else:
        rows = [r.to_record() for r in report.rows]
    obj = {"experiment": report.experiment, "pass": report.all_pass, "meta": report.meta, "rows": rows}
    return json.dumps(_json_safe(obj), indent=2, sort_keys=True) + "\n"


def rows_from_json(text: str) -> list[VerdictRow]:
    return [VerdictRow.from_record(r) for r in json.loads(text)["rows"]]


def emit_report(report: Report, fmt: str = "csv", path=None) -> str:
    """Write the report as CSV or JSON to ``path`` (stdout when None); returns the text."""
    if fmt not in ("csv", "json"):
        raise ArgumentError(f"unknown format {fmt!r}")
    text = report_csv(report) if fmt == "csv" else report_json(report)
    if path is None or str(path) == "-":
        print(text, end="")
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


# ---------------------------------------------------------------------------
# limit laws of the built-in ensembles


def ensemble_law(spec: EnsembleSpec):
    """Limit *-moments of one matrix as a function of its adjoint flags."""
    if spec.kind == "wishart":
        lam = Fraction(spec.M, spec.n)
        return lambda flags: marchenko_pastur_moment(len(flags), lam)
    if spec.kind == "gue":
        return lambda flags: semicircle_moments(0, 1, len(flags))
    if spec.kind == "ginibre":
        return circular_moment
    if spec.kind == "haar-unitary":
        return haar_unitary_moment
    if spec.kind == "haar-conjugated":
        return ensemble_law(spec.inner)
    a = spec.matrix
    M = spec.M

    def law(flags):
        out = np.eye(M, dtype=np.complex128)
        for f in flags:
            out = out @ (a.conj().T if f == STAR else a)
        v = complex(np.trace(out)) / M
        return v.real if v.imag == 0 else v

    return law


def plain_functional(ensembles: Mapping[str, EnsembleSpec]):
    from .freeprob import free_product_functional

    return free_product_functional({name: ensemble_law(spec) for name, spec in ensembles.items()})


def _complex(x) -> complex:
    return complex(x) if not isinstance(x, Fraction) else complex(float(x))


def _build_ensembles(cfg: ExperimentConfig, b: int, d: int) -> dict[str, EnsembleSpec]:
    try:
        return {name: EnsembleSpec.from_dict(obj, b, d) for name, obj in cfg.ensembles.items()}
    except ArgumentError as exc:
        raise ConfigError(str(exc)) from None


def _subwords(word: WordSpec) -> list[WordSpec]:
    n = len(word)
    out, seen = [], set()
    for k in range(1, n + 1):
        for idx in itertools.combinations(range(n), k):
            w = WordSpec(tuple(word.letters[i] for i in idx))
            if str(w) not in seen:
                seen.add(str(w))
                out.append(w)
    return out


def _empirical_cumulant(word: WordSpec, means: dict) -> complex:
    phi = lambda w: means[tuple(w)]  # noqa: E731
    return complex(cumulants_from_moments(phi, word.as_tuples()))


def _cumulant_rows(name, cfg, b, d, words, values, index, predicted_fn) -> list[VerdictRow]:
    """Empirical free cumulants from sample means, with leave-one-out jackknife errors."""
    rows = []
    n = values.shape[0]
    totals = values.sum(axis=0)
    for w in words:
        subs = _subwords(w)
        cols = [index[str(s)] for s in subs]
        keys = [s.as_tuples() for s in subs]
        full = {k: complex(values[:, c].mean()) for k, c in zip(keys, cols)}
        est = _empirical_cumulant(w, full)
        loo = []
        for i in range(n):
            means = {k: complex((totals[c] - values[i, c]) / (n - 1)) for k, c in zip(keys, cols)}
            loo.append(_empirical_cumulant(w, means))
        loo = np.array(loo)
        se_re = math.sqrt((n - 1) / n * float(np.sum((loo.real - loo.real.mean()) ** 2)))
        se_im = math.sqrt((n - 1) / n * float(np.sum((loo.imag - loo.imag.mean()) ** 2)))
        pred = _complex(predicted_fn(w.as_tuples()))
        rows.append(VerdictRow(name, f"kappa({', '.join(map(str, w.letters))})", b, d, n, cfg.seed,
                               pred, est, max(se_re, se_im), cfg.tolerance.cumulant))
    return rows


def finite_size_slack(word: WordSpec, b: int, d: int, pol: TolerancePolicy) -> float:
    """Finite-size allowance for a moment row.

    Mixing one matrix with a different symbol of itself (A^G against A, say)
    leaves corrections of order 1/min(b, d) rather than 1/M.
    """
    symbols: dict = {}
    for x in word.letters:
        symbols.setdefault(x.matrix, set()).add(x.symbol)
    if any(len(v) > 1 for v in symbols.values()):
        return pol.finite_size_constant / min(b, d)
    return pol.finite_size_constant / (b * d)


def _moment_and_cumulant_rows(name, cfg, b, d, ensembles, moment_words, cumulant_words):
    moment_words = [WordSpec.of(w) for w in moment_words]
    cumulant_words = [WordSpec.of(w) for w in cumulant_words]
    needed, index = [], {}
    for w in moment_words + [s for cw in cumulant_words for s in _subwords(cw)]:
        if str(w) not in index:
            index[str(w)] = len(needed)
            needed.append(w)
    limit = limit_functional(plain_functional(ensembles))
    values = mc_word_values(needed, ensembles, cfg.samples, cfg.seed, cfg.threads)
    rows = []
    pol = cfg.tolerance
    for w in moment_words:
        est = estimate_from_values(values[:, index[str(w)]], cfg.seed)
        pred = _complex(limit(w.as_tuples()))
        tol = pol.se_multiplier * est.std_error + finite_size_slack(w, b, d, pol) + ABS_FLOOR
        rows.append(VerdictRow(name, str(w), b, d, cfg.samples, cfg.seed, pred, est.mean, est.std_error, tol))
    rows += _cumulant_rows(name, cfg, b, d, cumulant_words, values, index,
                           lambda t: cumulants_from_moments(limit, t))
    return rows


def run_limit_distribution(cfg: ExperimentConfig) -> Report:
    """Moments and free cumulants of A^G against the partial-transpose limit law."""
    report = Report("limit-distribution")
    for b, d in cfg.dims:
        ensembles = _build_ensembles(cfg, b, d)
        name = cfg.matrix or sorted(ensembles)[0]
        if name not in ensembles:
            raise ConfigError(f"matrix {name!r} has no ensemble")
        ens = {name: ensembles[name]}
        powers = [" ".join([f"{name}:G"] * k) for k in range(1, cfg.max_order + 1)]
        words = cfg.words or powers
        cwords = cfg.cumulant_words or powers[1:]
        report.rows += _moment_and_cumulant_rows(report.experiment, cfg, b, d, ens, words, cwords)
        law = plain_functional(ens)
        m1 = law(((name, "1"),))
        m11 = law(((name, "1"), (name, "1")))
        if isinstance(m1, (int, Fraction)) and isinstance(m11, (int, Fraction)):
            pv = positivity_support_check(m1, m11)
            report.meta[f"positivity_{b}x{d}"] = {
                "support": list(pv.support), "positive": pv.positive,
                "variance": str(pv.variance), "m1_sq_le_4var": pv.m1_sq_le_4var,
            }
    report.meta["calibration"] = "closed-form limit laws"
    return report


def run_freeness(cfg: ExperimentConfig) -> Report:
    """Mixed moments and cumulants of A, A^T, A^G, A^L (and a second matrix B)."""
    report = Report("freeness")
    for b, d in cfg.dims:
        ensembles = _build_ensembles(cfg, b, d)
        names = sorted(ensembles)
        a = names[0]
        defaults = [f"{a}:G {a}", f"{a}:G {a}:T", f"{a}:G {a}:L", f"{a}:G {a}:G*"]
        if len(names) > 1:
            defaults.append(f"{a}:G {names[1]}:G")
        words = cfg.words or defaults
        cwords = cfg.cumulant_words or defaults
        report.rows += _moment_and_cumulant_rows(report.experiment, cfg, b, d, ensembles, words, cwords)
    report.meta["calibration"] = "closed-form limit laws"
    return report


# ---------------------------------------------------------------------------
# entry moments of Haar unitaries


@dataclass(frozen=True)
class EntryWord:
    """Product of entries u_ij or conj(u_ij), 1-based indices."""

    letters: tuple[tuple[int, int, bool], ...]

    @classmethod
    def parse(cls, text: str) -> EntryWord:
        letters = []
        for tok in text.split():
            conj = tok.endswith("*")
            body = tok.rstrip("*")
            if not body.startswith("u"):
                raise ArgumentError(f"bad entry letter {tok!r}")
            body = body[1:]
            if "," in body:
                i, j = body.split(",")
            elif len(body) == 2:
                i, j = body
            else:
                raise ArgumentError(f"write multi-digit entries as u<i>,<j>: {tok!r}")
            letters.append((int(i), int(j), conj))
        if not letters:
            raise ArgumentError("empty entry word")
        return cls(tuple(letters))

    def __str__(self):
        def one(i, j, c):
            s = f"u{i}{j}" if i < 10 and j < 10 else f"u{i},{j}"
            return s + ("*" if c else "")

        return " ".join(one(*x) for x in self.letters)

    def exact(self, M: int) -> Fraction:
        i = [x[0] for x in self.letters]
        j = [x[1] for x in self.letters]
        eps = EpsilonMap(tuple(STAR if c else "1" for _, _, c in self.letters))
        if eps.size % 2:
            return Fraction(0)
        return haar_entry_moment_interleaved(i, j, eps, M)


def entry_words(max_length: int, indices: int) -> list[EntryWord]:
    """All commutative entry words (multisets of letters) up to the given length."""
    alphabet = [(i, j, c) for c in (False, True) for i in range(1, indices + 1) for j in range(1, indices + 1)]
    out = []
    for k in range(1, max_length + 1):
        for combo in itertools.combinations_with_replacement(alphabet, k):
            out.append(EntryWord(combo))
    return out


def sample_haar_stack(M: int, samples: int, seed: int, threads: int = 1) -> np.ndarray:
    """Haar unitaries for sample indices 0..samples-1 (stream slot 0), stacked."""
    z = np.empty((samples, M, M), dtype=np.complex128)

    def fill(k):
        z[k] = _complex_gaussian(stream(seed, k, 0), (M, M))

    if threads <= 1:
        for k in range(samples):
            fill(k)
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, range(samples)))
    return haar_from_ginibre(z)


def run_entry_moments(cfg: ExperimentConfig) -> Report:
    """Monte Carlo entry moments of Haar unitaries against exact Weingarten sums."""
    report = Report("entry-moments")
    words = [EntryWord.parse(w) for w in cfg.words] if cfg.words else entry_words(cfg.max_length, cfg.indices)
    for b, d in cfg.dims:
        M = b * d
        if M > 16:
            raise ConfigError("entry-moments is meant for M <= 16")
        for w in words:
            if any(not (1 <= i <= M and 1 <= j <= M) for i, j, _ in w.letters):
                raise ConfigError(f"entry word {w} has indices outside [1, {M}]")
            if len(w.letters) > 2 * LIMITS.wg_integer_m:
                raise ConfigError(f"entry word {w} is too long")
        u = sample_haar_stack(M, cfg.samples, cfg.seed, cfg.threads)
        for w in words:
            prod = np.ones(cfg.samples, dtype=np.complex128)
            for i, j, c in w.letters:
                x = u[:, i - 1, j - 1]
                prod = prod * (np.conj(x) if c else x)
            est = estimate_from_values(prod, cfg.seed)
            tol = cfg.tolerance.se_multiplier * est.std_error + ABS_FLOOR
            report.rows.append(VerdictRow(report.experiment, str(w), b, d, cfg.samples, cfg.seed,
                                          _complex(w.exact(M)), est.mean, est.std_error, tol))
    return report


# ---------------------------------------------------------------------------
# invariance and blocks


def run_invariance(cfg: ExperimentConfig) -> Report:
    """Difference between word moments before and after conjugation by a fixed Haar unitary."""
    report = Report("invariance")
    for b, d in cfg.dims:
        ensembles = _build_ensembles(cfg, b, d)
        a = sorted(ensembles)[0]
        words = cfg.words or [f"{a}:G {a}", f"{a}:T {a}", f"{a} {a}"]
        for w in words:
            ws = WordSpec.of(w)
            probe = unitary_invariance_probe({k: ensembles[k] for k in ws.matrices()}, ws, cfg.samples,
                                             cfg.seed, cfg.threads, cfg.tolerance.se_multiplier)
            tol = cfg.tolerance.se_multiplier * probe.combined_se + ABS_FLOOR
            report.rows.append(VerdictRow(report.experiment, f"delta({ws})", b, d, cfg.samples, cfg.seed,
                                          0j, probe.difference, probe.combined_se, tol))
    return report


def run_blocks(cfg: ExperimentConfig) -> Report:
    """Exhaustive classifier-versus-exponent sweep for every (p, q)."""
    words = cfg.words or None
    m = cfg.m if cfg.m is not None else len(diagrams._as_word(words[0]).symbols)
    rows = diagrams.blocks_sweep(m, words, cfg.grid)
    report = Report("blocks", block_rows=rows)
    report.meta["with_word"] = words is None or len(words) > 1
    report.meta["m"] = m
    report.meta["pairs"] = len(rows)
    report.meta["exceptions"] = sum(1 for r in rows if not r.consistent)
    gamma = "G" * m
    if words is None or gamma in [diagrams._as_word(w).symbols for w in words]:
        got = {(r.p, r.q) for r in rows if r.word == gamma and r.verdict.survives}
        report.meta["gamma_survivors_match"] = got == diagrams.expected_all_gamma_survivors(m)
        report.meta["gamma_signs_match"] = all(
            r.leading_coefficient == diagrams.ap_sign(r.join_blocks)
            for r in rows if r.word == gamma and r.verdict.survives
        )
    return report


RUNNERS = {
    "entry-moments": run_entry_moments,
    "limit-distribution": run_limit_distribution,
    "freeness": run_freeness,
    "blocks": run_blocks,
    "invariance": run_invariance,
}


def run(cfg: ExperimentConfig) -> Report:
    return RUNNERS[cfg.experiment](cfg)
