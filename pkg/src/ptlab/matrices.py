"""Random matrix ensembles, the four symbol operators, word traces and seeded Monte Carlo.

Every draw uses its own counter-based stream keyed by (seed, sample index,
matrix slot), so estimates do not depend on thread count or execution order.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ArgumentError, ConfigError
from .partitions import STAR, Permutation, canonical_symbol

KINDS = ("haar-unitary", "wishart", "ginibre", "gue", "deterministic", "haar-conjugated")
# reserved sample index for one-off draws (e.g. the fixed conjugating unitary)
FIXED_DRAW = 2**63 - 1


def stream(seed: int, sample: int, slot: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(sample), int(slot)])))


@dataclass(frozen=True, eq=False)
class ComplexMatrix:
    """Read-only M x M complex matrix with (b, d) block structure, M = b d."""

    data: np.ndarray
    b: int
    d: int

    def __post_init__(self):
        a = np.array(self.data, dtype=np.complex128)
        M = self.b * self.d
        if self.b < 1 or self.d < 1:
            raise ArgumentError("block sizes must be positive")
        if a.shape != (M, M):
            raise ArgumentError(f"expected a {M}x{M} matrix for b={self.b}, d={self.d}, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ArgumentError("matrix has non-finite entries")
        a.setflags(write=False)
        object.__setattr__(self, "data", a)

    @property
    def M(self) -> int:
        return self.b * self.d

    def with_data(self, data: np.ndarray) -> ComplexMatrix:
        return ComplexMatrix(data, self.b, self.d)


def _raw(a, b=None, d=None):
    if isinstance(a, ComplexMatrix):
        return a.data, a.b, a.d
    if b is None or d is None:
        raise ArgumentError("block sizes (b, d) are required")
    a = np.asarray(a)
    if a.shape != (b * d, b * d):
        raise ArgumentError(f"matrix shape {a.shape} inconsistent with b={b}, d={d}")
    return a, b, d


_AXES = {"I": (0, 1, 2, 3), "G": (0, 3, 2, 1), "L": (2, 1, 0, 3), "T": (2, 3, 0, 1)}


def symbol_array(a: np.ndarray, b: int, d: int, symbol: str, adjoint: bool = False) -> np.ndarray:
    """Array form of :func:`apply_symbol`."""
    sym = canonical_symbol(symbol)
    M = b * d
    lead = a.shape[:-2]
    out = a.reshape(*lead, b, d, b, d)
    k = len(lead)
    out = out.transpose(*range(k), *(k + x for x in _AXES[sym])).reshape(*lead, M, M)
    if adjoint:
        out = np.conj(np.swapaxes(out, -1, -2))
    return out


def apply_symbol(A, symbol: str, adjoint: bool = False, b: int | None = None, d: int | None = None):
    """A^symbol (then the adjoint if asked), symbol in I, T, G (partial transpose), L (left partial transpose).

    [A^G]_{(a1,b1),(a2,b2)} = [A]_{(a1,b2),(a2,b1)} with row/column index (a-1) d + b.
    """
    a, b, d = _raw(A, b, d)
    out = np.ascontiguousarray(symbol_array(a, b, d, symbol, adjoint))
    if isinstance(A, ComplexMatrix):
        return A.with_data(out)
    return out


# ---------------------------------------------------------------------------
# words


@dataclass(frozen=True)
class Letter:
    matrix: str
    symbol: str = "I"
    adjoint: bool = False

    def __post_init__(self):
        object.__setattr__(self, "symbol", canonical_symbol(self.symbol))

    def __str__(self):
        s = self.matrix if self.symbol == "I" else f"{self.matrix}:{self.symbol}"
        return s + ("*" if self.adjoint else "")

    @property
    def nu(self) -> str:
        return STAR if self.adjoint else "1"

    def as_tuple(self) -> tuple:
        """(r, symbol, nu) letter used by the limit predictions."""
        return (self.matrix, self.symbol, self.nu)


@dataclass(frozen=True)
class WordSpec:
    letters: tuple[Letter, ...]

    def __post_init__(self):
        if not self.letters:
            raise ArgumentError("a word needs at least one letter")

    @classmethod
    def parse(cls, text: str) -> WordSpec:
        """Parse e.g. ``"A:G A:G* B:T A*"``."""
        letters = []
        for tok in text.split():
            adj = tok.endswith("*")
            tok = tok.rstrip("*")
            name, _, sym = tok.partition(":")
            if not name:
                raise ArgumentError(f"bad letter in word {text!r}")
            letters.append(Letter(name, sym or "I", adj))
        return cls(tuple(letters))

    @classmethod
    def of(cls, word) -> WordSpec:
        if isinstance(word, WordSpec):
            return word
        if isinstance(word, str):
            return cls.parse(word)
        return cls(tuple(x if isinstance(x, Letter) else Letter(*x) for x in word))

    def __str__(self):
        return " ".join(map(str, self.letters))

    def __len__(self):
        return len(self.letters)

    def matrices(self) -> list[str]:
        return sorted({x.matrix for x in self.letters})

    def as_tuples(self) -> tuple:
        return tuple(x.as_tuple() for x in self.letters)

    def rotate(self, k: int) -> WordSpec:
        k %= len(self.letters)
        return WordSpec(self.letters[k:] + self.letters[:k])


def _normalized_trace_of_product(mats: Sequence[np.ndarray]) -> complex:
    M = mats[0].shape[0]
    if len(mats) == 1:
        return complex(np.trace(mats[0])) / M
    left = mats[0]
    for x in mats[1:-1]:
        left = left @ x
    # tr(XY) = sum_ij X_ij Y_ji
    return complex(np.sum(left * mats[-1].T)) / M


class _SymbolCache:
    def __init__(self, matrices: Mapping[str, ComplexMatrix]):
        self.matrices = matrices
        self.cache: dict = {}

    def get(self, letter: Letter) -> np.ndarray:
        key = (letter.matrix, letter.symbol, letter.adjoint)
        if key not in self.cache:
            try:
                A = self.matrices[letter.matrix]
            except KeyError:
                raise ArgumentError(f"no matrix assigned to {letter.matrix!r}") from None
            self.cache[key] = symbol_array(A.data, A.b, A.d, letter.symbol, letter.adjoint)
        return self.cache[key]


def _check_dims(matrices: Mapping[str, ComplexMatrix]) -> None:
    shapes = {(A.b, A.d) for A in matrices.values()}
    if len(shapes) > 1:
        raise ArgumentError(f"matrices have different block sizes: {sorted(shapes)}")


def word_trace(word, matrices: Mapping[str, ComplexMatrix], _cache: _SymbolCache | None = None) -> complex:
    """Normalized trace of the product of the symbol-applied letters."""
    word = WordSpec.of(word)
    cache = _cache or _SymbolCache(matrices)
    if _cache is None:
        _check_dims({k: matrices[k] for k in word.matrices() if k in matrices})
    return _normalized_trace_of_product([cache.get(x) for x in word.letters])


def word_trace_sigma(sigma: Permutation, matrices: Sequence) -> complex:
    """tr_sigma(A_1, ..., A_m): product over the cycles of sigma of normalized traces."""
    mats = [A.data if isinstance(A, ComplexMatrix) else np.asarray(A) for A in matrices]
    if len(mats) != sigma.size:
        raise ArgumentError("need one matrix per point of sigma")
    if len({x.shape for x in mats}) > 1:
        raise ArgumentError("matrices have different sizes")
    out = 1 + 0j
    for cyc in sigma.cycles():
        out *= _normalized_trace_of_product([mats[k - 1] for k in cyc])
    return out


# ---------------------------------------------------------------------------
# ensembles


@dataclass(frozen=True)
class EnsembleSpec:
    """kind in haar-unitary, wishart, ginibre, gue, deterministic, haar-conjugated."""

    kind: str
    b: int
    d: int
    n: int | None = None  # wishart: number of columns of X
    matrix: np.ndarray | None = field(default=None, compare=False)  # deterministic
    inner: EnsembleSpec | None = None  # haar-conjugated

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown ensemble kind {self.kind!r}")
        if self.b < 1 or self.d < 1:
            raise ConfigError("dims must be positive")
        if self.kind == "wishart" and (self.n is None or self.n < 1):
            raise ConfigError("wishart needs n >= 1")
        if self.kind == "deterministic":
            if self.matrix is None:
                raise ConfigError("deterministic ensemble needs a matrix")
            m = np.array(self.matrix, dtype=np.complex128)
            if m.shape != (self.M, self.M):
                raise ConfigError(f"deterministic matrix must be {self.M}x{self.M}")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)
        if self.kind == "haar-conjugated":
            if self.inner is None:
                raise ConfigError("haar-conjugated needs an inner ensemble")
            if (self.inner.b, self.inner.d) != (self.b, self.d):
                raise ConfigError("inner ensemble must have the same dims")

    @property
    def M(self) -> int:
        return self.b * self.d

    @property
    def lam(self) -> float | None:
        return self.M / self.n if self.kind == "wishart" else None

    @classmethod
    def from_dict(cls, obj: Mapping, b: int, d: int) -> EnsembleSpec:
        """Build from a config entry; dims come from the experiment's ladder."""
        if not isinstance(obj, Mapping) or "kind" not in obj:
            raise ConfigError(f"ensemble entry needs a 'kind': {obj!r}")
        kind = obj["kind"]
        extra = set(obj) - {"kind", "n", "lam", "matrix", "diag", "file", "inner"}
        if extra:
            raise ConfigError(f"unknown ensemble keys {sorted(extra)}")
        n = obj.get("n")
        if kind == "wishart" and n is None:
            if "lam" not in obj:
                raise ConfigError("wishart needs 'n' or 'lam'")
            lam = float(obj["lam"])
            if lam <= 0:
                raise ConfigError("lam must be positive")
            n = max(1, round(b * d / lam))
        matrix = None
        if kind == "deterministic":
            matrix = _matrix_from_config(obj, b * d)
        inner = cls.from_dict(obj["inner"], b, d) if kind == "haar-conjugated" and "inner" in obj else None
        return cls(kind, b, d, None if n is None else int(n), matrix, inner)

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.n is not None:
            out["n"] = self.n
        if self.inner is not None:
            out["inner"] = self.inner.to_dict()
        return out


def _matrix_from_config(obj, M):
    if "diag" in obj:
        diag = np.array([complex(*x) if isinstance(x, list) else complex(x) for x in obj["diag"]])
        if diag.shape != (M,):
            raise ConfigError(f"diag must have {M} entries")
        return np.diag(diag)
    if "matrix" in obj:
        rows = obj["matrix"]
        return np.array([[complex(*x) if isinstance(x, list) else complex(x) for x in row] for row in rows])
    if "file" in obj:
        return load_matrix(obj["file"]).data
    raise ConfigError("deterministic ensemble needs 'diag', 'matrix' or 'file'")


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    # unit variance: E|z|^2 = 1
    z = rng.standard_normal((*shape, 2))
    return (z[..., 0] + 1j * z[..., 1]) * (1 / math.sqrt(2))


def haar_from_ginibre(z: np.ndarray) -> np.ndarray:
    """Orthonormalize and fix the phases so the law is exactly Haar; works on stacks."""
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    phase = diag / np.abs(diag)
    return q * phase[..., None, :]


def sample_haar_unitary(M: int, rng: np.random.Generator) -> np.ndarray:
    if M < 1:
        raise ArgumentError("M must be positive")
    return haar_from_ginibre(_complex_gaussian(rng, (M, M)))


def sample_wishart(b: int, d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """(1/n) X X^* with X an M x n matrix of unit-variance complex Gaussians."""
    if n < 1:
        raise ArgumentError("n must be positive")
    x = _complex_gaussian(rng, (b * d, n))
    w = (x @ x.conj().T) / n
    return (w + w.conj().T) / 2


def sample_ginibre(M: int, rng: np.random.Generator) -> np.ndarray:
    return _complex_gaussian(rng, (M, M)) / math.sqrt(M)


def sample_gue(M: int, rng: np.random.Generator) -> np.ndarray:
    g = _complex_gaussian(rng, (M, M))
    return (g + g.conj().T) / math.sqrt(2 * M)


def sample(spec: EnsembleSpec, rng: np.random.Generator) -> ComplexMatrix:
    M = spec.M
    if spec.kind == "haar-unitary":
        a = sample_haar_unitary(M, rng)
    elif spec.kind == "wishart":
        a = sample_wishart(spec.b, spec.d, spec.n, rng)
    elif spec.kind == "ginibre":
        a = sample_ginibre(M, rng)
    elif spec.kind == "gue":
        a = sample_gue(M, rng)
    elif spec.kind == "deterministic":
        a = spec.matrix
    else:
        inner = sample(spec.inner, rng).data
        u = sample_haar_unitary(M, rng)
        a = u @ inner @ u.conj().T
    return ComplexMatrix(a, spec.b, spec.d)


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class MomentEstimate:
    mean: complex
    std_error: float  # max of the real and imaginary standard errors
    samples: int
    seed: int
    se_re: float = 0.0
    se_im: float = 0.0

    def to_dict(self) -> dict:
        return {
            "mean_re": self.mean.real, "mean_im": self.mean.imag, "std_error": self.std_error,
            "se_re": self.se_re, "se_im": self.se_im, "samples": self.samples, "seed": self.seed,
        }


def estimate_from_values(values: np.ndarray, seed: int) -> MomentEstimate:
    values = np.asarray(values, dtype=np.complex128)
    n = len(values)
    mean = complex(values.mean())
    if n > 1:
        se_re = float(values.real.std(ddof=1) / math.sqrt(n))
        se_im = float(values.imag.std(ddof=1) / math.sqrt(n))
    else:
        se_re = se_im = math.inf
    return MomentEstimate(mean, max(se_re, se_im), n, seed, se_re, se_im)


def _slots(ensembles: Mapping[str, EnsembleSpec]) -> dict[str, int]:
    return {name: i for i, name in enumerate(sorted(ensembles))}


def sample_matrices(ensembles: Mapping[str, EnsembleSpec], seed: int, index: int) -> dict[str, ComplexMatrix]:
    slots = _slots(ensembles)
    return {name: sample(spec, stream(seed, index, slots[name])) for name, spec in ensembles.items()}


def per_sample_values(
    func: Callable[[dict[str, ComplexMatrix]], np.ndarray],
    ensembles: Mapping[str, EnsembleSpec],
    samples: int,
    seed: int,
    threads: int = 1,
) -> np.ndarray:
    """Array whose row k is ``func`` of the k-th joint draw; independent of ``threads``."""
    if samples < 1:
        raise ArgumentError("samples must be positive")

    def one(k):
        return np.asarray(func(sample_matrices(ensembles, seed, k)))

    if threads <= 1:
        rows = [one(k) for k in range(samples)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, range(samples)))
    return np.stack(rows)


def _ensemble_map(ensemble, words) -> dict[str, EnsembleSpec]:
    """A single spec applies to every matrix named in ``words``; a mapping is used as is."""
    if isinstance(ensemble, EnsembleSpec):
        if isinstance(words, WordSpec):
            words = [words]
        return {name: ensemble for w in words for name in w.matrices()}
    return dict(ensemble)


def _check_ensembles(ensembles: Mapping[str, EnsembleSpec], names: Sequence[str]) -> None:
    missing = [n for n in names if n not in ensembles]
    if missing:
        raise ArgumentError(f"no ensemble for matrices {missing}")
    if len({(e.b, e.d) for e in ensembles.values()}) > 1:
        raise ArgumentError("all ensembles must share (b, d)")


def mc_word_values(words, ensembles, samples: int, seed: int, threads: int = 1) -> np.ndarray:
    """Per-sample normalized traces, shape (samples, len(words)); all words share each draw."""
    words = [WordSpec.of(w) for w in words]
    ensembles = _ensemble_map(ensembles, words)
    _check_ensembles(ensembles, sorted({n for w in words for n in w.matrices()}))

    def evaluate(mats):
        cache = _SymbolCache(mats)
        return np.array([word_trace(w, mats, cache) for w in words], dtype=np.complex128)

    return per_sample_values(evaluate, ensembles, samples, seed, threads)


def mc_word_moments(words, ensembles, samples: int, seed: int, threads: int = 1) -> list[MomentEstimate]:
    if samples < 2:
        raise ArgumentError("need at least 2 samples")
    vals = mc_word_values(words, ensembles, samples, seed, threads)
    return [estimate_from_values(vals[:, i], seed) for i in range(vals.shape[1])]


def mc_word_moment(word, ensemble, samples: int, seed: int, threads: int = 1) -> MomentEstimate:
    """Sample mean and standard error of the normalized word trace."""
    word = WordSpec.of(word)
    return mc_word_moments([word], _ensemble_map(ensemble, word), samples, seed, threads)[0]


@dataclass(frozen=True)
class InvarianceReport:
    word: str
    plain: MomentEstimate
    conjugated: MomentEstimate
    difference: complex
    combined_se: float
    se_multiplier: float

    @property
    def agrees(self) -> bool:
        tol = self.se_multiplier * self.combined_se + 1e-12
        return abs(self.difference.real) <= tol and abs(self.difference.imag) <= tol


def conjugated_by(ensembles: Mapping[str, EnsembleSpec], seed: int) -> tuple[np.ndarray, Callable]:
    """One fixed Haar unitary V and a function conjugating every draw by it."""
    any_spec = next(iter(ensembles.values()))
    v = sample_haar_unitary(any_spec.M, stream(seed, FIXED_DRAW, 0))

    def conj(mats):
        return {k: A.with_data(v @ A.data @ v.conj().T) for k, A in mats.items()}

    return v, conj


def unitary_invariance_probe(ensemble, word, samples: int, seed: int, threads: int = 1, se_multiplier: float = 4.0) -> InvarianceReport:
    """Compare a word moment with the same moment after conjugating every matrix by one fixed Haar unitary."""
    word = WordSpec.of(word)
    ensembles = _ensemble_map(ensemble, word)
    _check_ensembles(ensembles, word.matrices())
    _, conj = conjugated_by(ensembles, seed)

    def plain(mats):
        return np.array([word_trace(word, mats)])

    def twisted(mats):
        return np.array([word_trace(word, conj(mats))])

    a = estimate_from_values(per_sample_values(plain, ensembles, samples, seed, threads)[:, 0], seed)
    # independent draws for the conjugated side
    b = estimate_from_values(per_sample_values(twisted, ensembles, samples, seed + 1, threads)[:, 0], seed + 1)
    combined = math.hypot(a.std_error, b.std_error)
    return InvarianceReport(str(word), a, b, b.mean - a.mean, combined, se_multiplier)


@dataclass(frozen=True)
class CumulantEstimate:
    value: complex
    std_error: float
    order: int
    samples: int


def _unnormalized(word: WordSpec, mats) -> complex:
    return word_trace(word, mats) * next(iter(mats.values())).M


def trace_cumulant_estimate(ensemble, words, r: int, samples: int, seed: int, threads: int = 1) -> CumulantEstimate:
    """Classical cumulant of order r in {1, 2} of the unnormalized traces Tr(word)."""
    if r not in (1, 2):
        raise ArgumentError("only orders 1 and 2 are supported")
    words = [WordSpec.of(w) for w in words]
    if len(words) == 1:
        words = words * r
    if len(words) != r:
        raise ArgumentError(f"need {r} words for a cumulant of order {r}")
    ensembles = _ensemble_map(ensemble, words)
    _check_ensembles(ensembles, sorted({n for w in words for n in w.matrices()}))
    vals = per_sample_values(lambda mats: np.array([_unnormalized(w, mats) for w in words]), ensembles, samples, seed, threads)
    n = len(vals)
    if r == 1:
        est = estimate_from_values(vals[:, 0], seed)
        return CumulantEstimate(est.mean, est.std_error, 1, n)
    x, y = vals[:, 0], vals[:, 1]
    xc, yc = x - x.mean(), y - y.mean()
    prod = xc * yc
    k2 = complex(prod.sum() / (n - 1))
    se = float(np.abs(prod).std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return CumulantEstimate(k2, se, 2, n)


# ---------------------------------------------------------------------------
# binary dump: "FPTM", u32 M, u32 b, u32 d, then row-major little-endian complex128

_HEADER = struct.Struct("<4sIII")


def dump_matrix(A: ComplexMatrix, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(b"FPTM", A.M, A.b, A.d))
        fh.write(np.ascontiguousarray(A.data, dtype="<c16").tobytes())


def load_matrix(path) -> ComplexMatrix:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ArgumentError("truncated matrix file")
        magic, M, b, d = _HEADER.unpack(head)
        if magic != b"FPTM" or M != b * d:
            raise ArgumentError("not a matrix dump")
        body = fh.read()
    if len(body) != 16 * M * M:
        raise ArgumentError("matrix dump has the wrong length")
    return ComplexMatrix(np.frombuffer(body, dtype="<c16").reshape(M, M).copy(), b, d)
