"""Free cumulants over the non-crossing lattice and the partial-transpose limit laws.

Words are tuples of letters. For the partial-transpose predictions a plain
letter is ``(r, nu)`` with ``r`` a matrix id and ``nu`` in ``{"1", "*"}``; a
symbolled letter is ``(r, symbol, nu)`` with ``symbol`` in ``I, T, G, L``
(``G`` the partial transpose, ``L`` the left partial transpose).

A moment functional is any callable ``phi(word) -> value``. Values stay exact
(``int``/``Fraction``) whenever the inputs are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Sequence

from .errors import ArgumentError
from .partitions import (
    STAR,
    SetPartition,
    canonical_symbol,
    enumerate_nc12_on,
    enumerate_noncrossing,
    relative_nc_complement,
)
from .weingarten import catalan

Functional = Callable[[tuple], object]


class MomentFunctional:
    """Dictionary-backed moment lookup.

    ``adjoint`` maps a letter to its adjoint letter; when given, a missing word
    is answered by conjugating the value of its adjoint (reversed, starred) word.
    """

    def __init__(self, values: Mapping, adjoint: Callable | None = None):
        self._values = {tuple(k): v for k, v in values.items()}
        self._adjoint = adjoint

    def __call__(self, word) -> object:
        word = tuple(word)
        if word in self._values:
            return self._values[word]
        if self._adjoint is not None:
            adj = tuple(self._adjoint(x) for x in reversed(word))
            if adj in self._values:
                return _conj(self._values[adj])
        raise ArgumentError(f"moment of word {word!r} is not available")

    def words(self):
        return list(self._values)


def _conj(x):
    return x.conjugate() if isinstance(x, complex) else x


def adjoint_letter(letter):
    """Flip the adjoint flag of a ``(r, nu)`` or ``(r, symbol, nu)`` letter."""
    *head, nu = letter
    return (*head, "1" if nu == STAR else STAR)


@lru_cache(maxsize=None)
def _nc(n: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    # 0-based blocks of every NC(n) partition, the one-block partition last
    parts = [tuple(tuple(x - 1 for x in b) for b in p.blocks) for p in enumerate_noncrossing(range(1, n + 1))]
    full = tuple(range(n))
    parts.sort(key=lambda p: p == (full,))
    return tuple(parts)


def _lookup(phi, word):
    try:
        return phi(word)
    except (KeyError, IndexError) as exc:
        raise ArgumentError(f"moment of word {word!r} is not available") from exc


def cumulants_from_moments(phi: Functional, word: Sequence, cache: dict | None = None):
    """Free cumulant kappa_n(word) from phi(word) = sum over NC(n) of kappa_pi.

    ``cache`` may be shared across calls with the same ``phi``.
    """
    cache = {} if cache is None else cache

    def kappa(w):
        if w in cache:
            return cache[w]
        total = _lookup(phi, w)
        for blocks in _nc(len(w))[:-1]:
            term = 1
            for b in blocks:
                term = term * kappa(tuple(w[i] for i in b))
            total = total - term
        cache[w] = total
        return total

    word = tuple(word)
    if not word:
        raise ArgumentError("cumulants need a nonempty word")
    return kappa(word)


def moments_from_cumulants(kappa: Functional, word: Sequence):
    """phi(word) = sum over NC(n) of the product of block cumulants."""
    word = tuple(word)
    if not word:
        return 1
    total = 0
    for blocks in _nc(len(word)):
        term = 1
        for b in blocks:
            term = term * _lookup(kappa, tuple(word[i] for i in b))
        total = total + term
    return total


# ---------------------------------------------------------------------------
# limits for partial transposes


def pt_limit_cumulants(phi: Functional, word: Sequence):
    """Limit free cumulant of ((A_{r1}^G)^{nu1}, ..., (A_{rm}^G)^{num}).

    Order 1 and 2 are read off the plain rank-one and rank-two limits; every
    higher order vanishes.
    """
    word = tuple(word)
    m = len(word)
    if m == 0:
        raise ArgumentError("cumulants need a nonempty word")
    if m == 1:
        return _lookup(phi, word)
    if m == 2:
        return _lookup(phi, word) - _lookup(phi, word[:1]) * _lookup(phi, word[1:])
    return 0


def pt_limit_moments(phi: Functional, word: Sequence):
    """Limit moment E tr(prod_s (A_{r_s}^G)^{nu_s}) as a sum over NC_{1,2}(m)."""
    word = tuple(word)
    m = len(word)
    if m == 0:
        return 1
    total = 0
    for rho in enumerate_nc12_on(range(1, m + 1)):
        term = 1
        for b in rho.blocks:
            if len(b) == 1:
                term = term * _lookup(phi, (word[b[0] - 1],))
            else:
                s, t = b
                pair = (word[s - 1], word[t - 1])
                term = term * (_lookup(phi, pair) - _lookup(phi, pair[:1]) * _lookup(phi, pair[1:]))
        total = total + term
    return total


def transposed_functional(phi: Functional) -> Functional:
    """Moments of (A_r^T): tr(A^T_{r1} ... A^T_{rk}) = tr(A_{rk} ... A_{r1})."""
    return lambda word: phi(tuple(reversed(tuple(word))))


def free_product_moment(word: Sequence, family_of: Callable, functionals: Mapping, caches: dict | None = None):
    """Moment of a word whose letters come from mutually free families.

    Mixed free cumulants vanish, so only partitions whose blocks are
    single-family contribute.
    """
    word = tuple(word)
    fams = [family_of(x) for x in word]
    if len(set(fams)) <= 1:
        return _lookup(functionals[fams[0]], word) if word else 1
    caches = {} if caches is None else caches
    total = 0
    for blocks in _nc(len(word)):
        term = 1
        for b in blocks:
            fam = fams[b[0]]
            if any(fams[i] != fam for i in b):
                term = 0
                break
            sub = tuple(word[i] for i in b)
            term = term * cumulants_from_moments(functionals[fam], sub, caches.setdefault(fam, {}))
        total = total + term
    return total


def nongamma_limit_moment(phi: Functional, word: Sequence):
    """Limit moment of a word in A, A^T, A^L letters ``(r, symbol, nu)``.

    The three families are asymptotically free; A^T moments are reversed
    plain moments and A^L = (A^T)^G follows the partial-transpose law of A^T.
    """
    word = tuple((r, canonical_symbol(s), nu) for r, s, nu in word)
    if any(s == "G" for _, s, _ in word):
        raise ArgumentError("partial-transpose letters are not allowed here")
    phi_t = transposed_functional(phi)
    functionals = {
        "I": lambda w: phi(tuple((r, nu) for r, _, nu in w)),
        "T": lambda w: phi_t(tuple((r, nu) for r, _, nu in w)),
        "L": lambda w: pt_limit_moments(phi_t, tuple((r, nu) for r, _, nu in w)),
    }
    return free_product_moment(word, lambda x: x[1], functionals)


def mixed_word_limit(phi: Functional, word: Sequence, complement: Functional | None = None):
    """Limit of E tr over a word of ``(r, symbol, nu)`` letters.

    With S the partial-transpose positions, sums over rho in NC_{1,2}(S) the
    rho-cumulants of the G letters times the moments over the blocks of the
    coarsest compatible non-crossing partition of the remaining positions.
    ``complement`` evaluates those moments; by default
    :func:`nongamma_limit_moment`.
    """
    word = tuple((r, canonical_symbol(s), nu) for r, s, nu in word)
    m = len(word)
    if m == 0:
        return 1
    complement = complement or (lambda w: nongamma_limit_moment(phi, w))
    gamma_pos = [s for s in range(1, m + 1) if word[s - 1][1] == "G"]
    plain = [(r, nu) for r, _, nu in word]
    total = 0
    for rho in enumerate_nc12_on(gamma_pos):
        term = 1
        for b in rho.blocks:
            term = term * pt_limit_cumulants(phi, tuple(plain[s - 1] for s in b))
        if term == 0:
            continue
        for d in relative_nc_complement(rho, m).blocks:
            term = term * _lookup(complement, tuple(word[s - 1] for s in d))
        total = total + term
    return total


def limit_functional(phi: Functional) -> Functional:
    """Functional on ``(r, symbol, nu)`` words giving the predicted limit moments."""
    cache: dict = {}

    def value(word):
        word = tuple(word)
        if word not in cache:
            cache[word] = mixed_word_limit(phi, word)
        return cache[word]

    return value


# ---------------------------------------------------------------------------
# explicit laws


def semicircle_moments(mean, variance, n: int):
    """n-th moment of the semicircle law with the given mean and variance."""
    if variance < 0:
        raise ArgumentError("variance must be nonnegative")
    if n < 0:
        raise ArgumentError("order must be nonnegative")
    total = 0
    for k in range(0, n + 1, 2):
        total = total + math.comb(n, k) * mean ** (n - k) * catalan(k // 2) * variance ** (k // 2)
    return total


@dataclass(frozen=True)
class PositivityVerdict:
    support: tuple[float, float]
    positive: bool
    variance: object
    m1_sq_le_4var: bool  # the inequality m1^2 <= 4 (m11 - m1^2), reported for comparison


def positivity_support_check(m1, m11) -> PositivityVerdict:
    """Support of the translated semicircle with mean m1 and variance m11 - m1^2."""
    v = m11 - m1 * m1
    if v < 0:
        raise ArgumentError(f"negative variance {v}")
    r = 2 * math.sqrt(v)
    positive = m1 >= 0 and m1 * m1 >= 4 * v
    return PositivityVerdict((float(m1) - r, float(m1) + r), bool(positive), v, bool(m1 * m1 <= 4 * v))


def narayana(k: int, j: int) -> int:
    return math.comb(k, j) * math.comb(k, j - 1) // k


def marchenko_pastur_moment(k: int, lam):
    """k-th moment of the free Poisson law with ratio ``lam`` and unit mean."""
    if k == 0:
        return 1
    return sum(narayana(k, j) * lam ** (j - 1) for j in range(1, k + 1))


def circular_moment(flags: Sequence[str], variance=1):
    """*-moment of a circular element: non-crossing pairings joining "1" with "*"."""
    flags = tuple(flags)
    n = len(flags)
    if n % 2:
        return 0

    @lru_cache(maxsize=None)
    def count(lo, hi):
        if lo >= hi:
            return 1
        total = 0
        for j in range(lo + 1, hi, 2):
            if flags[lo] != flags[j]:
                total += count(lo + 1, j) * count(j + 1, hi)
        return total

    return count(0, n) * variance ** (n // 2)


def haar_unitary_moment(flags: Sequence[str]):
    """Limit *-moment of a Haar unitary: 1 iff as many "1" as "*" letters."""
    flags = tuple(flags)
    return 1 if flags.count("1") == flags.count(STAR) else 0


def semicircle_flag_moment(flags: Sequence[str], mean=0, variance=1):
    return semicircle_moments(mean, variance, len(tuple(flags)))


def free_product_functional(laws: Mapping) -> Functional:
    """Plain functional over ``(r, nu)`` words for mutually free matrices.

    ``laws[r]`` maps a tuple of adjoint flags to the limit *-moment of A_r.
    """
    functionals = {r: (lambda law: lambda w: law(tuple(nu for _, nu in w)))(law) for r, law in laws.items()}
    caches: dict = {}

    def phi(word):
        word = tuple(word)
        for r, _ in word:
            if r not in functionals:
                raise ArgumentError(f"no law for matrix {r!r}")
        return free_product_moment(word, lambda x: x[0], functionals, caches)

    return phi


def rank_limits(phi: Functional, ids: Sequence) -> dict:
    """The rank-one and rank-two limits m_(nu)(r), m_(nu1,nu2)(r, l) as a flat table."""
    out = {}
    for r in ids:
        for nu in ("1", STAR):
            out[((r, nu),)] = phi(((r, nu),))
    for r in ids:
        for l in ids:
            for nu1 in ("1", STAR):
                for nu2 in ("1", STAR):
                    w = ((r, nu1), (l, nu2))
                    out[w] = phi(w)
    return out


def restrict(word: Sequence, block: SetPartition | Sequence[int]):
    return tuple(word[s - 1] for s in block)


__all__ = [
    "Fraction",
    "MomentFunctional",
    "PositivityVerdict",
    "adjoint_letter",
    "circular_moment",
    "cumulants_from_moments",
    "free_product_functional",
    "free_product_moment",
    "haar_unitary_moment",
    "limit_functional",
    "marchenko_pastur_moment",
    "mixed_word_limit",
    "moments_from_cumulants",
    "nongamma_limit_moment",
    "positivity_support_check",
    "pt_limit_cumulants",
    "pt_limit_moments",
    "rank_limits",
    "semicircle_moments",
    "transposed_functional",
]
