"""Unitary Weingarten function and exact entry moments of Haar unitaries.

``Wg_M`` is obtained by solving the class-function form of the convolution
identity

    sum_{tau in S_m} M^{#(sigma tau^-1)} Wg_M(tau) = [sigma = id]

which is a square system of size p(m) (number of integer partitions of m).
It is solved either over Q(M) (symbolic) or over Q at a fixed integer M.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Sequence

from .errors import ArgumentError, ResourceLimitError, SingularSystemError
from .limits import LIMITS
from .partitions import (
    EpsilonMap,
    PairPartition,
    Permutation,
    cycle_structure_of_join,
    enumerate_eps_pairings,
    join,
)
from .ratfunc import RationalFunction


@dataclass(frozen=True)
class CycleType:
    """A conjugacy class of S_m, keyed by its parts in decreasing order."""

    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(sorted((int(x) for x in self.parts), reverse=True))
        if not parts or any(x < 1 for x in parts):
            raise ArgumentError(f"cycle type needs positive parts, got {self.parts}")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def of(cls, *parts: int) -> CycleType:
        return cls(parts)

    @classmethod
    def from_permutation(cls, sigma: Permutation) -> CycleType:
        return cls(sigma.cycle_type())

    @property
    def m(self) -> int:
        return sum(self.parts)

    @property
    def num_cycles(self) -> int:
        return len(self.parts)

    def __str__(self):
        return "{" + ",".join(map(str, self.parts)) + "}"


def _as_cycle_type(ct) -> CycleType:
    if isinstance(ct, CycleType):
        return ct
    if isinstance(ct, Permutation):
        return CycleType.from_permutation(ct)
    return CycleType(tuple(ct))


def catalan(r: int) -> int:
    if r < 0:
        raise ArgumentError("Catalan index must be nonnegative")
    return comb(2 * r, r) // (r + 1)


def c_of_sigma(ct) -> int:
    """Product over cycles of length l of (-1)^(l-1) Cat_{l-1}."""
    out = 1
    for ell in _as_cycle_type(ct).parts:
        out *= (-1) ** (ell - 1) * catalan(ell - 1)
    return out


def integer_partitions(m: int) -> list[tuple[int, ...]]:
    """Partitions of m as decreasing tuples, in reverse lexicographic order."""
    out = []

    def rec(rest, cap, acc):
        if rest == 0:
            out.append(tuple(acc))
            return
        for k in range(min(rest, cap), 0, -1):
            acc.append(k)
            rec(rest - k, k, acc)
            acc.pop()

    rec(m, m, [])
    return out


def _num_cycles(perm: tuple[int, ...]) -> int:
    seen = [False] * len(perm)
    count = 0
    for i in range(len(perm)):
        if not seen[i]:
            count += 1
            j = i
            while not seen[j]:
                seen[j] = True
                j = perm[j]
    return count


def _cycle_type0(perm: tuple[int, ...]) -> tuple[int, ...]:
    seen = [False] * len(perm)
    parts = []
    for i in range(len(perm)):
        if not seen[i]:
            n, j = 0, i
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                n += 1
            parts.append(n)
    return tuple(sorted(parts, reverse=True))


def _representative(parts: tuple[int, ...]) -> tuple[int, ...]:
    perm, start = [], 0
    for ell in parts:
        perm += [start + (k + 1) % ell for k in range(ell)]
        start += ell
    return tuple(perm)


@lru_cache(maxsize=None)
def class_gram_structure(m: int) -> tuple[tuple[tuple[int, ...], ...], tuple[tuple[dict, ...], ...]]:
    """Classes of S_m and, per (representative sigma, class c), the counts
    ``{k: #{tau in c : #(sigma tau^-1) = k}}``."""
    classes = tuple(integer_partitions(m))
    index = {c: i for i, c in enumerate(classes)}
    perms = list(itertools.permutations(range(m)))
    inverses = []
    for tau in perms:
        inv = [0] * m
        for i, t in enumerate(tau):
            inv[t] = i
        inverses.append(tuple(inv))
    tau_class = [index[_cycle_type0(t)] for t in perms]
    rows = []
    for parts in classes:
        sigma = _representative(parts)
        row = [dict() for _ in classes]
        for c, inv in zip(tau_class, inverses):
            k = _num_cycles(tuple(sigma[i] for i in inv))
            row[c][k] = row[c].get(k, 0) + 1
        rows.append(tuple(row))
    return classes, tuple(rows)


def _solve(matrix, rhs, zero_test):
    """Gauss-Jordan elimination over an exact field; raises on singularity."""
    n = len(matrix)
    a = [list(row) + [b] for row, b in zip(matrix, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not zero_test(a[r][col])), None)
        if piv is None:
            raise SingularSystemError("Weingarten Gram system is singular")
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and not zero_test(a[r][col]):
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


@lru_cache(maxsize=None)
def wg_table(m: int, M: int | None = None) -> dict[tuple[int, ...], object]:
    """Wg on every class of S_m: rational functions of M, or exact rationals at M."""
    if m < 1:
        raise ArgumentError("m must be positive")
    if M is None:
        if m > LIMITS.wg_symbolic_m:
            raise ResourceLimitError(f"symbolic Weingarten for m={m} exceeds cap {LIMITS.wg_symbolic_m}")
    else:
        if m > LIMITS.wg_integer_m:
            raise ResourceLimitError(f"Weingarten for m={m} exceeds cap {LIMITS.wg_integer_m}")
        if M < m:
            raise SingularSystemError(f"Gram system is singular for M={M} < m={m}")
    classes, rows = class_gram_structure(m)
    if M is None:
        def entry(counts):
            acc = RationalFunction()
            for k, c in counts.items():
                acc = acc + RationalFunction.monomial(k, c)
            return acc

        one, zero = RationalFunction.constant(1), RationalFunction()
        zero_test = RationalFunction.is_zero
    else:
        def entry(counts):
            return Fraction(sum(c * M**k for k, c in counts.items()))

        one, zero = Fraction(1), Fraction(0)
        zero_test = lambda x: x == 0  # noqa: E731
    matrix = [[entry(cnt) for cnt in row] for row in rows]
    rhs = [one if parts == (1,) * m else zero for parts in classes]
    sol = _solve(matrix, rhs, zero_test)
    return dict(zip(classes, sol))


def wg_exact(ct, M: int | None = None):
    """Wg_M on a conjugacy class; symbolic (``M=None``) or exact at an integer M."""
    ct = _as_cycle_type(ct)
    if M is not None:
        M = int(M)
    return wg_table(ct.m, M)[ct.parts]


def wg_asymptotic(ct, M: int) -> Fraction:
    """Leading term M^(-2m + #cycles) C(sigma)."""
    ct = _as_cycle_type(ct)
    if M < 1:
        raise ArgumentError("M must be positive")
    return Fraction(c_of_sigma(ct)) * Fraction(M) ** (ct.num_cycles - 2 * ct.m)


def wg_of_pairings(p: PairPartition, q: PairPartition, M: int | None = None):
    """Wg_M(p, q) = Wg_M evaluated on the class read off from the blocks of p v q."""
    return wg_exact(CycleType(cycle_structure_of_join(join(p, q))), M)


def c_of_pairings(p: PairPartition, q: PairPartition) -> int:
    return c_of_sigma(CycleType(cycle_structure_of_join(join(p, q))))


def _check_indices(indices: Sequence[int], M: int) -> None:
    for x in indices:
        if not 1 <= x <= M:
            raise ArgumentError(f"index {x} outside [1, {M}]")


def haar_entry_moment(
    i: Sequence[int], j: Sequence[int], ip: Sequence[int], jp: Sequence[int], M: int
) -> Fraction:
    """E(u_{i1 j1} ... u_{im jm} conj(u_{i'1 j'1}) ... conj(u_{i'm j'm})), exactly.

    Sum over sigma, tau in S_m with i_k = i'_{sigma(k)} and j_k = j'_{tau(k)} of
    Wg_M(sigma^-1 tau).
    """
    if len(i) != len(j) or len(ip) != len(jp):
        raise ArgumentError("row and column index lists must have equal length")
    _check_indices([*i, *j, *ip, *jp], M)
    if len(i) != len(ip):
        return Fraction(0)
    m = len(i)
    if m == 0:
        return Fraction(1)
    table = wg_table(m, M)
    sigmas = [s for s in itertools.permutations(range(m)) if all(i[k] == ip[s[k]] for k in range(m))]
    taus = [t for t in itertools.permutations(range(m)) if all(j[k] == jp[t[k]] for k in range(m))]
    total = Fraction(0)
    for s in sigmas:
        s_inv = [0] * m
        for k, v in enumerate(s):
            s_inv[v] = k
        for t in taus:
            total += table[_cycle_type0(tuple(s_inv[t[k]] for k in range(m)))]
    return total


def haar_entry_moment_interleaved(
    i: Sequence[int], j: Sequence[int], eps: EpsilonMap | Sequence[str], M: int
) -> Fraction:
    """E(u^{eps_1}_{i1 j1} ... u^{eps_2m}_{i2m j2m}), ``"*"`` meaning complex conjugate.

    Sum over p, q pairing opposite labels with i_k = i_{p(k)}, j_k = j_{q(k)} of Wg_M(p, q).
    """
    if not isinstance(eps, EpsilonMap):
        eps = EpsilonMap(tuple(eps))
    n = eps.size
    if len(i) != n or len(j) != n:
        raise ArgumentError("index lists must match the epsilon map length")
    _check_indices([*i, *j], M)
    if n == 0:
        return Fraction(1)
    if n % 2 or not eps.is_balanced():
        return Fraction(0)
    pairings = enumerate_eps_pairings(eps)
    rows = [p for p in pairings if all(i[k - 1] == i[p(k) - 1] for k in range(1, n + 1))]
    cols = [q for q in pairings if all(j[k - 1] == j[q(k) - 1] for k in range(1, n + 1))]
    total = Fraction(0)
    for p in rows:
        for q in cols:
            total += wg_of_pairings(p, q, M)
    return total
