"""Exact diagram weights for words in I, T, G (partial transpose), L (left partial transpose).

For a word (theta, eta) of length m, the alternating labelling eps on [2m] and
p, q in P_2^eps(2m), the weight of (p, q) in the Weingarten expansion of
E tr(T_1^(theta1,eta1) ... T_m^(thetam,etam)) at T = I is

    W(p, q) = (1/M) Wg_M(p, q) M^#(q^) b^c_alpha d^c_beta,      M = b d

where c_alpha (c_beta) counts the components of the equality graph on the 2m
row-block (column-block) indices. Summed over all (p, q) these give 1.

Exponents reported here are powers of n for the square grid b = d = n.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ArgumentError, ResourceLimitError
from .limits import LIMITS
from .partitions import (
    STAR,
    SYMBOL_SIGNS,
    EpsilonMap,
    PairPartition,
    Permutation,
    SetPartition,
    SignPair,
    UnionFind,
    ap_block_type,
    canonical_symbol,
    enumerate_ap,
    enumerate_eps_pairings,
    hat_map,
    induced_permutation,
    is_noncrossing,
    join,
)
from .ratfunc import RationalFunction
from .weingarten import c_of_pairings, wg_of_pairings

DEFAULT_GRID = (4, 8, 16, 32, 64)


@dataclass(frozen=True)
class ThetaEtaWord:
    """Sign maps theta, eta: [m] -> {-1, 1}; equivalently a word over I, L, G, T."""

    theta: tuple[int, ...]
    eta: tuple[int, ...]

    def __post_init__(self):
        theta = tuple(int(x) for x in self.theta)
        eta = tuple(int(x) for x in self.eta)
        if len(theta) != len(eta) or not theta:
            raise ArgumentError("theta and eta must have the same positive length")
        for t, e in zip(theta, eta):
            SignPair(t, e)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "eta", eta)

    @classmethod
    def from_symbols(cls, symbols: Iterable[str]) -> ThetaEtaWord:
        pairs = [SYMBOL_SIGNS[canonical_symbol(s)] for s in symbols]
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    @property
    def m(self) -> int:
        return len(self.theta)

    @property
    def symbols(self) -> str:
        return "".join(SignPair(t, e).symbol for t, e in zip(self.theta, self.eta))

    def theta_hat(self) -> Permutation:
        return hat_map(self.theta)

    def eta_hat(self) -> Permutation:
        return hat_map(self.eta)

    def __str__(self):
        return self.symbols


def _as_word(word) -> ThetaEtaWord:
    if isinstance(word, ThetaEtaWord):
        return word
    return ThetaEtaWord.from_symbols(word)


def _check_sizes(p: PairPartition, q: PairPartition, word: ThetaEtaWord) -> None:
    if p.size != q.size or p.size != 2 * word.m:
        raise ArgumentError(f"sizes disagree: p on {p.size}, q on {q.size}, word of length {word.m}")


def _components(n: int, pairing: PairPartition) -> int:
    # vertices 1..n; edges s - pairing(s) and 2s - 2s+1 (cyclically)
    uf = UnionFind(range(1, n + 1))
    for s in range(1, n + 1):
        uf.union(s, pairing(s))
    for s in range(2, n + 1, 2):
        uf.union(s, s % n + 1)
    return uf.count()


def constraint_count(p: PairPartition, q: PairPartition, word) -> tuple[int, int]:
    """Component counts (c_alpha, c_beta) of the row- and column-block equality graphs."""
    word = _as_word(word)
    _check_sizes(p, q, word)
    n = p.size
    return (
        _components(n, p.conjugate(word.theta_hat())),
        _components(n, p.conjugate(word.eta_hat())),
    )


def _identity_exponents(p, q, word) -> tuple[int, int, int]:
    word = _as_word(word)
    ca, cb = constraint_count(p, q, word)
    return induced_permutation(q).num_cycles(), ca, cb


def order_exponent(p: PairPartition, q: PairPartition, word) -> int:
    """Exponent of n in W(p, q) at b = d = n, read off from the leading Weingarten term."""
    word = _as_word(word)
    nq, ca, cb = _identity_exponents(p, q, word)
    return 2 * (len(join(p, q)) - 2 * word.m) + 2 * nq - 2 + ca + cb


def w_exact_identity(p: PairPartition, q: PairPartition, word, b: int, d: int) -> Fraction:
    """Exact weight of (p, q) for the identity word at integer block sizes b, d."""
    word = _as_word(word)
    nq, ca, cb = _identity_exponents(p, q, word)
    M = b * d
    wg = wg_of_pairings(p, q, M)
    return wg * Fraction(M) ** (nq - 1) * Fraction(b) ** ca * Fraction(d) ** cb


def w_symbolic(p: PairPartition, q: PairPartition, word) -> RationalFunction:
    """The same weight as a rational function of n for b = d = n."""
    word = _as_word(word)
    nq, ca, cb = _identity_exponents(p, q, word)
    wg = wg_of_pairings(p, q).substitute_power(2, "n")
    return wg * RationalFunction.monomial(2 * nq - 2 + ca + cb, var="n")


# ---------------------------------------------------------------------------
# V(sigma, eps, M, p, q)

_SIGMA_ALIASES = {"id": "id", "I": "id", "T": "T", "top": "T", "⊤": "T"}


def _sigma_values(sigma: Sequence[str], n: int) -> list[str]:
    if len(sigma) != n:
        raise ArgumentError(f"sigma must have length {n}")
    try:
        return [_SIGMA_ALIASES[s] for s in sigma]
    except KeyError as exc:
        raise ArgumentError(f"sigma entries must be 'id' or 'T', got {exc.args[0]!r}") from None


def v_components(sigma: Sequence[str], eps: EpsilonMap, p: PairPartition, q: PairPartition) -> int:
    """log_M |A(p, q)|: components of the index graph on i_1..i_2m."""
    n = p.size
    if q.size != n or eps.size != n:
        raise ArgumentError("sigma, eps, p, q must share the size 2m")
    sig = _sigma_values(sigma, n)
    k, l = [0] * (n + 1), [0] * (n + 1)
    for s in range(1, n + 1):
        a, c = s, s % n + 1  # (i_s, j_s) with j_s = i_{s+1}
        if (eps(s) == STAR) != (sig[s - 1] == "T"):
            a, c = c, a
        k[s], l[s] = a, c
    uf = UnionFind(range(1, n + 1))
    for s in range(1, n + 1):
        uf.union(k[s], k[p(s)])
        uf.union(l[s], l[q(s)])
    return uf.count()


def v_exact(sigma: Sequence[str], eps, M: int | None, p: PairPartition, q: PairPartition):
    """(1/M) Wg_M(p, q) |A(p, q)|; a Fraction at integer M, else a rational function of M."""
    if not isinstance(eps, EpsilonMap):
        eps = EpsilonMap(tuple(eps))
    c = v_components(sigma, eps, p, q)
    if M is None:
        return wg_of_pairings(p, q) * RationalFunction.monomial(c - 1)
    return wg_of_pairings(p, q, M) * Fraction(M) ** (c - 1)


def _factor_args(p, q, word, which):
    hat = word.theta_hat() if which == "theta" else word.eta_hat()
    signs = word.theta if which == "theta" else word.eta
    sigma = [s for v in signs for s in (("id", "id") if v == 1 else ("T", "T"))]
    eps = EpsilonMap.alternating(word.m).compose(hat)
    return sigma, eps, p.conjugate(hat), q.conjugate(hat)


@dataclass(frozen=True)
class FactorizationReport:
    b: int
    d: int
    weight: Fraction
    product: Fraction
    difference: Fraction


def factorization_check(p: PairPartition, q: PairPartition, word, b: int, d: int) -> FactorizationReport:
    """Compare W(p, q) with V_b(row data) V_d(column data) / C(p, q) at integer b, d."""
    word = _as_word(word)
    if b < word.m or d < word.m:
        raise ArgumentError("need b, d >= m")
    w = w_exact_identity(p, q, word, b, d)
    sigma, eps, pc, qc = _factor_args(p, q, word, "theta")
    vb = v_exact(sigma, eps, b, pc, qc)
    sigma, eps, pc, qc = _factor_args(p, q, word, "eta")
    vd = v_exact(sigma, eps, d, pc, qc)
    prod = vb * vd / c_of_pairings(p, q)
    return FactorizationReport(b, d, w, prod, w - prod)


def factorization_residual(p: PairPartition, q: PairPartition, word) -> RationalFunction:
    """W - V_b V_d / C exactly, as a rational function of n with b = d = n."""
    word = _as_word(word)
    sides = []
    for which in ("theta", "eta"):
        sigma, eps, pc, qc = _factor_args(p, q, word, which)
        sides.append(v_exact(sigma, eps, None, pc, qc).substitute_power(1, "n"))
    return w_symbolic(p, q, word) - sides[0] * sides[1] / c_of_pairings(p, q)


# ---------------------------------------------------------------------------
# vanishing rules


@dataclass(frozen=True)
class Verdict:
    survives: bool
    reason: str


def neighbour_condition(p: PairPartition, q: PairPartition) -> bool:
    """Every block a_1 < ... < a_r of p v q has {p(a_s), q(a_s)} = {a_(s-1), a_(s+1)} cyclically."""
    for block in join(p, q).blocks:
        r = len(block)
        for s, a in enumerate(block):
            if {p(a), q(a)} != {block[s - 1], block[(s + 1) % r]}:
                return False
    return True


def _extended(signs: Sequence[int]) -> tuple[int, ...]:
    return tuple(v for v in signs for _ in (0, 1))


def vanishing_classifier(p: PairPartition, q: PairPartition, word) -> Verdict:
    """Predict whether W(p, q) stays of order one (survives) or decays."""
    word = _as_word(word)
    _check_sizes(p, q, word)
    hats = (word.theta_hat(), word.eta_hat())
    conj = [(p.conjugate(h), q.conjugate(h)) for h in hats]
    if not all(is_noncrossing(join(a, c)) for a, c in conj):
        return Verdict(False, "conjugated join crossing")
    if not all(neighbour_condition(a, c) for a, c in conj):
        return Verdict(False, "neighbour condition violated")
    pj = join(p, q)
    th, et = _extended(word.theta), _extended(word.eta)
    for block in pj.blocks:
        if len({th[a - 1] for a in block}) > 1 or len({et[a - 1] for a in block}) > 1:
            return Verdict(False, "theta,eta not block-constant")
    if all(s == "G" for s in word.symbols):
        blocks = set(pj.blocks)
        for block in pj.blocks:
            kind = ap_block_type(block)
            if kind is None or not is_noncrossing(pj):
                return Verdict(False, "block shape not admissible")
            if kind == "iii":
                x, y = block
                mate = (x + 1, y - 1) if x % 2 else (x - 1, y + 1)
                if mate not in blocks:
                    return Verdict(False, "block shape not admissible")
            if kind == "ii" and q(block[0]) != block[0] + 1:
                return Verdict(False, "q(2k-1)=2k violated")
    # the structural rules above are necessary only; outside the all-G word a
    # join can pass them and still lose index freedom, so finish with the count
    if order_exponent(p, q, word) != 0:
        return Verdict(False, "index count below maximal")
    return Verdict(True, "")


# ---------------------------------------------------------------------------
# leading order


@dataclass(frozen=True)
class LeadingOrder:
    fitted_exponent: float | None  # -inf when identically zero, None when no clean fit
    exact_exponent: int | None
    coefficient: Fraction
    values: tuple[Fraction, ...] = field(default=(), compare=False)


def fit_exponent(grid: Sequence[int], values: Sequence, tol: float = 0.3) -> float | None:
    """Exponent k with v(2n)/v(n) in 2^k [1-tol, 1+tol] over the last two doublings."""
    if all(v == 0 for v in values):
        return -math.inf
    if len(grid) < 3 or any(grid[i + 1] != 2 * grid[i] for i in range(len(grid) - 1)):
        raise ArgumentError("grid must be at least three successive doublings")
    ks = []
    for a, c in ((values[-3], values[-2]), (values[-2], values[-1])):
        if a == 0 or c == 0:
            return None
        r = abs(float(Fraction(c) / Fraction(a)))
        k = round(math.log2(r))
        if not (2.0**k * (1 - tol) <= r <= 2.0**k * (1 + tol)):
            return None
        ks.append(k)
    return float(ks[0]) if ks[0] == ks[1] else None


def leading_order(p: PairPartition, q: PairPartition, word, grid: Sequence[int] = DEFAULT_GRID) -> LeadingOrder:
    """Grid fit of W(p, q) over b = d = n, cross-checked by the exact leading term in n."""
    word = _as_word(word)
    values = tuple(w_exact_identity(p, q, word, n, n) for n in grid)
    fitted = fit_exponent(grid, values)
    exponent, coeff = (None, Fraction(0))
    if word.m <= LIMITS.wg_symbolic_m:
        exponent, coeff = w_symbolic(p, q, word).leading_term()
    return LeadingOrder(fitted, exponent, coeff, values)


# ---------------------------------------------------------------------------
# exhaustive sweep


def all_words(m: int) -> list[str]:
    return ["".join(w) for w in itertools.product("ILGT", repeat=m)]


@dataclass(frozen=True)
class BlockRow:
    word: str
    p: PairPartition
    q: PairPartition
    join_blocks: SetPartition
    verdict: Verdict
    fitted_exponent: float | None
    exact_exponent: int | None
    leading_coefficient: Fraction

    @property
    def consistent(self) -> bool:
        """Classifier agrees with the grid fit and the exact exponent."""
        if self.verdict.survives:
            return self.fitted_exponent == 0 and self.exact_exponent == 0
        fit_ok = self.fitted_exponent is not None and self.fitted_exponent <= -1
        exact_ok = self.exact_exponent is None or self.exact_exponent <= -1
        return fit_ok and exact_ok


def blocks_sweep(m: int, words: Sequence[str] | None = None, grid: Sequence[int] = DEFAULT_GRID) -> list[BlockRow]:
    """Classifier verdict and leading order for every (p, q) and word."""
    if m > LIMITS.blocks_sweep_m:
        raise ResourceLimitError(f"blocks sweep for m={m} exceeds cap {LIMITS.blocks_sweep_m}")
    words = all_words(m) if words is None else [_as_word(w).symbols for w in words]
    pairings = enumerate_eps_pairings(EpsilonMap.alternating(m))
    rows = []
    for w in words:
        word = _as_word(w)
        if word.m != m:
            raise ArgumentError(f"word {w} does not have length {m}")
        for p in pairings:
            for q in pairings:
                lo = leading_order(p, q, word, grid)
                rows.append(
                    BlockRow(w, p, q, join(p, q), vanishing_classifier(p, q, word),
                             lo.fitted_exponent, lo.exact_exponent, lo.coefficient)
                )
    return rows


def surviving_joins(rows: Iterable[BlockRow]) -> set[SetPartition]:
    return {r.join_blocks for r in rows if r.verdict.survives}


def expected_all_gamma_survivors(m: int) -> set[tuple[PairPartition, PairPartition]]:
    """(p, q) with p v q in AP(2m) and q(2k-1) = 2k on every four-element block."""
    ap = set(enumerate_ap(m))
    out = set()
    pairings = enumerate_eps_pairings(EpsilonMap.alternating(m))
    for p in pairings:
        for q in pairings:
            pj = join(p, q)
            if pj in ap and all(q(b[0]) == b[0] + 1 for b in pj.blocks if len(b) == 4):
                out.add((p, q))
    return out


def ap_sign(pj: SetPartition) -> int:
    """(-1)^(number of four-element blocks)."""
    return (-1) ** sum(1 for b in pj.blocks if ap_block_type(b) == "ii")


def _fmt_pairing(p: PairPartition) -> str:
    return " ".join(f"({a},{b})" for a, b in p.pairs())


def _fmt_partition(pi: SetPartition) -> str:
    return " ".join("(" + ",".join(map(str, b)) + ")" for b in pi.blocks)


def _fmt_exponent(x: float | None) -> str:
    if x is None:
        return "nan"
    if x == -math.inf:
        return "-inf"
    return str(int(x))


BLOCK_COLUMNS = ["p", "q", "join_blocks", "classifier_verdict", "reason", "fitted_exponent", "leading_coefficient"]


def block_rows_table(rows: Sequence[BlockRow], with_word: bool) -> tuple[list[str], list[list[str]]]:
    header = (["word"] if with_word else []) + BLOCK_COLUMNS
    body = []
    for r in rows:
        line = [
            _fmt_pairing(r.p),
            _fmt_pairing(r.q),
            _fmt_partition(r.join_blocks),
            "survives" if r.verdict.survives else "vanishes",
            r.verdict.reason,
            _fmt_exponent(r.fitted_exponent),
            str(r.leading_coefficient),
        ]
        body.append(([r.word] if with_word else []) + line)
    return header, body


def blocks_csv(rows: Sequence[BlockRow], with_word: bool = False) -> str:
    header, body = block_rows_table(rows, with_word)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(body)
    return buf.getvalue()
