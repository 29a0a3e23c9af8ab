"""Permutations, pair partitions and set partitions on 1-based ground sets.

Everything here is immutable and pure. Indices exposed to callers are always
1-based; 0-based storage never leaks out of a function.

Enumerations are deterministic: pairings come out in lexicographic order of
their partner arrays, set partitions in lexicographic order of their
canonical block tuples.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import ArgumentError, ResourceLimitError
from .limits import LIMITS


def _check_cap(value: int, cap: int, what: str) -> None:
    if value > cap:
        raise ResourceLimitError(f"{what}: {value} exceeds cap {cap}")


class UnionFind:
    """Disjoint sets over arbitrary hashable items (path halving, union by size)."""

    def __init__(self, items: Iterable = ()):
        self._parent = {}
        self._size = {}
        for x in items:
            self.add(x)

    def add(self, x) -> None:
        if x not in self._parent:
            self._parent[x] = x
            self._size[x] = 1

    def find(self, x):
        self.add(x)
        parent = self._parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x, y) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return
        if self._size[rx] < self._size[ry]:
            rx, ry = ry, rx
        self._parent[ry] = rx
        self._size[rx] += self._size[ry]

    def groups(self) -> list[tuple]:
        out: dict = {}
        for x in self._parent:
            out.setdefault(self.find(x), []).append(x)
        return sorted(tuple(sorted(g)) for g in out.values())

    def count(self) -> int:
        return sum(1 for x in self._parent if self._parent[x] == x)


# ---------------------------------------------------------------------------
# Permutation


@dataclass(frozen=True)
class Permutation:
    """A bijection of [n], stored as its image tuple ``(s(1), ..., s(n))``."""

    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(x) for x in self.images)
        object.__setattr__(self, "images", images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise ArgumentError(f"not a permutation of [{len(images)}]: {images}")

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def from_cycles(cls, n: int, cycles: Iterable[Sequence[int]]) -> Permutation:
        images = list(range(1, n + 1))
        for cyc in cycles:
            for a, b in zip(cyc, tuple(cyc[1:]) + (cyc[0],)):
                images[a - 1] = b
        return cls(tuple(images))

    @property
    def size(self) -> int:
        return len(self.images)

    def __call__(self, k: int) -> int:
        return self.images[k - 1]

    def compose(self, other: Permutation) -> Permutation:
        """Return ``self o other``, i.e. ``k -> self(other(k))``."""
        if other.size != self.size:
            raise ArgumentError("composition of permutations of different sizes")
        return Permutation(tuple(self.images[j - 1] for j in other.images))

    __mul__ = compose

    def inverse(self) -> Permutation:
        inv = [0] * self.size
        for i, j in enumerate(self.images, start=1):
            inv[j - 1] = i
        return Permutation(tuple(inv))

    def cycles(self) -> list[tuple[int, ...]]:
        """Cycles, each starting at its minimum, sorted by minimum."""
        seen = set()
        out = []
        for start in range(1, self.size + 1):
            if start in seen:
                continue
            cyc = [start]
            seen.add(start)
            k = self(start)
            while k != start:
                cyc.append(k)
                seen.add(k)
                k = self(k)
            out.append(tuple(cyc))
        return out

    def num_cycles(self) -> int:
        return len(self.cycles())

    def cycle_type(self) -> tuple[int, ...]:
        return tuple(sorted((len(c) for c in self.cycles()), reverse=True))

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images, start=1))

    def __repr__(self):
        cyc = [c for c in self.cycles() if len(c) > 1]
        body = "".join("(" + " ".join(map(str, c)) + ")" for c in cyc) or "id"
        return f"Permutation[{self.size}]{body}"


def all_permutations(n: int) -> Iterator[Permutation]:
    for images in itertools.permutations(range(1, n + 1)):
        yield Permutation(images)


# ---------------------------------------------------------------------------
# Set partitions


@dataclass(frozen=True)
class SetPartition:
    """Disjoint nonempty blocks; canonical form sorts each block and the blocks by minimum."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(sorted(tuple(sorted(int(x) for x in b)) for b in self.blocks))
        seen = set()
        for b in blocks:
            if not b:
                raise ArgumentError("empty block")
            for x in b:
                if x in seen:
                    raise ArgumentError(f"element {x} appears in two blocks")
                seen.add(x)
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def of(cls, *blocks: Iterable[int]) -> SetPartition:
        return cls(tuple(tuple(b) for b in blocks))

    @property
    def ground(self) -> tuple[int, ...]:
        return tuple(sorted(x for b in self.blocks for x in b))

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def block_of(self, x: int) -> tuple[int, ...]:
        for b in self.blocks:
            if x in b:
                return b
        raise ArgumentError(f"{x} not in ground set")

    def block_sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def refines(self, other: SetPartition) -> bool:
        """True iff every block of ``self`` lies inside a block of ``other``."""
        index = {x: i for i, b in enumerate(other.blocks) for x in b}
        return all(len({index.get(x) for x in b}) == 1 and b[0] in index for b in self.blocks)

    def union(self, other: SetPartition) -> SetPartition:
        return SetPartition(self.blocks + other.blocks)

    def __repr__(self):
        return "{" + ", ".join("(" + ",".join(map(str, b)) + ")" for b in self.blocks) + "}"


def is_noncrossing(pi: SetPartition) -> bool:
    """No a < b < c < d with a, c in one block and b, d in another."""
    owner = {x: i for i, b in enumerate(pi.blocks) for x in b}
    # scan with a stack of open blocks: an element may only continue the
    # innermost open block or open a new one
    remaining = {i: len(b) for i, b in enumerate(pi.blocks)}
    stack: list[int] = []
    for x in sorted(owner):
        i = owner[x]
        if stack and stack[-1] == i:
            pass
        elif i in stack:
            return False
        else:
            stack.append(i)
        remaining[i] -= 1
        if remaining[i] == 0:
            stack.pop()
    return True


def enumerate_set_partitions(ground: Sequence[int], *, cap: int | None = None) -> list[SetPartition]:
    """All set partitions of ``ground`` (restricted-growth enumeration)."""
    ground = sorted(ground)
    _check_cap(len(ground), LIMITS.set_partition_n if cap is None else cap, "set partition scan")
    out = []

    def rec(i, blocks):
        if i == len(ground):
            out.append(SetPartition(tuple(tuple(b) for b in blocks)))
            return
        x = ground[i]
        for b in blocks:
            b.append(x)
            rec(i + 1, blocks)
            b.pop()
        blocks.append([x])
        rec(i + 1, blocks)
        blocks.pop()

    if ground:
        rec(0, [])
    else:
        out.append(SetPartition(()))
    return sorted(out, key=lambda p: p.blocks)


def enumerate_noncrossing(ground: Sequence[int], *, cap: int | None = None) -> list[SetPartition]:
    """All non-crossing partitions of an ordered ground set, generated directly."""
    ground = tuple(sorted(ground))
    _check_cap(len(ground), LIMITS.noncrossing_m if cap is None else cap, "non-crossing enumeration")
    return sorted((SetPartition(bl) for bl in _nc_blocks(ground, None)), key=lambda p: p.blocks)


def _nc_blocks(seq: tuple[int, ...], sizes):
    # block of seq[0] is a subset S containing it; each gap between consecutive
    # members of S (and the tail) is partitioned independently
    if not seq:
        yield ()
        return
    first, rest = seq[0], seq[1:]
    for r in range(len(rest) + 1):
        if sizes is not None and r + 1 not in sizes:
            continue
        for others in itertools.combinations(range(len(rest)), r):
            block = (first,) + tuple(rest[i] for i in others)
            cuts = (-1,) + others + (len(rest),)
            gaps = [rest[cuts[j] + 1:cuts[j + 1]] for j in range(len(cuts) - 1)]
            for parts in itertools.product(*(list(_nc_blocks(g, sizes)) for g in gaps)):
                yield (block,) + tuple(b for part in parts for b in part)


def enumerate_nc12_on(ground: Sequence[int], *, cap: int | None = None) -> list[SetPartition]:
    """Non-crossing partitions of ``ground`` whose blocks have one or two elements."""
    ground = tuple(sorted(ground))
    _check_cap(len(ground), LIMITS.noncrossing_m if cap is None else cap, "NC(1,2) enumeration")
    return sorted((SetPartition(bl) for bl in _nc_blocks(ground, {1, 2})), key=lambda p: p.blocks)


def enumerate_nc12(m: int, *, cap: int | None = None) -> list[SetPartition]:
    """NC_{1,2}(m); the counts are the Motzkin numbers."""
    if m < 1:
        raise ArgumentError("m must be positive")
    return enumerate_nc12_on(range(1, m + 1), cap=cap)


def relative_nc_complement(rho: SetPartition, m: int) -> SetPartition:
    """Coarsest non-crossing partition of [m] minus ground(rho) compatible with rho.

    Two free points may share a block exactly when no block of ``rho`` has
    elements strictly on both sides of the chord joining them; that relation
    is the "same face of the disc" relation and is an equivalence.
    """
    support = set(rho.ground)
    if not support <= set(range(1, m + 1)):
        raise ArgumentError(f"rho is not supported inside [{m}]")
    if not is_noncrossing(rho):
        raise ArgumentError(f"rho is crossing: {rho}")
    free = [x for x in range(1, m + 1) if x not in support]
    uf = UnionFind(free)
    for x, y in itertools.combinations(free, 2):
        if not any(
            any(x < e < y for e in b) and any(e < x or e > y for e in b) for b in rho.blocks
        ):
            uf.union(x, y)
    return SetPartition(tuple(uf.groups()))


# ---------------------------------------------------------------------------
# Pair partitions and epsilon maps


@dataclass(frozen=True)
class PairPartition:
    """A fixed-point-free involution of [2m], stored as its partner array."""

    partner: tuple[int, ...]

    def __post_init__(self):
        partner = tuple(int(x) for x in self.partner)
        object.__setattr__(self, "partner", partner)
        n = len(partner)
        if n == 0 or n % 2:
            raise ArgumentError(f"pair partition needs an even positive size, got {n}")
        for k, j in enumerate(partner, start=1):
            if not 1 <= j <= n or j == k or partner[j - 1] != k:
                raise ArgumentError(f"not a fixed-point-free involution: {partner}")

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[int]]) -> PairPartition:
        pairs = [tuple(p) for p in pairs]
        partner = [0] * (2 * len(pairs))
        for a, b in pairs:
            if not (1 <= a <= len(partner) and 1 <= b <= len(partner)):
                raise ArgumentError(f"pair {(a, b)} outside [{len(partner)}]")
            partner[a - 1], partner[b - 1] = b, a
        return cls(tuple(partner))

    @property
    def size(self) -> int:
        return len(self.partner)

    @property
    def m(self) -> int:
        return len(self.partner) // 2

    def __call__(self, k: int) -> int:
        return self.partner[k - 1]

    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple((k, j) for k, j in enumerate(self.partner, start=1) if k < j)

    def as_permutation(self) -> Permutation:
        return Permutation(self.partner)

    def as_set_partition(self) -> SetPartition:
        return SetPartition(self.pairs())

    def conjugate(self, perm: Permutation) -> PairPartition:
        """``perm o self o perm^{-1}``."""
        inv = perm.inverse()
        return PairPartition(tuple(perm(self(inv(k))) for k in range(1, self.size + 1)))

    def __repr__(self):
        return "Pairing{" + ",".join(f"({a},{b})" for a, b in self.pairs()) + "}"


STAR = "*"
_EPS_VALUES = ("1", STAR)


@dataclass(frozen=True)
class EpsilonMap:
    """A labelling [2m] -> {"1", "*"}.

    Sign-valued labellings convert via :meth:`from_signs` with ``+1 -> "1"``
    and ``-1 -> "*"``.
    """

    values: tuple[str, ...]

    def __post_init__(self):
        values = tuple(str(v) for v in self.values)
        object.__setattr__(self, "values", values)
        bad = [v for v in values if v not in _EPS_VALUES]
        if bad:
            raise ArgumentError(f"epsilon values must be '1' or '*', got {bad}")

    @classmethod
    def alternating(cls, m: int) -> EpsilonMap:
        return cls(tuple("1" if k % 2 else STAR for k in range(1, 2 * m + 1)))

    @classmethod
    def from_signs(cls, signs: Iterable[int]) -> EpsilonMap:
        return cls(tuple("1" if s == 1 else STAR for s in signs))

    @property
    def size(self) -> int:
        return len(self.values)

    def __call__(self, k: int) -> str:
        return self.values[k - 1]

    def compose(self, perm: Permutation) -> EpsilonMap:
        """``eps o perm``."""
        return EpsilonMap(tuple(self(perm(k)) for k in range(1, perm.size + 1)))

    def is_balanced(self) -> bool:
        return self.values.count("1") == self.values.count(STAR)


def _pairings(n: int, allowed=None) -> Iterator[tuple[int, ...]]:
    partner = [0] * n

    def rec():
        try:
            a = partner.index(0)
        except ValueError:
            yield tuple(partner)
            return
        for b in range(a + 1, n):
            if partner[b] == 0 and (allowed is None or allowed(a, b)):
                partner[a], partner[b] = b + 1, a + 1
                yield from rec()
                partner[a] = partner[b] = 0

    yield from rec()


def enumerate_pairings(m: int, *, cap: int | None = None) -> list[PairPartition]:
    """All of P_2(2m), lexicographic in the partner array; (2m-1)!! of them."""
    if m < 1:
        raise ArgumentError("m must be positive")
    _check_cap(m, LIMITS.pairing_m if cap is None else cap, "pairing enumeration")
    return [PairPartition(p) for p in _pairings(2 * m)]


def enumerate_eps_pairings(eps: EpsilonMap, *, cap: int | None = None) -> list[PairPartition]:
    """Pairings joining only positions with different epsilon labels."""
    n = eps.size
    if n % 2:
        raise ArgumentError("epsilon map must have even size")
    _check_cap(n // 2, LIMITS.pairing_m if cap is None else cap, "pairing enumeration")
    if not eps.is_balanced():
        return []
    vals = eps.values
    return [PairPartition(p) for p in _pairings(n, lambda a, b: vals[a] != vals[b])]


def join(p: PairPartition, q: PairPartition) -> SetPartition:
    """p v q: orbits of the group generated by the two involutions."""
    if p.size != q.size:
        raise ArgumentError(f"size mismatch: {p.size} vs {q.size}")
    uf = UnionFind(range(1, p.size + 1))
    for k in range(1, p.size + 1):
        uf.union(k, p(k))
        uf.union(k, q(k))
    return SetPartition(tuple(uf.groups()))


def join_walk(p: PairPartition, q: PairPartition, start: int) -> tuple[int, ...]:
    """Alternating traversal a1=start, a2=p(a1), a3=q(a2), ... of one block of p v q."""
    walk = [start]
    step = p
    k = p(start)
    while k != start:
        walk.append(k)
        step = q if step is p else p
        k = step(k)
    return tuple(walk)


def cycle_structure_of_join(pj: SetPartition) -> tuple[int, ...]:
    """Cycle type in S_m attached to a join: a block of 2s elements gives a cycle of length s."""
    parts = []
    for b in pj.blocks:
        if len(b) % 2:
            raise ArgumentError(f"odd block {b} in join")
        parts.append(len(b) // 2)
    return tuple(sorted(parts, reverse=True))


def hat_map(phi: Sequence[int]) -> Permutation:
    """The involution of [2m] swapping 2s-1 and 2s exactly where phi(s) = -1."""
    images = []
    for s, v in enumerate(phi, start=1):
        if v == 1:
            images += [2 * s - 1, 2 * s]
        elif v == -1:
            images += [2 * s, 2 * s - 1]
        else:
            raise ArgumentError(f"phi values must be +1 or -1, got {v}")
    return Permutation(tuple(images))


def induced_permutation(q: PairPartition) -> Permutation:
    """The permutation s -> t of [m] with q(2s) = 2t - 1."""
    images = []
    for s in range(1, q.m + 1):
        t = q(2 * s)
        if t % 2 == 0:
            raise ArgumentError(f"{q} pairs even position {2 * s} with even {t}")
        images.append((t + 1) // 2)
    return Permutation(tuple(images))


# ---------------------------------------------------------------------------
# AP(2m) and the map onto NC_{1,2}(m)


def enumerate_ap(m: int, *, cap: int | None = None) -> list[SetPartition]:
    """Non-crossing partitions of [2m] built from the three admissible block shapes.

    Shapes: (2k-1, 2k); (2k-1, 2k, 2t-1, 2t); the two blocks (2k-1, 2t), (2k, 2t-1).
    Each pair (k, t) of an NC_{1,2}(m) partition lifts to either of the last two.
    """
    if m < 1:
        raise ArgumentError("m must be positive")
    _check_cap(m, LIMITS.ap_m if cap is None else cap, "AP enumeration")
    out = []
    for rho in enumerate_nc12(m):
        singles = [b for b in rho.blocks if len(b) == 1]
        doubles = [b for b in rho.blocks if len(b) == 2]
        base = [(2 * k - 1, 2 * k) for (k,) in singles]
        for choice in itertools.product((0, 1), repeat=len(doubles)):
            blocks = list(base)
            for (k, t), c in zip(doubles, choice):
                if c == 0:
                    blocks.append((2 * k - 1, 2 * k, 2 * t - 1, 2 * t))
                else:
                    blocks += [(2 * k - 1, 2 * t), (2 * k, 2 * t - 1)]
            out.append(SetPartition(tuple(blocks)))
    return sorted(out, key=lambda p: p.blocks)


def ap_block_type(block: Sequence[int]) -> str | None:
    """Classify one block as "i", "ii", "iii" (one half of a double block) or None."""
    b = tuple(sorted(block))
    if len(b) == 2:
        x, y = b
        if x % 2 == 1 and y == x + 1:
            return "i"
        if (x % 2 == 1 and y % 2 == 0) or (x % 2 == 0 and y % 2 == 1):
            return "iii"
        return None
    if len(b) == 4:
        x, y, z, w = b
        if x % 2 == 1 and y == x + 1 and z % 2 == 1 and w == z + 1:
            return "ii"
    return None


def ap_to_nc12(pi: SetPartition) -> SetPartition:
    """The surjection AP(2m) -> NC_{1,2}(m)."""
    ground = pi.ground
    n = len(ground)
    if n == 0 or n % 2 or ground != tuple(range(1, n + 1)):
        raise ArgumentError(f"{pi} is not a partition of [2m]")
    if not is_noncrossing(pi):
        raise ArgumentError(f"{pi} is crossing, not in AP")
    blocks_set = set(pi.blocks)
    out = []
    for b in pi.blocks:
        kind = ap_block_type(b)
        if kind == "i":
            out.append(((b[0] + 1) // 2,))
        elif kind == "ii":
            out.append(((b[0] + 1) // 2, (b[2] + 1) // 2))
        elif kind == "iii":
            x, y = b
            if x % 2 == 1:
                # (2k-1, 2t) needs its companion (2k, 2t-1), k < t
                k, t = (x + 1) // 2, y // 2
                if not (k < t and (x + 1, y - 1) in blocks_set):
                    raise ArgumentError(f"block {b} lacks its companion in {pi}")
                out.append((k, t))
            else:
                k, t = x // 2, (y + 1) // 2
                if not (k < t and (x - 1, y + 1) in blocks_set):
                    raise ArgumentError(f"block {b} lacks its companion in {pi}")
        else:
            raise ArgumentError(f"block {b} has no admissible shape")
    return SetPartition(tuple(out))


# ---------------------------------------------------------------------------
# Sign pairs and word symbols

SYMBOL_SIGNS = {"I": (1, 1), "L": (-1, 1), "G": (1, -1), "T": (-1, -1)}
SYMBOL_ALIASES = {"Γ": "G", "⅂": "L", "ꓶ": "L", "1": "I"}


def canonical_symbol(symbol: str) -> str:
    s = SYMBOL_ALIASES.get(symbol, symbol).upper()
    if s not in SYMBOL_SIGNS:
        raise ArgumentError(f"unknown symbol {symbol!r}; expected one of I, T, G, L")
    return s


@dataclass(frozen=True)
class SignPair:
    """(theta, eta) in {-1, 1}^2; the four states are the symbols I, L, G, T."""

    theta: int
    eta: int

    def __post_init__(self):
        if self.theta not in (-1, 1) or self.eta not in (-1, 1):
            raise ArgumentError(f"sign pair needs entries in {{-1, 1}}: {(self.theta, self.eta)}")

    @classmethod
    def from_symbol(cls, symbol: str) -> SignPair:
        return cls(*SYMBOL_SIGNS[canonical_symbol(symbol)])

    @property
    def symbol(self) -> str:
        for s, pair in SYMBOL_SIGNS.items():
            if pair == (self.theta, self.eta):
                return s
        raise AssertionError("unreachable")
