"""GF(2^m) arithmetic and character families with certified independence.

A family of masks is *t-independent* when no ``r`` distinct masks with
``1 <= r <= t`` XOR to zero. For even ``t = 2k`` such a family satisfies the
pairing bound ``E (sum a_i w_i)^(2k) <= (2k-1)!! * |a|_2^(2k)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import ConstructionError, DomainError
from .hypercube import MAX_BITS, check_bits

# Primitive polynomials, bit i <-> coefficient of x^i.
DEFAULT_IRREDUCIBLE = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011101,
    9: 0b1000010001,
    10: 0b10000001001,
    11: 0b100000000101,
    12: 0b1000001010011,
    13: 0b10000000011011,
    14: 0b100010001000011,
    15: 0b1000000000000011,
    16: 0b10001000000001011,
}

_DIRECT_LIMIT = 20_000


def _poly_mod(a: int, b: int) -> int:
    db = b.bit_length()
    while a.bit_length() >= db:
        a ^= b << (a.bit_length() - db)
    return a


def is_irreducible(poly: int) -> bool:
    """Trial division by every polynomial of degree <= deg/2."""
    deg = poly.bit_length() - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for low in range(1 << d):
            if _poly_mod(poly, (1 << d) | low) == 0:
                return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """GF(2^m) presented as GF(2)[x] modulo ``irreducible``."""

    m: int
    irreducible: int

    def __post_init__(self):
        if not 1 <= self.m <= 16:
            raise DomainError(f"extension degree must be in [1, 16], got {self.m}")
        if self.irreducible.bit_length() - 1 != self.m:
            raise ConstructionError(
                f"polynomial {self.irreducible:#b} does not have degree {self.m}")
        if not is_irreducible(self.irreducible):
            raise ConstructionError(f"polynomial {self.irreducible:#b} is reducible")

    @classmethod
    def default(cls, m: int) -> FieldSpec:
        if m not in DEFAULT_IRREDUCIBLE:
            raise DomainError(f"no default polynomial for m={m}")
        return cls(m, DEFAULT_IRREDUCIBLE[m])

    @property
    def order(self) -> int:
        return (1 << self.m) - 1


def gf2m_mul(spec: FieldSpec, a: int, b: int) -> int:
    """Carry-less product of two field codes reduced modulo the polynomial."""
    size = 1 << spec.m
    if not (0 <= a < size and 0 <= b < size):
        raise DomainError(f"field codes must lie in [0, {size})")
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a & size:
            a ^= spec.irreducible
    return out


def gf2m_pow(spec: FieldSpec, a: int, e: int) -> int:
    out = 1
    while e:
        if e & 1:
            out = gf2m_mul(spec, out, a)
        a = gf2m_mul(spec, a, a)
        e >>= 1
    return out


def _prime_factors(x: int) -> list[int]:
    out, d = [], 2
    while d * d <= x:
        if x % d == 0:
            out.append(d)
            while x % d == 0:
                x //= d
        d += 1
    if x > 1:
        out.append(x)
    return out


def multiplicative_order(spec: FieldSpec, a: int) -> int:
    if a == 0:
        raise DomainError("zero has no multiplicative order")
    order = spec.order
    for prime in _prime_factors(spec.order):
        while order % prime == 0 and gf2m_pow(spec, a, order // prime) == 1:
            order //= prime
    return order


def generator(spec: FieldSpec) -> int:
    """Smallest code of multiplicative order ``2^m - 1``."""
    for a in range(1, 1 << spec.m):
        if multiplicative_order(spec, a) == spec.order:
            return a
    raise ConstructionError("no generator found; polynomial is not irreducible")


@dataclass(frozen=True)
class CharacterFamily:
    """Distinct nonzero Walsh masks on an ``n``-bit cube."""

    n: int
    masks: tuple[int, ...]
    provenance: str = "explicit"
    claimed_independence: int | None = None
    _checked: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        n = check_bits(self.n)
        masks = tuple(int(m) for m in self.masks)
        if len(set(masks)) != len(masks):
            raise DomainError("family masks must be distinct")
        for m in masks:
            if m <= 0 or m >= 1 << n:
                raise DomainError(f"mask {m} is not a nonzero subset of {n} coordinates")
        t = self.claimed_independence
        if t is not None and (t < 2 or t % 2):
            raise DomainError("claimed independence must be an even integer >= 2")
        object.__setattr__(self, "masks", masks)

    def __len__(self) -> int:
        return len(self.masks)

    def independent_at(self, t: int) -> bool:
        """Whether the claimed order covers ``t`` (full rank claims cover every t)."""
        c = self.claimed_independence
        return c is not None and (c >= t or c >= len(self.masks))

    def to_dict(self) -> dict:
        return {"n": self.n, "masks": list(self.masks), "provenance": self.provenance,
                "claimed_independence": self.claimed_independence}

    @classmethod
    def from_dict(cls, data: dict) -> CharacterFamily:
        return cls(int(data["n"]), tuple(data["masks"]), data.get("provenance", "explicit"),
                   data.get("claimed_independence"))


def gf2_rank(masks) -> int:
    """Rank over GF(2) of integer bit vectors."""
    basis: dict[int, int] = {}
    for v in masks:
        v = int(v)
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
    return len(basis)


@dataclass(frozen=True)
class IndependenceResult:
    passed: bool
    t: int
    witness: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.passed


def _subset_xors(masks: np.ndarray, size: int):
    """XOR of every ``size``-subset in lexicographic order, built level by level."""
    n = len(masks)
    last = np.array([-1], dtype=np.int64)
    acc = np.zeros(1, dtype=np.uint64)
    for _ in range(size):
        counts = n - 1 - last
        keep = counts > 0
        last, acc, counts = last[keep], acc[keep], counts[keep]
        total = int(counts.sum())
        if total == 0:
            return np.zeros(0, dtype=np.uint64)
        starts = np.repeat(last + 1 - np.cumsum(counts) + counts, counts)
        new_last = starts + np.arange(total)
        acc = np.repeat(acc, counts) ^ masks[new_last]
        last = new_last
    return acc


def _all_small_xors_distinct(masks: np.ndarray, half: int) -> bool:
    values = [_subset_xors(masks, h) for h in range(half + 1)]
    allv = np.concatenate(values)
    return np.unique(allv).shape[0] == allv.shape[0]


def _dependency_of_size(masks: list[int], r: int):
    """A set of ``r`` masks XORing to zero, assuming none of smaller size exists."""
    if r > len(masks):
        return None
    idx = range(len(masks))
    if comb(len(masks), r) <= _DIRECT_LIMIT:
        for sub in itertools.combinations(idx, r):
            acc = 0
            for i in sub:
                acc ^= masks[i]
            if acc == 0:
                return tuple(masks[i] for i in sub)
        return None
    a, b = (r + 1) // 2, r // 2
    table: dict[int, tuple[int, ...]] = {}
    for sub in itertools.combinations(idx, b):
        acc = 0
        for i in sub:
            acc ^= masks[i]
        if a == b and acc in table:
            # two distinct b-subsets with equal XOR; minimality forces disjointness
            return tuple(masks[i] for i in sorted(table[acc] + sub))
        table.setdefault(acc, sub)
    if a == b:
        return None
    for sub in itertools.combinations(idx, a):
        acc = 0
        for i in sub:
            acc ^= masks[i]
        other = table.get(acc)
        if other is not None:
            return tuple(masks[i] for i in sorted(other + sub))
    return None


def verify_independence(family, t: int) -> IndependenceResult:
    """Check that no ``r <= t`` distinct masks XOR to zero.

    ``family`` is a :class:`CharacterFamily` or a plain sequence of masks. On
    failure the witness is a dependency of minimal size.
    """
    t = int(t)
    if t < 2:
        raise DomainError("independence order must be >= 2")
    masks = list(family.masks) if isinstance(family, CharacterFamily) else [int(m) for m in family]
    if len(set(masks)) != len(masks):
        dup = next(m for m in masks if masks.count(m) > 1)
        return IndependenceResult(False, t, (dup, dup))
    if gf2_rank(masks) == len(masks):
        return IndependenceResult(True, t)
    arr = np.asarray(masks, dtype=np.uint64)
    if t % 2 == 0 and _all_small_xors_distinct(arr, t // 2):
        return IndependenceResult(True, t)
    for r in range(1, min(t, len(masks)) + 1):
        witness = _dependency_of_size(masks, r)
        if witness is not None:
            return IndependenceResult(False, t, witness)
    return IndependenceResult(True, t)


def bch_family(spec: FieldSpec, k: int) -> CharacterFamily:
    """Dual-BCH characters: ``2^m - 1`` masks on ``k*m`` bits, ``2k``-independent.

    Mask ``j`` concatenates the codes of ``alpha^j, alpha^(3j), ..., alpha^((2k-1)j)``
    with the first code in the lowest ``m`` bits.
    """
    if k < 1:
        raise DomainError("half-exponent k must be >= 1")
    if k * spec.m > MAX_BITS:
        raise DomainError(f"k*m = {k * spec.m} exceeds {MAX_BITS} bits")
    alpha = generator(spec)
    masks = []
    for j in range(spec.order):
        base = gf2m_pow(spec, alpha, j)
        mask = 0
        for slot in range(k):
            mask |= gf2m_pow(spec, base, 2 * slot + 1) << (slot * spec.m)
        masks.append(mask)
    return CharacterFamily(k * spec.m, tuple(masks), f"bch({spec.m},{k})", 2 * k)


def rademacher_family(n: int) -> CharacterFamily:
    """The coordinate characters; linearly independent, hence independent at every order."""
    n = check_bits(n)
    if n == 0:
        raise DomainError("need at least one coordinate")
    return CharacterFamily(n, tuple(1 << i for i in range(n)), "rademacher", n + (n % 2))


def random_family(n: int, size: int, seed: int) -> CharacterFamily:
    """``size`` distinct nonzero masks drawn uniformly without replacement."""
    n = check_bits(n)
    if not 0 <= size <= (1 << n) - 1:
        raise DomainError(f"cannot draw {size} distinct nonzero masks on {n} bits")
    rng = np.random.default_rng(seed)
    picks = rng.choice((1 << n) - 1, size=size, replace=False) + 1
    return CharacterFamily(n, tuple(sorted(int(m) for m in picks)), f"random({seed})", None)


def independent_family(n: int, size: int, t: int, seed: int = 0,
                       restarts: int = 200) -> CharacterFamily:
    """Greedy randomized search for a certified ``t``-independent family."""
    n = check_bits(n)
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        chosen: list[int] = []
        for cand in rng.permutation((1 << n) - 1) + 1:
            trial = chosen + [int(cand)]
            if verify_independence(trial, t):
                chosen = trial
                if len(chosen) == size:
                    fam = CharacterFamily(n, tuple(chosen), f"greedy({seed})", t)
                    return fam
    raise ConstructionError(f"no {t}-independent family of size {size} found on {n} bits")


def embed_family(family: CharacterFamily, offset: int, n: int) -> CharacterFamily:
    """Shift a family onto coordinates ``offset .. offset + family.n - 1`` of an n-bit cube."""
    if offset < 0 or offset + family.n > n:
        raise DomainError("embedded block does not fit in the joint cube")
    return CharacterFamily(n, tuple(m << offset for m in family.masks),
                           family.provenance, family.claimed_independence)
