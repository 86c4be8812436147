"""Operators between finite atomic L_1 spaces.

Functions are stored as densities: a source function ``f`` is mapped to the
target function ``M @ f``. The unit ball of L_1(mu) has extreme points
``+-1_j / mu_j``, so

    ||T|| = max_j (1 / mu_j) * sum_i nu_i |M_ij|

with ``mu_j = 1`` for a counting-measure source.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import log2

import numpy as np

from .errors import CapacityError, DomainError
from .gf2_designs import gf2_rank
from .hypercube import (MAX_BITS, block_average, character_matrix, check_bits, check_mask,
                        parity)


@dataclass(frozen=True, eq=False)
class AtomicMeasureSpace:
    """``atoms`` points with probability ``weights`` or counting measure."""

    atoms: int
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.atoms < 1:
            raise DomainError("a measure space needs at least one atom")
        if self.weights is not None:
            w = np.array(self.weights, dtype=np.float64).reshape(-1)
            if w.shape != (self.atoms,):
                raise DomainError("one weight per atom required")
            if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
                raise DomainError("probability weights must be positive and sum to 1")
            w.setflags(write=False)
            object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, atoms: int) -> AtomicMeasureSpace:
        return cls(atoms, np.full(atoms, 1.0 / atoms))

    @classmethod
    def counting(cls, atoms: int) -> AtomicMeasureSpace:
        return cls(atoms, None)

    @classmethod
    def cube(cls, n: int) -> AtomicMeasureSpace:
        return cls.uniform(1 << check_bits(n))

    @property
    def is_counting(self) -> bool:
        return self.weights is None

    @property
    def measure(self) -> np.ndarray:
        return np.ones(self.atoms) if self.weights is None else self.weights

    @property
    def cube_bits(self) -> int | None:
        """Bit count when this is the uniform probability on a hypercube."""
        if self.weights is None or self.atoms & (self.atoms - 1):
            return None
        if not np.allclose(self.weights, 1.0 / self.atoms, rtol=0, atol=1e-15):
            return None
        return int(log2(self.atoms))

    def to_dict(self) -> dict:
        if self.weights is None:
            return {"atoms": self.atoms, "weights": "counting"}
        return {"atoms": self.atoms, "weights": [float(w) for w in self.weights]}

    @classmethod
    def from_dict(cls, data: dict) -> AtomicMeasureSpace:
        if data["weights"] == "counting":
            return cls.counting(int(data["atoms"]))
        return cls(int(data["atoms"]), np.asarray(data["weights"], dtype=np.float64))


@dataclass(frozen=True, eq=False)
class L1Operator:
    source: AtomicMeasureSpace
    target: AtomicMeasureSpace
    matrix: np.ndarray

    def __post_init__(self):
        M = np.array(self.matrix, dtype=np.float64)
        if M.shape != (self.target.atoms, self.source.atoms):
            raise DomainError(
                f"matrix shape {M.shape} does not match target x source "
                f"({self.target.atoms}, {self.source.atoms})")
        if not np.all(np.isfinite(M)):
            raise DomainError("operator entries must be finite")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    def apply(self, f: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(f, dtype=np.float64)

    def adjoint_matrix(self) -> np.ndarray:
        """Matrix of ``T*`` acting on bounded target functions."""
        return (self.matrix * self.target.measure[:, None]).T / self.source.measure[:, None]

    def compose(self, other: L1Operator) -> L1Operator:
        """``self @ other``; ``other``'s target must be ``self``'s source."""
        if other.target.atoms != self.source.atoms:
            raise DomainError("incompatible operators")
        return L1Operator(other.source, self.target, self.matrix @ other.matrix)

    def to_dict(self) -> dict:
        return {"source": self.source.to_dict(), "target": self.target.to_dict(),
                "matrix": [[float(x) for x in row] for row in self.matrix]}

    @classmethod
    def from_dict(cls, data: dict) -> L1Operator:
        return cls(AtomicMeasureSpace.from_dict(data["source"]),
                   AtomicMeasureSpace.from_dict(data["target"]),
                   np.asarray(data["matrix"], dtype=np.float64))

    @classmethod
    def identity(cls, space: AtomicMeasureSpace) -> L1Operator:
        return cls(space, space, np.eye(space.atoms))


def column_norms(T: L1Operator) -> np.ndarray:
    """``||T(1_j / mu_j)||_1`` for every source atom ``j``."""
    return (T.target.measure @ np.abs(T.matrix)) / T.source.measure


def operator_norm_l1(T: L1Operator) -> float:
    """Exact L_1 -> L_1 operator norm (max over normalised atoms)."""
    return float(column_norms(T).max())


def modulus(T: L1Operator) -> L1Operator:
    """The modulus ``|T|``: entrywise absolute value of the kernel."""
    return L1Operator(T.source, T.target, np.abs(T.matrix))


def adjoint_norm_linf(T: L1Operator) -> float:
    """Norm of ``T*`` on L_inf(target) -> L_inf(source): its max absolute row sum."""
    return float(np.linalg.norm(T.adjoint_matrix(), ord=np.inf))


def build_Jp(families, n: int) -> L1Operator:
    """Operator from counting-measure l_1 onto characters of disjoint blocks.

    ``families`` is a list of ``(block_mask, CharacterFamily)`` where the
    family's coordinates are numbered inside the block (lowest block bit
    first). Column order is block by block, family order within a block.
    """
    n = check_bits(n)
    used = 0
    joint_masks = []
    for block, fam in families:
        block = check_mask(n, block)
        if block & used:
            raise DomainError("blocks overlap")
        used |= block
        bits = [i for i in range(n) if (block >> i) & 1]
        if fam.n > len(bits):
            raise DomainError("family has more coordinates than its block")
        for m in fam.masks:
            joint_masks.append(sum(1 << bits[i] for i in range(fam.n) if (m >> i) & 1))
    if not joint_masks:
        raise DomainError("need at least one character")
    columns = character_matrix(n, joint_masks)
    return L1Operator(AtomicMeasureSpace.counting(len(joint_masks)), AtomicMeasureSpace.cube(n),
                      columns)


def project_block(T: L1Operator, block: int) -> L1Operator:
    """``P_block T``: conditional expectation of every image onto the block coordinates."""
    n = T.target.cube_bits
    if n is None:
        raise DomainError("target is not a uniform hypercube space")
    block = check_mask(n, block)
    return L1Operator(T.source, T.target, block_average(T.matrix, n, block, axis=0))


def conditional_expectation_operator(n: int, block: int) -> L1Operator:
    space = AtomicMeasureSpace.cube(n)
    return L1Operator(space, space, block_average(np.eye(1 << n), n, block, axis=0))


def _reduce_masks(masks) -> tuple[list[int], int]:
    """Coordinates of each mask in a GF(2) basis of their span."""
    basis: list[tuple[int, int]] = []  # (pivot bit, vector) in reduced echelon form
    for v in masks:
        w = int(v)
        for pivot, b in basis:
            if (w >> pivot) & 1:
                w ^= b
        if w:
            pivot = w.bit_length() - 1
            basis = [(pv, b ^ w if (b >> pivot) & 1 else b) for pv, b in basis]
            basis.append((pivot, w))
    coords = []
    for v in masks:
        w, c = int(v), 0
        for idx, (pivot, b) in enumerate(basis):
            if (w >> pivot) & 1:
                w ^= b
                c |= 1 << idx
        coords.append(c)
    return coords, len(basis)


@dataclass(frozen=True, eq=False)
class CharacterOperator:
    """Finite-rank operator ``f -> sum_j <chi_j, f> u_j``.

    ``source_masks`` are Walsh masks of arbitrary width (Python ints) on a
    source cube that is never materialised; ``images`` has one target
    function per column. Everything the operator does depends on the source
    only through the sigma-algebra generated by the characters, which is a
    cube of ``rank`` bits.
    """

    source_masks: tuple[int, ...]
    images: np.ndarray
    target_bits: int

    def __post_init__(self):
        U = np.array(self.images, dtype=np.float64)
        check_bits(self.target_bits)
        if U.shape != (1 << self.target_bits, len(self.source_masks)):
            raise DomainError("images must be (2**target_bits, number of characters)")
        if len(set(self.source_masks)) != len(self.source_masks):
            raise DomainError("source characters must be distinct")
        U.setflags(write=False)
        object.__setattr__(self, "images", U)
        object.__setattr__(self, "source_masks", tuple(int(m) for m in self.source_masks))

    @property
    def rank(self) -> int:
        return gf2_rank(self.source_masks)

    @property
    def independent(self) -> bool:
        return self.rank == len(self.source_masks)

    def image_of(self, mask: int) -> np.ndarray:
        """``T w`` for the source character ``w``; zero unless it is a column."""
        try:
            return self.images[:, self.source_masks.index(int(mask))]
        except ValueError:
            return np.zeros(self.images.shape[0])

    def project_block(self, block: int) -> CharacterOperator:
        block = check_mask(self.target_bits, block)
        return CharacterOperator(self.source_masks,
                                 block_average(self.images, self.target_bits, block, axis=0),
                                 self.target_bits)

    def reduced(self, max_bits: int = MAX_BITS) -> tuple[L1Operator, list[int], int]:
        """Dense operator on the reduced source cube and the reduced masks."""
        coords, r = _reduce_masks(self.source_masks)
        if r > max_bits:
            raise CapacityError(f"reduced source needs {r} bits (cap {max_bits})")
        chi = character_matrix(r, coords)
        # <chi_j, f> is a probability pairing on the reduced cube
        M = self.images @ chi.T / (1 << r)
        return (L1Operator(AtomicMeasureSpace.cube(r), AtomicMeasureSpace.cube(self.target_bits), M),
                coords, r)


@dataclass
class NormEstimate:
    """Operator norm with a certified bracket ``lower <= ||T|| <= upper``."""

    value: float
    lower: float
    upper: float
    exact: bool

    def to_dict(self) -> dict:
        return {"value": self.value, "lower": self.lower, "upper": self.upper,
                "exact": self.exact}


def _pattern_rows(coords: list[int], r: int, start: int, stop: int) -> np.ndarray:
    x = np.arange(start, stop, dtype=np.uint64)
    return np.column_stack([1.0 - 2.0 * parity(x & np.uint64(c)) for c in coords])


def character_operator_norm(T: CharacterOperator, exact_threshold: int = 20, seed: int = 0,
                            restarts: int = 8) -> NormEstimate:
    """``max_x ||sum_j chi_j(x) u_j||_1`` over the realised sign patterns.

    Exact enumeration when the characters span at most ``exact_threshold``
    bits; otherwise (independent characters only) a local-search lower bound
    bracketed by ``min(sum ||u_j||_1, sqrt(J * lambda_max(Gram)))``.
    """
    from .lambda_analysis import _heuristic_sign_max

    U = T.images
    nu = 1.0 / U.shape[0]
    coords, r = _reduce_masks(T.source_masks)
    if r <= exact_threshold:
        total = 1 << r
        chunk = max(1, (1 << 22) // max(U.shape[0], len(coords)))
        best = 0.0
        for start in range(0, total, chunk):
            P = _pattern_rows(coords, r, start, min(total, start + chunk))
            best = max(best, float((np.abs(U @ P.T).sum(axis=0) * nu).max()))
        return NormEstimate(best, best, best, True)
    if r != len(coords):
        raise CapacityError("dependent characters spanning more bits than the exact threshold")
    found = _heuristic_sign_max(U, 1.0, seed, restarts).value
    gram = U.T @ U * nu
    upper = min(float(np.abs(U).sum() * nu),
                float(np.sqrt(len(coords) * max(np.linalg.eigvalsh(gram)[-1], 0.0))))
    upper = max(upper, found)
    return NormEstimate(found, found, upper, False)


def expected_abs_signed_sum(a) -> float:
    """``E |sum_j eps_j a_j|`` over independent uniform signs, computed exactly.

    Coefficients are grouped by magnitude; each group contributes a scaled
    binomial law and at most three groups are convolved. Small inputs are
    enumerated directly.
    """
    a = np.abs(np.asarray(a, dtype=np.float64))
    a = a[a > 0]
    if a.size == 0:
        return 0.0
    mags, counts = np.unique(a, return_counts=True)
    if a.size <= 16 and len(mags) > 3:
        from .lambda_analysis import sign_patterns
        E = sign_patterns(a.size, 0, 1 << (a.size - 1))
        return float(np.abs(E @ a).mean())
    if len(mags) > 3:
        raise CapacityError("too many distinct magnitudes for an exact signed-sum law")
    from scipy.stats import binom

    values = np.zeros(1)
    probs = np.ones(1)
    for mag, c in zip(mags, counts):
        k = np.arange(c + 1)
        v = mag * (c - 2.0 * k)
        w = binom.pmf(k, c, 0.5)
        values = (values[:, None] + v[None, :]).ravel()
        probs = (probs[:, None] * w[None, :]).ravel()
    return float(np.dot(probs, np.abs(values)))


def character_operator_modulus_one(T: CharacterOperator, exact_bits: int = 16) -> np.ndarray:
    """``|T| 1`` as a target function: ``y -> E_x |sum_j chi_j(x) u_j(y)|``."""
    U = T.images
    coords, r = _reduce_masks(T.source_masks)
    if r <= exact_bits:
        total = 1 << r
        out = np.zeros(U.shape[0])
        chunk = max(1, (1 << 22) // U.shape[0])
        for start in range(0, total, chunk):
            P = _pattern_rows(coords, r, start, min(total, start + chunk))
            out += np.abs(U @ P.T).sum(axis=1)
        return out / total
    if r != len(coords):
        raise CapacityError("dependent characters spanning too many bits for an exact modulus")
    cache: dict[bytes, float] = {}
    out = np.empty(U.shape[0])
    for y in range(U.shape[0]):
        row = np.sort(np.abs(U[y]))
        key = row.tobytes()
        if key not in cache:
            cache[key] = expected_abs_signed_sum(row)
        out[y] = cache[key]
    return out
