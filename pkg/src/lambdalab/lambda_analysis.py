"""Moments, sign-extremal norms and Khintchine-type constants."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from math import gamma, lgamma, log, pi, sqrt

import numpy as np

from .errors import CapacityError, DomainError
from .gf2_designs import CharacterFamily
from .hypercube import (HypercubeFunction, character_matrix, check_bits, lp_norm,
                        lp_norm_values, synthesize)

EXACT_THRESHOLD = 20
_CHUNK_ENTRIES = 1 << 22


def double_factorial(k: int) -> int:
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


def pairing_constant(q: float) -> float:
    """``((q-1)!!)^(1/q)`` for even ``q``: the Gaussian q-th moment to the 1/q."""
    q = float(q)
    if q < 2 or q % 2:
        raise DomainError("pairing constant is defined for even q >= 2")
    return double_factorial(int(q) - 1) ** (1.0 / q)


def gaussian_moment_constant(p: float) -> float:
    """``||G||_p`` for a standard Gaussian; equals :func:`pairing_constant` at even p."""
    if p < 1:
        raise DomainError("exponent must be >= 1")
    return sqrt(2.0) * (gamma((p + 1) / 2) / sqrt(pi)) ** (1.0 / p)


def rademacher_fourth_moment(a) -> float:
    """Closed form ``E (sum a_i r_i)^4 = 3 |a|_2^4 - 2 sum a_i^4``."""
    a = np.asarray(a, dtype=np.float64)
    s2 = float(np.sum(a * a))
    return 3.0 * s2 * s2 - 2.0 * float(np.sum(a ** 4))


def rademacher_sum_moment(count: int, q: float) -> float:
    """``E |r_1 + ... + r_count|^q`` from the binomial law."""
    if count == 0:
        return 0.0
    k = np.arange(count + 1)
    logw = np.array([lgamma(count + 1) - lgamma(i + 1) - lgamma(count - i + 1) for i in k])
    logw -= count * log(2.0)
    vals = np.abs(count - 2.0 * k)
    with np.errstate(divide="ignore"):
        terms = np.where(vals > 0, np.exp(logw + q * np.log(np.where(vals > 0, vals, 1.0))), 0.0)
    return float(terms.sum())


def sign_patterns(count: int, start: int, stop: int) -> np.ndarray:
    """Rows ``start..stop-1`` of the sign table with the first sign fixed to +1."""
    codes = np.arange(start, stop, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(count - 1, dtype=np.int64)) & 1
    out = np.ones((stop - start, count))
    out[:, 1:] = 1.0 - 2.0 * bits
    return out


@dataclass
class SignSearchResult:
    value: float
    signs: list[int]
    exact: bool
    evaluations: int

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> SignSearchResult:
        return cls(float(data["value"]), [int(s) for s in data["signs"]],
                   bool(data["exact"]), int(data["evaluations"]))


@dataclass
class LambdaReport:
    q: float
    lower: float
    upper: float | None
    samples: int
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> LambdaReport:
        return cls(float(data["q"]), float(data["lower"]), data.get("upper"),
                   int(data["samples"]), int(data["seed"]))


def _stack(vectors) -> tuple[np.ndarray, int]:
    if len(vectors) == 0:
        raise DomainError("need at least one vector")
    n = vectors[0].n
    if any(v.n != n for v in vectors):
        raise DomainError("all vectors must live on the same cube")
    return np.column_stack([v.values for v in vectors]), n


def moment_norm(family: CharacterFamily, a, q: int) -> float:
    """``||sum a_i w_i||_q`` for even integer ``q`` by pointwise summation."""
    if q != int(q) or int(q) < 2 or int(q) % 2:
        raise DomainError(f"moment_norm needs an even integer q >= 2, got {q}")
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (len(family),):
        raise DomainError("need one coefficient per character")
    f = synthesize(family.n, family.masks, a)
    q = int(q)
    return float(np.mean(f.values ** q) ** (1.0 / q))


def _exact_sign_max(V: np.ndarray, q: float) -> SignSearchResult:
    points, count = V.shape
    total = 1 << (count - 1)
    chunk = max(1, _CHUNK_ENTRIES // points)
    best, best_row = -1.0, None
    for start in range(0, total, chunk):
        E = sign_patterns(count, start, min(total, start + chunk))
        norms = lp_norm_values(V @ E.T, q, axis=0)
        i = int(np.argmax(norms))
        if norms[i] > best:
            best, best_row = float(norms[i]), E[i]
    return SignSearchResult(best, [int(s) for s in best_row], True, total)


def _local_search(V: np.ndarray, q: float, signs: np.ndarray) -> tuple[float, np.ndarray, int]:
    s = V @ signs
    value = float(lp_norm_values(s, q))
    evaluations = 1
    while True:
        flipped = s[:, None] - 2.0 * V * signs[None, :]
        norms = lp_norm_values(flipped, q, axis=0)
        evaluations += len(signs)
        i = int(np.argmax(norms))
        if norms[i] <= value * (1 + 1e-13):
            return value, signs, evaluations
        signs = signs.copy()
        signs[i] = -signs[i]
        s = flipped[:, i].copy()
        value = float(norms[i])


def _heuristic_sign_max(V: np.ndarray, q: float, seed: int, restarts: int) -> SignSearchResult:
    rng = np.random.default_rng(seed)
    count = V.shape[1]
    starts = [np.ones(count)] + [rng.choice([-1.0, 1.0], size=count) for _ in range(restarts)]
    best, best_signs, evaluations = -1.0, None, 0
    for start in starts:
        value, signs, used = _local_search(V, q, start)
        evaluations += used
        if value > best:
            best, best_signs = value, signs
    if best_signs[0] < 0:
        best_signs = -best_signs
    # recompute at the reported signs so the value is reproducible from them
    best = float(lp_norm_values(V @ best_signs, q))
    return SignSearchResult(best, [int(s) for s in best_signs], False, evaluations)


def max_sign_norm(vectors, q: float, mode: str = "exact", seed: int = 0,
                  restarts: int = 16, exact_threshold: int = EXACT_THRESHOLD) -> SignSearchResult:
    """``max over eps in {-1,1}^N of ||sum eps_i v_i||_q``.

    ``mode`` is ``exact`` (enumerate ``2^(N-1)`` patterns), ``heuristic``
    (random restarts plus single-flip ascent; a lower bound) or ``auto``.
    """
    V, _ = _stack(vectors)
    count = V.shape[1]
    if mode == "auto":
        mode = "exact" if count <= exact_threshold else "heuristic"
    if mode == "exact":
        if count > exact_threshold:
            raise CapacityError(
                f"exact sign search over {count} vectors exceeds threshold {exact_threshold}")
        return _exact_sign_max(V, q)
    if mode == "heuristic":
        return _heuristic_sign_max(V, q, seed, restarts)
    raise DomainError(f"unknown sign search mode {mode!r}")


def _probe_coefficients(count: int, samples: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    draws = rng.standard_normal((samples, count))
    probes = np.vstack([np.ones((1, count)), np.eye(count), draws])
    return probes / np.linalg.norm(probes, axis=1, keepdims=True)


def lambda_constant(family: CharacterFamily, q: float, samples: int = 256,
                    seed: int = 0) -> LambdaReport:
    """Sampled lower bound and combinatorial upper bound for the Lambda(q) constant."""
    if samples < 1:
        raise DomainError("samples must be >= 1")
    W = character_matrix(family.n, family.masks)
    A = _probe_coefficients(len(family), samples, seed)
    lower = 0.0
    chunk = max(1, _CHUNK_ENTRIES // W.shape[0])
    for start in range(0, A.shape[0], chunk):
        block = A[start:start + chunk]
        lower = max(lower, float(lp_norm_values(W @ block.T, q, axis=0).max()))
    upper = None
    if float(q) >= 2 and float(q) % 2 == 0 and family.independent_at(int(q)):
        upper = pairing_constant(q)
    return LambdaReport(float(q), lower, upper, samples, seed)


def khintchine_estimate(p: float, count: int, trials: int = 1000, seed: int = 0) -> float:
    """Sampled sup of ``||sum a_i r_i||_p / |a|_2`` over ``count`` Rademachers.

    Each norm is exact: the sum is evaluated on every point of the
    ``count``-bit cube (half of it, by the symmetry x -> -x).
    """
    if p < 2:
        raise DomainError("Khintchine estimate is defined for p >= 2")
    count = check_bits(count)
    if count == 0:
        raise DomainError("need at least one Rademacher function")
    R = sign_patterns(count, 0, 1 << (count - 1))
    A = _probe_coefficients(count, trials, seed)
    best = 0.0
    chunk = max(1, _CHUNK_ENTRIES // R.shape[0])
    for start in range(0, A.shape[0], chunk):
        S = R @ A[start:start + chunk].T
        best = max(best, float(lp_norm_values(S, p, axis=0).max()))
    return best


@dataclass
class CrossBlockResult:
    passed: bool
    ratio: float
    lhs: float
    rhs: float
    constant: float

    def __bool__(self) -> bool:
        return self.passed


def cross_block_check(blocks, p: float) -> CrossBlockResult:
    """Check ``||sum_k g_k||_p <= 2 B_p (sum_k ||g_k||_p^2)^(1/2)`` on the joint cube.

    ``blocks`` is a list of ``(family, coefficients)`` with every family
    already placed on the same joint cube; their supports must be disjoint.
    The reported ratio is ``lhs / (sum ||g_k||_p^2)^(1/2)``.
    """
    if not blocks:
        raise DomainError("need at least one block")
    n = blocks[0][0].n
    used = 0
    parts = []
    for fam, coeffs in blocks:
        if fam.n != n:
            raise DomainError("all blocks must be placed on the same joint cube")
        support = 0
        for m in fam.masks:
            support |= m
        if support & used:
            raise DomainError("blocks share a coordinate")
        used |= support
        parts.append(synthesize(n, fam.masks, coeffs))
    total = HypercubeFunction(n, np.sum([g.values for g in parts], axis=0))
    lhs = lp_norm(total, p)
    scale = sqrt(sum(lp_norm(g, p) ** 2 for g in parts))
    constant = gaussian_moment_constant(p)
    rhs = 2.0 * constant * scale
    ratio = lhs / scale if scale > 0 else 0.0
    return CrossBlockResult(lhs <= rhs * (1 + 1e-12), ratio, lhs, rhs, constant)
