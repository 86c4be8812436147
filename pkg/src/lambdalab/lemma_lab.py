"""Operator-norm lower bounds from sign-extremal norms.

For vectors ``v_1..v_N`` on a probability space and ``T`` into the uniform
L_1 space on ``D`` points, with ``max_eps ||sum eps_i v_i||_q <= C sqrt(N)``
and ``min_i ||T v_i||_1 >= eps``,

    ||T|| >= (eps / C) * sqrt(N) / D^(1/q)  =  (eps / C) * N^((q - p) / (2q))

where ``D = N^(p/2)``. :func:`verify_lemma` evaluates every intermediate
quantity of the duality argument behind this bound on the finite spaces.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from math import isclose, log2, sqrt

import numpy as np

from .errors import CapacityError, DomainError
from .gf2_designs import (CharacterFamily, bch_family, FieldSpec, independent_family,
                          rademacher_family)
from .hypercube import HypercubeFunction, character_matrix, lp_norm_values
from .lambda_analysis import (EXACT_THRESHOLD, SignSearchResult, max_sign_norm,
                              pairing_constant)
from .operators_l1 import AtomicMeasureSpace, L1Operator, operator_norm_l1

CHAIN_LABELS = (
    "eps*N",
    "sum <T* u_i, v_i>",
    "int sup_a |sum (T* u_i)(a) v_i(b)| db",
    "||T|| int ||sum v_i(b) u_i||_inf db",
    "||T|| D^(1/q) int ||sum v_i(b) u_i||_q db",
    "||T|| D^(1/q) (int int |sum u_i(c) v_i(b)|^q)^(1/q)",
    "C ||T|| N^((p+q)/(2q))",
)
_SLACK = 1e-9
_CHUNK_ENTRIES = 1 << 22


def _le(a: float, b: float) -> bool:
    return a <= b + _SLACK * max(1.0, abs(b))


def lemma_bound(C: float, epsilon: float, N: int, p: float, q: float) -> float:
    """``(epsilon / C) * N^((q - p) / (2q))``; ``p == q`` gives exponent zero."""
    if C <= 0:
        raise DomainError("C must be positive")
    if epsilon < 0:
        raise DomainError("epsilon must be non-negative")
    if not 1 <= p <= q:
        raise DomainError(f"need 1 <= p <= q, got p={p}, q={q}")
    return (epsilon / C) * float(N) ** ((q - p) / (2.0 * q))


@dataclass
class LemmaCertificate:
    N: int
    p: float | None
    q: float
    C: float
    epsilon: float
    bound: float
    measured_norm: float
    chain: list[float] | None
    verdict: str
    target_dim: int = 0
    sign_search: dict = field(default_factory=dict)

    @property
    def chain_monotone(self) -> bool:
        if self.chain is None:
            return True
        return all(_le(a, b) for a, b in zip(self.chain, self.chain[1:]))

    @property
    def bound_holds(self) -> bool:
        return _le(self.bound, self.measured_norm)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["chain_labels"] = list(CHAIN_LABELS) if self.chain is not None else None
        return out

    @classmethod
    def from_dict(cls, data: dict) -> LemmaCertificate:
        keys = cls.__dataclass_fields__
        return cls(**{k: v for k, v in data.items() if k in keys})


def _derived_p(N: int, D: int) -> float | None:
    if N <= 1:
        return None
    return 2.0 * log2(D) / log2(N)


def _verdict(epsilon: float, N: int, p: float | None, q: float, chain_ok: bool,
             bound_ok: bool) -> str:
    if not (chain_ok and bound_ok):
        return "violated"
    if epsilon <= 0 or (p is not None and p >= q):
        return "degenerate"
    return "holds"


def verify_lemma(T: L1Operator, vectors, q: float, sign_mode: str = "exact", p: float | None = None,
                 sign_result: SignSearchResult | None = None, seed: int = 0,
                 exact_threshold: int = EXACT_THRESHOLD) -> LemmaCertificate:
    """Run the lemma on a concrete operator and certify every step.

    ``vectors`` are functions on the source cube of ``T``; the target of ``T``
    must carry the uniform probability. ``p`` defaults to
    ``2 log2 D / log2 N``; a supplied ``p`` must reproduce ``D`` up to rounding.
    A precomputed ``sign_result`` skips the sign search.
    """
    if not vectors:
        raise DomainError("need at least one vector")
    if T.source.is_counting:
        raise DomainError("the lemma needs a probability space as the source")
    D = T.target.atoms
    if T.target.is_counting or not np.allclose(T.target.weights, 1.0 / D, rtol=0, atol=1e-15):
        raise DomainError("the lemma needs the uniform probability on the target")
    V = np.column_stack([v.values for v in vectors])
    if V.shape[0] != T.source.atoms:
        raise DomainError("vectors do not live on the source of T")
    N = V.shape[1]
    mu = T.source.weights
    nu = T.target.weights
    q = float(q)

    derived = _derived_p(N, D)
    if p is None:
        p = derived
    elif N > 1:
        target = N ** (p / 2.0)
        if not (np.floor(target) - 1e-9 <= D <= np.ceil(target) + 1e-9):
            raise DomainError(f"supplied p={p} gives N^(p/2)={target:.6g}, not D={D}")

    if sign_result is None:
        sign_result = max_sign_norm(vectors, q, mode=sign_mode, seed=seed,
                                    exact_threshold=exact_threshold)
    C = sign_result.value / sqrt(N)
    if C <= 0:
        raise DomainError("vectors have zero sign-extremal norm")

    TV = T.matrix @ V
    epsilon = float((nu @ np.abs(TV)).min())
    ustar = np.where(TV >= 0, 1.0, -1.0)
    A = T.adjoint_matrix() @ ustar
    norm_T = operator_norm_l1(T)
    weight = D ** (1.0 / q)

    line1 = float(np.sum(mu[:, None] * A * V))
    sup_int = 0.0
    linf = 0.0
    lq_outer = 0.0
    lq_inner = 0.0
    S = V.shape[0]
    chunk = max(1, _CHUNK_ENTRIES // max(S, D))
    for start in range(0, S, chunk):
        Vb = V[start:start + chunk]
        mb = mu[start:start + chunk]
        sup_int += float(mb @ np.abs(A @ Vb.T).max(axis=0))
        G = ustar @ Vb.T
        linf += float(mb @ np.abs(G).max(axis=0))
        per_b = lp_norm_values(G, q, axis=0, weights=nu)
        lq_outer += float(mb @ per_b)
        lq_inner += float(mb @ per_b ** q)
    chain = [
        epsilon * N,
        line1,
        sup_int,
        norm_T * linf,
        norm_T * weight * lq_outer,
        norm_T * weight * lq_inner ** (1.0 / q),
        C * norm_T * weight * sqrt(N),
    ]
    if N == 1:
        bound = epsilon / C
    elif p <= q and not isclose(p, derived, rel_tol=1e-12):
        bound = lemma_bound(C, epsilon, N, p, q)
    else:
        bound = epsilon * sqrt(N) / (C * weight)
    cert = LemmaCertificate(N, p, q, C, epsilon, bound, norm_T, chain, "", D,
                            sign_result.to_dict())
    cert.verdict = _verdict(epsilon, N, p, q, cert.chain_monotone, cert.bound_holds)
    return cert


def structured_certificate(C: float, epsilon: float, N: int, D: int, q: float,
                           measured_norm: float, sign_search: dict | None = None) -> LemmaCertificate:
    """Certificate for instances whose source is too large to materialise.

    Only the conclusion is evaluated; ``chain`` is None.
    """
    p = _derived_p(N, D)
    bound = epsilon / C if N == 1 else epsilon * sqrt(N) / (C * D ** (1.0 / q))
    cert = LemmaCertificate(N, p, float(q), C, epsilon, bound, measured_norm, None, "", D,
                            sign_search or {})
    cert.verdict = _verdict(epsilon, N, p, q, True, cert.bound_holds)
    return cert


@dataclass
class OptimalityReport:
    q: float
    N: int
    p: float
    m: int
    characters: int
    K: int
    masks: list[int]
    measured_C: float
    bound: float
    measured_norm: float
    ratio: float
    b_q: float
    certificate: LemmaCertificate

    @property
    def holds(self) -> bool:
        return (_le(self.bound, self.measured_norm) and _le(self.ratio, self.b_q)
                and self.certificate.verdict != "violated")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["certificate"] = self.certificate.to_dict()
        out["holds"] = self.holds
        return out

    @classmethod
    def from_dict(cls, data: dict) -> OptimalityReport:
        cert = dict(data["certificate"])
        cert.pop("chain_labels", None)
        keys = [k for k in cls.__dataclass_fields__ if k != "certificate"]
        return cls(**{k: data[k] for k in keys}, certificate=LemmaCertificate.from_dict(cert))


def _unit_characters(bits: int, count: int, t: int, seed: int) -> CharacterFamily:
    """A ``t``-independent family of ``count`` characters on ``bits`` coordinates."""
    if count <= bits:
        fam = rademacher_family(bits)
        return CharacterFamily(bits, fam.masks[:count], "rademacher", fam.claimed_independence)
    k = t // 2
    for m in range(1, 17):
        if k * m > bits:
            break
        if (1 << m) - 1 >= count:
            fam = bch_family(FieldSpec.default(m), k)
            return CharacterFamily(bits, fam.masks[:count], fam.provenance, t)
    return independent_family(bits, count, t, seed)


def optimality_instance(q: int, N: int, p: float, seed: int = 0,
                        max_bits: int = 24) -> OptimalityReport:
    """The construction showing the exponent ``(q - p) / (2q)`` cannot be improved.

    ``m = N^(p/2)`` points, ``M = m^(2/q)`` unit characters ``f_k`` with a
    certified Lambda(q) constant ``b_q``, each repeated ``K = N / M`` times,
    and ``T`` the identity of L_1^m.
    """
    if q < 2 or q != int(q) or int(q) % 2:
        raise DomainError("q must be an even integer >= 2")
    q = int(q)
    if N < 1:
        raise DomainError("N must be >= 1")
    if not 1 <= p <= q:
        raise DomainError("need 1 <= p <= q")
    log_m = (p / 2.0) * log2(N)
    bits = int(round(log_m))
    if abs(log_m - bits) > 1e-9:
        raise DomainError(f"m = N^(p/2) = 2^{log_m:.6g} is not a power of two")
    if bits > max_bits:
        raise CapacityError(f"m = 2^{bits} exceeds the 2^{max_bits} cap")
    count = max(1, int(round(2.0 ** (2.0 * bits / q))))
    if N % count:
        raise CapacityError(f"N={N} is not a multiple of m^(2/q)={count}")
    K = N // count
    if count > EXACT_THRESHOLD:
        raise CapacityError(f"{count} base characters exceed the exact sign-search threshold")
    if bits == 0:
        raise CapacityError("need at least one coordinate for a mean-zero character")
    family = _unit_characters(bits, count, q, seed)
    base = character_matrix(bits, family.masks)

    # sum_i eps_i f_{s(i)} = sum_k y_k f_k with y_k in [-K, K]; the norm is
    # convex in y, so the maximum sits at y = K * (+-1)^M.
    base_vectors = [HypercubeFunction(bits, base[:, k]) for k in range(count)]
    base_search = max_sign_norm(base_vectors, q, mode="exact")
    signs = [s for s in base_search.signs for _ in range(K)]
    sign_result = SignSearchResult(K * base_search.value, signs, True, base_search.evaluations)
    vectors = [base_vectors[i // K] for i in range(N)]

    T = L1Operator.identity(AtomicMeasureSpace.cube(bits))
    cert = verify_lemma(T, vectors, q, sign_result=sign_result)
    C = cert.C
    bound = lemma_bound(C, 1.0, N, p, q)
    norm_T = operator_norm_l1(T)
    return OptimalityReport(float(q), N, float(p), 1 << bits, count, K, list(family.masks), C,
                            bound, norm_T, norm_T / bound, pairing_constant(q), cert)
