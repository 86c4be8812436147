"""L_1 distances to symmetric hulls, survivor counting and coverage sweeps.

A coverage operator sends chosen q-characters onto the p-targets of one
block. If every target lies within ``epsilon`` of the symmetric hull of the
images, many q-characters must keep L_1 mass ``1 - 2 epsilon`` under the
operator, and the lemma then forces its norm to grow like
``N^((q - p) / (2q))``.
"""
from __future__ import annotations

import csv
import io
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from math import sqrt

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .errors import CapacityError, DomainError
from .gf2_designs import FieldSpec, bch_family, gf2_rank
from .hypercube import HypercubeFunction, MAX_BITS, character, character_matrix
from .lambda_analysis import EXACT_THRESHOLD, SignSearchResult, rademacher_sum_moment
from .lemma_lab import LemmaCertificate, structured_certificate, verify_lemma
from .operators_l1 import (CharacterOperator, L1Operator, character_operator_modulus_one,
                           character_operator_norm, modulus, operator_norm_l1, project_block)
from .simplex import simplex

SIMPLEX_CAPACITY = 10 ** 6
_AUTO_TABLEAU = 4 * 10 ** 6
_TARGET_BUDGET = 1 << 25
LEMMA_BITS = 15


# ---------------------------------------------------------------- hull distance

@dataclass
class HullDistance:
    distance: float
    combination: np.ndarray
    gap: float
    method: str
    iterations: int = 0

    def to_dict(self) -> dict:
        return {"distance": self.distance, "combination": [float(x) for x in self.combination],
                "gap": self.gap, "method": self.method, "iterations": self.iterations}


def _dual_value(u: np.ndarray, v: np.ndarray, C: np.ndarray, mu: np.ndarray) -> float:
    """``<u, v> - max_j |<u, c_j>|``: a lower bound on the distance when ``|u| <= 1``."""
    mu_u = mu * u
    support = float(np.abs(mu_u @ C).max()) if C.shape[1] else 0.0
    return float(mu_u @ v) - support


def _l1(x: np.ndarray, mu: np.ndarray) -> float:
    return float(mu @ np.abs(x))


def _simplex_distance(v: np.ndarray, C: np.ndarray, mu: np.ndarray) -> HullDistance:
    S, J = C.shape
    if S * J > SIMPLEX_CAPACITY:
        raise CapacityError(f"simplex needs 2^n * |columns| <= {SIMPLEX_CAPACITY}, got {S * J}")
    # variables: lambda+ (J), lambda- (J), r+ (S), r- (S), slack (1)
    eye = np.eye(S)
    A = np.zeros((S + 1, 2 * J + 2 * S + 1))
    A[:S, :J] = C
    A[:S, J:2 * J] = -C
    A[:S, 2 * J:2 * J + S] = eye
    A[:S, 2 * J + S:2 * J + 2 * S] = -eye
    A[S, :2 * J] = 1.0
    A[S, -1] = 1.0
    b = np.append(v, 1.0)
    flip = np.where(b < 0, -1.0, 1.0)
    A *= flip[:, None]
    b = b * flip
    c = np.concatenate([np.zeros(2 * J), mu, mu, [0.0]])
    basis = [2 * J + x if flip[x] > 0 else 2 * J + S + x for x in range(S)] + [2 * J + 2 * S]
    res = simplex(c, A, b, basis=basis)
    lam = res.x[:J] - res.x[J:2 * J]
    distance = _l1(v - C @ lam, mu)
    y = res.duals[:S] * flip[:S]
    u = np.clip(y / mu, -1.0, 1.0)
    gap = max(0.0, distance - _dual_value(u, v, C, mu))
    return HullDistance(distance, lam, gap, "simplex", res.pivots)


def _master(v: np.ndarray, Cs: np.ndarray, mu: np.ndarray):
    """Restricted problem over signed active columns, solved on distinct rows."""
    rows, inverse = np.unique(np.column_stack([v, Cs]), axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    w = np.bincount(inverse, weights=mu, minlength=rows.shape[0])
    R, k = rows.shape[0], Cs.shape[1]
    eye = sp.identity(R, format="csr")
    A_eq = sp.hstack([sp.csr_matrix(rows[:, 1:]), eye, -eye], format="csr")
    A_ub = sp.csr_matrix(np.concatenate([np.ones(k), np.zeros(2 * R)])[None, :])
    cost = np.concatenate([np.zeros(k), w, w])
    res = linprog(cost, A_ub=A_ub, b_ub=[1.0], A_eq=A_eq, b_eq=rows[:, 0], bounds=(0, None),
                  method="highs")
    if res.status != 0:
        raise RuntimeError(f"restricted master failed: {res.message}")
    lam = np.maximum(res.x[:k], 0.0)
    if lam.sum() > 1.0:
        lam /= lam.sum()
    u_rows = np.clip(res.eqlin.marginals / w, -1.0, 1.0)
    return lam, u_rows[inverse]


def _frank_wolfe_distance(v: np.ndarray, C: np.ndarray, mu: np.ndarray, tol: float,
                          max_iter: int) -> HullDistance:
    """Fully corrective conditional gradient.

    Each step adds the best signed column for the current dual function ``u``
    (the linear minimisation oracle over the hull's vertices), then re-solves
    the problem restricted to the active vertices. The dual value of ``u``
    certifies the gap.
    """
    S, J = C.shape
    lam_full = np.zeros(J)
    primal = _l1(v, mu)
    if J == 0 or primal == 0.0:
        return HullDistance(primal, lam_full, 0.0, "frank_wolfe", 0)
    u = np.sign(v)
    lower = _dual_value(u, v, C, mu)
    active: list[tuple[int, float]] = []
    it = 0
    for it in range(1, max_iter + 1):
        scores = (mu * u) @ C
        j = int(np.argmax(np.abs(scores)))
        s = 1.0 if scores[j] >= 0 else -1.0
        if (j, s) in active:
            break
        active.append((j, s))
        idx = [a for a, _ in active]
        signs = np.array([b for _, b in active])
        lam, u = _master(v, C[:, idx] * signs, mu)
        cand = np.zeros(J)
        np.add.at(cand, idx, lam * signs)
        value = _l1(v - C @ cand, mu)
        if value < primal:
            primal, lam_full = value, cand
        lower = max(lower, _dual_value(u, v, C, mu))
        if primal - lower <= tol:
            break
    return HullDistance(primal, lam_full, max(0.0, primal - lower), "frank_wolfe", it)


def _pick_method(method: str, S: int, J: int) -> str:
    if method == "auto":
        small = S * J <= SIMPLEX_CAPACITY and (S + 1) * (2 * J + 2 * S + 1) <= _AUTO_TABLEAU
        return "simplex" if small else "frank_wolfe"
    if method not in ("simplex", "frank_wolfe"):
        raise DomainError(f"unknown method {method!r}")
    return method


def hull_distance_array(v: np.ndarray, C: np.ndarray, mu: np.ndarray | None = None,
                        method: str = "auto", tol: float = 1e-7,
                        max_iter: int = 1000) -> HullDistance:
    """Array form of :func:`distance_to_symmetric_hull` (columns of ``C``, weights ``mu``)."""
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    C = np.asarray(C, dtype=np.float64).reshape(v.shape[0], -1)
    mu = np.full(v.shape[0], 1.0 / v.shape[0]) if mu is None else np.asarray(mu, dtype=np.float64)
    method = _pick_method(method, *C.shape)
    if method == "simplex":
        return _simplex_distance(v, C, mu)
    if not tol > 0:
        raise DomainError("frank_wolfe needs tol > 0")
    return _frank_wolfe_distance(v, C, mu, tol, max_iter)


def distance_to_symmetric_hull(v: HypercubeFunction, columns, method: str = "auto",
                               tol: float = 1e-7, max_iter: int = 1000) -> HullDistance:
    """``min over |lambda|_1 <= 1 of ||v - sum_j lambda_j c_j||_1``.

    ``method`` is ``simplex`` (exact LP), ``frank_wolfe`` (gap certified to
    ``tol``) or ``auto``. ``gap`` is the distance minus a dual lower bound.
    """
    cols = list(columns)
    for c in cols:
        if c.n != v.n:
            raise DomainError("columns and v must live on the same cube")
    C = np.column_stack([c.values for c in cols]) if cols else np.zeros((v.size, 0))
    return hull_distance_array(v.values, C, None, method, tol, max_iter)


def _map_ordered(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def dist_set(A, hull_columns, method: str = "auto", tol: float = 1e-7, workers: int = 1) -> float:
    """``max over a in A`` of the distance from ``a`` to the symmetric hull of ``hull_columns``."""
    A = list(A)
    if not A:
        raise DomainError("dist_set needs a nonempty set")
    cols = list(hull_columns)
    return max(_map_ordered(lambda a: distance_to_symmetric_hull(a, cols, method, tol).distance,
                            A, workers))


# ---------------------------------------------------------------- survivors

def reuse_bound(norm_T: float, epsilon: float) -> float:
    """``(||T|| / eps)^2 (1 - 2 eps)^-2``: targets one q-character can serve."""
    if not norm_T > 0:
        raise DomainError("norm must be positive")
    if not 0 < epsilon < 0.5:
        raise DomainError("epsilon must lie in (0, 1/2)")
    return (norm_T / epsilon) ** 2 / (1.0 - 2.0 * epsilon) ** 2


def survivor_lower_bound(norm_T: float, epsilon: float, count: int) -> float:
    """``(1 - 2 eps)^2 (eps / ||T||)^2 * count``."""
    if not norm_T > 0:
        return 0.0
    return (1.0 - 2.0 * epsilon) ** 2 * (epsilon / norm_T) ** 2 * count


@dataclass
class SurvivorAnalysis:
    norm_T: float
    f_norm: float
    E_complement_measure: float
    markov_ok: bool
    survivors: int
    survivor_flags: list[bool]
    image_norms: list[float]
    pairing_counts: list[int]
    reuse_bound: float | None

    @property
    def reuse_ok(self) -> bool:
        if self.reuse_bound is None or not self.pairing_counts:
            return True
        return max(self.pairing_counts) <= self.reuse_bound

    def to_dict(self) -> dict:
        out = asdict(self)
        out["reuse_ok"] = self.reuse_ok
        return out


def _check_epsilon(epsilon: float) -> None:
    if not 0 < epsilon < 0.5:
        raise DomainError("epsilon must lie in (0, 1/2)")


def _survivor_core(images: np.ndarray, f: np.ndarray, norm_T: float, epsilon: float,
                   targets: np.ndarray | None) -> SurvivorAnalysis:
    """Counting on the target block; ``images`` holds ``T_n w`` column by column."""
    D = images.shape[0]
    f_norm = float(f.mean())
    if norm_T > 0:
        in_E = f <= norm_T / epsilon
    else:
        in_E = np.ones(D, dtype=bool)
    complement = float(1.0 - in_E.mean())
    image_norms = np.abs(images).mean(axis=0) if images.size else np.zeros(images.shape[1])
    flags = image_norms >= 1.0 - 2.0 * epsilon - 1e-12
    counts: list[int] = []
    if targets is not None and images.shape[1]:
        pairings = (targets * in_E[:, None]).T @ images / D
        counts = [int(c) for c in (np.abs(pairings) >= 1.0 - 2.0 * epsilon - 1e-12).sum(axis=0)]
    return SurvivorAnalysis(
        norm_T, f_norm, complement,
        bool(f_norm <= norm_T * (1 + 1e-12) + 1e-15 and complement <= epsilon + 1e-15),
        int(flags.sum()), [bool(x) for x in flags], [float(x) for x in image_norms], counts,
        reuse_bound(norm_T, epsilon) if norm_T > 0 else None)


def survivor_analysis(T: L1Operator, V_q, block: int, epsilon: float,
                      targets=None) -> SurvivorAnalysis:
    """Markov truncation and survivor count for ``T_n = P_block T``.

    ``f = |T_n| 1``, ``E = [f <= ||T|| / eps]``; a q-character survives when
    ``||T_n w||_1 >= 1 - 2 eps``. With ``targets`` given, ``pairing_counts[k]``
    counts the targets ``v`` with ``|<1_E v, T_n w_k>| >= 1 - 2 eps``.
    """
    _check_epsilon(epsilon)
    if T.target.cube_bits is None:
        raise DomainError("target must be a uniform hypercube space")
    Tn = project_block(T, block)
    W = np.column_stack([w.values for w in V_q]) if len(V_q) else np.zeros((T.source.atoms, 0))
    if W.shape[0] != T.source.atoms:
        raise DomainError("V_q does not live on the source of T")
    f = modulus(Tn).apply(np.ones(T.source.atoms))
    tv = None
    if targets is not None:
        tv = np.column_stack([v.values for v in targets])
        if tv.shape[0] != T.target.atoms:
            raise DomainError("targets do not live on the target of T")
    return _survivor_core(Tn.matrix @ W, f, operator_norm_l1(T), epsilon, tv)


# ---------------------------------------------------------------- exponent fit

@dataclass
class ExponentFit:
    slope: float | None
    intercept: float | None
    residual: float | None
    points: list[list[float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def fit_exponent(N_values, norms) -> ExponentFit:
    """Least-squares slope of ``log norm`` against ``log N`` with RMS residual."""
    x = np.asarray(N_values, dtype=np.float64)
    y = np.asarray(norms, dtype=np.float64)
    if x.shape != y.shape:
        raise DomainError("need one norm per N")
    pts = [[float(a), float(b)] for a, b in zip(x, y)]
    if x.size < 2:
        return ExponentFit(None, None, None, pts)
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("exponent fit needs positive values")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = float(np.sqrt(np.mean((ly - (slope * lx + intercept)) ** 2)))
    return ExponentFit(float(slope), float(intercept), resid, pts)


# ---------------------------------------------------------------- coverage sweep

_RANDOM = re.compile(r"^random(?:\((-?\d+)\))?$")


def parse_strategy(strategy: str, seed: int = 0) -> tuple[str, int]:
    """``orthogonal_map``, ``random`` or ``random(<seed>)``."""
    if strategy == "orthogonal_map":
        return "orthogonal_map", seed
    m = _RANDOM.match(strategy)
    if m:
        return "random", int(m.group(1)) if m.group(1) is not None else seed
    raise DomainError(f"unknown strategy {strategy!r}")


def n_targets(p: int, n: int) -> int:
    """``N(p, n) = 2^(2n/p)``."""
    return 1 << (2 * n // p)


def _feasible(p: int, q: int, n: int, max_bits: int) -> str | None:
    if n < 1:
        return "n must be positive"
    if (2 * n) % p or (2 * n) % q:
        return f"n={n} is not divisible by p/2={p // 2} and q/2={q // 2}"
    if 2 * n // p > 16:
        return f"GF(2^{2 * n // p}) exceeds the field table"
    if n > max_bits or (1 << n) * n_targets(p, n) > _TARGET_BUDGET:
        return f"target block of {n} bits with {n_targets(p, n)} targets exceeds capacity"
    return None


@dataclass
class CoverageInstance:
    n: int
    N_pn: int
    target_masks: list[int]
    pool_size: int
    chosen_masks: list[int]
    norm: dict
    distances: list[float]
    distance_gaps: list[float]
    dist_set: float
    covered: bool
    survivors: SurvivorAnalysis
    survivor_bound: float
    survivor_bound_ok: bool | None
    lemma: LemmaCertificate
    leak: float | None = None

    @property
    def measured_norm(self) -> float:
        return float(self.norm["lower"])

    @property
    def lemma_ok(self) -> bool:
        return self.lemma.bound <= self.measured_norm + 1e-9 * max(1.0, self.measured_norm)

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in (
            "n", "N_pn", "target_masks", "pool_size", "chosen_masks", "norm", "distances",
            "distance_gaps", "dist_set", "covered", "survivor_bound", "survivor_bound_ok", "leak")}
        out["survivors"] = self.survivors.to_dict()
        out["lemma"] = self.lemma.to_dict()
        out["lemma_ok"] = self.lemma_ok
        out["measured_norm"] = self.measured_norm
        return out

    @classmethod
    def from_dict(cls, data: dict) -> CoverageInstance:
        sv = dict(data["survivors"])
        sv.pop("reuse_ok", None)
        lemma = dict(data["lemma"])
        lemma.pop("chain_labels", None)
        return cls(int(data["n"]), int(data["N_pn"]), list(data["target_masks"]),
                   int(data["pool_size"]), list(data["chosen_masks"]), dict(data["norm"]),
                   list(data["distances"]), list(data["distance_gaps"]), float(data["dist_set"]),
                   bool(data["covered"]), SurvivorAnalysis(**sv), float(data["survivor_bound"]),
                   data["survivor_bound_ok"], LemmaCertificate.from_dict(lemma), data.get("leak"))


CSV_COLUMNS = ("n", "target_index", "target_mask", "distance", "gap", "N_pn", "survivors",
               "measured_norm", "norm_exact", "lemma_bound", "reuse_bound", "covered")


@dataclass
class SeparationReport:
    p: int
    q: int
    n: list[int]
    epsilon: float
    strategy: str
    seed: int
    instances: list[CoverageInstance]
    exponent_fit: ExponentFit

    @property
    def distances(self) -> dict[int, list[float]]:
        return {inst.n: inst.distances for inst in self.instances}

    @property
    def survivors(self) -> list[int]:
        return [inst.survivors.survivors for inst in self.instances]

    @property
    def reuse_bound(self) -> list[float | None]:
        return [inst.survivors.reuse_bound for inst in self.instances]

    @property
    def required_norms(self) -> list[dict]:
        return [{"n": inst.n, "measured_norm": inst.measured_norm, "lemma_bound": inst.lemma.bound}
                for inst in self.instances]

    def refit(self) -> ExponentFit:
        """Recompute the exponent fit from the stored instances."""
        return fit_exponent([i.N_pn for i in self.instances],
                            [i.measured_norm for i in self.instances])

    def to_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "n": list(self.n), "epsilon": self.epsilon,
                "strategy": self.strategy, "seed": self.seed,
                "instances": [i.to_dict() for i in self.instances],
                "distances": {str(k): v for k, v in self.distances.items()},
                "survivors": self.survivors, "reuse_bound": self.reuse_bound,
                "required_norms": self.required_norms,
                "exponent_fit": self.exponent_fit.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> SeparationReport:
        fit = data["exponent_fit"]
        return cls(int(data["p"]), int(data["q"]), [int(x) for x in data["n"]],
                   float(data["epsilon"]), data["strategy"], int(data["seed"]),
                   [CoverageInstance.from_dict(i) for i in data["instances"]],
                   ExponentFit(fit["slope"], fit["intercept"], fit["residual"], fit["points"]))

    def csv_rows(self) -> list[dict]:
        rows = []
        for inst in self.instances:
            for i, (mask, d, g) in enumerate(zip(inst.target_masks, inst.distances,
                                                 inst.distance_gaps)):
                rows.append({"n": inst.n, "target_index": i, "target_mask": mask,
                             "distance": repr(float(d)), "gap": repr(float(g)),
                             "N_pn": inst.N_pn, "survivors": inst.survivors.survivors,
                             "measured_norm": repr(inst.measured_norm),
                             "norm_exact": inst.norm["exact"],
                             "lemma_bound": repr(float(inst.lemma.bound)),
                             "reuse_bound": repr(inst.survivors.reuse_bound),
                             "covered": inst.covered})
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.csv_rows())
        return buf.getvalue()


def _choose_characters(base: tuple[int, ...], n: int, count: int,
                       rng: np.random.Generator | None) -> tuple[list[int], int]:
    """Greedy GF(2)-independent picks from copies of ``base`` on disjoint n-bit blocks."""
    per_block = gf2_rank(base)
    blocks = -(-count // per_block) + (1 if rng is not None else 0)
    pool = [m << (b * n) for b in range(blocks) for m in base]
    order = range(len(pool)) if rng is None else rng.permutation(len(pool))
    basis: dict[int, int] = {}
    chosen: list[int] = []
    for i in order:
        v = w = pool[int(i)]
        while w:
            top = w.bit_length() - 1
            if top not in basis:
                basis[top] = w
                chosen.append(v)
                break
            w ^= basis[top]
        if len(chosen) == count:
            return chosen, len(pool)
    raise CapacityError("pool too small for the requested characters")


def _coverage_instance(p: int, q: int, n: int, epsilon: float, strategy: str, seed: int,
                       workers: int, exact_threshold: int, distance_method: str,
                       tol: float) -> CoverageInstance:
    targets = bch_family(FieldSpec.default(2 * n // p), p // 2)
    V = character_matrix(n, targets.masks)
    N = len(targets)
    base = bch_family(FieldSpec.default(2 * n // q), q // 2).masks
    leak = None
    if strategy == "orthogonal_map":
        chosen, pool_size = _choose_characters(base, n, N, None)
        U = V.copy()
    else:
        rng = np.random.default_rng([seed, n])
        chosen, pool_size = _choose_characters(base, n, N, rng)
        pi = rng.permutation(N)
        shift = int(rng.integers(1, N)) if N > 1 else 0
        sigma = rng.choice([-1.0, 1.0], size=N)
        sigma2 = rng.choice([-1.0, 1.0], size=N)
        leak = float(rng.uniform(0.0, 2.0 * epsilon))
        U = V[:, pi] * sigma + leak * V[:, (pi + shift) % N] * sigma2
    T = CharacterOperator(tuple(chosen), U, n)
    Tn = T.project_block((1 << n) - 1)

    est = character_operator_norm(Tn, exact_threshold=exact_threshold, seed=seed, restarts=2)
    f = character_operator_modulus_one(Tn)
    col_norms = np.abs(Tn.images).mean(axis=0)
    lower = max(est.lower, float(f.mean()), float(col_norms.max()))
    norm = {"value": lower, "lower": lower, "upper": max(est.upper, lower), "exact": est.exact}

    results = _map_ordered(
        lambda i: hull_distance_array(V[:, i], Tn.images, None, distance_method, tol),
        list(range(N)), workers)
    distances = [r.distance for r in results]
    gaps = [r.gap for r in results]
    dset = max(distances)
    covered = dset <= epsilon

    surv = _survivor_core(Tn.images, f, lower, epsilon, V)
    bound = survivor_lower_bound(lower, epsilon, n_targets(p, n))
    bound_ok = (surv.survivors >= bound) if covered else None

    keep = [j for j, ok in enumerate(surv.survivor_flags) if ok]
    lemma = _coverage_lemma(T, keep, q, n, lower)
    return CoverageInstance(n, n_targets(p, n), list(targets.masks), pool_size, chosen, norm,
                            distances, gaps, dset, covered, surv, bound, bound_ok, lemma, leak)


def _coverage_lemma(T: CharacterOperator, keep: list[int], q: int, n: int,
                    measured: float) -> LemmaCertificate:
    """Lemma on the surviving characters; C is exact since they are independent."""
    Ns = len(keep)
    D = 1 << n
    if Ns == 0:
        return structured_certificate(1.0, 0.0, 1, D, q, measured)
    value = rademacher_sum_moment(Ns, q) ** (1.0 / q)
    signs = SignSearchResult(value, [1] * Ns, True, 0)
    sub = CharacterOperator(tuple(T.source_masks[j] for j in keep), T.images[:, keep], n)
    if sub.rank <= LEMMA_BITS:
        dense, coords, r = sub.reduced(max_bits=LEMMA_BITS)
        vectors = [character(r, c) for c in coords]
        return verify_lemma(dense, vectors, q, sign_result=signs)
    eps = float(np.abs(sub.images).mean(axis=0).min())
    # the surviving sub-operator is a restriction, so its norm is at most ``measured``
    return structured_certificate(value / sqrt(Ns), eps, Ns, D, q, measured, signs.to_dict())


def coverage_experiment(p: int, q: int, n_list, epsilon: float = 0.1,
                        strategy: str = "orthogonal_map", seed: int = 0, workers: int = 1,
                        exact_threshold: int = EXACT_THRESHOLD, max_bits: int = MAX_BITS,
                        distance_method: str = "auto", tol: float = 1e-7) -> SeparationReport:
    """Synthesize coverage operators for each block size and collect the counting data.

    Targets are the dual-BCH p-characters of an ``n``-bit block; the sources
    are GF(2)-independent q-characters drawn from copies of the q-family on
    disjoint ``n``-bit blocks, kept symbolic (never materialised).
    """
    p, q = int(p), int(q)
    if p < 2 or q < 2 or p % 2 or q % 2:
        raise DomainError("p and q must be even integers >= 2")
    if q <= p:
        raise DomainError("need q > p")
    _check_epsilon(epsilon)
    kind, seed = parse_strategy(strategy, seed)
    n_list = [int(n) for n in n_list]
    for n in n_list:
        reason = _feasible(p, q, n, max_bits)
        if reason is not None:
            top = max(n_list)
            best = next((m for m in range(top, 0, -1) if _feasible(p, q, m, max_bits) is None), None)
            raise CapacityError(f"{reason}; largest feasible n <= {top} is {best}")
    instances = [_coverage_instance(p, q, n, epsilon, kind, seed, workers, exact_threshold,
                                    distance_method, tol) for n in n_list]
    label = kind if kind == "orthogonal_map" else f"random({seed})"
    fit = fit_exponent([i.N_pn for i in instances], [i.measured_norm for i in instances])
    return SeparationReport(p, q, n_list, float(epsilon), label, seed, instances, fit)
