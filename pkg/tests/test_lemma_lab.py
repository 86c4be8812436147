import itertools
from math import log2, sqrt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lambdalab.errors import CapacityError, DomainError
from lambdalab.gf2_designs import FieldSpec, bch_family
from lambdalab.hypercube import HypercubeFunction, character
from lambdalab.lemma_lab import (CHAIN_LABELS, LemmaCertificate, OptimalityReport, lemma_bound,
                                 optimality_instance, structured_certificate, verify_lemma)
from lambdalab.operators_l1 import (AtomicMeasureSpace, L1Operator,
                                    conditional_expectation_operator)


def test_lemma_bound_examples():
    assert lemma_bound(1.0, 1.0, 16, 2, 4) == pytest.approx(2.0)
    assert lemma_bound(1.0, 0.0, 16, 2, 4) == 0.0
    assert lemma_bound(2.0, 1.0, 64, 4, 4) == pytest.approx(0.5)
    assert lemma_bound(1.0, 1.0, 1, 1, 4) == 1.0
    with pytest.raises(DomainError):
        lemma_bound(1.0, 1.0, 16, 5, 4)
    with pytest.raises(DomainError):
        lemma_bound(0.0, 1.0, 16, 2, 4)


@given(st.floats(0.01, 10), st.floats(0.0, 1.0), st.integers(1, 10 ** 6),
       st.floats(1, 8), st.floats(0, 1))
def test_lemma_bound_monotone(C, eps, N, q, frac):
    p = 1 + frac * (q - 1)
    b = lemma_bound(C, eps, N, p, q)
    assert b >= 0
    assert lemma_bound(C, eps, N + 1, p, q) >= b * (1 - 1e-12)
    assert lemma_bound(C * 2, eps, N, p, q) <= b * (1 + 1e-12)


def test_trivial_instance():
    space = AtomicMeasureSpace.cube(1)
    cert = verify_lemma(L1Operator.identity(space), [character(1, 1)], 4)
    assert cert.N == 1 and cert.p is None
    assert cert.bound == pytest.approx(1.0) and cert.measured_norm == pytest.approx(1.0)
    assert cert.verdict == "holds" and cert.chain_monotone


def test_rademacher_identity_is_degenerate():
    space = AtomicMeasureSpace.cube(4)
    vecs = [character(4, 1 << i) for i in range(4)]
    cert = verify_lemma(L1Operator.identity(space), vecs, 4)
    assert cert.p == pytest.approx(4.0)
    assert cert.C == pytest.approx(40 ** 0.25 / 2)
    assert cert.bound == pytest.approx(2 / 40 ** 0.25)
    assert cert.verdict == "degenerate" and cert.bound_holds


def test_bch_with_block_projection_is_degenerate():
    fam = bch_family(FieldSpec.default(4), 2)
    vecs = [character(8, m) for m in fam.masks]
    T = conditional_expectation_operator(8, 0b1111)
    cert = verify_lemma(T, vecs, 4, sign_mode="heuristic")
    assert cert.epsilon == 0.0 and cert.verdict == "degenerate"


def _random_instance(seed, bits=4, N=16, D=256):
    rng = np.random.default_rng(seed)
    T = L1Operator(AtomicMeasureSpace.cube(bits), AtomicMeasureSpace.uniform(D),
                   rng.normal(size=(D, 1 << bits)))
    vecs = [character(bits, m) for m in rng.choice(np.arange(1, 1 << bits), N, replace=False)]
    return T, vecs


def test_random_operator_holds():
    T, vecs = _random_instance(0, bits=8, N=16, D=16)
    cert = verify_lemma(T, vecs, 4)
    assert cert.p == pytest.approx(2.0) and cert.verdict == "holds"
    assert cert.chain_monotone and len(cert.chain) == len(CHAIN_LABELS)
    assert cert.bound <= cert.measured_norm


@settings(max_examples=25)
@given(st.integers(0, 2 ** 31), st.integers(2, 8), st.sampled_from([2.0, 3.0, 4.0, 6.0]))
def test_chain_is_monotone(seed, N, q):
    rng = np.random.default_rng(seed)
    D = int(rng.integers(2, 40))
    T = L1Operator(AtomicMeasureSpace.cube(3), AtomicMeasureSpace.uniform(D),
                   rng.normal(size=(D, 8)))
    vecs = [HypercubeFunction(3, rng.normal(size=8)) for _ in range(N)]
    cert = verify_lemma(T, vecs, q)
    assert cert.chain_monotone and cert.bound_holds
    assert cert.verdict in ("holds", "degenerate")


def test_supplied_p():
    T, vecs = _random_instance(1, bits=5, N=16, D=256)
    cert = verify_lemma(T, vecs, 4, sign_mode="heuristic", p=4.0)
    assert cert.p == 4.0 and cert.verdict == "degenerate"
    with pytest.raises(DomainError):
        verify_lemma(T, vecs, 4, sign_mode="heuristic", p=2.0)


def test_lemma_errors():
    space = AtomicMeasureSpace.cube(2)
    with pytest.raises(DomainError):
        verify_lemma(L1Operator.identity(space), [], 4)
    with pytest.raises(DomainError):
        verify_lemma(L1Operator.identity(AtomicMeasureSpace.counting(4)), [character(2, 1)], 4)
    with pytest.raises(DomainError):
        verify_lemma(L1Operator.identity(space), [character(3, 1)], 4)


def test_certificate_round_trip():
    T, vecs = _random_instance(2, N=4, D=16)
    cert = verify_lemma(T, vecs, 4)
    d = cert.to_dict()
    assert d["chain_labels"] == list(CHAIN_LABELS)
    d.pop("chain_labels")
    assert LemmaCertificate.from_dict(d) == cert


def test_structured_certificate():
    cert = structured_certificate(1.5, 0.5, 16, 256, 4, measured_norm=2.0)
    assert cert.chain is None and cert.p == pytest.approx(4.0)
    assert cert.bound == pytest.approx(0.5 * 4 / (1.5 * 4))
    assert cert.verdict == "degenerate"
    assert structured_certificate(1.0, 0.5, 1, 4, 4, 0.1).verdict == "violated"


def _brute_optimality(report: OptimalityReport) -> float:
    bits = int(log2(report.m))
    base = np.stack([character(bits, m).values for m in report.masks], axis=1)
    V = np.repeat(base, report.K, axis=1)
    best = 0.0
    for signs in itertools.product([-1.0, 1.0], repeat=V.shape[1]):
        best = max(best, float(np.mean((V @ np.asarray(signs)) ** 4) ** 0.25))
    return best / sqrt(V.shape[1])


def test_optimality_against_brute_force():
    rep = optimality_instance(4, 16, 2.0)
    assert (rep.m, rep.characters, rep.K) == (16, 4, 4)
    C = _brute_optimality(rep)
    assert rep.measured_C == pytest.approx(C, rel=1e-12)
    assert rep.bound == pytest.approx(4 ** 0.5 / C, rel=1e-12)
    assert rep.ratio == pytest.approx(rep.measured_norm / rep.bound)
    assert rep.holds and rep.ratio <= rep.b_q
    assert OptimalityReport.from_dict(rep.to_dict()).to_dict() == rep.to_dict()


def test_optimality_errors():
    with pytest.raises(DomainError):
        optimality_instance(3, 16, 2.0)
    with pytest.raises(DomainError):
        optimality_instance(4, 8, 1.5)
    with pytest.raises(CapacityError):
        optimality_instance(4, 2 ** 20, 4.0)
