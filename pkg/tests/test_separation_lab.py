import csv
import io
import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import lambdalab
from lambdalab.errors import CapacityError, DomainError
from lambdalab.hypercube import HypercubeFunction, character
from lambdalab.operators_l1 import AtomicMeasureSpace, L1Operator
from lambdalab.separation_lab import (CSV_COLUMNS, SeparationReport, coverage_experiment,
                                      dist_set, distance_to_symmetric_hull, fit_exponent,
                                      hull_distance_array, n_targets, parse_strategy,
                                      reuse_bound, survivor_analysis, survivor_lower_bound)

METHODS = ["simplex", "frank_wolfe"]


def _grid_oracle(v, C, steps=200):
    best = np.inf
    for a in np.linspace(-1, 1, steps + 1):
        rest = 1 - abs(a)
        for b in np.linspace(-rest, rest, steps + 1):
            best = min(best, np.abs(v - a * C[:, 0] - b * C[:, 1]).mean())
    return best


@pytest.mark.parametrize("method", METHODS)
def test_distance_examples(method):
    v = character(3, 0b011)
    cols = [character(3, 0b001), character(3, 0b110)]
    assert distance_to_symmetric_hull(HypercubeFunction(3, np.zeros(8)), cols, method).distance \
        == pytest.approx(0.0, abs=1e-9)
    assert distance_to_symmetric_hull(cols[0], cols, method).distance == pytest.approx(0.0, abs=1e-9)
    res = distance_to_symmetric_hull(v, cols, method)
    C = np.column_stack([c.values for c in cols])
    assert res.distance == pytest.approx(1.0, abs=1e-7)
    assert res.distance == pytest.approx(_grid_oracle(v.values, C), abs=1e-9)
    assert 0 <= res.gap <= 1e-7


def test_scaled_column_distance():
    v = HypercubeFunction(2, 2.0 * character(2, 1).values)
    # the best point is chi_1 itself, at distance ||chi_1||_1 = 1
    assert distance_to_symmetric_hull(v, [character(2, 1)]).distance == pytest.approx(1.0)


@settings(max_examples=40)
@given(st.integers(0, 2 ** 31))
def test_methods_agree_and_match_grid(seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=16)
    C = rng.normal(size=(16, 2))
    d_lp = hull_distance_array(v, C, method="simplex")
    d_fw = hull_distance_array(v, C, method="frank_wolfe", tol=1e-9)
    assert d_lp.distance == pytest.approx(d_fw.distance, abs=1e-7)
    assert d_lp.distance <= _grid_oracle(v, C, 60) + 1e-9
    lam = np.asarray(d_lp.combination)
    assert np.abs(lam).sum() <= 1 + 1e-9
    assert np.abs(v - C @ lam).mean() == pytest.approx(d_lp.distance, abs=1e-9)


@settings(max_examples=30)
@given(st.integers(0, 2 ** 31))
def test_distance_is_one_lipschitz(seed):
    rng = np.random.default_rng(seed)
    v, w = rng.normal(size=(2, 8))
    C = rng.normal(size=(8, 3))
    dv = hull_distance_array(v, C).distance
    dw = hull_distance_array(w, C).distance
    assert abs(dv - dw) <= np.abs(v - w).mean() + 1e-9


def test_capacity_and_method_errors():
    with pytest.raises(DomainError):
        hull_distance_array(np.zeros(4), np.zeros((4, 1)), method="newton")
    with pytest.raises(CapacityError):
        hull_distance_array(np.zeros(1 << 12), np.zeros((1 << 12, 300)), method="simplex")


def test_dist_set_examples():
    cols = [character(3, 1), character(3, 2)]
    assert dist_set(cols, cols) == pytest.approx(0.0, abs=1e-9)
    assert dist_set([character(3, 1), character(3, 4)], cols) == pytest.approx(1.0, abs=1e-7)
    with pytest.raises(DomainError):
        dist_set([], cols)
    vs = [character(4, m) for m in range(1, 16)]
    assert dist_set(vs, vs[:3], workers=1) == dist_set(vs, vs[:3], workers=4)


def test_reuse_bound_examples():
    assert reuse_bound(1.0, 0.1) == pytest.approx(156.25)
    assert reuse_bound(2.0, 0.1) == pytest.approx(625.0)
    assert reuse_bound(1.0, 0.25) == pytest.approx(64.0)
    for eps in (0.0, 0.5, 0.7):
        with pytest.raises(DomainError):
            reuse_bound(1.0, eps)
    assert survivor_lower_bound(1.0, 0.1, 16) == pytest.approx(0.64 * 0.01 * 16)


def test_survivor_zero_operator():
    space = AtomicMeasureSpace.cube(3)
    res = survivor_analysis(L1Operator(space, space, np.zeros((8, 8))),
                            [character(3, 1)], 0b111, 0.1)
    assert res.survivors == 0 and res.markov_ok and res.reuse_bound is None


def test_survivor_identity():
    space = AtomicMeasureSpace.cube(3)
    ws = [character(3, m) for m in range(1, 8)]
    res = survivor_analysis(L1Operator.identity(space), ws, 0b111, 0.1, targets=ws)
    assert res.survivors == 7 and res.markov_ok
    assert res.pairing_counts == [1] * 7 and res.reuse_ok
    low = survivor_analysis(L1Operator.identity(space), ws, 0b001, 0.1)
    assert low.survivors == 1


@settings(max_examples=30)
@given(st.integers(0, 2 ** 31), st.floats(0.01, 0.49))
def test_markov_truncation(seed, eps):
    rng = np.random.default_rng(seed)
    space = AtomicMeasureSpace.cube(3)
    T = L1Operator(space, space, rng.normal(size=(8, 8)))
    res = survivor_analysis(T, [character(3, 1)], int(rng.integers(0, 8)), eps)
    assert res.markov_ok
    assert res.E_complement_measure <= eps


def test_fit_exponent():
    N = np.array([4.0, 16.0, 64.0, 256.0])
    fit = fit_exponent(N, 3.0 * N ** 0.25)
    assert fit.slope == pytest.approx(0.25, abs=1e-9)
    assert fit.intercept == pytest.approx(np.log(3.0), abs=1e-9)
    assert fit.residual == pytest.approx(0.0, abs=1e-9)
    single = fit_exponent([4.0], [1.0])
    assert single.slope is None and single.points == [[4.0, 1.0]]
    with pytest.raises(DomainError):
        fit_exponent([1.0, 2.0], [1.0, -1.0])


def test_parse_strategy():
    assert parse_strategy("orthogonal_map", 3) == ("orthogonal_map", 3)
    assert parse_strategy("random", 5) == ("random", 5)
    assert parse_strategy("random(11)", 5) == ("random", 11)
    with pytest.raises(DomainError):
        parse_strategy("greedy")


def test_coverage_argument_checks():
    assert coverage_experiment(4, 8, []).instances == []
    with pytest.raises(DomainError):
        coverage_experiment(8, 4, [8])
    with pytest.raises(DomainError):
        coverage_experiment(3, 8, [8])
    with pytest.raises(CapacityError, match="largest feasible n"):
        coverage_experiment(4, 8, [10])
    assert n_targets(4, 8) == 16


@pytest.fixture(scope="module")
def orthogonal_8():
    return coverage_experiment(4, 8, [8], epsilon=0.1)


def test_orthogonal_coverage(orthogonal_8):
    inst = orthogonal_8.instances[0]
    assert inst.N_pn == 16 and len(inst.target_masks) == 15
    assert inst.covered and inst.dist_set == pytest.approx(0.0, abs=1e-7)
    assert inst.norm["exact"] and inst.measured_norm == pytest.approx(3.28125)
    assert inst.survivors.markov_ok and inst.survivor_bound_ok
    assert inst.survivors.survivors == 15
    assert inst.lemma_ok and inst.lemma.verdict != "violated"
    assert inst.lemma.chain is not None and inst.lemma.chain_monotone


def test_report_round_trip(orthogonal_8):
    d = json.loads(json.dumps(orthogonal_8.to_dict()))
    back = SeparationReport.from_dict(d)
    assert back.to_dict() == orthogonal_8.to_dict()


def test_csv_columns_follow_schema(orthogonal_8):
    text = orthogonal_8.to_csv()
    rows = list(csv.DictReader(io.StringIO(text)))
    assert tuple(rows[0].keys()) == CSV_COLUMNS and len(rows) == 15
    schema = json.loads((Path(lambdalab.__file__).parent / "report_schema.json").read_text())
    assert tuple(schema["csv"]["columns"]["separate"]) == CSV_COLUMNS


def test_random_strategy_is_seeded():
    a = coverage_experiment(4, 8, [8], strategy="random(3)")
    b = coverage_experiment(4, 8, [8], strategy="random", seed=3)
    assert a.to_dict() == b.to_dict()
    inst = a.instances[0]
    assert 0 <= inst.leak <= 0.2 and inst.survivors.markov_ok
    if inst.covered:
        assert inst.survivor_bound_ok
