import numpy as np
import pytest

from qnewsvendor import qae
from qnewsvendor.model import DemandDistribution, MarketParams, OrderDecision, Supplier, TruncatedNormal
from qnewsvendor.optimizer import EstimatorChoice, evaluate_order, grid_optimize, reliability_sweep

MARKET = MarketParams(1.4, 0.6, 1.3)
TWO = [Supplier(0.95, 0.03), Supplier(0.80, 0.04)]
AXIS = [round(0.1 * k, 1) for k in range(1, 11)]


@pytest.fixture(scope="module")
def heatmap():
    return reliability_sweep(MARKET, TWO, DemandDistribution.uniform(4), EstimatorChoice("exact"), AXIS, AXIS)


def test_exact_grid_optimum_single_supplier():
    dec, res = grid_optimize(MARKET, [Supplier(0.8)], DemandDistribution.uniform(4), EstimatorChoice("exact"))
    assert dec.q == (11,)


def test_sweep_is_monotone(heatmap):
    assert np.diff(heatmap.objective, axis=0).min() >= -1e-9
    assert np.diff(heatmap.objective, axis=1).min() >= -1e-9


def test_dominance_where_capacity_is_slack(heatmap):
    """With r2 >= r1 the cheaper supplier takes everything unless its capacity binds."""
    for i, r1 in enumerate(AXIS):
        for j, r2 in enumerate(AXIS):
            q1, q2 = heatmap.decision[i][j].q
            if r2 >= r1 and q2 < TWO[1].capacity:
                assert q1 == 0, (r1, r2, q1, q2)


def test_capacity_binding_explains_dual_sourcing(heatmap):
    for i, r1 in enumerate(AXIS):
        for j, r2 in enumerate(AXIS):
            q1, q2 = heatmap.decision[i][j].q
            if r2 >= r1 and q1 > 0:
                assert q2 == TWO[1].capacity


def test_one_by_one_sweep_matches_solve():
    sup = [Supplier(0.95, 0.03, reliability=TruncatedNormal(0.7, 0.1)), Supplier(0.8, 0.04)]
    demand = DemandDistribution.bimodal(3, [2, 6])
    hm = reliability_sweep(MARKET, sup, demand, EstimatorChoice("exact"), [0.7], [1.0], mode="mean", variance=0.1)
    cell = [Supplier(0.95, 0.03, reliability=TruncatedNormal(0.7, 0.1)), Supplier(0.8, 0.04, reliability=TruncatedNormal(1.0, 0.1))]
    dec, res = grid_optimize(MARKET, cell, demand, EstimatorChoice("exact"))
    assert hm.decision[0][0] == dec
    assert hm.objective[0, 0] == pytest.approx(res.estimate)


def test_quantum_estimator_close_to_exact():
    demand = DemandDistribution.bimodal(2, [1, 2])
    sup = [Supplier(0.95, 0.03), Supplier(0.8, 0.04, reliability=TruncatedNormal(0.8, 0.05))]
    dec = OrderDecision((1, 2))
    exact = evaluate_order(MARKET, sup, dec, demand, EstimatorChoice("exact")).estimate
    est = EstimatorChoice("iqae", qae=qae.QaeConfig(epsilon=0.002, shots=2048), c_scale=0.05)
    res = evaluate_order(MARKET, sup, dec, demand, est, 5)
    assert res.estimate == pytest.approx(exact, abs=0.1)
    assert res.oracle_queries > 0
    assert len(res.details["parts"]) == 9


def test_seeded_estimators_are_reproducible():
    demand = DemandDistribution.uniform(2)
    for kind in ("mc", "canonical_qae", "iqae"):
        est = EstimatorChoice(kind, n_samples=200)
        a = evaluate_order(MARKET, [Supplier(0.95)], OrderDecision((2,)), demand, est, 4)
        b = evaluate_order(MARKET, [Supplier(0.95)], OrderDecision((2,)), demand, est, 4)
        assert a.estimate == b.estimate


def test_saa_route():
    dec, res = grid_optimize(MARKET, [Supplier(0.8)], DemandDistribution.uniform(4), EstimatorChoice("saa", n_samples=20_000), seed=1)
    assert abs(dec.q[0] - 11) <= 1


def test_rejects_unknown_estimator():
    with pytest.raises(ValueError):
        EstimatorChoice("magic")


def test_sweep_needs_two_suppliers():
    with pytest.raises(ValueError):
        reliability_sweep(MARKET, [Supplier(0.9)], DemandDistribution.uniform(2), EstimatorChoice(), [1.0], [1.0])
