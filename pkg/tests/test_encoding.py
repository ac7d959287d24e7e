import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qnewsvendor import encoding
from qnewsvendor.model import DemandDistribution, MarketParams, OrderDecision, Supplier
from qnewsvendor.qsim import run

MARKET = MarketParams(1.4, 0.6, 1.3)


def _a_op(demand, sup, dec, r, c, basis=False):
    sp = encoding.scale_payoff(MARKET, sup, dec, r, demand, c)
    pay = encoding.build_payoff_operator(sp, demand.n_qubits, basis)
    return encoding.build_a_operator(encoding.exact_load(demand), pay, sp), sp


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(1, 4))
def test_exact_loader_reproduces_probs(seed, n):
    d = DemandDistribution.seeded_random(n, seed)
    learned = encoding.loader_probabilities(encoding.exact_load(d))
    assert 0.5 * np.abs(learned - d.probs).sum() <= 1e-9


def test_exact_loader_sparse_target():
    d = DemandDistribution.point_mass(3, 5)
    assert encoding.loader_probabilities(encoding.exact_load(d))[5] == pytest.approx(1.0)


@pytest.mark.parametrize("threshold", range(0, 9))
def test_comparator_flags_and_uncomputes(threshold):
    n = 3
    circ = encoding.comparator(n, threshold)
    for i in range(2**n):
        psi = np.zeros(2 ** (2 * n), dtype=complex)
        psi[i] = 1
        out = run(circ, psi)
        k = int(np.argmax(np.abs(out)))
        assert abs(out[k]) == pytest.approx(1.0)
        assert k & (2**n - 1) == i
        assert (k >> (2 * n - 1)) & 1 == int(i >= threshold)
        assert (k >> n) & (2 ** (n - 1) - 1) == 0  # carries cleared


def test_payoff_amplitudes_match_closed_form():
    demand = DemandDistribution.bimodal(3, [2, 6])
    a_op, sp = _a_op(demand, [Supplier(0.95, 0.03), Supplier(0.8, 0.04)], OrderDecision((2, 3)), [0.9, 0.7], 0.05)
    expected = sum(p * math.sin(t) ** 2 for p, t in zip(demand.probs, sp.angles()))
    assert a_op.probability() == pytest.approx(expected, abs=1e-9)
    # per-index amplitude on the objective qubit
    n = 3
    psi = a_op.statevector().reshape((2,) * a_op.n_qubits)
    for i in range(2**n):
        if demand.probs[i] < 1e-12:
            continue
        amp1 = sum(
            abs(psi[(1,) + (flag,) + (0,) * (n - 1) + tuple((i >> b) & 1 for b in reversed(range(n)))]) ** 2
            for flag in (0, 1)
        )
        assert math.sqrt(amp1 / demand.probs[i]) == pytest.approx(math.sin(sp.angles()[i]), abs=1e-9)


def test_angles_are_scaled_payoff():
    demand = DemandDistribution.uniform(2)
    sp = encoding.scale_payoff(MARKET, [Supplier(0.95)], OrderDecision((2,)), [1.0], demand, 0.05)
    assert np.allclose(sp.angles(), 0.05 * sp.scaled() + math.pi / 4, atol=1e-12)
    assert sp.scaled().min() == pytest.approx(-1) and sp.scaled().max() == pytest.approx(1)


def test_comparator_variants_are_equivalent():
    demand = DemandDistribution.seeded_random(3, 4)
    args = (demand, [Supplier(0.95)], OrderDecision((5,)), [0.8], 0.05)
    ripple, _ = _a_op(*args)
    basis, _ = _a_op(*args, basis=True)
    assert ripple.probability() == pytest.approx(basis.probability(), abs=1e-9)


def test_inversion_on_uniform_oracle_small_c():
    demand = DemandDistribution.uniform(2)
    a_op, sp = _a_op(demand, [Supplier(0.95)], OrderDecision((2,)), [1.0], 0.01)
    assert encoding.invert_estimate(a_op.probability(), sp) == pytest.approx(0.325, abs=1e-3)


def test_degenerate_payoff():
    sp = encoding.ScaledPayoff((0.4,) * 4, 0.4, 0.4, 0.05, (0.0, math.pi / 4), (0.0, math.pi / 4), 2)
    assert sp.degenerate
    a_op = encoding.build_a_operator(
        encoding.exact_load(DemandDistribution.uniform(2)), encoding.build_payoff_operator(sp, 2), sp
    )
    assert a_op.probability() == pytest.approx(0.5)
    assert encoding.invert_estimate(0.73, sp) == 0.4


def test_c_scale_bounds():
    with pytest.raises(ValueError):
        encoding.scale_payoff(MARKET, [Supplier(0.95)], OrderDecision((1,)), [1.0], DemandDistribution.uniform(2), 0.0)


def test_variational_loader_uniform_is_exact():
    spec = encoding.variational_load(DemandDistribution.uniform(3), depth=1, budget=200)
    assert spec.achieved_divergence < 1e-10


def test_variational_loader_round_trip():
    spec = encoding.variational_load(DemandDistribution.bimodal(3, [1, 6]), depth=2, budget=500, seed=3)
    again = encoding.VariationalLoader.from_dict(spec.to_dict())
    assert np.allclose(encoding.loader_probabilities(again.circuit()), encoding.loader_probabilities(spec.circuit()))
    assert len(spec.params) == 3 * 3


def test_variational_loader_is_seeded():
    d = DemandDistribution.bimodal(3, [1, 6])
    a = encoding.variational_load(d, depth=2, budget=400, seed=9)
    b = encoding.variational_load(d, depth=2, budget=400, seed=9)
    assert np.array_equal(a.params, b.params)


def test_kl_divergence_properties():
    p = np.array([0.5, 0.5, 0, 0])
    assert encoding.kl_divergence(p, p) == pytest.approx(0.0)
    assert encoding.kl_divergence(p, np.full(4, 0.25)) == pytest.approx(math.log(2))
