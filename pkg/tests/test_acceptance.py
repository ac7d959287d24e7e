"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run under pytest (a summary block is printed at the end of the session) or
directly with ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402
from qnewsvendor import encoding, qae, report  # noqa: E402
from qnewsvendor.model import (  # noqa: E402
    DemandDistribution,
    MarketParams,
    OrderDecision,
    Supplier,
    classical_optimal_q,
    critical_fractile_ratio,
    profit,
    profit_piecewise,
)
from qnewsvendor.classical import mc_expected_profit  # noqa: E402
from qnewsvendor.optimizer import EstimatorChoice, evaluate_order, reliability_sweep  # noqa: E402

MARKET = MarketParams(1.4, 0.6, 1.3)
TWO_SUPPLIERS = [Supplier(0.95, 0.03), Supplier(0.80, 0.04)]
ORACLE_VALUE = 0.325  # uniform {0..3}, c=0.95, q=2, full enumeration

RESULTS: dict[int, tuple[bool, str]] = {}
TITLES = {
    1: "profit formula identity",
    2: "Grover rotation identity",
    3: "canonical QAE error bound",
    4: "canonical QAE on-grid exactness",
    5: "IQAE coverage and width",
    6: "end-to-end amplitude pipeline",
    7: "first-order scaling remainder",
    8: "classical Monte Carlo rate",
    9: "critical fractile optimum",
    10: "heatmap dominance and monotonicity",
    11: "variational loader fit",
}


def _record(n: int, ok: bool, detail: str, started: float, limit_s: float) -> None:
    elapsed = time.perf_counter() - started
    ok = ok and elapsed < limit_s
    RESULTS[n] = (ok, f"{detail}; {elapsed:.1f}s (limit {limit_s:.0f}s)")
    assert ok, RESULTS[n][1]


def summary_lines() -> list[str]:
    lines = []
    for n in sorted(TITLES):
        if n in RESULTS:
            ok, detail = RESULTS[n]
            lines.append(f"[{'PASS' if ok else 'FAIL'}] {n:>2}. {TITLES[n]}: {detail}")
        else:
            lines.append(f"[----] {n:>2}. {TITLES[n]}: not run")
    lines.append(
        "[SKIP] 12. published scenario values: depend on unpublished seeds and data; "
        "covered by substitutes 6, 9 and 10"
    )
    return lines


def _uniform_case():
    return [Supplier(0.95, 0.0)], DemandDistribution.uniform(2), OrderDecision((2,))


def test_criterion_01_profit_identity():
    t0 = time.perf_counter()
    worst = 0.0
    grid = np.arange(16)
    for d in grid:
        for ro in grid:
            # split the delivered quantity across both suppliers with r = 1
            q = (int(ro) // 2, int(ro) - int(ro) // 2)
            dec = OrderDecision(q)
            a = profit(MARKET, TWO_SUPPLIERS, dec, [1.0, 1.0], float(d))
            b = profit_piecewise(MARKET, TWO_SUPPLIERS, dec, [1.0, 1.0], float(d))
            c = oracles.profit_ref(1.4, 0.6, 1.3, [0.95, 0.8], [0.03, 0.04], q, [1, 1], float(d))
            worst = max(worst, abs(a - b), abs(a - c))
    _record(1, worst <= 1e-12, f"max |deviation| = {worst:.2e}", t0, 1)


def test_criterion_02_grover_identity():
    t0 = time.perf_counter()
    worst = 0.0
    for a in np.round(np.arange(0.05, 0.951, 0.05), 2):
        g = qae.GroverOperator(encoding.single_rotation_a_operator(float(a)))
        for k in range(6):
            worst = max(worst, abs(g.probability(k) - oracles.grover_prob_ref(float(a), k)))
    _record(2, worst <= 1e-9, f"max |deviation| = {worst:.2e}", t0, 5)


def test_criterion_03_canonical_bound():
    t0 = time.perf_counter()
    a, m = 0.3, 5
    bound = math.pi / 32 + math.pi**2 / 1024
    g = qae.GroverOperator(encoding.single_rotation_a_operator(a))
    hits = sum(abs(qae.canonical_qae(g, m, 1, seed).estimate - a) <= bound for seed in range(200))
    _record(3, hits / 200 >= 0.75, f"bound held in {hits}/200 runs (need >= 150)", t0, 120)


def test_criterion_04_on_grid():
    t0 = time.perf_counter()
    worst = 0.0
    for y in range(17):
        a = math.sin(y * math.pi / 32) ** 2
        for seed in range(3):
            est = qae.canonical_qae(encoding.single_rotation_a_operator(a), 5, 64, seed).estimate
            worst = max(worst, abs(est - a))
    _record(4, worst <= 1e-10, f"max |error| over y=0..16 = {worst:.2e}", t0, 10)


def test_criterion_05_iqae_coverage():
    t0 = time.perf_counter()
    eps, alpha = 0.01, 0.05
    amps = [0.05, 0.2, 0.4, 0.65, 0.9]
    covered = total = 0
    widest = 0.0
    for a in amps:
        g = qae.GroverOperator(encoding.single_rotation_a_operator(a))
        for seed in range(60):
            res = qae.iqae(g, eps, alpha, 100, seed)
            covered += res.ci_low <= a <= res.ci_high
            total += 1
            widest = max(widest, (res.ci_high - res.ci_low) / 2)
    cov = covered / total
    _record(
        5,
        cov >= 0.92 and widest <= eps + 1e-12,
        f"coverage {cov:.3f} over {total} runs, max half-width {widest:.4f}",
        t0,
        300,
    )


def test_criterion_06_pipeline():
    t0 = time.perf_counter()
    suppliers, demand, dec = _uniform_case()
    exact = oracles.expected_profit_ref(1.4, 0.6, 1.3, [0.95], [0.0], [2], [1.0], demand.probs)
    est = EstimatorChoice("iqae", qae=qae.QaeConfig(epsilon=0.005, shots=4096), c_scale=0.05)
    hits = sum(
        abs(evaluate_order(MARKET, suppliers, dec, demand, est, seed).estimate - exact) <= 0.02
        for seed in range(100)
    )
    ok = hits >= 90 and abs(exact - ORACLE_VALUE) < 1e-12
    _record(6, ok, f"within 0.02 of {exact:.3f} in {hits}/100 runs", t0, 180)


def test_criterion_07_remainder():
    t0 = time.perf_counter()
    gen = np.random.default_rng(20240607)
    worst_ratio = 0.0
    for _ in range(10):
        p = gen.uniform(1.0, 3.0)
        w = gen.uniform(0.1, 0.5)
        o = gen.uniform(p, p + 1.0)
        c = gen.uniform(w + 0.05, o - 0.05)
        market = MarketParams(p, w, o)
        sup = [Supplier(c, gen.uniform(0, 0.1), 7)]
        dec = OrderDecision((int(gen.integers(1, 8)),))
        r = [gen.uniform(0.3, 1.0)]
        demand = DemandDistribution.seeded_random(3, int(gen.integers(1 << 31)))
        for cs in (0.01, 0.02, 0.05):
            sp = encoding.scale_payoff(market, sup, dec, r, demand, cs)
            a_op = encoding.build_a_operator(
                encoding.exact_load(demand), encoding.build_payoff_operator(sp, 3), sp
            )
            tilde, _ = oracles.scaled_payoff_ref(list(sp.f_values), cs)
            linear = cs * float(np.dot(demand.probs, tilde)) + 0.5
            worst_ratio = max(worst_ratio, abs(a_op.probability() - linear) / (2 * cs**3))
    _record(7, worst_ratio <= 1.0, f"max |P - linear| / 2c^3 = {worst_ratio:.3f}", t0, 30)


def test_criterion_08_mc_rate():
    t0 = time.perf_counter()
    suppliers, demand, dec = _uniform_case()

    def rmse(n):
        errs = [
            mc_expected_profit(MARKET, suppliers, dec, demand, n, seed).estimate - ORACLE_VALUE
            for seed in range(200)
        ]
        return math.sqrt(float(np.mean(np.square(errs))))

    ratio = rmse(100) / rmse(10_000)
    _record(8, 5 <= ratio <= 20, f"RMSE ratio {ratio:.2f}", t0, 60)


def test_criterion_09_fractile():
    t0 = time.perf_counter()
    gen = np.random.default_rng(99)
    agree = 0
    for _ in range(20):
        p = gen.uniform(1.0, 3.0)
        w = gen.uniform(0.0, 0.5)
        o = gen.uniform(1.0, 2.5)
        c = gen.uniform(w + 0.05, o - 0.05)
        demand = DemandDistribution.seeded_random(4, int(gen.integers(1 << 31)))
        q_formula = classical_optimal_q(demand, critical_fractile_ratio(MarketParams(p, w, o), c))
        q_enum, _ = oracles.best_order_ref(p, w, o, c, demand.probs)
        agree += q_formula == q_enum
    uni = DemandDistribution.uniform(4)
    q_uni = classical_optimal_q(uni, critical_fractile_ratio(MARKET, 0.80))
    q_uni_enum, _ = oracles.best_order_ref(1.4, 0.6, 1.3, 0.80, uni.probs)
    ok = agree == 20 and q_uni == 11 and q_uni_enum == 11
    _record(9, ok, f"{agree}/20 random instances agree; uniform q* = {q_uni}", t0, 10)


def test_criterion_10_heatmap():
    t0 = time.perf_counter()
    axis = [round(0.1 * k, 1) for k in range(1, 11)]
    hm = reliability_sweep(
        MARKET, TWO_SUPPLIERS, DemandDistribution.uniform(4), EstimatorChoice("exact"), axis, axis
    )
    dominance_bad = [
        (axis[i], axis[j])
        for i in range(10)
        for j in range(10)
        if axis[j] >= axis[i] and hm.decision[i][j].q[0] != 0
    ]
    mono1 = float(np.min(np.diff(hm.objective, axis=0)))
    mono2 = float(np.min(np.diff(hm.objective, axis=1)))
    ok = not dominance_bad and mono1 >= -1e-9 and mono2 >= -1e-9
    _record(
        10,
        ok,
        f"{len(dominance_bad)} cells with r2 >= r1 and q1 > 0; "
        f"min step along r1 {mono1:.1e}, along r2 {mono2:.1e}",
        t0,
        60,
    )


def test_criterion_11_loader(tmp_path):
    t0 = time.perf_counter()
    target = DemandDistribution.bimodal(4, [4, 11], [1, 1], 1.5)
    spec = encoding.variational_load(target, depth=3, seed=0)
    learned = encoding.loader_probabilities(spec.circuit())
    path = tmp_path / "load_dist.csv"
    report.write_load_csv(target.probs, learned, path)
    rows = np.loadtxt(path, delimiter=",", skiprows=1)
    # qualitative match: the two modes of the learned histogram sit on the target modes
    def modes(p):
        return sorted(int(i) for i in range(1, 15) if p[i] >= p[i - 1] and p[i] >= p[i + 1] and p[i] > 0.05)

    same_modes = all(abs(a - b) <= 1 for a, b in zip(modes(rows[:, 1]), modes(rows[:, 2])))
    ok = spec.achieved_divergence <= 0.05 and same_modes and len(modes(rows[:, 2])) == 2
    _record(
        11,
        ok,
        f"KL {spec.achieved_divergence:.4f}; target modes {modes(rows[:, 1])}, learned {modes(rows[:, 2])}",
        t0,
        120,
    )


if __name__ == "__main__":
    import tempfile

    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion"):
            try:
                if "tmp_path" in fn.__code__.co_varnames[: fn.__code__.co_argcount]:
                    with tempfile.TemporaryDirectory() as d:
                        fn(Path(d))
                else:
                    fn()
            except AssertionError:
                pass
    print("\n".join(summary_lines()))
