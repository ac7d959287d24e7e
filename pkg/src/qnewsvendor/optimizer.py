"""Simulation-based optimization over order vectors and reliability sweeps."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from . import classical, encoding, qae
from . import rng as rngs
from .classical import EstimateResult
from .model import (
    Deterministic,
    DemandDistribution,
    MarketParams,
    OrderDecision,
    Supplier,
    TruncatedNormal,
    expected_profit_exact,
    joint_reliability_grid,
    validate,
)

ESTIMATOR_KINDS = ("exact", "mc", "saa", "canonical_qae", "iqae")


@dataclass(frozen=True)
class EstimatorChoice:
    kind: str = "exact"
    n_samples: int = 10_000
    qae: qae.QaeConfig = field(default_factory=qae.QaeConfig)
    c_scale: float = encoding.DEFAULT_C_SCALE
    loader: encoding.VariationalLoader | None = None

    def __post_init__(self) -> None:
        if self.kind not in ESTIMATOR_KINDS:
            raise ValueError(f"unknown estimator {self.kind!r}; expected one of {ESTIMATOR_KINDS}")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if not 0 < self.c_scale <= 1:
            raise ValueError("c_scale must lie in (0, 1]")

    @property
    def quantum(self) -> bool:
        return self.kind in ("canonical_qae", "iqae")

    @property
    def stochastic(self) -> bool:
        return self.kind != "exact"


@dataclass
class Heatmap:
    axis1: np.ndarray
    axis2: np.ndarray
    objective: np.ndarray
    decision: list[list[OrderDecision]]
    results: list[list[EstimateResult]] = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        self.axis1 = np.asarray(self.axis1, dtype=float)
        self.axis2 = np.asarray(self.axis2, dtype=float)
        shape = (self.axis1.size, self.axis2.size)
        if self.objective.shape != shape or len(self.decision) != shape[0]:
            raise ValueError("heatmap matrices do not match the axes")


def _estimate_probability(grover: qae.GroverOperator, est: EstimatorChoice, seed: int) -> EstimateResult:
    cfg = est.qae
    if est.kind == "iqae":
        return qae.iqae(grover, cfg.epsilon, cfg.alpha, cfg.shots, seed)
    if cfg.repetitions == 1:
        return qae.canonical_qae(grover, cfg.m, cfg.shots, seed)
    return qae.median_boost(grover, cfg.m, cfg.shots, cfg.repetitions, seed)


def _quantum_expected_profit(
    market, suppliers, decision, demand: DemandDistribution, est: EstimatorChoice, seed: int
) -> EstimateResult:
    """QAE per reliability realization, inverted to profit and mixed by realization weight."""
    R, weights = joint_reliability_grid(suppliers)
    if est.loader is not None:
        if est.loader.n_qubits != demand.n_qubits:
            raise ValueError("variational loader width does not match the demand register")
        loader = est.loader.circuit()
    else:
        loader = encoding.exact_load(demand)
    estimate = lo = hi = 0.0
    shots = queries = 0
    parts = []
    for g, (r, wt) in enumerate(zip(R, weights)):
        sp = encoding.scale_payoff(market, suppliers, decision, r, demand, est.c_scale)
        if sp.degenerate:
            value = sp.f_min
            estimate, lo, hi = estimate + wt * value, lo + wt * value, hi + wt * value
            parts.append({"r": r.tolist(), "weight": float(wt), "degenerate": True})
            continue
        a_op = encoding.build_a_operator(loader, encoding.build_payoff_operator(sp, demand.n_qubits), sp)
        sub_seed = seed if len(R) == 1 else rngs.child_seed(seed, g)
        res = _estimate_probability(qae.GroverOperator(a_op), est, sub_seed)
        value = encoding.invert_estimate(res.estimate, sp)
        estimate += wt * value
        lo += wt * encoding.invert_estimate(res.ci_low, sp)
        hi += wt * encoding.invert_estimate(res.ci_high, sp)
        shots += res.samples_or_shots
        queries += res.oracle_queries
        parts.append(
            {
                "r": r.tolist(),
                "weight": float(wt),
                "probability": res.estimate,
                "f_min": sp.f_min,
                "f_max": sp.f_max,
                **res.details,
            }
        )
    lo, hi = min(lo, estimate), max(hi, estimate)
    return EstimateResult(estimate, lo, hi, shots, queries, {"estimator": est.kind, "parts": parts})


def evaluate_order(
    market: MarketParams,
    suppliers: Sequence[Supplier],
    decision: OrderDecision,
    demand: DemandDistribution,
    estimator: EstimatorChoice,
    seed: int = 0,
) -> EstimateResult:
    validate(market, suppliers)
    decision.check_capacity(suppliers)
    if estimator.kind == "exact":
        value = expected_profit_exact(market, suppliers, decision, demand)
        return EstimateResult(value, value, value, 0, 0, {"estimator": "exact"})
    if estimator.kind in ("mc", "saa"):
        res = classical.mc_expected_profit(
            market, suppliers, decision, demand, estimator.n_samples, seed
        )
        return replace(res, details={"estimator": estimator.kind})
    return _quantum_expected_profit(market, suppliers, decision, demand, estimator, seed)


def default_q_grid(suppliers: Sequence[Supplier], demand: DemandDistribution) -> list[tuple[int, ...]]:
    """Full Cartesian product of ``0..min(K_i, 2**n - 1)``."""
    top = demand.size - 1
    return list(itertools.product(*(range(min(s.capacity, top) + 1) for s in suppliers)))


def _tie_key(q: Sequence[int]) -> tuple:
    return (sum(q), tuple(q))


def grid_optimize(
    market: MarketParams,
    suppliers: Sequence[Supplier],
    demand: DemandDistribution,
    estimator: EstimatorChoice,
    q_grid: Iterable[Sequence[int]] | None = None,
    seed: int = 0,
) -> tuple[OrderDecision, EstimateResult]:
    """Best candidate by estimated expected profit.

    Every candidate is evaluated with the same seed (common random numbers);
    ties go to the smaller total order, then the lexicographically smaller vector.
    """
    grid = default_q_grid(suppliers, demand) if q_grid is None else [tuple(q) for q in q_grid]
    if not grid:
        raise ValueError("q_grid is empty")
    if estimator.kind == "saa":
        return classical.saa_optimize(market, suppliers, demand, estimator.n_samples, seed, grid)
    best: tuple[OrderDecision, EstimateResult] | None = None
    for q in grid:
        dec = OrderDecision(q)
        res = evaluate_order(market, suppliers, dec, demand, estimator, seed)
        if (
            best is None
            or res.estimate > best[1].estimate
            or (res.estimate == best[1].estimate and _tie_key(dec.q) < _tie_key(best[0].q))
        ):
            best = (dec, res)
    return best


def with_reliabilities(
    suppliers: Sequence[Supplier], values: Sequence[float], mode: str = "deterministic", variance: float = 0.1
) -> list[Supplier]:
    """Copies of ``suppliers`` whose reliability is ``values[i]`` (fixed or as a truncated-normal mean)."""
    if mode not in ("deterministic", "mean"):
        raise ValueError(f"unknown reliability mode {mode!r}")
    out = []
    for s, v in zip(suppliers, values):
        model = Deterministic(float(v)) if mode == "deterministic" else TruncatedNormal(float(v), variance)
        out.append(replace(s, reliability=model))
    return out


def reliability_sweep(
    market: MarketParams,
    suppliers: Sequence[Supplier],
    demand: DemandDistribution,
    estimator: EstimatorChoice,
    axis1: Sequence[float],
    axis2: Sequence[float],
    q_grid: Iterable[Sequence[int]] | None = None,
    seed: int = 0,
    mode: str = "deterministic",
    variance: float = 0.1,
) -> Heatmap:
    """Optimize every (r1, r2) cell; cell (i, j) uses a seed derived from (seed, i, j)."""
    if len(suppliers) != 2:
        raise ValueError(f"a reliability sweep needs exactly 2 suppliers, got {len(suppliers)}")
    axis1, axis2 = list(axis1), list(axis2)
    if not axis1 or not axis2:
        raise ValueError("sweep axes must be non-empty")
    grid = None if q_grid is None else [tuple(q) for q in q_grid]
    objective = np.zeros((len(axis1), len(axis2)))
    decisions: list[list[OrderDecision]] = []
    results: list[list[EstimateResult]] = []
    for i, r1 in enumerate(axis1):
        row_d, row_r = [], []
        for j, r2 in enumerate(axis2):
            cell = with_reliabilities(suppliers, (r1, r2), mode, variance)
            cell_seed = rngs.child_seed(seed, i, j) if estimator.stochastic else seed
            dec, res = grid_optimize(market, cell, demand, estimator, grid, cell_seed)
            objective[i, j] = res.estimate
            row_d.append(dec)
            row_r.append(res)
        decisions.append(row_d)
        results.append(row_r)
    return Heatmap(np.array(axis1), np.array(axis2), objective, decisions, results)
