"""Classical baselines: Monte Carlo expectation and Sample Average Approximation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import rng as rngs
from .model import (
    Deterministic,
    DemandDistribution,
    MarketParams,
    OrderDecision,
    ReliabilityModel,
    Supplier,
    TruncatedNormal,
)

Z95 = 1.959963984540054


@dataclass(frozen=True)
class EstimateResult:
    estimate: float
    ci_low: float
    ci_high: float
    samples_or_shots: int = 0
    oracle_queries: int = 0
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if not self.ci_low <= self.estimate <= self.ci_high:
            raise ValueError(
                f"estimate {self.estimate} outside its interval [{self.ci_low}, {self.ci_high}]"
            )

    @classmethod
    def exact(cls, value: float) -> EstimateResult:
        return cls(value, value, value, 0, 0)

    def as_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "samples_or_shots": self.samples_or_shots,
            "oracle_queries": self.oracle_queries,
            **self.details,
        }


@dataclass(frozen=True)
class ScenarioSample:
    d: float
    r: tuple[float, ...]


def sample_reliability(
    model: ReliabilityModel, gen: np.random.Generator, size: int | None = None
):
    """Draw reliabilities; truncated normals are rejection-sampled onto [0, 1]."""
    n = 1 if size is None else size
    if isinstance(model, Deterministic):
        out = np.full(n, model.value)
    elif isinstance(model, TruncatedNormal):
        if model.variance == 0:
            out = np.full(n, model.mean)
        else:
            sd = math.sqrt(model.variance)
            out = np.empty(n)
            filled = 0
            while filled < n:
                draw = gen.normal(model.mean, sd, size=max(2 * (n - filled), 16))
                draw = draw[(draw >= 0.0) & (draw <= 1.0)][: n - filled]
                out[filled : filled + draw.size] = draw
                filled += draw.size
    else:
        raise TypeError(f"unknown reliability model {model!r}")
    return float(out[0]) if size is None else out


def sample_demand(demand: DemandDistribution, gen: np.random.Generator, size: int) -> np.ndarray:
    """Inverse-CDF draws of demand units."""
    cdf = demand.cdf()
    idx = np.searchsorted(cdf, gen.random(size) * cdf[-1], side="right")
    return demand.phi(np.minimum(idx, demand.size - 1))


def sample_scenarios(
    suppliers: Sequence[Supplier], demand: DemandDistribution, n: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """``n`` joint draws as arrays ``d[n]`` and ``r[n, N]``, from separate sub-streams."""
    d = sample_demand(demand, rngs.stream(seed, rngs.DEMAND), n)
    r = np.column_stack(
        [
            sample_reliability(s.reliability, rngs.stream(seed, rngs.RELIABILITY, i), n)
            for i, s in enumerate(suppliers)
        ]
    ) if suppliers else np.zeros((n, 0))
    return d, r


def scenarios(suppliers, demand, n: int, seed: int) -> list[ScenarioSample]:
    d, r = sample_scenarios(suppliers, demand, n, seed)
    return [ScenarioSample(float(di), tuple(map(float, ri))) for di, ri in zip(d, r)]


def _scenario_profits(market, suppliers, decision: OrderDecision, d, r) -> np.ndarray:
    q = np.asarray(decision.q, dtype=float)
    c = np.array([s.c for s in suppliers])
    fixed = sum(s.f_fixed * x for s, x in zip(suppliers, decision.x))
    delivered = r @ q
    return (
        (market.p - market.w) * d
        + (r * ((market.w - c) * q)).sum(axis=1)
        - (market.o - market.w) * np.maximum(d - delivered, 0.0)
        - fixed
    )


def _mean_ci(values: np.ndarray, oracle_queries: int = 0) -> EstimateResult:
    n = values.size
    mean = float(values.mean())
    half = Z95 * float(values.std(ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    return EstimateResult(mean, mean - half, mean + half, n, oracle_queries)


def mc_expected_profit(
    market: MarketParams,
    suppliers: Sequence[Supplier],
    decision: OrderDecision,
    demand: DemandDistribution,
    n_samples: int,
    seed: int,
) -> EstimateResult:
    """Sample mean of profit over i.i.d. scenarios with a 95% normal interval."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    d, r = sample_scenarios(suppliers, demand, n_samples, seed)
    if r.shape[1] != len(decision.q):
        raise ValueError("decision length does not match supplier count")
    return _mean_ci(_scenario_profits(market, suppliers, decision, d, r))


def _tie_key(q: Sequence[int]) -> tuple:
    return (sum(q), tuple(q))


def saa_optimize(
    market: MarketParams,
    suppliers: Sequence[Supplier],
    demand: DemandDistribution,
    n_scenarios: int,
    seed: int,
    q_grid: Iterable[Sequence[int]],
) -> tuple[OrderDecision, EstimateResult]:
    """Maximize the average profit over one fixed scenario set (common to all candidates)."""
    grid = [OrderDecision(tuple(q)) for q in q_grid]
    if not grid:
        raise ValueError("q_grid is empty")
    for dec in grid:
        dec.check_capacity(suppliers)
    d, r = sample_scenarios(suppliers, demand, n_scenarios, seed)
    best = None
    for dec in grid:
        vals = _scenario_profits(market, suppliers, dec, d, r)
        mean = float(vals.mean())
        if (
            best is None
            or mean > best[0]
            or (mean == best[0] and _tie_key(dec.q) < _tie_key(best[1].q))
        ):
            best = (mean, dec, vals)
    _, dec, vals = best
    return dec, _mean_ci(vals)
