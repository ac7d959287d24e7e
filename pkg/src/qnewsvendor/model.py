"""Newsvendor economics with unreliable suppliers.

A supplier delivers ``r * q`` of an order ``q``; the newsvendor pays the unit
cost on delivered units only, a fixed cost whenever it orders at all, salvages
excess stock at ``w`` and pays ``o`` per unit of unmet demand.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

RELIABILITY_GRID_POINTS = 9


class ParameterOrderViolation(ValueError):
    """Raised when ``o > c_i > w`` (or ``p > 0``) does not hold."""

    def __init__(self, message: str, supplier: int | None = None):
        super().__init__(message)
        self.supplier = supplier


class CapacityError(ValueError):
    pass


@dataclass(frozen=True)
class MarketParams:
    p: float
    w: float
    o: float


@dataclass(frozen=True)
class Deterministic:
    value: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"deterministic reliability must lie in [0, 1], got {self.value}")


@dataclass(frozen=True)
class TruncatedNormal:
    """Normal(mean, variance) conditioned on landing in [0, 1]."""

    mean: float
    variance: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.mean <= 1.0:
            raise ValueError(f"reliability mean must lie in [0, 1], got {self.mean}")
        if self.variance < 0:
            raise ValueError(f"reliability variance must be >= 0, got {self.variance}")


ReliabilityModel = Deterministic | TruncatedNormal


@dataclass(frozen=True)
class Supplier:
    c: float
    f_fixed: float = 0.0
    capacity: int = 15
    reliability: ReliabilityModel = field(default_factory=lambda: Deterministic(1.0))

    def __post_init__(self) -> None:
        if self.c <= 0:
            raise ValueError(f"unit cost must be positive, got {self.c}")
        if self.f_fixed < 0:
            raise ValueError(f"fixed cost must be non-negative, got {self.f_fixed}")
        if self.capacity < 0 or int(self.capacity) != self.capacity:
            raise ValueError(f"capacity must be a non-negative integer, got {self.capacity}")


@dataclass(frozen=True)
class OrderDecision:
    q: tuple[int, ...]

    def __post_init__(self) -> None:
        q = tuple(int(v) for v in self.q)
        if any(v != orig for v, orig in zip(q, self.q)) or any(v < 0 for v in q):
            raise ValueError(f"order quantities must be non-negative integers, got {self.q}")
        object.__setattr__(self, "q", q)

    @property
    def x(self) -> tuple[int, ...]:
        return tuple(int(v > 0) for v in self.q)

    def check_capacity(self, suppliers: Sequence[Supplier]) -> None:
        if len(self.q) != len(suppliers):
            raise ValueError(f"decision has {len(self.q)} entries for {len(suppliers)} suppliers")
        for i, (qi, s) in enumerate(zip(self.q, suppliers)):
            if qi > s.capacity:
                raise CapacityError(f"q[{i}] = {qi} exceeds capacity {s.capacity} of supplier {i}")


@dataclass
class DemandDistribution:
    """Probabilities on the ``2**n_qubits`` register indices plus the index-to-demand map."""

    n_qubits: int
    probs: np.ndarray
    phi_offset: float = 0.0
    phi_slope: float = 1.0

    def __post_init__(self) -> None:
        self.probs = np.asarray(self.probs, dtype=float)
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        if self.probs.shape != (2**self.n_qubits,):
            raise ValueError(
                f"expected {2**self.n_qubits} probabilities, got {self.probs.shape[0]}"
            )
        if np.any(self.probs < 0):
            raise ValueError("probabilities must be non-negative")
        if abs(self.probs.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {self.probs.sum()!r}, not 1")
        if self.phi_slope <= 0:
            raise ValueError("phi_slope must be positive")

    @property
    def size(self) -> int:
        return 2**self.n_qubits

    @property
    def values(self) -> np.ndarray:
        return self.phi(np.arange(self.size))

    def phi(self, index):
        return self.phi_offset + self.phi_slope * np.asarray(index, dtype=float)

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probs)

    def mean(self) -> float:
        return float(self.probs @ self.values)

    @classmethod
    def from_weights(cls, n_qubits: int, weights, phi_offset=0.0, phi_slope=1.0):
        w = np.asarray(weights, dtype=float)
        return cls(n_qubits, w / w.sum(), phi_offset, phi_slope)

    @classmethod
    def uniform(cls, n_qubits: int, phi_offset=0.0, phi_slope=1.0):
        return cls.from_weights(n_qubits, np.ones(2**n_qubits), phi_offset, phi_slope)

    @classmethod
    def point_mass(cls, n_qubits: int, index: int, phi_offset=0.0, phi_slope=1.0):
        w = np.zeros(2**n_qubits)
        w[index] = 1.0
        return cls(n_qubits, w, phi_offset, phi_slope)

    @classmethod
    def bimodal(
        cls,
        n_qubits: int,
        peaks: Sequence[float],
        weights: Sequence[float] | None = None,
        width: float = 1.5,
        phi_offset=0.0,
        phi_slope=1.0,
    ):
        """Mixture of discretized Gaussian bumps centred on ``peaks`` (in index units)."""
        idx = np.arange(2**n_qubits)
        weights = np.ones(len(peaks)) if weights is None else np.asarray(weights, dtype=float)
        dens = sum(
            wt * np.exp(-0.5 * ((idx - pk) / width) ** 2) / width
            for pk, wt in zip(peaks, weights)
        )
        return cls.from_weights(n_qubits, dens, phi_offset, phi_slope)

    @classmethod
    def seeded_random(cls, n_qubits: int, seed: int, phi_offset=0.0, phi_slope=1.0):
        rng = np.random.default_rng(seed)
        return cls.from_weights(n_qubits, rng.dirichlet(np.ones(2**n_qubits)), phi_offset, phi_slope)


def validate(market: MarketParams, suppliers: Sequence[Supplier]) -> None:
    if market.p <= 0:
        raise ParameterOrderViolation(f"price must be positive, got p={market.p}")
    if not market.o > market.w:
        raise ParameterOrderViolation(f"shortage cost o={market.o} must exceed salvage w={market.w}")
    for i, s in enumerate(suppliers):
        if not market.o > s.c:
            raise ParameterOrderViolation(
                f"supplier {i}: shortage cost o={market.o} must exceed unit cost c={s.c}", i
            )
        if not s.c > market.w:
            raise ParameterOrderViolation(
                f"supplier {i}: unit cost c={s.c} must exceed salvage w={market.w}", i
            )


def _check_dims(suppliers, decision: OrderDecision, r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if not (len(suppliers) == len(decision.q) == r.shape[-1]):
        raise ValueError(
            f"dimension mismatch: {len(suppliers)} suppliers, {len(decision.q)} orders, "
            f"{r.shape[-1]} reliabilities"
        )
    return r


def profit(market: MarketParams, suppliers, decision: OrderDecision, r, d):
    """Single-formula profit; broadcasts over arrays of demand ``d``."""
    r = _check_dims(suppliers, decision, r)
    q = np.asarray(decision.q, dtype=float)
    c = np.array([s.c for s in suppliers])
    fixed = sum(s.f_fixed * x for s, x in zip(suppliers, decision.x))
    delivered = r @ q
    d = np.asarray(d, dtype=float)
    value = (
        (market.p - market.w) * d
        + np.sum((market.w - c) * r * q)
        - (market.o - market.w) * np.maximum(d - delivered, 0.0)
        - fixed
    )
    return float(value) if value.ndim == 0 else value


def profit_piecewise(market: MarketParams, suppliers, decision: OrderDecision, r, d) -> float:
    """Branch form: overage when delivered stock exceeds demand, shortage otherwise."""
    r = _check_dims(suppliers, decision, r)
    q = np.asarray(decision.q, dtype=float)
    c = np.array([s.c for s in suppliers])
    fixed = sum(s.f_fixed * x for s, x in zip(suppliers, decision.x))
    delivered = float(r @ q)
    purchase = float(np.sum(c * r * q))
    if delivered > d:
        return market.p * d - purchase - fixed + market.w * (delivered - d)
    return market.p * d - purchase - fixed - market.o * (d - delivered)


def discretize_reliability(
    model: ReliabilityModel, n_points: int = RELIABILITY_GRID_POINTS
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a finite reliability law.

    Truncated normals use ``n_points`` equal-width bins on [0, 1]; each node is a
    bin midpoint carrying the normal mass of its bin (renormalized).
    """
    if isinstance(model, Deterministic):
        return np.array([model.value]), np.array([1.0])
    if model.variance == 0:
        return np.array([model.mean]), np.array([1.0])
    edges = np.linspace(0.0, 1.0, n_points + 1)
    mass = np.diff(stats.norm.cdf(edges, loc=model.mean, scale=math.sqrt(model.variance)))
    nodes = 0.5 * (edges[:-1] + edges[1:])
    return nodes, mass / mass.sum()


def joint_reliability_grid(suppliers, reliability_grid=None):
    """All joint reliability outcomes as ``(R[g, i], weight[g])``."""
    grids = reliability_grid or [discretize_reliability(s.reliability) for s in suppliers]
    if len(grids) != len(suppliers):
        raise ValueError("one reliability grid per supplier is required")
    for nodes, weights in grids:
        if len(nodes) == 0 or len(nodes) != len(weights):
            raise ValueError("empty or malformed reliability grid")
    rows, wts = [], []
    for combo in itertools.product(*(zip(n, w) for n, w in grids)):
        rows.append([node for node, _ in combo])
        wts.append(math.prod(wt for _, wt in combo))
    return np.array(rows, dtype=float), np.array(wts, dtype=float)


def expected_profit_exact(
    market: MarketParams,
    suppliers,
    decision: OrderDecision,
    demand: DemandDistribution,
    reliability_grid=None,
) -> float:
    """Enumerate every (demand, reliability) outcome of the discretized model."""
    R, wts = joint_reliability_grid(suppliers, reliability_grid)
    if demand.probs.sum() <= 0 or wts.sum() <= 0:
        raise ValueError("empty support")
    d = demand.values
    total = 0.0
    for r, wt in zip(R, wts):
        total += wt * float(demand.probs @ profit(market, suppliers, decision, r, d))
    return total


def critical_fractile_ratio(market: MarketParams, c: float) -> float:
    """Underage ``o - c`` over total ``o - w``: the optimal stock-out service level."""
    if not market.o > c > market.w:
        raise ParameterOrderViolation(
            f"critical fractile needs o > c > w, got o={market.o}, c={c}, w={market.w}"
        )
    under, over = market.o - c, c - market.w
    return under / (under + over)


def fractile_from_costs(underage: float, overage: float) -> float:
    return underage / (underage + overage)


def classical_optimal_q(demand: DemandDistribution, ratio: float) -> int:
    """Smallest grid demand whose CDF reaches ``ratio``, as an order quantity."""
    cdf = demand.cdf()
    hits = np.nonzero(cdf >= ratio - 1e-12)[0]
    i = int(hits[0]) if hits.size else demand.size - 1
    return int(math.ceil(float(demand.phi(i)) - 1e-9))
