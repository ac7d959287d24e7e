"""JSON scenario configuration."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import encoding, qae
from .model import (
    DemandDistribution,
    Deterministic,
    MarketParams,
    OrderDecision,
    Supplier,
    TruncatedNormal,
    validate,
)
from .optimizer import ESTIMATOR_KINDS, EstimatorChoice

DEFAULT_AXIS = [round(0.1 * k, 1) for k in range(1, 11)]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class MarketSpec(_Strict):
    p: float = 1.4
    w: float = 0.6
    o: float = 1.3


class DeterministicSpec(_Strict):
    kind: Literal["deterministic"] = "deterministic"
    value: float = 1.0


class TruncatedNormalSpec(_Strict):
    kind: Literal["truncated_normal"]
    mean: float
    variance: float = 0.1


ReliabilitySpec = Annotated[Union[DeterministicSpec, TruncatedNormalSpec], Field(discriminator="kind")]


class SupplierSpec(_Strict):
    c: float
    f_fixed: float = 0.0
    capacity: int | None = None
    reliability: ReliabilitySpec = Field(default_factory=DeterministicSpec)


class DemandSpec(_Strict):
    n_qubits: int = Field(4, ge=1, le=10)
    phi_offset: float = 0.0
    phi_slope: float = 1.0
    probs: list[float] | None = None
    generator: Literal["uniform", "bimodal", "seeded-random"] | None = None
    peaks: list[float] | None = None
    weights: list[float] | None = None
    width: float = 1.5
    seed: int | None = None

    @model_validator(mode="after")
    def _one_source(self):
        if self.probs is not None and self.generator is not None:
            raise ValueError("give either 'probs' or 'generator', not both")
        if self.generator == "bimodal" and not self.peaks:
            raise ValueError("bimodal demand needs 'peaks'")
        if self.generator == "seeded-random" and self.seed is None:
            raise ValueError("seeded-random demand needs 'seed'")
        return self


class EstimatorSpec(_Strict):
    kind: Literal[ESTIMATOR_KINDS] = "exact"  # type: ignore[valid-type]
    n_samples: int = Field(10_000, ge=1)
    m: int = Field(5, ge=1)
    shots: int = Field(1024, ge=1)
    epsilon: float = Field(0.01, gt=0, lt=0.5)
    alpha: float = Field(0.05, gt=0, lt=1)
    repetitions: int = Field(5, ge=1)
    c_scale: float = Field(encoding.DEFAULT_C_SCALE, gt=0, le=1)
    loader_path: str | None = None


class SweepSpec(_Strict):
    axis1: list[float] = Field(default_factory=lambda: list(DEFAULT_AXIS))
    axis2: list[float] = Field(default_factory=lambda: list(DEFAULT_AXIS))
    mode: Literal["deterministic", "mean"] = "deterministic"
    variance: float = Field(0.1, ge=0)


class LoaderSpecConfig(_Strict):
    depth: int = Field(3, ge=1)
    budget: int = Field(encoding.DEFAULT_LOADER_BUDGET, ge=1)


class OutputSpec(_Strict):
    dir: str = "out"


class ScenarioConfig(_Strict):
    seed: int = Field(0, ge=0, lt=2**64)
    market: MarketSpec = Field(default_factory=MarketSpec)
    suppliers: list[SupplierSpec]
    demand: DemandSpec = Field(default_factory=DemandSpec)
    estimator: EstimatorSpec = Field(default_factory=EstimatorSpec)
    sweep: SweepSpec = Field(default_factory=SweepSpec)
    loader: LoaderSpecConfig = Field(default_factory=LoaderSpecConfig)
    q: list[int] | None = None
    q_grid: list[list[int]] | None = None
    output: OutputSpec = Field(default_factory=OutputSpec)

    # -- conversion to library types -------------------------------------

    def market_params(self) -> MarketParams:
        return MarketParams(self.market.p, self.market.w, self.market.o)

    def demand_distribution(self) -> DemandDistribution:
        d = self.demand
        phi = dict(phi_offset=d.phi_offset, phi_slope=d.phi_slope)
        if d.probs is not None:
            probs = np.asarray(d.probs, dtype=float)
            if probs.size != 2**d.n_qubits:
                raise ValueError(
                    f"demand.probs has {probs.size} entries, expected {2**d.n_qubits}"
                )
            if abs(probs.sum() - 1.0) > 1e-9:
                raise ValueError(f"demand.probs sums to {probs.sum()}, expected 1")
            return DemandDistribution.from_weights(d.n_qubits, probs, **phi)
        if d.generator == "bimodal":
            return DemandDistribution.bimodal(d.n_qubits, d.peaks, d.weights, d.width, **phi)
        if d.generator == "seeded-random":
            return DemandDistribution.seeded_random(d.n_qubits, d.seed, **phi)
        return DemandDistribution.uniform(d.n_qubits, **phi)

    def supplier_list(self) -> list[Supplier]:
        default_cap = 2**self.demand.n_qubits - 1
        out = []
        for s in self.suppliers:
            rel = s.reliability
            model = (
                Deterministic(rel.value)
                if isinstance(rel, DeterministicSpec)
                else TruncatedNormal(rel.mean, rel.variance)
            )
            cap = default_cap if s.capacity is None else s.capacity
            out.append(Supplier(s.c, s.f_fixed, cap, model))
        return out

    def estimator_choice(self, base_dir: Path | None = None) -> EstimatorChoice:
        e = self.estimator
        loader = None
        if e.loader_path:
            path = Path(e.loader_path)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            loader = encoding.VariationalLoader.from_dict(json.loads(path.read_text()))
        cfg = qae.QaeConfig(e.m, e.shots, e.epsilon, e.alpha, e.repetitions)
        return EstimatorChoice(e.kind, e.n_samples, cfg, e.c_scale, loader)

    def check(self) -> None:
        """Build every library object once so config errors surface before any run."""
        suppliers = self.supplier_list()
        validate(self.market_params(), suppliers)
        self.demand_distribution()
        for q in self.q_grid or []:
            OrderDecision(tuple(q)).check_capacity(suppliers)


def load_config(path: str | Path) -> ScenarioConfig:
    text = Path(path).read_text()
    return ScenarioConfig.model_validate_json(text)
