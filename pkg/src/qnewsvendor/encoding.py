"""Circuits that turn the newsvendor expectation into a qubit amplitude.

Register layout of an A operator on an ``n``-qubit demand register:

    qubits 0..n-1        demand index (qubit 0 = LSB)
    qubits n..2n-2       comparator carry ancillas (uncomputed)
    qubit  2n-1          comparator flag, ``|i >= t>``
    qubit  2n            objective

The objective qubit ends with amplitude ``sin(c * f~(i) + pi/4)`` on ``|1>``,
where ``f~`` rescales the profit onto [-1, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize

from . import rng as rngs
from .model import DemandDistribution, MarketParams, OrderDecision, profit, validate
from .qsim import Circuit, SimulatorError, run, zero_state

DEFAULT_C_SCALE = 0.05
DEFAULT_LOADER_BUDGET = 20_000


@dataclass(frozen=True)
class ExactLoader:
    probs: tuple[float, ...]


@dataclass
class VariationalLoader:
    n_qubits: int
    depth: int
    params: np.ndarray
    achieved_divergence: float

    def __post_init__(self) -> None:
        self.params = np.asarray(self.params, dtype=float)
        if self.params.shape != (n_ansatz_params(self.n_qubits, self.depth),):
            raise ValueError("parameter vector does not match ansatz size")
        if self.achieved_divergence < 0:
            raise ValueError("divergence must be non-negative")

    def circuit(self) -> Circuit:
        return ansatz_circuit(self.n_qubits, self.depth, self.params)

    def to_dict(self) -> dict:
        return {
            "kind": "variational",
            "n_qubits": self.n_qubits,
            "depth": self.depth,
            "params": [float(v) for v in self.params],
            "achieved_divergence": float(self.achieved_divergence),
        }

    @classmethod
    def from_dict(cls, data: dict) -> VariationalLoader:
        if data.get("kind", "variational") != "variational":
            raise ValueError(f"not a variational loader spec: kind={data.get('kind')!r}")
        return cls(int(data["n_qubits"]), int(data["depth"]), data["params"],
                   float(data["achieved_divergence"]))


LoaderSpec = ExactLoader | VariationalLoader


@dataclass(frozen=True)
class ScaledPayoff:
    """Payoff table ``f`` on the demand grid and its rotation-angle description.

    ``branch_low`` applies for indices below ``threshold`` (stock exceeds demand),
    ``branch_high`` from ``threshold`` on (demand meets or exceeds stock). Each is
    a ``(slope, intercept)`` pair so that the objective angle is
    ``slope * i + intercept``.
    """

    f_values: tuple[float, ...]
    f_min: float
    f_max: float
    c_scale: float
    branch_low: tuple[float, float]
    branch_high: tuple[float, float]
    threshold: int

    @property
    def degenerate(self) -> bool:
        return self.f_max <= self.f_min

    def scaled(self) -> np.ndarray:
        f = np.asarray(self.f_values)
        if self.degenerate:
            return np.zeros_like(f)
        return 2 * (f - self.f_min) / (self.f_max - self.f_min) - 1

    def angles(self) -> np.ndarray:
        """Objective rotation angle per grid index."""
        return self.c_scale * self.scaled() + math.pi / 4


@dataclass
class AOperator:
    n_state: int
    ancillas: tuple[int, ...]
    objective: int
    circuit: Circuit
    payoff: ScaledPayoff | None = None
    _statevector: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        state = set(range(self.n_state))
        if self.objective in state or self.objective in self.ancillas:
            raise SimulatorError("objective qubit must be distinct from state and ancilla qubits")
        if state & set(self.ancillas):
            raise SimulatorError("ancillas overlap the state register")
        if self.circuit.n_qubits != self.n_state + len(self.ancillas) + 1:
            raise SimulatorError(
                f"A operator circuit has {self.circuit.n_qubits} qubits, expected "
                f"{self.n_state + len(self.ancillas) + 1}"
            )

    @property
    def n_qubits(self) -> int:
        return self.circuit.n_qubits

    @property
    def reflection_qubits(self) -> tuple[int, ...]:
        """Qubits the zero-state reflection acts on: demand register and objective."""
        return tuple(range(self.n_state)) + (self.objective,)

    def statevector(self) -> np.ndarray:
        if self._statevector is None:
            self._statevector = run(self.circuit, zero_state(self.n_qubits).amplitudes)
        return self._statevector

    def probability(self) -> float:
        """Exact probability of objective ``|1>`` after A on the all-zero state."""
        psi = self.statevector().reshape((2,) * self.n_qubits)
        idx = [slice(None)] * self.n_qubits
        idx[self.n_qubits - 1 - self.objective] = 1
        return float(np.sum(np.abs(psi[tuple(idx)]) ** 2))


# ---------------------------------------------------------------------------
# Distribution loading


def _controlled_on_pattern(circ: Circuit, op_fn, controls: Sequence[int], bits: Sequence[int]):
    """Run ``op_fn(controls)`` conditioned on ``controls`` holding ``bits``."""
    flips = [q for q, b in zip(controls, bits) if not b]
    for q in flips:
        circ.x(q)
    op_fn(tuple(controls))
    for q in flips:
        circ.x(q)


def exact_load(demand: DemandDistribution, n_qubits: int | None = None) -> Circuit:
    """Binary-tree state preparation of ``sum_i sqrt(p_i) |i>``.

    Working from the most significant qubit down, each node of the probability
    tree gets a Y rotation set by the conditional probability of the next bit,
    controlled on the already-prepared prefix. Levels whose conditional
    probabilities agree for every prefix collapse to one uncontrolled rotation.
    """
    n = demand.n_qubits
    circ = Circuit(n if n_qubits is None else n_qubits)
    probs = demand.probs
    for level in range(n):
        target = n - 1 - level
        prefix_qubits = list(range(n - 1, target, -1))
        blocks = probs.reshape(2**level, 2, -1).sum(axis=2)
        mass = blocks.sum(axis=1)
        angles = np.zeros(2**level)
        live = mass > 0
        angles[live] = 2 * np.arccos(np.sqrt(np.clip(blocks[live, 0] / mass[live], 0.0, 1.0)))
        if np.allclose(angles[live], angles[live][0] if live.any() else 0.0, atol=1e-15, rtol=0):
            theta = float(angles[live][0]) if live.any() else 0.0
            if theta != 0.0:
                circ.ry(theta, target)
            continue
        for prefix in range(2**level):
            theta = float(angles[prefix])
            if not live[prefix] or theta == 0.0:
                continue
            bits = [(prefix >> (level - 1 - k)) & 1 for k in range(level)]
            _controlled_on_pattern(
                circ, lambda ctrl, th=theta, t=target: circ.ry(th, t, ctrl), prefix_qubits, bits
            )
    return circ


def n_ansatz_params(n_qubits: int, depth: int) -> int:
    return n_qubits * (depth + 1)


def ansatz_circuit(n_qubits: int, depth: int, params) -> Circuit:
    """RY layer, then ``depth`` times (CZ ring, RY layer)."""
    if depth < 1:
        raise ValueError("ansatz depth must be >= 1")
    params = np.asarray(params, dtype=float).reshape(depth + 1, n_qubits)
    circ = Circuit(n_qubits)
    for q in range(n_qubits):
        circ.ry(params[0, q], q)
    for layer in range(1, depth + 1):
        if n_qubits > 1:
            pairs = [(q, (q + 1) % n_qubits) for q in range(n_qubits)]
            if n_qubits == 2:
                pairs = pairs[:1]
            for a, b in pairs:
                circ.z(b, controls=(a,))
        for q in range(n_qubits):
            circ.ry(params[layer, q], q)
    return circ


def _ansatz_probs_fn(n_qubits: int, depth: int):
    """Fast real-arithmetic evaluation of the ansatz output distribution."""
    dim = 2**n_qubits
    idx = np.arange(dim)
    bits = [(idx >> q) & 1 for q in range(n_qubits)]
    if n_qubits == 1:
        ring = np.ones(dim)
    else:
        pairs = [(q, (q + 1) % n_qubits) for q in range(n_qubits)]
        if n_qubits == 2:
            pairs = pairs[:1]
        parity = sum(bits[a] & bits[b] for a, b in pairs)
        ring = np.where(parity % 2, -1.0, 1.0)

    def layer(psi, thetas):
        psi = psi.reshape((2,) * n_qubits)
        for q, th in enumerate(thetas):
            ax = n_qubits - 1 - q
            c, s = math.cos(th / 2), math.sin(th / 2)
            a0 = np.take(psi, 0, axis=ax)
            a1 = np.take(psi, 1, axis=ax)
            psi = np.stack([c * a0 - s * a1, s * a0 + c * a1], axis=ax)
        return psi.reshape(-1)

    def probs(params):
        p = np.asarray(params, dtype=float).reshape(depth + 1, n_qubits)
        psi = np.zeros(dim)
        psi[0] = 1.0
        psi = layer(psi, p[0])
        for k in range(1, depth + 1):
            psi = layer(psi * ring, p[k])
        return psi**2

    return probs


def kl_divergence(target: np.ndarray, model: np.ndarray, floor: float = 1e-12) -> float:
    """``KL(target || model)`` in nats; zero-probability target entries contribute nothing."""
    t = np.asarray(target, dtype=float)
    m = np.maximum(np.asarray(model, dtype=float), floor)
    mask = t > 0
    return float(np.sum(t[mask] * np.log(t[mask] / m[mask])))


def variational_load(
    target: DemandDistribution,
    depth: int = 3,
    budget: int = DEFAULT_LOADER_BUDGET,
    seed: int = 0,
) -> VariationalLoader:
    """Fit the ansatz to ``target`` by gradient-free KL minimization.

    Alternates Powell and Nelder-Mead restarts from the best point so far until
    ``budget`` objective evaluations are spent. The first start is the uniform
    point (all first-layer angles pi/2), later starts are seeded perturbations.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    n = target.n_qubits
    probs_fn = _ansatz_probs_fn(n, depth)
    tp = target.probs
    spent = 0
    best_x: np.ndarray | None = None
    best_f = math.inf

    def objective(x):
        nonlocal spent, best_x, best_f
        spent += 1
        val = kl_divergence(tp, probs_fn(x))
        if val < best_f:
            best_f, best_x = val, np.array(x, dtype=float)
        return val

    gen = rngs.stream(seed, rngs.TRAINING)
    n_params = n_ansatz_params(n, depth)
    x0 = np.zeros(n_params)
    x0[:n] = math.pi / 2
    objective(x0)
    start = x0 + gen.normal(0.0, 0.3, n_params)
    methods = ("Powell", "Nelder-Mead")
    attempt = 0
    while spent < budget and best_f > 1e-10:
        remaining = budget - spent
        method = methods[attempt % 2]
        opts = {"maxfev": remaining, "xtol": 1e-8, "ftol": 1e-12}
        if method == "Nelder-Mead":
            opts = {"maxfev": remaining, "xatol": 1e-8, "fatol": 1e-12, "adaptive": True}
        before = spent
        optimize.minimize(objective, start, method=method, options=opts)
        attempt += 1
        if spent == before:
            break
        scale = 0.05 if attempt % 2 else 0.5
        start = best_x + gen.normal(0.0, scale, n_params)
    return VariationalLoader(n, depth, best_x, max(best_f, 0.0))


def loader_circuit(spec: VariationalLoader | ExactLoader | DemandDistribution, n_qubits: int | None = None) -> Circuit:
    if isinstance(spec, DemandDistribution):
        return exact_load(spec, n_qubits)
    if isinstance(spec, ExactLoader):
        n = int(round(math.log2(len(spec.probs))))
        return exact_load(DemandDistribution(n, np.array(spec.probs)), n_qubits)
    circ = spec.circuit()
    if n_qubits is not None and n_qubits != circ.n_qubits:
        circ = Circuit(n_qubits).compose(circ)
    return circ


def loader_probabilities(circ: Circuit) -> np.ndarray:
    return np.abs(run(circ, zero_state(circ.n_qubits).amplitudes)) ** 2


# ---------------------------------------------------------------------------
# Payoff


def scale_payoff(
    market: MarketParams,
    suppliers,
    decision: OrderDecision,
    r,
    demand: DemandDistribution,
    c_scale: float = DEFAULT_C_SCALE,
) -> ScaledPayoff:
    """Tabulate profit on the demand grid for fixed reliabilities and fit the rotation pieces."""
    validate(market, suppliers)
    if not 0 < c_scale <= 1:
        raise ValueError(f"c_scale must lie in (0, 1], got {c_scale}")
    r = np.asarray(r, dtype=float)
    f = profit(market, suppliers, decision, r, demand.values)
    f_min, f_max = float(f.min()), float(f.max())
    delivered = float(r @ np.asarray(decision.q, dtype=float))
    at_or_above = np.nonzero(demand.values >= delivered)[0]
    threshold = int(at_or_above[0]) if at_or_above.size else demand.size

    # profit is affine in demand on either side of the delivered stock, and
    # demand is affine in the index, so each branch is affine in the index
    fixed = sum(s.f_fixed * x for s, x in zip(suppliers, decision.x))
    c = np.array([s.c for s in suppliers])
    base = float(np.sum((market.w - c) * r * np.asarray(decision.q, dtype=float))) - fixed
    # overage: (p-w) d + base ; shortage: (p-w) d + base - (o-w)(d - RO) = (p-o) d + base + (o-w) RO
    low_d = (market.p - market.w, base)
    high_d = (market.p - market.o, base + (market.o - market.w) * delivered)

    def to_angle(slope_d: float, icpt_d: float) -> tuple[float, float]:
        slope_i = slope_d * demand.phi_slope
        icpt_i = slope_d * demand.phi_offset + icpt_d
        if f_max <= f_min:
            return 0.0, math.pi / 4
        k = 2 * c_scale / (f_max - f_min)
        return k * slope_i, k * (icpt_i - f_min) - c_scale + math.pi / 4

    return ScaledPayoff(
        tuple(float(v) for v in f),
        f_min,
        f_max,
        float(c_scale),
        to_angle(*low_d),
        to_angle(*high_d),
        threshold,
    )


def comparator(n_state: int, threshold: int, basis: bool = False) -> Circuit:
    """Reversible ``flag ^= [i >= threshold]`` on layout ``state | carries | flag``.

    The default is a ripple-carry comparison: add the two's complement of the
    threshold and keep only the final carry, then uncompute the carry chain.
    ``basis=True`` instead flips the flag with one fully controlled X per
    qualifying basis index (no carries used).
    """
    n = n_state
    width = 2 * n
    flag = 2 * n - 1
    circ = Circuit(width)
    state = list(range(n))
    if threshold <= 0:
        circ.x(flag)
        return circ
    if threshold >= 2**n:
        return circ
    if basis:
        for i in range(threshold, 2**n):
            bits = [(i >> j) & 1 for j in range(n)]
            _controlled_on_pattern(circ, lambda ctrl: circ.x(flag, ctrl), state, bits)
        return circ

    twos = (2**n - threshold) & (2**n - 1)
    tb = [(twos >> j) & 1 for j in range(n)]
    carries = list(range(n, 2 * n - 1)) + [flag]

    def carry_ops(j: int) -> Circuit:
        c = Circuit(width)
        target = carries[j]
        if j == 0:
            if tb[0]:
                c.x(target, (state[0],))
        elif tb[j]:
            # target ^= state[j] OR carry[j-1]
            a, b = state[j], carries[j - 1]
            c.x(a).x(b).x(target, (a, b)).x(target).x(a).x(b)
        else:
            c.x(carries[j], (state[j], carries[j - 1]))
        return c

    for j in range(n):
        circ.compose(carry_ops(j))
    for j in reversed(range(n - 1)):
        circ.compose(carry_ops(j).inverse())
    return circ


def build_payoff_operator(sp: ScaledPayoff, n_state: int, basis_comparator: bool = False) -> Circuit:
    """Comparator plus flag-selected linear Y rotations on the objective qubit."""
    for pair in (sp.branch_low, sp.branch_high):
        if not all(math.isfinite(v) for v in pair):
            raise ValueError("branch coefficients must be finite")
    width = 2 * n_state + 1
    flag, objective = 2 * n_state - 1, 2 * n_state
    circ = Circuit(width)
    if sp.degenerate:
        circ.ry(math.pi / 2, objective)
        return circ
    circ.compose(comparator(n_state, sp.threshold, basis_comparator))
    for flag_value, (slope, icpt) in ((0, sp.branch_low), (1, sp.branch_high)):
        if flag_value == 0:
            circ.x(flag)
        circ.ry(2 * icpt, objective, (flag,))
        for j in range(n_state):
            circ.ry(2 * (2**j) * slope, objective, (j, flag))
        if flag_value == 0:
            circ.x(flag)
    return circ


def build_a_operator(loader: Circuit, payoff: Circuit, sp: ScaledPayoff | None = None) -> AOperator:
    """Loader on the demand register followed by the payoff circuit."""
    n = loader.n_qubits
    if payoff.n_qubits != 2 * n + 1:
        raise SimulatorError(
            f"payoff circuit spans {payoff.n_qubits} qubits; a {n}-qubit loader needs {2 * n + 1}"
        )
    circ = Circuit(2 * n + 1).compose(loader).compose(payoff)
    return AOperator(n, tuple(range(n, 2 * n)), 2 * n, circ, sp)


def single_rotation_a_operator(a: float) -> AOperator:
    """One-qubit A with ``P[1] = a`` (RY on the objective qubit alone)."""
    if not 0 <= a <= 1:
        raise ValueError("amplitude must lie in [0, 1]")
    circ = Circuit(1).ry(2 * math.asin(math.sqrt(a)), 0)
    return AOperator(0, (), 0, circ)


def invert_estimate(prob: float, sp: ScaledPayoff) -> float:
    """First-order inverse of ``P ~ c * E[f~] + 1/2`` back to expected profit."""
    if sp.degenerate:
        return sp.f_min
    c = sp.c_scale
    return sp.f_min + (prob - 0.5 + c) * (sp.f_max - sp.f_min) / (2 * c)


def inversion_slope(sp: ScaledPayoff) -> float:
    """d(expected profit) / d(probability) of the inversion."""
    return 0.0 if sp.degenerate else (sp.f_max - sp.f_min) / (2 * sp.c_scale)
