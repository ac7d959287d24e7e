"""Amplitude estimation on top of an A operator.

The Grover operator is ``Q = A S0 A^dag S_psi0`` with ``S_psi0`` a Z on the
objective qubit and ``S0 = 2|0><0| - I`` on the demand register plus objective.
With this sign choice ``Q`` rotates the good/bad plane by ``+2 theta_a`` and has
eigenvalues ``exp(+-2i theta_a)``, which the phase-estimation variant relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import rng as rngs
from .classical import EstimateResult
from .encoding import AOperator
from .qsim import Circuit, QuantumState, qft_circuit, run, sample_counts, zero_state

DENSE_MAX_QUBITS = 11


@dataclass(frozen=True)
class QaeConfig:
    m: int = 5
    shots: int = 1024
    epsilon: float = 0.01
    alpha: float = 0.05
    repetitions: int = 5

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if not 0 < self.epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 0.5)")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.repetitions < 1 or self.repetitions % 2 == 0:
            raise ValueError("repetitions must be odd and >= 1")


def zero_reflection(n_qubits: int, qubits) -> Circuit:
    """``2|0><0| - I`` on ``qubits`` (identity on the rest)."""
    qs = list(qubits)
    circ = Circuit(n_qubits)
    for q in qs:
        circ.x(q)
    circ.z(qs[-1], controls=qs[:-1])
    for q in qs:
        circ.x(q)
    circ.global_phase(math.pi)
    return circ


@dataclass
class GroverOperator:
    a_op: AOperator
    circuit: Circuit = field(init=False)
    _matrix: np.ndarray | None = field(default=None, init=False, repr=False)
    _powers: dict = field(default_factory=dict, init=False, repr=False)
    _last: tuple[int, np.ndarray] | None = field(default=None, init=False, repr=False)
    _canonical: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self) -> None:
        a = self.a_op
        n = a.n_qubits
        circ = Circuit(n).z(a.objective)
        circ.compose(a.circuit.inverse())
        circ.compose(zero_reflection(n, a.reflection_qubits))
        circ.compose(a.circuit)
        self.circuit = circ

    def state_after(self, k: int) -> np.ndarray:
        """Amplitudes of ``Q^k A |0>``, stepping forward from the last computed power."""
        if k < 0:
            raise ValueError("power must be non-negative")
        if self._last is None or self._last[0] > k:
            self._last = (0, self.a_op.statevector())
        j, psi = self._last
        if self.a_op.n_qubits <= DENSE_MAX_QUBITS:
            if self._matrix is None:
                self._matrix = self.circuit.unitary()
            for _ in range(k - j):
                psi = self._matrix @ psi
        else:
            for _ in range(k - j):
                psi = run(self.circuit, psi)
        self._last = (k, psi)
        return psi

    def probability(self, k: int) -> float:
        """Exact ``P[objective = 1]`` after ``Q^k A |0>``."""
        if k not in self._powers:
            n = self.a_op.n_qubits
            psi = self.state_after(k).reshape((2,) * n)
            idx = [slice(None)] * n
            idx[n - 1 - self.a_op.objective] = 1
            self._powers[k] = float(np.sum(np.abs(psi[tuple(idx)]) ** 2))
        return self._powers[k]

    def state(self, k: int) -> QuantumState:
        psi = self.state_after(k)
        return QuantumState(self.a_op.n_qubits, psi / np.linalg.norm(psi))


def grover_operator(a: AOperator) -> GroverOperator:
    return GroverOperator(a)


def qae_error_bound(M: int) -> float:
    """Canonical QAE error bound that holds with probability at least 8/pi^2."""
    if M < 2:
        raise ValueError("M must be >= 2")
    return math.pi / M + math.pi**2 / M**2


def _as_grover(a) -> GroverOperator:
    return a if isinstance(a, GroverOperator) else GroverOperator(a)


def canonical_circuit(grover: GroverOperator, m: int) -> Circuit:
    """Phase-estimation circuit: A, Hadamards on ``m`` ancillas, controlled ``Q^(2^j)``, inverse QFT.

    Ancilla ``j`` sits on qubit ``n + j`` where ``n`` is the A operator width.
    """
    a = grover.a_op
    n = a.n_qubits
    width = n + m
    circ = Circuit(width).compose(a.circuit)
    ancillas = list(range(n, width))
    for q in ancillas:
        circ.h(q)
    q_wide = Circuit(width).compose(grover.circuit)
    for j, anc in enumerate(ancillas):
        ctrl = q_wide.controlled(anc)
        for _ in range(2**j):
            circ.compose(ctrl)
    circ.compose(qft_circuit(width, ancillas, inverse=True))
    return circ


def canonical_distribution(grover: GroverOperator, m: int) -> np.ndarray:
    """Exact distribution of the measured ancilla integer ``y``."""
    if m not in grover._canonical:
        circ = canonical_circuit(grover, m)
        state = QuantumState(circ.n_qubits, run(circ, zero_state(circ.n_qubits).amplitudes))
        n = grover.a_op.n_qubits
        probs = np.abs(state.amplitudes.reshape(2**m, 2**n)) ** 2
        grover._canonical[m] = probs.sum(axis=1)
    return grover._canonical[m]


def canonical_qae(a, m: int = 5, shots: int = 1024, seed: int = 0) -> EstimateResult:
    """QPE-based estimate ``sin^2(y pi / M)`` from the most frequent outcome class.

    Outcomes ``y`` and ``M - y`` give the same estimate and are pooled before
    taking the mode; ties go to the smaller ``y``.
    """
    grover = _as_grover(a)
    if grover.a_op.n_qubits + m > 24:
        raise ValueError("canonical QAE circuit exceeds the simulator width")
    M = 2**m
    dist = canonical_distribution(grover, m)
    state = QuantumState(m, np.sqrt(np.clip(dist, 0, None) / dist.sum()))
    counts = sample_counts(state, list(range(m)), shots, rngs.stream(seed, rngs.SHOTS))
    pooled = np.zeros(M // 2 + 1, dtype=int)
    for y, cnt in counts.items():
        pooled[min(y, M - y)] += cnt
    y_best = int(np.argmax(pooled))
    est = math.sin(y_best * math.pi / M) ** 2
    bound = qae_error_bound(M)
    return EstimateResult(
        est,
        max(0.0, est - bound),
        min(1.0, est + bound),
        shots,
        shots * (M - 1),
        {"y": y_best, "M": M},
    )


def median_boost(a, m: int = 5, shots: int = 1024, repetitions: int = 5, seed: int = 0) -> EstimateResult:
    """Median of independent canonical runs."""
    if repetitions < 1 or repetitions % 2 == 0:
        raise ValueError("repetitions must be odd and >= 1")
    grover = _as_grover(a)
    runs = [
        canonical_qae(grover, m, shots, seed if repetitions == 1 else rngs.child_seed(seed, rep))
        for rep in range(repetitions)
    ]
    ordered = sorted(runs, key=lambda r: r.estimate)
    mid = ordered[repetitions // 2]
    return EstimateResult(
        mid.estimate,
        mid.ci_low,
        mid.ci_high,
        sum(r.samples_or_shots for r in runs),
        sum(r.oracle_queries for r in runs),
        {"repetitions": repetitions, "estimates": [r.estimate for r in runs], "M": 2**m},
    )


def clopper_pearson(ones: int, n: int, alpha: float) -> tuple[float, float]:
    lo = 0.0 if ones == 0 else float(stats.beta.ppf(alpha / 2, ones, n - ones + 1))
    hi = 1.0 if ones == n else float(stats.beta.ppf(1 - alpha / 2, ones + 1, n - ones))
    return lo, hi


_HALF = math.pi / 2


def _half_period(K: int, theta_lo: float, theta_hi: float) -> int | None:
    """Index ``j`` with ``K*[lo, hi]`` inside ``[j pi/2, (j+1) pi/2]``, else None."""
    j = math.floor(K * theta_lo / _HALF + 1e-12)
    if K * theta_hi <= (j + 1) * _HALF + 1e-12:
        return j
    return None


def _next_k(k: int, theta_lo: float, theta_hi: float, min_ratio: float) -> int:
    """Largest Grover power whose scaled interval stays unambiguous, growing by ``min_ratio``."""
    K_now = 2 * k + 1
    width = theta_hi - theta_lo
    K = int(_HALF / width) if width > 0 else 10**9
    if K % 2 == 0:
        K -= 1
    while K >= min_ratio * K_now:
        if _half_period(K, theta_lo, theta_hi) is not None:
            return (K - 1) // 2
        K -= 2
    return k


def iqae(
    a,
    epsilon: float = 0.01,
    alpha: float = 0.05,
    shots_per_round: int = 100,
    seed: int = 0,
    min_ratio: float = 2.0,
) -> EstimateResult:
    """Iterative amplitude estimation with Clopper-Pearson interval updates.

    Returns an interval ``[a_lo, a_hi]`` of width at most ``2*epsilon`` that
    covers the amplitude with probability at least ``1 - alpha``; the point
    estimate is the interval midpoint.
    """
    if not 0 < epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 0.5)")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if shots_per_round < 1:
        raise ValueError("shots_per_round must be >= 1")
    grover = _as_grover(a)
    gen = rngs.stream(seed, rngs.SHOTS)
    max_rounds = int(math.log(min_ratio * math.pi / (8 * epsilon), min_ratio)) + 1
    alpha_round = alpha / max_rounds

    theta_lo, theta_hi = 0.0, _HALF
    k = 0
    ones_k = shots_k = 0
    queries = total_shots = rounds = 0
    powers = []
    objective = grover.a_op.objective
    while math.sin(theta_hi) ** 2 - math.sin(theta_lo) ** 2 > 2 * epsilon:
        k_new = _next_k(k, theta_lo, theta_hi, min_ratio)
        if k_new != k or rounds == 0:
            ones_k = shots_k = 0
        k = k_new
        counts = sample_counts(grover.state(k), [objective], shots_per_round, gen)
        ones_k += counts.get(1, 0)
        shots_k += shots_per_round
        queries += shots_per_round * k
        total_shots += shots_per_round
        rounds += 1
        powers.append(k)

        K = 2 * k + 1
        j = _half_period(K, theta_lo, theta_hi)
        p_lo, p_hi = clopper_pearson(ones_k, shots_k, alpha_round)
        if j % 2 == 0:
            lo = (j * _HALF + math.asin(math.sqrt(p_lo))) / K
            hi = (j * _HALF + math.asin(math.sqrt(p_hi))) / K
        else:
            lo = (j * _HALF + math.acos(math.sqrt(p_hi))) / K
            hi = (j * _HALF + math.acos(math.sqrt(p_lo))) / K
        new_lo, new_hi = max(theta_lo, lo), min(theta_hi, hi)
        if new_lo > new_hi:
            new_lo, new_hi = lo, hi
        theta_lo, theta_hi = new_lo, new_hi

    a_lo, a_hi = math.sin(theta_lo) ** 2, math.sin(theta_hi) ** 2
    return EstimateResult(
        0.5 * (a_lo + a_hi),
        a_lo,
        a_hi,
        total_shots,
        queries,
        {"rounds": rounds, "powers": powers},
    )
