"""Dense statevector simulator.

Qubit 0 is the least-significant bit of the basis-state index, so the basis
state ``|i>`` on ``n`` qubits has qubit ``j`` equal to ``(i >> j) & 1``.
Controls always condition on ``|1>``; zero-controls are built by X
conjugation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 24

GATE_KINDS = ("H", "X", "Z", "RY", "PHASE", "SWAP", "GPHASE")

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


class SimulatorError(ValueError):
    """Invalid register width, qubit index or gate."""


def _ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


@dataclass(frozen=True)
class GateOp:
    """One gate, optionally controlled.

    ``GPHASE`` has no targets: it multiplies the amplitude by ``exp(i*theta)``
    wherever all controls are 1 (a global phase when uncontrolled). It is
    needed so that controlled powers of a reflection carry the right sign.
    """

    kind: str
    targets: tuple[int, ...] = ()
    controls: tuple[int, ...] = ()
    theta: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in GATE_KINDS:
            raise SimulatorError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))
        n_targets = {"SWAP": 2, "GPHASE": 0}.get(self.kind, 1)
        if len(self.targets) != n_targets:
            raise SimulatorError(f"{self.kind} takes {n_targets} target(s), got {self.targets}")
        qubits = self.targets + self.controls
        if len(set(qubits)) != len(qubits):
            raise SimulatorError(f"targets and controls overlap in {self}")
        if any(q < 0 for q in qubits):
            raise SimulatorError(f"negative qubit index in {self}")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + self.controls

    def inverse(self) -> GateOp:
        if self.kind in ("RY", "PHASE", "GPHASE"):
            return GateOp(self.kind, self.targets, self.controls, -self.theta)
        return self

    def with_controls(self, extra: Iterable[int]) -> GateOp:
        return GateOp(self.kind, self.targets, self.controls + tuple(extra), self.theta)


@dataclass
class Circuit:
    n_qubits: int
    ops: list[GateOp] = field(default_factory=list)

    def __post_init__(self) -> None:
        _check_width(self.n_qubits)
        for op in self.ops:
            self._check(op)

    def _check(self, op: GateOp) -> None:
        if any(q >= self.n_qubits for q in op.qubits):
            raise SimulatorError(f"{op} does not fit on {self.n_qubits} qubits")

    def append(self, op: GateOp) -> Circuit:
        self._check(op)
        self.ops.append(op)
        return self

    def h(self, target: int, controls: Sequence[int] = ()) -> Circuit:
        return self.append(GateOp("H", (target,), tuple(controls)))

    def x(self, target: int, controls: Sequence[int] = ()) -> Circuit:
        return self.append(GateOp("X", (target,), tuple(controls)))

    def z(self, target: int, controls: Sequence[int] = ()) -> Circuit:
        return self.append(GateOp("Z", (target,), tuple(controls)))

    def ry(self, theta: float, target: int, controls: Sequence[int] = ()) -> Circuit:
        return self.append(GateOp("RY", (target,), tuple(controls), float(theta)))

    def phase(self, theta: float, target: int, controls: Sequence[int] = ()) -> Circuit:
        return self.append(GateOp("PHASE", (target,), tuple(controls), float(theta)))

    def swap(self, a: int, b: int, controls: Sequence[int] = ()) -> Circuit:
        return self.append(GateOp("SWAP", (a, b), tuple(controls)))

    def global_phase(self, theta: float, controls: Sequence[int] = ()) -> Circuit:
        return self.append(GateOp("GPHASE", (), tuple(controls), float(theta)))

    def compose(self, other: Circuit, qubits: Sequence[int] | None = None) -> Circuit:
        """Append ``other``, optionally remapping its qubit ``j`` onto ``qubits[j]``."""
        if qubits is None:
            if other.n_qubits > self.n_qubits:
                raise SimulatorError("composed circuit is wider than the host")
            for op in other.ops:
                self.append(op)
            return self
        if len(qubits) != other.n_qubits:
            raise SimulatorError("qubit map length does not match composed circuit width")
        for op in other.ops:
            self.append(
                GateOp(
                    op.kind,
                    tuple(qubits[t] for t in op.targets),
                    tuple(qubits[c] for c in op.controls),
                    op.theta,
                )
            )
        return self

    def inverse(self) -> Circuit:
        return Circuit(self.n_qubits, [op.inverse() for op in reversed(self.ops)])

    def controlled(self, control: int, n_qubits: int | None = None) -> Circuit:
        """Every gate additionally conditioned on ``control`` (which must be unused)."""
        width = self.n_qubits if n_qubits is None else n_qubits
        if any(control in op.qubits for op in self.ops):
            raise SimulatorError(f"control qubit {control} is used by the circuit")
        return Circuit(width, [op.with_controls((control,)) for op in self.ops])

    def unitary(self) -> np.ndarray:
        """Dense matrix of the circuit (column ``j`` is the image of ``|j>``)."""
        dim = 2**self.n_qubits
        return run(self, np.eye(dim, dtype=complex))

    def __len__(self) -> int:
        return len(self.ops)


@dataclass
class QuantumState:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        _check_width(self.n_qubits)
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2**self.n_qubits,):
            raise SimulatorError(
                f"expected {2**self.n_qubits} amplitudes, got shape {self.amplitudes.shape}"
            )
        norm = float(np.vdot(self.amplitudes, self.amplitudes).real)
        if abs(norm - 1.0) > 1e-10:
            raise SimulatorError(f"state is not normalized (norm^2 = {norm})")

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> QuantumState:
        return QuantumState(self.n_qubits, self.amplitudes.copy())


def _check_width(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise SimulatorError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")


def zero_state(n: int) -> QuantumState:
    _check_width(n)
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = 1.0
    return QuantumState(n, amps)


def _apply_inplace(psi: np.ndarray, op: GateOp, n: int) -> None:
    """Apply ``op`` to ``psi`` reshaped as ``(2,)*n + batch``. Axis of qubit q is n-1-q."""
    idx: list = [slice(None)] * psi.ndim
    for c in op.controls:
        idx[n - 1 - c] = 1

    if op.kind == "GPHASE":
        psi[tuple(idx)] *= np.exp(1j * op.theta)
        return

    if op.kind == "SWAP":
        a, b = op.targets
        i01, i10 = list(idx), list(idx)
        i01[n - 1 - a], i01[n - 1 - b] = 0, 1
        i10[n - 1 - a], i10[n - 1 - b] = 1, 0
        tmp = psi[tuple(i01)].copy()
        psi[tuple(i01)] = psi[tuple(i10)]
        psi[tuple(i10)] = tmp
        return

    (t,) = op.targets
    i0, i1 = list(idx), list(idx)
    i0[n - 1 - t] = 0
    i1[n - 1 - t] = 1
    i0, i1 = tuple(i0), tuple(i1)

    if op.kind == "PHASE":
        psi[i1] *= np.exp(1j * op.theta)
    elif op.kind == "Z":
        psi[i1] *= -1
    elif op.kind == "X":
        tmp = psi[i0].copy()
        psi[i0] = psi[i1]
        psi[i1] = tmp
    else:
        u = _H if op.kind == "H" else _ry(op.theta)
        a0 = psi[i0].copy()
        a1 = psi[i1]
        psi[i0] = u[0, 0] * a0 + u[0, 1] * a1
        psi[i1] = u[1, 0] * a0 + u[1, 1] * a1


def run(circuit: Circuit, amplitudes: np.ndarray) -> np.ndarray:
    """Apply a circuit to a raw amplitude array of shape ``(2**n,)`` or ``(2**n, batch)``."""
    n = circuit.n_qubits
    out = np.array(amplitudes, dtype=complex, copy=True)
    if out.shape[0] != 2**n:
        raise SimulatorError(f"amplitude array has {out.shape[0]} rows, circuit needs {2**n}")
    psi = out.reshape((2,) * n + out.shape[1:])
    for op in circuit.ops:
        _apply_inplace(psi, op, n)
    return out


def apply(state: QuantumState, gate: GateOp) -> QuantumState:
    circ = Circuit(state.n_qubits, [gate])
    return QuantumState(state.n_qubits, run(circ, state.amplitudes))


def simulate(circuit: Circuit, state: QuantumState | None = None) -> QuantumState:
    if state is None:
        state = zero_state(circuit.n_qubits)
    if state.n_qubits != circuit.n_qubits:
        raise SimulatorError(
            f"state has {state.n_qubits} qubits, circuit has {circuit.n_qubits}"
        )
    return QuantumState(state.n_qubits, run(circuit, state.amplitudes))


def qft_circuit(n_qubits: int, qubits: Sequence[int], inverse: bool = False) -> Circuit:
    """QFT on ``qubits`` (``qubits[0]`` least significant), including the final swaps.

    Maps ``|j>`` to ``M**-0.5 * sum_k exp(2*pi*i*j*k/M) |k>`` with ``M = 2**len(qubits)``.
    """
    qs = list(qubits)
    m = len(qs)
    circ = Circuit(n_qubits)
    for j in reversed(range(m)):
        circ.h(qs[j])
        for k in reversed(range(j)):
            circ.phase(np.pi / 2 ** (j - k), qs[j], controls=(qs[k],))
    for k in range(m // 2):
        circ.swap(qs[k], qs[m - 1 - k])
    return circ.inverse() if inverse else circ


def _check_range(state: QuantumState, qubits: Sequence[int]) -> None:
    if not qubits:
        raise SimulatorError("empty qubit range")
    if len(set(qubits)) != len(qubits) or any(not 0 <= q < state.n_qubits for q in qubits):
        raise SimulatorError(f"qubit range {list(qubits)} invalid for {state.n_qubits} qubits")


def inverse_qft(state: QuantumState, qubits: Sequence[int]) -> QuantumState:
    _check_range(state, qubits)
    return simulate(qft_circuit(state.n_qubits, qubits, inverse=True), state)


def marginal(state: QuantumState, qubits: Sequence[int]) -> np.ndarray:
    """Joint distribution of ``qubits``; outcome index has ``qubits[0]`` as its LSB."""
    _check_range(state, qubits)
    n = state.n_qubits
    probs = state.probabilities().reshape((2,) * n)
    keep = [n - 1 - q for q in qubits]
    drop = tuple(ax for ax in range(n) if ax not in keep)
    reduced = probs.sum(axis=drop) if drop else probs
    # remaining axes are in increasing axis order; reorder so qubits[-1] is the leading (MSB) axis
    remaining = sorted(keep)
    order = [remaining.index(ax) for ax in reversed(keep)]
    return np.transpose(reduced, order).reshape(-1)


def prob_of_outcome(state: QuantumState, qubit: int, outcome: int) -> float:
    if not 0 <= qubit < state.n_qubits:
        raise SimulatorError(f"qubit {qubit} out of range")
    return float(marginal(state, [qubit])[int(outcome)])


def sample_counts(
    state: QuantumState,
    qubits: Sequence[int],
    shots: int,
    seed: int | np.random.Generator | None = None,
) -> dict[int, int]:
    """Multinomial shot counts over ``qubits``; keys are outcome integers."""
    if shots < 1:
        raise SimulatorError(f"shots must be >= 1, got {shots}")
    probs = marginal(state, qubits)
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs)
    return {int(k): int(c) for k, c in enumerate(counts) if c}
