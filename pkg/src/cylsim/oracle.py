"""Exact dense density-matrix simulation at desk scale.

This module is the ground truth for every acceptance experiment: it carries
the full 2^n x 2^n density matrix (n <= 10), applies diagonal gates by phase
conjugation, and walks the complete outcome tree of a measurement schedule.
Correctness over scale throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bloch import PAULI, BlochVector, DiagonalGate, MeasurementSpec

MAX_QUBITS = 10


class TooManyQubits(ValueError):
    """Dense simulation is capped at MAX_QUBITS qubits."""


@dataclass
class DenseState:
    """An n-qubit density matrix.  Qubit 0 owns the most significant bit of
    the basis index."""

    n: int
    rho: np.ndarray

    def __post_init__(self):
        if self.n > MAX_QUBITS:
            raise TooManyQubits(f"n={self.n} exceeds the dense limit {MAX_QUBITS}")
        dim = 2 ** self.n
        if self.rho.shape != (dim, dim):
            raise ValueError(f"rho must be {dim}x{dim}")

    @classmethod
    def from_product(cls, vectors: list[BlochVector]) -> "DenseState":
        if len(vectors) > MAX_QUBITS:
            raise TooManyQubits(f"{len(vectors)} qubits exceed the dense limit")
        rho = np.array([[1.0 + 0j]])
        for v in vectors:
            rho = np.kron(rho, v.dense())
        return cls(len(vectors), rho)

    def validate(self, psd_tol: float = -1e-9):
        """Check trace, Hermiticity, and (for quantum inputs) positivity."""
        if abs(np.trace(self.rho) - 1.0) > 1e-10:
            raise ValueError("trace deviates from 1")
        if np.max(np.abs(self.rho - self.rho.conj().T)) > 1e-10:
            raise ValueError("rho is not Hermitian")
        if np.linalg.eigvalsh(self.rho).min() < psd_tol:
            raise ValueError("rho has a significant negative eigenvalue")

    def pauli_coeff(self, qubit_i: int, qubit_j: int) -> np.ndarray:
        """4x4 Pauli coefficients of the reduced state of two qubits."""
        keep = sorted({qubit_i, qubit_j})
        reduced = _partial_trace_keep(self.rho, self.n, keep)
        if keep[0] == qubit_j:  # restore requested order
            reduced = _swap_two_qubit(reduced)
        m = np.empty((4, 4))
        for a in range(4):
            for b in range(4):
                m[a, b] = np.real(np.trace(np.kron(PAULI[a], PAULI[b]) @ reduced))
        return m


def _swap_two_qubit(rho4: np.ndarray) -> np.ndarray:
    sw = np.zeros((4, 4))
    sw[0, 0] = sw[3, 3] = sw[1, 2] = sw[2, 1] = 1.0
    return sw @ rho4 @ sw


def _partial_trace_keep(rho: np.ndarray, n: int, keep: list[int]) -> np.ndarray:
    tensor = rho.reshape([2] * (2 * n))
    traced = [q for q in range(n) if q not in keep]
    for offset, q in enumerate(sorted(traced)):
        axis = q - offset  # earlier traces shifted the remaining axes
        live = tensor.ndim // 2
        tensor = np.trace(tensor, axis1=axis, axis2=axis + live)
    dim = 2 ** len(keep)
    return tensor.reshape(dim, dim)


def evolve(state: DenseState, gate: DiagonalGate, nodes: tuple[int, int]) -> DenseState:
    """Conjugate the state by the diagonal gate embedded on the given qubits.

    Diagonal unitaries act entrywise: rho_ab -> d_a rho_ab conj(d_b)."""
    i, j = nodes
    if i == j or not (0 <= i < state.n) or not (0 <= j < state.n):
        raise IndexError(f"bad qubit pair ({i}, {j}) for n={state.n}")
    idx = np.arange(2 ** state.n)
    bit_i = (idx >> (state.n - 1 - i)) & 1
    bit_j = (idx >> (state.n - 1 - j)) & 1
    phases = gate.entry_phases()
    d = np.exp(1j * phases[2 * bit_i + bit_j])
    return DenseState(state.n, state.rho * np.outer(d, d.conj()))


def _projector(n: int, qubit: int, m: MeasurementSpec, outcome: int) -> np.ndarray:
    axis = m.axis() * (1.0 if outcome > 0 else -1.0)
    p1 = 0.5 * (PAULI[0] + axis[0] * PAULI[1] + axis[1] * PAULI[2] + axis[2] * PAULI[3])
    op = np.array([[1.0 + 0j]])
    for q in range(n):
        op = np.kron(op, p1 if q == qubit else PAULI[0])
    return op


def _dephase(rho: np.ndarray, n: int, qubit: int) -> np.ndarray:
    idx = np.arange(2 ** n)
    bit = (idx >> (n - 1 - qubit)) & 1
    mask = bit[:, None] == bit[None, :]
    return rho * mask


def _trace_out(rho: np.ndarray, n: int, qubit: int) -> np.ndarray:
    keep = [q for q in range(n) if q != qubit]
    return _partial_trace_keep(rho, n, keep)


@dataclass
class ExactDistribution:
    """Exact outcome distribution with the mass lost to branch pruning."""

    probs: dict[str, float]
    pruned_mass: float

    def total(self) -> float:
        return sum(self.probs.values()) + self.pruned_mass


def exact_distribution(spec, prune: float = 1e-15) -> ExactDistribution:
    """Walk the full outcome tree of an experiment's schedule.

    Gates and measurements follow the experiment timeline; quasi-destructive
    measurements dephase the measured qubit in place, destructive ones trace
    it out.  Branches below the prune threshold are dropped and their mass
    reported."""
    from .experiment import ExperimentSpec, resolve_measure_angle  # cycle guard

    assert isinstance(spec, ExperimentSpec)
    nodes = spec.node_ids()
    if len(nodes) > MAX_QUBITS:
        raise TooManyQubits(f"{len(nodes)} nodes exceed the dense limit {MAX_QUBITS}")
    pos0 = {node: k for k, node in enumerate(nodes)}
    state0 = DenseState.from_product([spec.inputs[node].bloch() for node in nodes])
    timeline = spec.timeline()

    probs: dict[str, float] = {}
    pruned = 0.0

    def walk(rho, positions, n_live, step, prob, outcomes, record):
        nonlocal pruned
        while step < len(timeline):
            kind, payload = timeline[step]
            if kind == "gate":
                (u, v), phi = payload.edge, payload.phi
                st = evolve(DenseState(n_live, rho),
                            DiagonalGate(phi), (positions[u], positions[v]))
                rho = st.rho
                step += 1
                continue
            mstep = payload
            omega = resolve_measure_angle(mstep, record)
            m = MeasurementSpec(mstep.spec.kind, omega, mstep.spec.mode)
            q = positions[mstep.node]
            for outcome in (+1, -1):
                proj = _projector(n_live, q, m, outcome)
                sub = proj @ rho @ proj
                p = float(np.real(np.trace(sub)))
                if p <= prune:
                    if p > 0:
                        pruned += prob * p
                    continue
                sub = sub / p
                if m.mode == "quasi-destructive":
                    new_rho = _dephase(sub, n_live, q)
                    new_pos, new_n = positions, n_live
                else:
                    new_rho = _trace_out(sub, n_live, q)
                    new_pos = {node: k - (1 if k > q else 0)
                               for node, k in positions.items() if node != mstep.node}
                    new_n = n_live - 1
                new_record = dict(record)
                new_record[mstep.node] = outcome
                walk(new_rho, new_pos, new_n, step + 1, prob * p,
                     outcomes + ("+" if outcome > 0 else "-"), new_record)
            return
        probs[outcomes] = probs.get(outcomes, 0.0) + prob

    walk(state0.rho, pos0, len(nodes), 0, 1.0, "", {})
    return ExactDistribution(probs, pruned)
