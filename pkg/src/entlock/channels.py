"""Single-subsystem operations: dephasing, measurement, Pauli twirl, and the
ancilla-circuit realizations that implement them with a random local register.

Measurements and dephasings act in the computational basis of one factor;
an arbitrary-basis version is obtained by conjugating the input with a local
unitary first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .densop import (
    DensityOperator,
    partial_trace,
    permute_matrix,
    permute_subsystems,
    tensor,
)

OUTCOME_PRUNE_TOL = 1e-14

PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class MeasurementOutcomeSet:
    """Probabilities and renormalized post-measurement states."""

    outcomes: tuple

    def __post_init__(self):
        outcomes = tuple((float(p), op) for p, op in self.outcomes)
        object.__setattr__(self, "outcomes", outcomes)
        probs = np.array([p for p, _ in outcomes])
        if probs.min() < 0:
            raise ValueError(f"negative outcome probability {probs.min():.3e}")
        if abs(probs.sum() - 1.0) > 1e-10:
            raise ValueError(f"outcome probabilities sum to {probs.sum()}")

    def average(self):
        """Probability-weighted sum with the outcome flags kept in place."""
        p0, op0 = self.outcomes[0]
        total = sum(p * op.matrix for p, op in self.outcomes)
        return DensityOperator(total, op0.dims, op0.party)


def _check_index(x, k):
    if not 0 <= k < len(x.dims):
        raise ValueError(f"subsystem index {k} out of range for dims {x.dims}")


def _check_qubit(x, k):
    _check_index(x, k)
    if x.dims[k] != 2:
        raise ValueError(f"subsystem {k} has dimension {x.dims[k]}, expected 2")


def dephase_subsystem(x, k):
    """Zero all coherences between computational-basis states of factor k."""
    _check_index(x, k)
    n = len(x.dims)
    dk = x.dims[k]
    t = x.matrix.reshape(list(x.dims) * 2)
    shape = [1] * (2 * n)
    shape[k] = dk
    shape[n + k] = dk
    mask = np.eye(dk).reshape(shape)
    return type(x)((t * mask).reshape(x.dim, x.dim), x.dims, x.party)


def measure_subsystem(rho, k):
    """Complete computational-basis measurement of factor k.

    Outcome probabilities are Tr[(Pi_i (x) I) rho]; conditional states are the
    renormalized pinched blocks with the outcome flag |i><i| left in place, so
    the probability-weighted average reproduces ``dephase_subsystem``.
    Outcomes below the pruning threshold are omitted.
    """
    _check_index(rho, k)
    n = len(rho.dims)
    dk = rho.dims[k]
    t = rho.matrix.reshape(list(rho.dims) * 2)
    outcomes = []
    for i in range(dk):
        block = np.zeros_like(t)
        sel = [slice(None)] * (2 * n)
        sel[k] = i
        sel[n + k] = i
        block[tuple(sel)] = t[tuple(sel)]
        block = block.reshape(rho.dim, rho.dim)
        p = float(np.trace(block).real)
        if p < OUTCOME_PRUNE_TOL:
            continue
        outcomes.append((p, DensityOperator(block / p, rho.dims, rho.party)))
    return MeasurementOutcomeSet(tuple(outcomes))


def pauli_twirl_qubit(rho, k):
    """Replace qubit k by the maximally mixed state, uncorrelated with the
    rest: (I/2)_k (x) Tr_k rho."""
    _check_qubit(rho, k)
    qubit = DensityOperator(np.eye(2) / 2, (2,), (rho.party[k],))
    if len(rho.dims) == 1:
        return qubit
    rest = partial_trace(rho, {k})
    out = tensor(rest, qubit)  # qubit appended last; move it back to slot k
    n = len(rho.dims)
    perm = list(range(n - 1))
    perm.insert(k, n - 1)
    return permute_subsystems(out, perm)


def _apply_unitary(x, u, targets):
    """Conjugate by a unitary supported on the given factors."""
    dims = x.dims
    others = [i for i in range(len(dims)) if i not in targets]
    order = list(targets) + others
    d_other = int(np.prod([dims[i] for i in others], initial=1))
    u_full = np.kron(u, np.eye(d_other))
    # u_full lives in the (targets, others) ordering; bring it back
    back = [order.index(i) for i in range(len(dims))]
    u_full = permute_matrix(u_full, [dims[i] for i in order], back)
    return type(x)(u_full @ x.matrix @ u_full.conj().T, x.dims, x.party)


def _controlled_unitary(controls, gates):
    """sum_i |i><i| (x) gate_i on (ancilla, target)."""
    blocks = np.zeros((controls * 2, controls * 2), dtype=complex)
    for i in range(controls):
        blocks[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = gates[i]
    return blocks


def ancilla_dephasing_circuit(rho, k):
    """Dephasing of qubit k realized with a random one-qubit ancilla.

    Prepends the maximally mixed ancilla, applies the control-phase unitary
    |0><0| (x) I + |1><1| (x) Z, and traces the ancilla back out; the random
    phase kills the qubit coherences, matching ``dephase_subsystem``.
    """
    _check_qubit(rho, k)
    anc = DensityOperator(np.eye(2) / 2, (2,), (rho.party[k],))
    big = tensor(anc, rho)
    u = _controlled_unitary(2, [PAULI[0], PAULI[3]])
    big = _apply_unitary(big, u, (0, k + 1))
    return partial_trace(big, {0})


def ancilla_twirl_circuit(rho, k):
    """Pauli twirl of qubit k realized with a two-qubit random ancilla and
    the controlled unitary running over all four Pauli gates."""
    _check_qubit(rho, k)
    anc = DensityOperator(np.eye(4) / 4, (4,), (rho.party[k],))
    big = tensor(anc, rho)
    u = _controlled_unitary(4, list(PAULI))
    big = _apply_unitary(big, u, (0, k + 1))
    return partial_trace(big, {0})
