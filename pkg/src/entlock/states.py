"""Factories for the explicit states of the locking families.

Every factory returns a validated operator with its dims/party metadata in
party-sorted order (all A factors first, then B, then E).  Matrix layouts are
spelled out in the docstrings because the interleaving of qubit flags and
hiding-state halves is the most error-prone bookkeeping in the whole build.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .densop import (
    BipartiteCut,
    DensityOperator,
    DimensionCapError,
    HermitianOperator,
    PositivityError,
    dimension_cap,
    kron_all,
    partial_trace,
    partial_transpose,
    permute_matrix,
    pure_state,
    tensor,
    validate,
)

UNITARITY_TOL = 1e-10


def hadamard_power(k):
    """Real orthogonal H^{(x)k}, entries +-2^{-k/2}."""
    if k < 1:
        raise ValueError("k must be >= 1")
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    out = np.array([[1.0]])
    for _ in range(k):
        out = np.kron(out, h)
    return out


@dataclass(frozen=True)
class LockingFamilyParams:
    """Correlated-basis size d and the d x d unitary of the coherent block."""

    d: int
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "d", int(self.d))
        u = np.array(self.u, dtype=complex)
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        if self.d < 2:
            raise ValueError("d must be >= 2")
        if u.shape != (self.d, self.d):
            raise ValueError(f"u must be {self.d}x{self.d}")
        defect = np.max(np.abs(u.conj().T @ u - np.eye(self.d)))
        if defect > UNITARITY_TOL:
            raise ValueError(f"u is not unitary (defect {defect:.3e})")

    @classmethod
    def hadamard(cls, d):
        """Default choice: u = Hadamard power (requires d a power of two)."""
        k = int(round(np.log2(d)))
        if 2 ** k != d:
            raise ValueError(f"Hadamard default needs d a power of 2, got {d}")
        return cls(d, hadamard_power(k))


def max_correlated(d):
    """Diagonal state with mass 1/d on each |ii>; separable, PPT."""
    if d < 2:
        raise ValueError("d must be >= 2")
    m = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        m[i * d + i, i * d + i] = 1.0 / d
    return DensityOperator(m, (d, d), ("A", "B"))


def _qubit_block(i, j):
    p = np.zeros((2, 2))
    p[i, j] = 1.0
    return p


def _embedded_ut(u):
    """The d^2 x d^2 coherent block: coefficient of |ii><jj| is u[j, i].

    This is the transpose of u placed on the span of the |ii> vectors; the
    adjoint block is mirrored at the call site so Hermiticity is structural.
    """
    d = u.shape[0]
    m = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            m[i * d + i, j * d + j] = u[j, i]
    return m


def locking_state(params):
    """Two-qubit-flagged correlated state with a coherent cross block.

    Layout: (qubit_A, C^d_A, qubit_B, C^d_B), party (A, A, B, B).  The 00 and
    11 qubit sectors each carry half the maximally correlated state; the
    00<->11 sectors carry the transposed unitary block scaled by 1/(2d).
    """
    d, u = params.d, params.u
    sigma = max_correlated(d).matrix
    ut = _embedded_ut(u)
    m = 0.5 * (
        kron_all([_qubit_block(0, 0), _qubit_block(0, 0), sigma])
        + kron_all([_qubit_block(1, 1), _qubit_block(1, 1), sigma])
        + kron_all([_qubit_block(0, 1), _qubit_block(0, 1), ut / d])
        + kron_all([_qubit_block(1, 0), _qubit_block(1, 0), ut.conj().T / d])
    )
    # built as (qA, qB, dA, dB); regroup to (qA, dA, qB, dB)
    m = permute_matrix(m, (2, 2, d, d), (0, 2, 1, 3))
    rho = DensityOperator(m, (2, d, 2, d), ("A", "A", "B", "B"))
    report = validate(rho)
    if not report.ok:
        raise PositivityError("locking state failed validation", report.min_eigenvalue)
    return rho


def locking_purification(params):
    """Rank-1 purification on A(x)B(x)E whose E-marginal is ``locking_state``.

    The second branch applies the adjoint of u on E; this reproduces the
    transposed coherent block of the mixed state for every unitary (for
    Hadamard powers the adjoint equals u itself).
    """
    d, u = params.d, params.u
    w = u.conj().T
    vec = np.zeros((2, d, 2, d, d), dtype=complex)
    for i in range(d):
        vec[0, i, 0, i, i] += 1.0
        vec[1, i, 1, i, :] += w[:, i]
    vec = vec.ravel() / np.sqrt(2 * d)
    return pure_state(vec, (2, d, 2, d, d), ("A", "A", "B", "B", "E"))


def werner_projector_states(d):
    """Normalized projectors onto the symmetric/antisymmetric subspaces."""
    if d < 2:
        raise ValueError("d must be >= 2")
    flip = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            flip[i * d + j, j * d + i] = 1.0
    eye = np.eye(d * d)
    rho_s = (eye + flip) / (d * (d + 1))
    rho_a = (eye - flip) / (d * (d - 1))
    dims, party = (d, d), ("A", "B")
    return DensityOperator(rho_s, dims, party), DensityOperator(rho_a, dims, party)


@dataclass(frozen=True)
class FlowerFamilyParams:
    """Local Werner dimension d, hiding copies l, level n, coherence alpha."""

    d: int
    l: int
    n: int
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "l", int(self.l))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "alpha", float(self.alpha))
        if self.d < 2 or self.l < 1 or self.n < 1:
            raise ValueError("need d >= 2, l >= 1, n >= 1")
        if abs(self.alpha) > 1:
            raise ValueError("alpha must lie in [-1, 1]")


def hiding_pair(d, l, cap=None):
    """The data-hiding pair (tau0, tau1) on (C^{d^l})_A (x) (C^{d^l})_B.

    tau0 is the l-fold symmetric Werner state, tau1 the l-fold even mixture of
    both Werner states; their trace distance is 2 - 2^{1-l} because all 2^l
    mixture terms have mutually orthogonal supports.
    """
    side = d ** (2 * l)
    if side > dimension_cap(cap):
        raise DimensionCapError(
            f"hiding pair side {side} exceeds the cap {dimension_cap(cap)}"
        )
    rho_s, rho_a = werner_projector_states(d)
    mixed = DensityOperator((rho_s.matrix + rho_a.matrix) / 2, (d, d), ("A", "B"))
    tau0, tau1 = rho_s, mixed
    for _ in range(l - 1):
        tau0 = tensor(tau0, rho_s)
        tau1 = tensor(tau1, mixed)
    # group (A1 B1 A2 B2 ...) -> (A1..Al B1..Bl), then merge each side
    perm = tuple(range(0, 2 * l, 2)) + tuple(range(1, 2 * l, 2))
    dl = d ** l
    out = []
    for t in (tau0, tau1):
        from .densop import permute_subsystems

        t = permute_subsystems(t, perm)
        out.append(t.regrouped((dl, dl), ("A", "B")))
    return tuple(out)


def _flower_matrix(params, block_form, cap):
    d, l, n, alpha = params.d, params.l, params.n, params.alpha
    dl = d ** l
    side = (2 * dl ** n) ** 2
    if side > dimension_cap(cap):
        raise DimensionCapError(
            f"flower side {side} exceeds the cap {dimension_cap(cap)}"
        )
    tau0, tau1 = hiding_pair(d, l, cap=cap)
    cut = BipartiteCut.from_party(tau0)
    t0g = partial_transpose(tau0, cut).matrix
    t1g = partial_transpose(tau1, cut).matrix
    if block_form:
        diag0 = diag1 = tau0.matrix
        off = t0g - t1g
    else:
        diag0, diag1 = tau0.matrix, tau1.matrix
        off = t1g - t0g
    diag0_n = kron_all([diag0] * n)
    diag1_n = kron_all([diag1] * n)
    off_n = kron_all([off] * n)
    m = 0.5 * (
        kron_all([_qubit_block(0, 0), _qubit_block(0, 0), diag0_n])
        + kron_all([_qubit_block(1, 1), _qubit_block(1, 1), diag1_n])
        + alpha ** n * kron_all([_qubit_block(0, 1), _qubit_block(0, 1), off_n])
        + alpha ** n * kron_all([_qubit_block(1, 0), _qubit_block(1, 0), off_n])
    )
    # built as (qA, qB, A1, B1, ..., An, Bn); sort parties together
    dims = (2, 2) + (dl, dl) * n
    perm = [0] + [2 + 2 * i for i in range(n)] + [1] + [3 + 2 * i for i in range(n)]
    m = permute_matrix(m, dims, perm)
    dims_out = (2,) + (dl,) * n + (2,) + (dl,) * n
    party_out = ("A",) * (n + 1) + ("B",) * (n + 1)
    return m, dims_out, party_out


def flower_operator(params, block_form=False, cap=None):
    """The flower family member as a Hermitian, unit-trace operator.

    Diagonal qubit sectors carry the n-fold hiding states; the coherent
    00<->11 sectors carry alpha^n times the n-fold partially transposed
    hiding-state difference (``block_form`` flips to the variant with equal
    diagonal blocks and the opposite off-diagonal sign).

    The operator is returned without a positivity gate: for this family the
    coherent block leaks outside the support of the symmetric-Werner diagonal
    block, so the matrix fails PSD for every nonzero alpha even though its
    log-negativity and its dephased/measured descendants behave exactly as
    advertised.  Use ``flower_state`` when an actual state is required.
    """
    m, dims, party = _flower_matrix(params, block_form, cap)
    return HermitianOperator(m, dims, party)


def flower_state(params, block_form=False, cap=None):
    """PSD-gated flower family member; raises ``PositivityError`` otherwise."""
    op = flower_operator(params, block_form=block_form, cap=cap)
    rho = DensityOperator(op.matrix, op.dims, op.party)
    report = validate(rho)
    if not report.ok:
        raise PositivityError(
            f"flower member (d={params.d}, l={params.l}, n={params.n}, "
            f"alpha={params.alpha}) is not PSD",
            report.min_eigenvalue,
        )
    return rho


def flower_post_measurement(params, cap=None):
    """The separable state left by measuring both flag qubits: the even
    mixture of |ii><ii| flags with the matching n-fold hiding state."""
    zeroed = FlowerFamilyParams(params.d, params.l, params.n, 0.0)
    m, dims, party = _flower_matrix(zeroed, False, cap)
    return DensityOperator(m, dims, party)


def flag_mixture(rho, rho_tilde, p):
    """p rho (x) |0><0|_{A'} + (1-p) rho_tilde (x) |1><1|_{A'}.

    The flag qubit is appended as the last subsystem with party A.
    """
    if rho.dims != rho_tilde.dims or rho.party != rho_tilde.party:
        raise ValueError("flagged states must share dims and party")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    flag0 = np.zeros((2, 2), dtype=complex)
    flag0[0, 0] = 1.0
    flag1 = np.zeros((2, 2), dtype=complex)
    flag1[1, 1] = 1.0
    m = p * np.kron(rho.matrix, flag0) + (1 - p) * np.kron(rho_tilde.matrix, flag1)
    return DensityOperator(m, rho.dims + (2,), rho.party + ("A",))


def prop3_states(rho1, gamma1, eps):
    """Flagged mixture (1-eps, eps) of two states and its flag-traced
    reduction; the pair whose measure difference witnesses locking."""
    if rho1.dims != gamma1.dims or rho1.party != gamma1.party:
        raise ValueError("states must share dims and party")
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    flagged = flag_mixture(rho1, gamma1, 1.0 - eps)
    reduced = partial_trace(flagged, {len(flagged.dims) - 1})
    return flagged, reduced


def bell_state(d=2):
    """Projector onto the maximally entangled vector (1/sqrt d) sum |ii>."""
    if d < 2:
        raise ValueError("d must be >= 2")
    vec = np.zeros(d * d, dtype=complex)
    for i in range(d):
        vec[i * d + i] = 1.0 / np.sqrt(d)
    return pure_state(vec, (d, d), ("A", "B"))
