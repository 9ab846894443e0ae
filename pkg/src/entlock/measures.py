"""Entropies and directly computable entanglement quantities.

All entropies are in bits.  A small registry maps functional tags to
callables so that downstream tooling (continuity checks, the CLI) can be
driven by names instead of arbitrary code.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .densop import (
    Ensemble,
    HermitianOperator,
    PSD_TOL,
    clipped_spectrum,
    partial_transpose,
    sort_by_party,
    trace_norm,
)

SUPPORT_TOL = 1e-9      # support mismatch threshold for relative entropy
LOG_FLOOR = 1e-300      # eigenvalue floor inside matrix logarithms


def as_spectrum(p):
    """Validate a probability vector (sum 1 within 1e-10, entries in [0,1])."""
    p = np.asarray(p, dtype=float).ravel()
    if p.min() < -1e-12 or p.max() > 1 + 1e-12:
        raise ValueError("probabilities must lie in [0, 1]")
    if abs(p.sum() - 1.0) > 1e-10:
        raise ValueError(f"probabilities sum to {p.sum()}, not 1")
    return np.clip(p, 0.0, 1.0)


def shannon_entropy(p):
    """-sum p log2 p with 0 log 0 = 0."""
    p = as_spectrum(p)
    pos = p[p > 0]
    return float(-np.sum(pos * np.log2(pos)))


def binary_entropy(x):
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return float(-x * math.log2(x) - (1 - x) * math.log2(1 - x))


def _spectrum_of(x):
    if isinstance(x, HermitianOperator):
        w = clipped_spectrum(x.matrix)
        return np.clip(w, 0.0, None)
    return as_spectrum(x)


def von_neumann_entropy(rho):
    """Shannon entropy of the (clipped) eigenvalue spectrum."""
    w = _spectrum_of(rho)
    pos = w[w > 0]
    return float(-np.sum(pos * np.log2(pos)))


def renyi_entropy(x, alpha):
    """(1/(1-alpha)) log2 sum p^alpha for alpha in [0, 1).

    alpha = 0 counts the rank (eigenvalues above the PSD noise floor); the
    alpha -> 1 limit is served by ``von_neumann_entropy`` separately.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    w = _spectrum_of(x)
    if alpha == 0.0:
        rank = int(np.sum(w > PSD_TOL))
        return float(np.log2(rank))
    pos = w[w > 0]
    return float(np.log2(np.sum(pos ** alpha)) / (1.0 - alpha))


def relative_entropy(rho, sigma):
    """Tr rho (log2 rho - log2 sigma); +inf on support mismatch."""
    if rho.dims != sigma.dims:
        raise ValueError("states must share dims")
    wr = np.clip(clipped_spectrum(rho.matrix), 0.0, None)
    ws, vs = np.linalg.eigh(sigma.matrix)
    ws = ws.copy()
    ws[(ws < 0) & (ws >= -PSD_TOL)] = 0.0
    null = ws <= 0
    if np.any(null):
        weight = np.einsum(
            "ij,jk,ki->", vs[:, null].conj().T, rho.matrix, vs[:, null]
        ).real
        if weight > SUPPORT_TOL:
            return math.inf
    pos = wr[wr > 0]
    t1 = float(np.sum(pos * np.log2(pos)))
    logs = (vs * np.log2(np.clip(ws, LOG_FLOOR, None))) @ vs.conj().T
    t2 = float(np.real(np.trace(rho.matrix @ logs)))
    return t1 - t2


def log_negativity(x, cut=None):
    """log2 of the trace norm of the partial transpose; 0 for PPT states."""
    pt = partial_transpose(x, cut)
    return max(0.0, float(np.log2(trace_norm(pt))))


class PPTCheck(NamedTuple):
    passed: bool
    min_eigenvalue: float


def ppt_check(rho, cut=None):
    """Positive-partial-transpose witness: passes iff min PT eigenvalue is
    above the noise floor.  Necessary for separability; sufficient in 2x2
    and 2x3."""
    pt = partial_transpose(rho, cut)
    w = np.linalg.eigvalsh(pt.matrix)
    return PPTCheck(bool(w[0] >= -PSD_TOL), float(w[0]))


def _sqrtm_psd(m):
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def concurrence_two_qubit(rho):
    """Closed-form two-qubit concurrence via the spin-flipped overlap."""
    rho_s, _ = sort_by_party(rho)
    if rho_s.party_dim("A") != 2 or rho_s.party_dim("B") != 2:
        raise ValueError(f"need one qubit per party, got dims {rho.dims}")
    m = rho_s.matrix
    sy = np.array([[0, -1j], [1j, 0]])
    yy = np.kron(sy, sy)
    r = _sqrtm_psd(m) @ yy
    herm = r @ m.conj() @ r.conj().T
    w = np.sqrt(np.clip(np.linalg.eigvalsh(herm), 0, None))[::-1]
    return float(max(0.0, w[0] - w[1] - w[2] - w[3]))


def eof_two_qubit(rho):
    """Entanglement of formation of a two-qubit state from its concurrence."""
    c = concurrence_two_qubit(rho)
    return binary_entropy((1 + math.sqrt(max(0.0, 1 - c * c))) / 2)


def mixing_gap(ens):
    """S(sum p_i rho_i) - sum p_i S(rho_i); lies in [0, H(p)]."""
    if not isinstance(ens, Ensemble):
        ens = Ensemble(tuple(ens))
    avg = von_neumann_entropy(ens.average())
    members = sum(p * von_neumann_entropy(op) for p, op in ens.members)
    return float(avg - members)


# ---------------------------------------------------------------------------
# functional registry
# ---------------------------------------------------------------------------

def _expectation_functional(observable):
    obs = np.array(observable, dtype=complex)

    def f(rho):
        return float(np.real(np.trace(obs @ rho.matrix)))

    return f


def resolve_functional(tag, **params):
    """Map a tag like 'von_neumann', 'renyi:0.5' or 'log_negativity' to a
    state functional.  Parameterized entries take data, never code."""
    name, _, arg = str(tag).partition(":")
    if name == "von_neumann":
        return von_neumann_entropy
    if name == "renyi":
        alpha = float(arg) if arg else float(params["alpha"])
        return lambda rho: renyi_entropy(rho, alpha)
    if name == "shannon":
        return lambda rho: shannon_entropy(np.real(np.diag(rho.matrix)))
    if name == "log_negativity":
        return log_negativity
    if name == "expectation":
        return _expectation_functional(params["observable"])
    raise KeyError(f"unknown functional tag {tag!r}")
