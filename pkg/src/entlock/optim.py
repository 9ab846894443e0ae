"""Numerical optimizers: convex-roof upper bounds and relative entropy to the
PPT set.

The roof optimizer works in the purification-measurement picture: every
size-m ensemble realizing rho corresponds to an isometry W (m x rank, columns
orthonormal) applied to the scaled eigenvectors of rho, so the search space
is the Stiefel manifold.  Projected gradient with a polar retraction and a
backtracking line search is run from several seeded restarts; any feasible W
yields a valid decomposition, so the returned value is always a certified
upper bound.

The PPT minimizer runs projected gradient descent on sigma with a Dykstra
projection onto {PSD} intersect {PT-PSD} intersect {trace 1} and a proximal
Armijo rule; every iterate is feasible, so the achieved value is an upper
bound on the PPT-set minimum (and a lower bound, up to convergence slack, on
the relative entropy of entanglement over the separable superset).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import dephase_subsystem, pauli_twirl_qubit
from .densop import (
    BipartiteCut,
    DensityOperator,
    Ensemble,
    partial_trace,
    permute_subsystems,
    pure_state,
    sort_by_party,
)
from .measures import relative_entropy, renyi_entropy, von_neumann_entropy
from .sampling import spawn_seeds
from .states import flag_mixture

LN2 = math.log(2.0)
RANK_TOL = 1e-12


# ---------------------------------------------------------------------------
# convex roof
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RoofProblem:
    """Convex-roof instance: minimize the ensemble-average marginal entropy
    over all size-m decompositions of the state."""

    state: DensityOperator
    cut: BipartiteCut = None
    objective: str = "von_neumann"  # or "renyi"
    alpha: float = None
    ensemble_size: int = None
    restarts: int = 16
    iterations: int = 500
    tol: float = 1e-7
    seed: int = 0

    def __post_init__(self):
        if self.objective not in ("von_neumann", "renyi"):
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.objective == "renyi":
            if self.alpha is None or not 0.0 <= self.alpha < 1.0:
                raise ValueError("renyi objective needs alpha in [0, 1)")


@dataclass(frozen=True)
class RoofResult:
    value: float
    ensemble: Ensemble
    converged: bool
    restart_values: tuple


def _pure_marginal_entropy(vec_mat, objective, alpha):
    """Entropy of the A-marginal of a matricized pure state."""
    gram = vec_mat @ vec_mat.conj().T
    if objective == "von_neumann":
        return von_neumann_entropy_spec(np.linalg.eigvalsh(gram))
    return renyi_entropy(np.clip(np.linalg.eigvalsh(gram), 0, None), alpha)


def von_neumann_entropy_spec(w):
    w = np.clip(w, 0.0, None)
    pos = w[w > 1e-15]
    return float(-np.sum(pos * np.log2(pos)))


def _polar_isometry(z):
    u, _, vh = np.linalg.svd(z, full_matrices=False)
    return u @ vh


class _RoofWork:
    """Matricized problem data shared across restarts."""

    def __init__(self, problem):
        state = problem.state
        if problem.cut is None:
            sorted_state, perm = sort_by_party(state)
            da = sorted_state.party_dim("A")
        else:
            problem.cut.check(state)
            perm = tuple(problem.cut.a_subsystems) + tuple(problem.cut.b_subsystems)
            sorted_state = permute_subsystems(state, perm)
            da = int(np.prod([state.dims[i] for i in problem.cut.a_subsystems]))
        self.sorted_state = sorted_state
        self.perm = perm
        self.state = state
        db = sorted_state.dim // da
        self.da, self.db = da, db
        w, v = np.linalg.eigh(sorted_state.matrix)
        keep = w > RANK_TOL
        self.lam = w[keep]
        self.rank = int(keep.sum())
        self.scaled = np.stack(
            [math.sqrt(self.lam[k]) * v[:, keep][:, k].reshape(da, db)
             for k in range(self.rank)]
        )
        self.m = problem.ensemble_size or self.rank + 2
        if self.m < self.rank:
            raise ValueError(
                f"ensemble_size {self.m} below the state rank {self.rank}"
            )
        self.objective = problem.objective
        self.alpha = problem.alpha

    def value_grad(self, W, want_grad=True):
        X = np.tensordot(W, self.scaled, axes=(1, 0))      # (m, da, db)
        p = np.einsum("jab,jab->j", X, X.conj()).real
        total = 0.0
        G = np.zeros_like(W) if want_grad else None
        for j in range(len(p)):
            if p[j] < 1e-14:
                continue
            sig = (X[j] @ X[j].conj().T) / p[j]
            w, v = np.linalg.eigh(sig)
            wpos = np.clip(w, 1e-18, None)
            if self.objective == "von_neumann":
                total += p[j] * float(
                    -np.sum(np.where(w > 1e-15, w * np.log2(wpos), 0.0))
                )
                if want_grad:
                    logm = (v * np.log2(wpos)) @ v.conj().T
                    G[j, :] = -np.einsum(
                        "kab,ab->k", self.scaled.conj(), logm @ X[j]
                    )
            else:
                a = self.alpha
                wa = np.clip(w, 1e-12, None) ** a
                za = float(np.sum(np.where(w > 1e-15, wa, 0.0)))
                s_alpha = math.log2(za) / (1.0 - a)
                total += p[j] * s_alpha
                if want_grad:
                    c = a / ((1.0 - a) * LN2)
                    dmat = (v * (np.clip(w, 1e-12, None) ** (a - 1.0))) @ v.conj().T
                    dmat = (c / za) * dmat
                    gx = np.einsum("kab,ab->k", self.scaled.conj(), X[j])
                    gd = np.einsum("kab,ab->k", self.scaled.conj(), dmat @ X[j])
                    G[j, :] = (s_alpha - c) * gx + gd
        return float(total), G

    @staticmethod
    def _tangent(W, G):
        """Project the Euclidean gradient onto the Stiefel tangent space at W
        (the normal component never vanishes and would defeat the line
        search near a manifold optimum)."""
        m = W.conj().T @ G
        return G - W @ ((m + m.conj().T) / 2)

    def descend(self, W, iterations, tol):
        f, G = self.value_grad(W)
        step = 1.0
        converged = False
        small_drops = 0
        for _ in range(iterations):
            Gt = self._tangent(W, G)
            gn2 = float(np.sum(np.abs(Gt) ** 2))
            if gn2 < 1e-24:
                converged = True
                break
            accepted = False
            step = max(step, 1e-8)
            while step > 1e-12:
                W2 = _polar_isometry(W - step * Gt)
                f2, G2 = self.value_grad(W2)
                if f2 <= f - 1e-4 * step * gn2:
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                converged = True
                break
            drop = f - f2
            W, f, G = W2, f2, G2
            step = min(step * 1.5, 10.0)
            if drop < tol:
                small_drops += 1
                if small_drops >= 3:
                    converged = True
                    break
            else:
                small_drops = 0
        return W, f, converged

    def ensemble_from(self, W):
        X = np.tensordot(W, self.scaled, axes=(1, 0))
        p = np.einsum("jab,jab->j", X, X.conj()).real
        inv = [self.perm.index(k) for k in range(len(self.perm))]
        sorted_state = self.sorted_state
        members = []
        for j in range(len(p)):
            if p[j] < RANK_TOL:
                continue
            vec = (X[j] / math.sqrt(p[j])).reshape(-1)
            member = pure_state(vec / np.linalg.norm(vec),
                                sorted_state.dims, sorted_state.party)
            members.append((p[j], permute_subsystems(member, inv)))
        total = sum(p for p, _ in members)
        members = [(p / total, op) for p, op in members]
        return Ensemble(tuple(members))


def convex_roof_upper(problem):
    """Best upper bound on the convex-roof measure found by seeded local
    search; the returned ensemble reconstructs the state."""
    work = _RoofWork(problem)
    if work.rank == 1:
        ens = work.ensemble_from(np.ones((1, 1), dtype=complex))
        value = _pure_marginal_entropy(work.scaled[0] / math.sqrt(work.lam[0]),
                                       work.objective, work.alpha)
        return RoofResult(value, ens, True, (value,))

    seeds = spawn_seeds(problem.seed, problem.restarts)
    best = (math.inf, None, False)
    values = []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        z = rng.normal(size=(work.m, work.rank)) + 1j * rng.normal(
            size=(work.m, work.rank)
        )
        W, f, conv = work.descend(
            _polar_isometry(z), problem.iterations, problem.tol
        )
        values.append(f)
        if f < best[0]:
            best = (f, W, conv)
    # polish the winner at a tighter tolerance
    W, f, conv = work.descend(best[1], 2 * problem.iterations, problem.tol * 1e-3)
    if f > best[0]:
        f, W, conv = best
    return RoofResult(float(f), work.ensemble_from(W), conv, tuple(values))


# ---------------------------------------------------------------------------
# relative entropy to the PPT set
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RexProblem:
    """Minimize S(rho || sigma) over sigma with PSD partial transpose."""

    state: DensityOperator
    cut: BipartiteCut = None
    max_iterations: int = 5000
    tol: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")


@dataclass(frozen=True)
class RexResult:
    value: float
    closest_state: DensityOperator
    converged: bool
    iterations: int


def _pt_raw(matrix, dims, b_subsystems):
    n = len(dims)
    t = matrix.reshape(list(dims) * 2)
    axes = list(range(2 * n))
    for i in b_subsystems:
        axes[i], axes[n + i] = axes[n + i], axes[i]
    size = matrix.shape[0]
    return t.transpose(axes).reshape(size, size)


def _proj_psd(m):
    w, v = np.linalg.eigh(m)
    if w[0] >= 0:
        return m
    return (v * np.clip(w, 0, None)) @ v.conj().T


def _dykstra_ppt_state(m, dims, b_subsystems, sweeps=100, tol=1e-12):
    """Metric projection onto PSD /\\ PT-PSD /\\ {Tr = 1} (Dykstra; the trace
    constraint is affine and needs no correction variable)."""
    size = m.shape[0]
    x = (m + m.conj().T) / 2
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    eye = np.eye(size)
    for _ in range(sweeps):
        x = x + (1.0 - np.trace(x).real) / size * eye
        y = _proj_psd(x + p)
        p = x + p - y
        z_in = y + q
        z = _pt_raw(_proj_psd(_pt_raw(z_in, dims, b_subsystems)), dims, b_subsystems)
        q = z_in - z
        if np.linalg.norm(z - x) < tol:
            x = z
            break
        x = z
    x = x + (1.0 - np.trace(x).real) / size * eye
    return (x + x.conj().T) / 2


def _ree_gradient(rho, sigma):
    """Gradient of -Tr[rho log2 sigma] in sigma (first divided differences
    of the logarithm in sigma's eigenbasis)."""
    w, v = np.linalg.eigh(sigma)
    w = np.clip(w, 1e-300, None)
    rho_t = v.conj().T @ rho @ v
    lw = np.log(w)
    diff = w[:, None] - w[None, :]
    same = np.abs(diff) < 1e-14
    phi = np.where(
        same, 1.0 / w[:, None], (lw[:, None] - lw[None, :]) / np.where(same, 1.0, diff)
    )
    g = v @ (rho_t * phi) @ v.conj().T
    g = -(g + g.conj().T) / (2.0 * LN2)
    return g


def rel_ent_ppt(problem):
    """Iterative convex descent of S(rho || sigma) over the PPT set."""
    state = problem.state
    cut = problem.cut or BipartiteCut.from_party(state)
    cut.check(state)
    b_idx = cut.b_subsystems
    dims = state.dims
    rho = state.matrix
    size = state.dim
    eye = np.eye(size) / size
    mu = 1e-9  # support floor; keeps sigma full rank, value error O(mu log mu)

    sigma = _dykstra_ppt_state(rho, dims, b_idx)
    sigma = (1 - mu) * sigma + mu * eye

    def f_of(s):
        return relative_entropy(state, DensityOperator(s, dims, state.party))

    f = f_of(sigma)
    step = 1.0
    small_drops = 0
    iterations = 0
    converged = False
    for iterations in range(1, problem.max_iterations + 1):
        grad = _ree_gradient(rho, sigma)
        accepted = False
        step = max(step, 1e-8)
        while step > 1e-13:
            cand = _dykstra_ppt_state(sigma - step * grad, dims, b_idx)
            cand = (1 - mu) * cand + mu * eye
            move = cand - sigma
            move_n2 = float(np.sum(np.abs(move) ** 2))
            if move_n2 < 1e-30:
                step *= 0.5
                continue
            f2 = f_of(cand)
            if f2 <= f - 1e-4 / max(step, 1e-13) * move_n2:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            converged = True
            break
        drop = f - f2
        sigma, f = cand, f2
        step = min(step * 2.0, 1e4)
        if drop < problem.tol:
            small_drops += 1
            if small_drops >= 5:
                converged = True
                break
        else:
            small_drops = 0

    closest = DensityOperator(sigma, dims, state.party)
    return RexResult(float(max(0.0, f)), closest, converged, iterations)


# ---------------------------------------------------------------------------
# derived experiments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ErDropResult:
    e_before: float
    e_after_measurement: float
    e_after_twirl: float

    @property
    def drop_measurement(self):
        return self.e_before - self.e_after_measurement

    @property
    def drop_twirl(self):
        return self.e_before - self.e_after_twirl


def er_drop_experiment(rho, qubit_index, max_iterations=5000, tol=1e-8):
    """PPT relative entropy before/after dephasing one A-qubit and after the
    Pauli twirl that replaces it with the maximally mixed state (the
    trace-out surrogate).  The drop bounds 1 and 2 transfer to this measure
    because its proof uses only convexity, local-unitary invariance and the
    mixing bound, all of which hold for the PPT set."""
    if rho.party[qubit_index] != "A":
        raise ValueError("the dephased/twirled qubit must belong to party A")
    if rho.dims[qubit_index] != 2:
        raise ValueError("subsystem must be a qubit")

    def solve(state):
        return rel_ent_ppt(
            RexProblem(state, max_iterations=max_iterations, tol=tol)
        ).value

    before = solve(rho)
    after_meas = solve(dephase_subsystem(rho, qubit_index))
    after_twirl = solve(pauli_twirl_qubit(rho, qubit_index))
    return ErDropResult(before, after_meas, after_twirl)


def flag_additivity_check(rho, rho_tilde, p, **roof_kwargs):
    """|roof(flagged) - p roof(rho) - (1-p) roof(rho_tilde)|; the flagged
    mixture of two states should score exactly the weighted average."""
    flagged = flag_mixture(rho, rho_tilde, p)
    roof = lambda s: convex_roof_upper(RoofProblem(s, **roof_kwargs)).value
    return abs(roof(flagged) - p * roof(rho) - (1 - p) * roof(rho_tilde))


def _purity(rho):
    return float(np.real(np.trace(rho.matrix @ rho.matrix)))


def _pure_value(rho, objective, alpha):
    marg = partial_trace(rho, rho.subsystems("B"))
    if objective == "von_neumann":
        return von_neumann_entropy(marg)
    return renyi_entropy(marg, alpha)


def prop3_locking_gap(rho1, gamma1, eps, objective="von_neumann", alpha=None,
                      **roof_kwargs):
    """Certified lower bound on the flag-locking gap.

    For pure inputs the flagged value is the exact weighted average of the
    two pure-state entropies; the flag-traced mixture is bounded above by the
    roof optimizer, so the difference under-estimates the true gap.
    """
    if _purity(rho1) > 1 - 1e-10 and _purity(gamma1) > 1 - 1e-10:
        flagged_value = (1 - eps) * _pure_value(rho1, objective, alpha) + \
            eps * _pure_value(gamma1, objective, alpha)
    else:
        flagged, _ = _prop3_pair(rho1, gamma1, eps)
        flagged_value = convex_roof_upper(
            RoofProblem(flagged, objective=objective, alpha=alpha, **roof_kwargs)
        ).value
    _, reduced = _prop3_pair(rho1, gamma1, eps)
    mixture_upper = convex_roof_upper(
        RoofProblem(reduced, objective=objective, alpha=alpha, **roof_kwargs)
    ).value
    return flagged_value - mixture_upper


def _prop3_pair(rho1, gamma1, eps):
    from .states import prop3_states

    return prop3_states(rho1, gamma1, eps)
