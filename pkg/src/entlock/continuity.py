"""Asymptotic-continuity machinery.

Matrix-level pieces: positive/negative parts, the common-ancestor
decomposition of two states (the geometric lemma behind Lipschitz bounds for
nearly affine functionals), affinity defects and the resulting continuity
bound.

Spectrum-level pieces: typical-subspace truncation of n-fold product spectra
by type classes, which reaches n in the thousands without ever forming a
matrix, and the resulting divergence of the truncated Renyi density from the
Renyi density of the full power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as _cartesian

import numpy as np
from scipy.special import gammaln

from .channels import dephase_subsystem
from .densop import DensityOperator, HermitianOperator, trace_norm
from .measures import (
    as_spectrum,
    resolve_functional,
    shannon_entropy,
    von_neumann_entropy,
)

LN2 = math.log(2.0)
DEGENERATE_TOL = 1e-12
TYPE_CLASS_CAP = 5_000_000


def positive_negative_parts(h):
    """Split a Hermitian operator into PSD parts with orthogonal supports:
    h = plus - minus, trace_norm(h) = Tr plus + Tr minus."""
    w, v = np.linalg.eigh(h.matrix)
    plus = (v * np.clip(w, 0, None)) @ v.conj().T
    minus = (v * np.clip(-w, 0, None)) @ v.conj().T
    return (
        HermitianOperator(plus, h.dims, h.party),
        HermitianOperator(minus, h.dims, h.party),
    )


@dataclass(frozen=True)
class AMDecomposition:
    """Common ancestor sigma with tails gamma1, gamma2 and half-distance
    delta: sigma = (rho_i + delta gamma_i) / (1 + delta) for i = 1, 2."""

    sigma: DensityOperator
    gamma1: DensityOperator
    gamma2: DensityOperator
    delta: float


def araki_moriya(rho1, rho2):
    """Decompose two distinct states around their midpoint mixture.

    With omega_+/- the positive/negative parts of rho1 - rho2 (equal traces
    delta), gamma1 = omega_-/delta and gamma2 = omega_+/delta make both
    reconstructions of sigma balance exactly.
    """
    if rho1.dims != rho2.dims:
        raise ValueError("states must share dims")
    diff = HermitianOperator(rho1.matrix - rho2.matrix, rho1.dims, rho1.party)
    delta = trace_norm(diff) / 2.0
    if delta <= DEGENERATE_TOL:
        raise ValueError("states coincide; the decomposition is undefined")
    plus, minus = positive_negative_parts(diff)
    gamma1 = DensityOperator(minus.matrix / np.trace(minus.matrix).real,
                             rho1.dims, rho1.party)
    gamma2 = DensityOperator(plus.matrix / np.trace(plus.matrix).real,
                             rho1.dims, rho1.party)
    sigma = DensityOperator(
        (rho1.matrix + delta * gamma1.matrix) / (1.0 + delta),
        rho1.dims, rho1.party,
    )
    return AMDecomposition(sigma, gamma1, gamma2, float(delta))


def _resolve(f):
    return resolve_functional(f) if isinstance(f, str) else f


def affinity_defect(f, rho, sigma, p):
    """p f(rho) + (1-p) f(sigma) - f(p rho + (1-p) sigma); positive means
    convexity, negative concavity."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    f = _resolve(f)
    mixed = DensityOperator(p * rho.matrix + (1 - p) * sigma.matrix,
                            rho.dims, rho.party)
    return float(p * f(rho) + (1 - p) * f(sigma) - f(mixed))


def proof_defects(f, rho1, rho2):
    """The two affinity defects x_i of f along the ancestor decomposition:
    x_i = f(rho_i)/(1+delta) + delta f(gamma_i)/(1+delta) - f(sigma).

    They satisfy f(rho1) - f(rho2) = delta [f(gamma2) - f(gamma1)]
    + (1+delta)(x1 - x2) identically.
    """
    f = _resolve(f)
    dec = araki_moriya(rho1, rho2)
    den = 1.0 + dec.delta
    x1 = f(rho1) / den + dec.delta * f(dec.gamma1) / den - f(dec.sigma)
    x2 = f(rho2) / den + dec.delta * f(dec.gamma2) / den - f(dec.sigma)
    return float(x1), float(x2)


def prop2_bound_check(f, m_const, c_const, rho1, rho2):
    """Slack of the continuity bound
    |f(rho1) - f(rho2)| <= m_const ||rho1 - rho2||_1 log2(dim) + 4 c_const;
    nonnegative whenever (m_const, c_const) are valid for f."""
    f = _resolve(f)
    diff = HermitianOperator(rho1.matrix - rho2.matrix, rho1.dims, rho1.party)
    dist = trace_norm(diff)
    bound = m_const * dist * math.log2(rho1.dim) + 4.0 * c_const
    return float(bound - abs(f(rho1) - f(rho2)))


# ---------------------------------------------------------------------------
# spectrum-level typical-subspace work
# ---------------------------------------------------------------------------

def _log2sumexp2(terms):
    terms = np.asarray(terms, dtype=float)
    mx = terms.max()
    return float(mx + np.log2(np.sum(np.exp2(terms - mx))))


@dataclass(frozen=True)
class WeightedSpectrum:
    """Spectrum stored as distinct log2-eigenvalues with log2-multiplicities
    (type classes); n-fold product spectra never get expanded."""

    log2_values: np.ndarray
    log2_multiplicities: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "log2_values",
                           np.asarray(self.log2_values, dtype=float))
        object.__setattr__(self, "log2_multiplicities",
                           np.asarray(self.log2_multiplicities, dtype=float))

    def total_mass(self):
        return float(np.sum(np.exp2(self.log2_multiplicities + self.log2_values)))

    def shannon(self):
        """Entropy in bits of the (already normalized) weighted spectrum."""
        mass = np.exp2(self.log2_multiplicities + self.log2_values)
        return float(-np.sum(mass * self.log2_values))

    def renyi(self, alpha):
        if not 0.0 <= alpha < 1.0:
            raise ValueError("alpha must lie in [0, 1)")
        if alpha == 0.0:
            return _log2sumexp2(self.log2_multiplicities)
        s = _log2sumexp2(self.log2_multiplicities + alpha * self.log2_values)
        return float(s / (1.0 - alpha))

    def normalized(self):
        shift = math.log2(self.total_mass())
        return WeightedSpectrum(self.log2_values - shift, self.log2_multiplicities)

    def as_probabilities(self, max_size=100_000):
        total = float(np.sum(np.exp2(self.log2_multiplicities)))
        if not total <= max_size:  # also catches overflow to inf
            raise ValueError(f"expanded spectrum would have ~{total:.3g} entries")
        mult = np.rint(np.exp2(self.log2_multiplicities)).astype(np.int64)
        return np.repeat(np.exp2(self.log2_values), mult)


@dataclass(frozen=True)
class TypicalSpectrum:
    base: np.ndarray
    n: int
    epsilon: float
    truncated: WeightedSpectrum
    kept_mass: float


def _type_classes(base, n):
    """log2 eigenvalue and log2 multiplicity per type class of the n-fold
    product of the base spectrum (zero-probability symbols dropped)."""
    q = as_spectrum(base)
    q = q[q > 0]
    k = len(q)
    if k == 1:
        return np.array([0.0]), np.array([0.0])
    log2q = np.log2(q)
    if k == 2:
        counts = np.arange(n + 1)
        log2_vals = (n - counts) * log2q[0] + counts * log2q[1]
        log2_mult = (gammaln(n + 1) - gammaln(counts + 1)
                     - gammaln(n - counts + 1)) / LN2
        return log2_vals, log2_mult
    total = math.comb(n + k - 1, k - 1)
    if total > TYPE_CLASS_CAP:
        raise ValueError(f"{total} type classes exceed the enumeration cap")
    vals, mults = [], []
    for head in _cartesian(range(n + 1), repeat=k - 1):
        if sum(head) > n:
            continue
        counts = np.array(head + (n - sum(head),), dtype=float)
        vals.append(float(np.dot(counts, log2q)))
        mults.append(float((gammaln(n + 1) - np.sum(gammaln(counts + 1))) / LN2))
    return np.array(vals), np.array(mults)


def typical_truncation(base, n, epsilon):
    """Keep the eigenvalues of the n-fold product whose per-copy information
    rate -log2(lambda)/n sits within epsilon of the base entropy; renormalize
    and report the retained mass."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    base = as_spectrum(base)
    entropy = shannon_entropy(base)
    log2_vals, log2_mult = _type_classes(base, n)
    rate = -log2_vals / n
    mask = np.abs(rate - entropy) <= epsilon + 1e-12
    if not np.any(mask):
        raise ValueError(
            f"empty typical set for n={n}, epsilon={epsilon}; widen the window"
        )
    kept = WeightedSpectrum(log2_vals[mask], log2_mult[mask])
    kept_mass = kept.total_mass()
    return TypicalSpectrum(base, int(n), float(epsilon),
                           kept.normalized(), float(kept_mass))


@dataclass(frozen=True)
class GapCurveRow:
    n: int
    density_truncated: float
    density_full: float
    vn_entropy: float
    kept_mass: float


def renyi_gap_curve(base, alpha, n_grid, epsilon):
    """Per-copy Renyi densities of the truncated and full n-fold spectra.

    The full density reproduces the base Renyi entropy (additivity of the
    type-class sum); the truncated density drifts down toward the base von
    Neumann entropy, which is the computable witness that the Renyi density
    is discontinuous in the large-n limit.
    """
    base = as_spectrum(base)
    vn = shannon_entropy(base)
    rows = []
    for n in n_grid:
        typ = typical_truncation(base, n, epsilon)
        log2_vals, log2_mult = _type_classes(base, n)
        full = WeightedSpectrum(log2_vals, log2_mult)
        rows.append(GapCurveRow(
            n=int(n),
            density_truncated=typ.truncated.renyi(alpha) / n,
            density_full=full.renyi(alpha) / n,
            vn_entropy=vn,
            kept_mass=typ.kept_mass,
        ))
    return rows


def curve_to_csv(rows):
    """Serialize gap-curve rows with the flat column schema."""
    lines = ["n,density_truncated,density_full,vn_entropy,kept_mass"]
    for row in rows:
        lines.append(
            f"{row.n},{row.density_truncated!r},{row.density_full!r},"
            f"{row.vn_entropy!r},{row.kept_mass!r}"
        )
    return "\n".join(lines) + "\n"


def reduced_measure_restricted(rho, measure_tag, dephasing_family):
    """Minimum over a finite dephasing family of the measure after the map
    plus the entropy it produced: min_L [E(L(rho)) + S(L(rho)) - S(rho)].

    Each family member is a set of subsystem indices dephased in sequence;
    the identity (empty set) should be included so the result never exceeds
    the plain measure.
    """
    family = [tuple(sorted(set(fam))) for fam in dephasing_family]
    if not family:
        raise ValueError("the dephasing family must be non-empty")
    measure = resolve_functional(measure_tag)
    s_rho = von_neumann_entropy(rho)
    best = math.inf
    for subset in family:
        mapped = rho
        for k in subset:
            mapped = dephase_subsystem(mapped, k)
        value = measure(mapped) + von_neumann_entropy(mapped) - s_rho
        best = min(best, value)
    return float(best)
