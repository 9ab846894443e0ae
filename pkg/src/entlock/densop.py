"""Dense Hermitian operator core.

Operators carry an explicit list of subsystem dimensions and a party label
(``"A"``, ``"B"`` or ``"E"``) per subsystem.  All cross-party bookkeeping
(partial trace, partial transpose, regrouping) is driven by this metadata;
nothing is inferred from index arithmetic at call sites.

Values are immutable after construction and every operation is a pure
function, so everything here is safe to evaluate concurrently.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9          # eigenvalues in [-PSD_TOL, 0] are numerical noise
EXACT_TOL = 1e-12       # for exact algebraic identities
DEFAULT_DIM_CAP = 4096  # largest matrix side length we agree to build
DIM_CAP_ENV = "ENTLOCK_DIM_CAP"

PARTIES = ("A", "B", "E")


class PositivityError(ValueError):
    """Raised when a matrix that should be a state is not PSD."""

    def __init__(self, message, min_eigenvalue):
        super().__init__(f"{message} (minimum eigenvalue {min_eigenvalue:.3e})")
        self.min_eigenvalue = min_eigenvalue


class DimensionCapError(ValueError):
    """Raised when a construction would exceed the configured size cap."""


def dimension_cap(cap=None):
    """Resolve the matrix-side-length cap (argument, else env, else default)."""
    if cap is not None:
        return int(cap)
    return int(os.environ.get(DIM_CAP_ENV, DEFAULT_DIM_CAP))


def _as_matrix(matrix):
    m = np.array(matrix, dtype=complex)
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class HermitianOperator:
    """Hermitian matrix with subsystem metadata; no trace/PSD constraint."""

    matrix: np.ndarray
    dims: tuple
    party: tuple

    def __post_init__(self):
        object.__setattr__(self, "matrix", _as_matrix(self.matrix))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "party", tuple(str(p) for p in self.party))
        if len(self.dims) != len(self.party):
            raise ValueError("dims and party must have equal length")
        if any(d < 1 for d in self.dims):
            raise ValueError(f"invalid subsystem dimensions {self.dims}")
        if any(p not in PARTIES for p in self.party):
            raise ValueError(f"party labels must be in {PARTIES}, got {self.party}")
        size = int(np.prod(self.dims))
        if self.matrix.shape != (size, size):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match dims {self.dims}"
            )
        defect = hermiticity_defect(self.matrix)
        if defect > HERMITICITY_TOL:
            raise ValueError(f"matrix is not Hermitian (defect {defect:.3e})")

    @property
    def dim(self):
        return self.matrix.shape[0]

    def subsystems(self, party):
        """Indices of the tensor factors assigned to one party."""
        return tuple(i for i, p in enumerate(self.party) if p == party)

    def party_dim(self, party):
        return int(np.prod([self.dims[i] for i in self.subsystems(party)], initial=1))

    def regrouped(self, dims, party):
        """Same matrix, re-labelled metadata (adjacent factors merged/split).

        The product of ``dims`` must match, and each party must keep the same
        total dimension in the same block order; the matrix is untouched.
        """
        dims = tuple(int(d) for d in dims)
        party = tuple(str(p) for p in party)
        if int(np.prod(dims)) != self.dim:
            raise ValueError("regrouped dims do not multiply to the matrix size")

        def blocks(ds, ps):
            out = []
            for d, p in zip(ds, ps):
                if out and out[-1][0] == p:
                    out[-1][1] *= d
                else:
                    out.append([p, d])
            return [tuple(b) for b in out]

        if blocks(dims, party) != blocks(self.dims, self.party):
            raise ValueError("regrouping would move weight between parties")
        return type(self)(self.matrix, dims, party)

    def to_json_dict(self):
        """Serialize as {dims, party, re, im} with row-major coefficient lists."""
        return {
            "dims": list(self.dims),
            "party": list(self.party),
            "re": self.matrix.real.ravel().tolist(),
            "im": self.matrix.imag.ravel().tolist(),
        }

    @classmethod
    def from_json_dict(cls, payload):
        dims = tuple(int(d) for d in payload["dims"])
        size = int(np.prod(dims))
        m = np.array(payload["re"], dtype=float) + 1j * np.array(payload["im"], dtype=float)
        return cls(m.reshape(size, size), dims, tuple(payload["party"]))

    def to_json(self):
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class DensityOperator(HermitianOperator):
    """Unit-trace Hermitian operator; PSD is checked by ``validate`` and by
    the state factories, not at every construction (eigensolves on large
    matrices are the dominant cost at desk scale)."""

    def __post_init__(self):
        super().__post_init__()
        defect = abs(np.trace(self.matrix).real - 1.0) + abs(np.trace(self.matrix).imag)
        if defect > TRACE_TOL:
            raise ValueError(f"trace deviates from 1 by {defect:.3e}")


@dataclass(frozen=True)
class BipartiteCut:
    """Assignment of tensor factors to party A or B (E factors excluded)."""

    a_subsystems: tuple
    b_subsystems: tuple

    def __post_init__(self):
        object.__setattr__(self, "a_subsystems", tuple(int(i) for i in self.a_subsystems))
        object.__setattr__(self, "b_subsystems", tuple(int(i) for i in self.b_subsystems))
        if set(self.a_subsystems) & set(self.b_subsystems):
            raise ValueError("cut sides must be disjoint")

    @classmethod
    def from_party(cls, x):
        """The canonical cut read off the operator's party labels."""
        return cls(x.subsystems("A"), x.subsystems("B"))

    def check(self, x):
        n = len(x.dims)
        idx = set(self.a_subsystems) | set(self.b_subsystems)
        if any(i < 0 or i >= n for i in idx):
            raise ValueError(f"cut indices out of range for {n} subsystems")
        non_e = {i for i, p in enumerate(x.party) if p != "E"}
        if idx != non_e:
            raise ValueError("cut must cover exactly the non-E subsystems")


@dataclass(frozen=True)
class Ensemble:
    """List of (probability, DensityOperator) pairs over a common space."""

    members: tuple

    def __post_init__(self):
        members = tuple((float(p), op) for p, op in self.members)
        object.__setattr__(self, "members", members)
        if not members:
            raise ValueError("ensemble must have at least one member")
        probs = np.array([p for p, _ in members])
        if probs.min() < -1e-12:
            raise ValueError(f"negative probability {probs.min():.3e}")
        if abs(probs.sum() - 1.0) > TRACE_TOL:
            raise ValueError(f"probabilities sum to {probs.sum()}, not 1")
        dims0 = members[0][1].dims
        if any(op.dims != dims0 for _, op in members):
            raise ValueError("ensemble members live on different spaces")

    def average(self):
        dims0, party0 = self.members[0][1].dims, self.members[0][1].party
        total = sum(p * op.matrix for p, op in self.members)
        return DensityOperator(total, dims0, party0)

    def probabilities(self):
        return np.array([p for p, _ in self.members])


@dataclass(frozen=True)
class ValidationReport:
    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float

    @property
    def ok(self):
        return (
            self.hermiticity_defect <= HERMITICITY_TOL
            and self.trace_defect <= TRACE_TOL
            and self.min_eigenvalue >= -PSD_TOL
        )


def hermiticity_defect(matrix):
    return float(np.max(np.abs(matrix - matrix.conj().T), initial=0.0))


def validate(x):
    """Diagnostic report for the DensityOperator invariants."""
    m = x.matrix
    tr = np.trace(m)
    w = np.linalg.eigvalsh((m + m.conj().T) / 2)
    return ValidationReport(
        hermiticity_defect=hermiticity_defect(m),
        trace_defect=float(abs(tr.real - 1.0) + abs(tr.imag)),
        min_eigenvalue=float(w[0]),
    )


def as_density_operator(x, psd_tol=PSD_TOL):
    """Checked promotion of a HermitianOperator to a DensityOperator."""
    if isinstance(x, DensityOperator):
        return x
    w = np.linalg.eigvalsh(x.matrix)
    if w[0] < -psd_tol:
        raise PositivityError("operator is not a state", float(w[0]))
    return DensityOperator(x.matrix, x.dims, x.party)


# ---------------------------------------------------------------------------
# raw matrix helpers shared with the channel module
# ---------------------------------------------------------------------------

def permute_matrix(matrix, dims, perm):
    """Conjugate by the subsystem permutation isometry.

    ``perm[k]`` is the index (in the current ordering) of the factor that
    lands at position ``k``; the new ordering is ``[old[p] for p in perm]``.
    """
    n = len(dims)
    t = matrix.reshape(list(dims) * 2)
    t = t.transpose(list(perm) + [p + n for p in perm])
    size = int(np.prod(dims))
    return np.ascontiguousarray(t.reshape(size, size))


def kron_all(mats):
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def tensor(a, b):
    """Kronecker product; dims and party lists concatenate."""
    matrix = np.kron(a.matrix, b.matrix)
    dims = a.dims + b.dims
    party = a.party + b.party
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        return DensityOperator(matrix, dims, party)
    return HermitianOperator(matrix, dims, party)


def permute_subsystems(x, perm):
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(len(x.dims))):
        raise ValueError(f"invalid permutation {perm} for {len(x.dims)} subsystems")
    matrix = permute_matrix(x.matrix, x.dims, perm)
    dims = tuple(x.dims[p] for p in perm)
    party = tuple(x.party[p] for p in perm)
    return type(x)(matrix, dims, party)


def partial_trace(x, drop):
    """Trace out the factors in ``drop``; remaining metadata shrinks."""
    drop = sorted({int(i) for i in drop})
    n = len(x.dims)
    if any(i < 0 or i >= n for i in drop):
        raise ValueError(f"trace indices {drop} out of range")
    if len(drop) == n:
        raise ValueError("cannot trace out every subsystem")
    if not drop:
        return x
    dims = list(x.dims)
    t = x.matrix.reshape(dims * 2)
    for i in reversed(drop):
        t = np.trace(t, axis1=i, axis2=i + len(dims))
        dims.pop(i)
    size = int(np.prod(dims))
    keep = [i for i in range(n) if i not in drop]
    return type(x)(t.reshape(size, size), tuple(dims), tuple(x.party[i] for i in keep))


def partial_transpose(x, cut=None):
    """Transpose the B-side factors of the cut; always a HermitianOperator."""
    if cut is None:
        cut = BipartiteCut.from_party(x)
    cut.check(x)
    n = len(x.dims)
    t = x.matrix.reshape(list(x.dims) * 2)
    axes = list(range(2 * n))
    for i in cut.b_subsystems:
        axes[i], axes[n + i] = axes[n + i], axes[i]
    size = x.dim
    return HermitianOperator(t.transpose(axes).reshape(size, size), x.dims, x.party)


def eig_hermitian(x):
    """Spectrum (descending) and matching orthonormal eigenbasis columns."""
    w, v = np.linalg.eigh(x.matrix)
    return w[::-1].copy(), v[:, ::-1].copy()


def clipped_spectrum(matrix):
    """Eigenvalues with the [-PSD_TOL, 0] noise band clipped to 0."""
    w = np.linalg.eigvalsh(matrix)
    w = w.copy()
    w[(w < 0) & (w >= -PSD_TOL)] = 0.0
    return w


def trace_norm(x):
    """Sum of absolute eigenvalues (Hermitian input)."""
    return float(np.sum(np.abs(clipped_spectrum(x.matrix))))


def trace_distance(a, b):
    return trace_norm(HermitianOperator(a.matrix - b.matrix, a.dims, a.party))


def convex_mix(pairs):
    """Probability mixture of states on a common space."""
    return Ensemble(tuple(pairs)).average()


def sort_by_party(x):
    """Permute so A factors come first, then B, then E (stable within groups).

    Returns (permuted operator, permutation used).
    """
    order = {"A": 0, "B": 1, "E": 2}
    perm = tuple(sorted(range(len(x.dims)), key=lambda i: (order[x.party[i]], i)))
    return permute_subsystems(x, perm), perm


def pure_state(vector, dims, party):
    """Projector onto a normalized state vector."""
    v = np.asarray(vector, dtype=complex).ravel()
    norm = np.linalg.norm(v)
    if not math.isclose(norm, 1.0, abs_tol=1e-10):
        raise ValueError(f"vector norm {norm} is not 1")
    return DensityOperator(np.outer(v, v.conj()), dims, party)
