"""Seeded random operators for sweeps and experiments.

Everything takes an explicit ``numpy.random.Generator`` so runs are
reproducible from a single master seed.
"""

from __future__ import annotations

import numpy as np

from .densop import DensityOperator, Ensemble, pure_state


def random_unitary(rng, d):
    """Haar-distributed unitary (QR of a complex Ginibre matrix)."""
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases[None, :]


def random_density(rng, dims, party, rank=None):
    """Full-rank-by-default mixed state from the Ginibre ensemble."""
    dims = tuple(int(d) for d in dims)
    size = int(np.prod(dims))
    rank = size if rank is None else int(rank)
    g = rng.normal(size=(size, rank)) + 1j * rng.normal(size=(size, rank))
    m = g @ g.conj().T
    return DensityOperator(m / np.trace(m).real, dims, tuple(party))


def random_pure(rng, dims, party):
    dims = tuple(int(d) for d in dims)
    size = int(np.prod(dims))
    v = rng.normal(size=size) + 1j * rng.normal(size=size)
    return pure_state(v / np.linalg.norm(v), dims, tuple(party))


def random_ensemble(rng, dims, party, members):
    probs = rng.dirichlet(np.ones(members))
    states = tuple(
        (float(p), random_density(rng, dims, party)) for p in probs
    )
    return Ensemble(states)


def spawn_seeds(master_seed, count):
    """Deterministic child seeds for independent restarts/workers."""
    seq = np.random.SeedSequence(int(master_seed))
    return [int(s.generate_state(1)[0]) for s in seq.spawn(count)]
