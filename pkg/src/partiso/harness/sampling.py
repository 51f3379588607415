"""Seeded random instances for the verification suites.

Stream-splitting rule: trial ``i`` of the suite tagged ``tag`` draws from
``PCG64(SeedSequence(seed, spawn_key=(tag, i)))``.  Trials therefore never
share a stream and can run in any order.
"""

from __future__ import annotations

import numpy as np

from ..grassmann import ChartCoordinates, Subspace
from ..matcore import dagger, ginibre, opnorm, random_unitary


def trial_rng(seed: int, tag: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(tag, index))))


def random_subspace(n: int, k: int, rng) -> Subspace:
    return Subspace(random_unitary(n, rng)[:, :k])


def nearby_subspace(w: Subspace, rng, spread: float = 0.3) -> Subspace:
    """span(frame(W) + spread * G / sqrt(n)) for a complex Gaussian G."""
    g = ginibre(w.n, w.dim, rng)
    return Subspace.span(w.frame + spread * g / np.sqrt(w.n))


def random_coords(w: Subspace, rng, scale: float = 0.8) -> ChartCoordinates:
    return ChartCoordinates(w, scale * ginibre(w.n - w.dim, w.dim, rng) / np.sqrt(w.n))


def random_skew(k: int, rng, radius: float = 2.5):
    """Skew-Hermitian k x k matrix with operator norm uniform in [0.1, 1] * radius."""
    g = ginibre(k, k, rng)
    x = 0.5 * (g - dagger(g))
    norm = opnorm(x)
    target = radius * rng.uniform(0.1, 1.0)
    return x * (target / norm) if norm > 0 else x


def unit_direction(shape: tuple[int, int], rng):
    h = ginibre(shape[0], shape[1], rng)
    return h / opnorm(h)
