"""Seeded random instances: PD matrices, unitaries, valid moment/weight systems.

Shared by the CLI generators and the test suite. Everything is driven by a
numpy Generator so identical seeds give identical instances.
"""

from __future__ import annotations

import numpy as np

from .lattice import Truncation
from .numerics import HermPD, hermpd, polar_unitary
from .shiftcore import MomentSystem, WeightSystem, canonical_weights


def rng_from(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_pd(n: int, seed, *, logscale_span: float = 0.0) -> HermPD:
    """A moderately conditioned random PD matrix, optionally with a random logscale."""
    rng = rng_from(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    mat = a @ a.conj().T + n * np.eye(n)
    logscale = float(rng.uniform(-logscale_span, logscale_span)) if logscale_span else 0.0
    return hermpd(mat, logscale)


def random_unitary(n: int, seed) -> np.ndarray:
    rng = rng_from(seed)
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return polar_unitary(z)


def random_moment_system(d: int, top_degree: int, n: int, seed, *,
                         logscale_span: float = 1.0) -> MomentSystem:
    """A valid random MomentSystem: independent PD Grams with spread logscales."""
    rng = rng_from(seed)
    grams = {
        alpha: random_pd(n, rng, logscale_span=logscale_span)
        for alpha in Truncation(d, top_degree)
    }
    return MomentSystem(d, top_degree, n, grams)


def random_weight_system(d: int, top_degree: int, n: int, seed) -> WeightSystem:
    """A random weight system satisfying the commutation condition.

    Built as the canonical weights of a random moment system; arbitrary
    independent weights would not commute.
    """
    return canonical_weights(random_moment_system(d, top_degree, n, seed))


def congruent_pair(ms: MomentSystem, transform: np.ndarray) -> MomentSystem:
    """Transport every Gram by G -> T* G T (unitary T gives a unitary twin)."""
    grams = {}
    for alpha in ms.truncation():
        g = ms.gram(alpha)
        grams[alpha] = hermpd(
            transform.conj().T @ g.matrix @ transform, g.logscale
        )
    return MomentSystem(ms.d, ms.N, ms.fiber_dim, grams)


def scaled_system(ms: MomentSystem, log_factor: float) -> MomentSystem:
    """Multiply every represented Gram by exp(log_factor)."""
    grams = {
        alpha: ms.gram(alpha).logscaled(log_factor) for alpha in ms.truncation()
    }
    return MomentSystem(ms.d, ms.N, ms.fiber_dim, grams)
