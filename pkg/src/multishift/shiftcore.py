"""Truncated operator-valued multishifts.

A WeightSystem stores the raw operator weights A^(j)_alpha on a degree-N
simplex; a MomentSystem stores the Gram family G_alpha = B*_alpha B_alpha,
which is the complete similarity invariant used by every criterion
downstream. The canonical matrix realization of the shift tuple works in
orthonormalized fiber coordinates, where the level-raising block from alpha
to alpha+e_j is G_{alpha+e_j}^{1/2} G_alpha^{-1/2}: adjoints are literal
conjugate transposes and operator norms are literal spectral norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import lattice
from .lattice import Truncation, degree, shifted
from .numerics import (
    HermPD,
    frob_norm,
    hermpd,
    inv_pd,
    inv_sqrt_pd,
    singular_range,
    sqrt_pd,
)

WEIGHT_SINGULARITY_TOL = 1e-12
COMMUTATION_TOL = 1e-10


class ValidationFailedError(Exception):
    """Raised when an operation requires a weight system that fails validation."""


@dataclass(frozen=True, eq=False)
class WeightSystem:
    """Operator weights (alpha, j) -> invertible n x n matrix, |alpha| <= N-1."""

    d: int
    N: int
    fiber_dim: int
    weights: dict

    def __post_init__(self):
        trunc = self.truncation()
        for alpha in trunc.interior():
            for j in range(self.d):
                key = (alpha, j)
                if key not in self.weights:
                    raise ValueError(f"missing weight at alpha={alpha}, j={j}")
                w = self.weights[key]
                if w.shape != (self.fiber_dim, self.fiber_dim):
                    raise ValueError(f"weight at {key} has shape {w.shape}")

    def truncation(self) -> Truncation:
        return Truncation(self.d, self.N)

    def weight(self, alpha, j) -> np.ndarray:
        return self.weights[(tuple(alpha), j)]


@dataclass(frozen=True, eq=False)
class MomentSystem:
    """Gram family alpha -> G_alpha on the full simplex |alpha| <= N."""

    d: int
    N: int
    fiber_dim: int
    grams: dict

    def __post_init__(self):
        for alpha in self.truncation():
            g = self.grams.get(alpha)
            if g is None:
                raise ValueError(f"missing Gram matrix at alpha={alpha}")
            if not isinstance(g, HermPD) or g.dim != self.fiber_dim:
                raise ValueError(f"Gram at {alpha} is not an n x n HermPD")

    def truncation(self) -> Truncation:
        return Truncation(self.d, self.N)

    def gram(self, alpha) -> HermPD:
        return self.grams[tuple(alpha)]

    def stacked(self, indices=None):
        """(mats, logscales) stacked in graded order, for batched pencil work."""
        if indices is None:
            indices = self.truncation().indices
        mats = np.stack([self.grams[a].matrix for a in indices])
        logs = np.array([self.grams[a].logscale for a in indices])
        return mats, logs

    def same_shape(self, other: "MomentSystem") -> bool:
        return (self.d, self.N, self.fiber_dim) == (other.d, other.N, other.fiber_dim)


@dataclass(frozen=True, eq=False)
class TruncatedMz:
    """One coordinate multiplication operator in orthonormalized coordinates.

    blocks[alpha] maps level alpha to level alpha + e_j and equals
    G_{alpha+e_j}^{1/2} G_alpha^{-1/2}; blocks that would exit the truncation
    are absent. The operator is strictly level-raising, so its matrix is
    block-subdiagonal in the graded order.
    """

    j: int
    d: int
    N: int
    fiber_dim: int
    blocks: dict
    norm_estimate: float
    min_singular_value: float

    def full_matrix(self) -> np.ndarray:
        trunc = Truncation(self.d, self.N)
        n = self.fiber_dim
        dim = n * len(trunc)
        out = np.zeros((dim, dim), dtype=np.complex128)
        for alpha, block in self.blocks.items():
            row = trunc.position(shifted(alpha, self.j))
            col = trunc.position(alpha)
            out[row * n:(row + 1) * n, col * n:(col + 1) * n] = block
        return out


@dataclass(frozen=True)
class ValidationReport:
    passes: bool
    max_commutation_residual: float
    min_singular_ratio: float
    max_weight_norm: float
    failures: tuple

    def __str__(self):
        status = "PASS" if self.passes else "FAIL"
        lines = [
            f"weight validation: {status}",
            f"  max commutation residual: {self.max_commutation_residual:.3e}",
            f"  min singular-value ratio: {self.min_singular_ratio:.3e}",
            f"  max weight norm: {self.max_weight_norm:.6g}",
        ]
        lines += [f"  - {f}" for f in self.failures]
        return "\n".join(lines)


def validate_weights(ws: WeightSystem) -> ValidationReport:
    """Check invertibility and the commutation condition; never raises."""
    trunc = ws.truncation()
    failures = []
    min_ratio = math.inf
    max_norm = 0.0
    for alpha in trunc.interior():
        for j in range(ws.d):
            lo, hi = singular_range(ws.weight(alpha, j))
            max_norm = max(max_norm, hi)
            ratio = lo / hi if hi > 0.0 else 0.0
            if ratio < min_ratio:
                min_ratio = ratio
            if not ratio > WEIGHT_SINGULARITY_TOL:
                failures.append(
                    f"weight at alpha={alpha}, j={j} is numerically singular"
                )
    max_resid = 0.0
    worst = None
    for alpha in trunc.interior(2):
        for i in range(ws.d):
            for j in range(i + 1, ws.d):
                lhs = ws.weight(shifted(alpha, j), i) @ ws.weight(alpha, j)
                rhs = ws.weight(shifted(alpha, i), j) @ ws.weight(alpha, i)
                scale = max(frob_norm(lhs), frob_norm(rhs), 1e-300)
                resid = frob_norm(lhs - rhs) / scale
                if resid > max_resid:
                    max_resid = resid
                    worst = (alpha, i, j)
    if max_resid > COMMUTATION_TOL:
        failures.append(
            f"commutation residual {max_resid:.3e} at alpha={worst[0]}, "
            f"i={worst[1]}, j={worst[2]}"
        )
    if min_ratio is math.inf:
        min_ratio = 1.0
    return ValidationReport(
        passes=not failures,
        max_commutation_residual=max_resid,
        min_singular_ratio=min_ratio,
        max_weight_norm=max_norm,
        failures=tuple(failures),
    )


def path_product(ws: WeightSystem, alpha, path=None) -> np.ndarray:
    """Ordered product of weights along a staircase from 0 to alpha.

    Later steps multiply on the left, matching how the shift tuple raises
    levels. Defaults to the canonical coordinate-major path.
    """
    if path is None:
        path = lattice.monotone_path(alpha)
    out = np.eye(ws.fiber_dim, dtype=np.complex128)
    for beta, j in path:
        out = ws.weight(beta, j) @ out
    return out


def moments_from_weights(ws: WeightSystem, g0: HermPD) -> MomentSystem:
    """G_alpha = P_alpha* G_0 P_alpha with P_alpha the canonical path product.

    The weight system must pass validation; G_0 normalizes level zero (any
    invertible level-zero factor is admissible, so it is an explicit input —
    the choice moves similarity certificates only through C).
    """
    report = validate_weights(ws)
    if not report.passes:
        raise ValidationFailedError(str(report))
    if g0.dim != ws.fiber_dim:
        raise ValueError(f"G_0 has dimension {g0.dim}, expected {ws.fiber_dim}")
    trunc = ws.truncation()
    products = {}
    grams = {}
    for alpha in trunc:
        if degree(alpha) == 0:
            p = np.eye(ws.fiber_dim, dtype=np.complex128)
        else:
            # last canonical step raises the trailing nonzero coordinate
            j = max(k for k in range(ws.d) if alpha[k] > 0)
            below = shifted(alpha, j, -1)
            p = ws.weight(below, j) @ products[below]
        products[alpha] = p
        grams[alpha] = hermpd(p.conj().T @ g0.matrix @ p, g0.logscale)
    return MomentSystem(ws.d, ws.N, ws.fiber_dim, grams)


class _SqrtCache:
    """Per-alpha square roots and inverse square roots of a moment system."""

    def __init__(self, ms: MomentSystem):
        self.ms = ms
        self._sqrt = {}
        self._inv_sqrt = {}

    def sqrt(self, alpha) -> HermPD:
        if alpha not in self._sqrt:
            self._sqrt[alpha] = sqrt_pd(self.ms.gram(alpha))
        return self._sqrt[alpha]

    def inv_sqrt(self, alpha) -> HermPD:
        if alpha not in self._inv_sqrt:
            self._inv_sqrt[alpha] = inv_sqrt_pd(self.ms.gram(alpha))
        return self._inv_sqrt[alpha]

    def raise_block(self, alpha, j) -> np.ndarray:
        """G_{alpha+e_j}^{1/2} G_alpha^{-1/2} with log scales folded in."""
        up = self.sqrt(shifted(alpha, j))
        down = self.inv_sqrt(alpha)
        return math.exp(up.logscale + down.logscale) * (up.matrix @ down.matrix)


def canonical_weights(ms: MomentSystem) -> WeightSystem:
    """The orthonormal-frame weights A^(j)_alpha = G_{alpha+e_j}^{1/2} G_alpha^{-1/2}.

    These satisfy the commutation condition up to numerics (both orderings
    telescope to G_{alpha+e_i+e_j}^{1/2} G_alpha^{-1/2}) and reproduce ms from
    moments_from_weights up to the G_0 normalization.
    """
    cache = _SqrtCache(ms)
    weights = {}
    for alpha in ms.truncation().interior():
        for j in range(ms.d):
            weights[(alpha, j)] = cache.raise_block(alpha, j)
    return WeightSystem(ms.d, ms.N, ms.fiber_dim, weights)


def build_mz(ms: MomentSystem, j: int) -> TruncatedMz:
    """Truncated matrix of the j-th coordinate shift in orthonormal coordinates."""
    if not 0 <= j < ms.d:
        raise ValueError(f"coordinate j={j} outside 0..{ms.d - 1}")
    cache = _SqrtCache(ms)
    blocks = {}
    norm_est = 0.0
    min_sv = math.inf
    for alpha in ms.truncation().interior():
        block = cache.raise_block(alpha, j)
        blocks[alpha] = block
        lo, hi = singular_range(block)
        norm_est = max(norm_est, hi)
        min_sv = min(min_sv, lo)
    if min_sv is math.inf:
        min_sv = 0.0
    return TruncatedMz(
        j=j, d=ms.d, N=ms.N, fiber_dim=ms.fiber_dim, blocks=blocks,
        norm_estimate=norm_est, min_singular_value=min_sv,
    )


def check_adjoint_formula(ms: MomentSystem, j: int) -> float:
    """Max residual between the two constructions of the adjoint shift blocks.

    Route one conjugate-transposes the level-raising blocks of build_mz.
    Route two expresses x z^alpha -> G_{alpha-e_j}^{-1} G_alpha x z^{alpha-e_j}
    in the same orthonormal coordinates, using a full inverse. Both should
    agree to ~1e-9 for any complete PD moment system; blocks at the
    truncation edge are the same set for both routes, so nothing is skipped.
    """
    mz = build_mz(ms, j)
    cache = _SqrtCache(ms)
    worst = 0.0
    for beta in ms.truncation():
        if beta[j] == 0:
            continue
        below = shifted(beta, j, -1)
        route_one = mz.blocks[below].conj().T
        ginv = inv_pd(ms.gram(below))
        g = ms.gram(beta)
        middle = ginv.matrix @ g.matrix
        mid_log = ginv.logscale + g.logscale
        s_down = cache.sqrt(below)
        s_up_inv = cache.inv_sqrt(beta)
        route_two = math.exp(s_down.logscale + mid_log + s_up_inv.logscale) * (
            s_down.matrix @ middle @ s_up_inv.matrix
        )
        scale = max(frob_norm(route_one), frob_norm(route_two), 1e-300)
        worst = max(worst, frob_norm(route_one - route_two) / scale)
    return worst


def normalized_to_identity(ms: MomentSystem) -> MomentSystem:
    """Congruence-transport every Gram by G_0^{-1/2}, making G_0 = I."""
    s = inv_sqrt_pd(ms.gram((0,) * ms.d))
    grams = {}
    for alpha in ms.truncation():
        g = ms.gram(alpha)
        mat = s.matrix @ g.matrix @ s.matrix
        grams[alpha] = hermpd(mat, g.logscale + 2.0 * s.logscale)
    return MomentSystem(ms.d, ms.N, ms.fiber_dim, grams)
