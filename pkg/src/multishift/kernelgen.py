"""Generators for diagonal-kernel moment systems and their closed-form facts.

Three families: Pochhammer diagonal kernels on the unit ball (coefficients
diag((a)_m, (b)_m)/alpha! with (x)_m the rising factorial), unitary-group
homogeneous kernels (coefficients (|alpha|!/alpha!) A_{|alpha|}), and finite
perturbations of a base kernel, which come with an explicit similarity
certificate. Kernel coefficients C_alpha invert to moments G_alpha = C_alpha^{-1};
every quantity is carried in the log domain so degree-200 truncations stay
inside double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .equivalence import SimilarityCertificate
from .lattice import Truncation, degree, shifted
from .numerics import HermPD, hermpd, hermpd_from_log_diag, inv_pd, pencil_logeigs
from .shiftcore import MomentSystem

PROVENANCE_TAGS = ("pochhammer", "homogeneous", "perturbed", "explicit")


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Diagonal reproducing kernel data: coefficients alpha -> C_alpha (PD)."""

    d: int
    N: int
    fiber_dim: int
    coeffs: dict
    provenance: str = "explicit"

    def __post_init__(self):
        if self.provenance not in PROVENANCE_TAGS:
            raise ValueError(f"unknown provenance tag {self.provenance!r}")
        for alpha in self.truncation():
            c = self.coeffs.get(alpha)
            if not isinstance(c, HermPD) or c.dim != self.fiber_dim:
                raise ValueError(f"coefficient at {alpha} is not an n x n HermPD")

    def truncation(self) -> Truncation:
        return Truncation(self.d, self.N)

    def coeff(self, alpha) -> HermPD:
        return self.coeffs[tuple(alpha)]


@dataclass(frozen=True)
class PochhammerPair:
    """Exponent pair (lam, mu) of a 2 x 2 diagonal power kernel on the ball."""

    lam: float
    mu: float

    def __post_init__(self):
        if not (self.lam > 0.0 and self.mu > 0.0):
            raise ValueError("Pochhammer parameters must be strictly positive")


def log_pochhammer(x: float, n: int) -> float:
    """log of the rising factorial (x)_n = Gamma(x+n)/Gamma(x); exact 0 at n=0."""
    if x <= 0.0:
        raise ValueError(f"base must be positive, got {x}")
    if n < 0:
        raise ValueError(f"order must be non-negative, got {n}")
    if n == 0:
        return 0.0
    return math.lgamma(x + n) - math.lgamma(x)


def log_factorial(n: int) -> float:
    return math.lgamma(n + 1)


def log_multi_factorial(alpha) -> float:
    """log(alpha!) for a multi-index."""
    return sum(math.lgamma(a + 1) for a in alpha)


def kernel_moments(spec: KernelSpec) -> MomentSystem:
    """Moments G_alpha = C_alpha^{-1}, inverted per index in the log domain."""
    grams = {alpha: inv_pd(spec.coeff(alpha)) for alpha in spec.truncation()}
    return MomentSystem(spec.d, spec.N, spec.fiber_dim, grams)


def pochhammer_kernel(pair: PochhammerPair, d: int, top_degree: int):
    """KernelSpec and MomentSystem of the diagonal Pochhammer kernel.

    C_alpha = diag((lam)_{|alpha|}, (mu)_{|alpha|}) / alpha!, and the moments
    are the inverse diagonal, both assembled in the log domain.
    """
    trunc = Truncation(d, top_degree)
    coeffs = {}
    grams = {}
    for alpha in trunc:
        m = degree(alpha)
        lfact = log_multi_factorial(alpha)
        logs = np.array([
            log_pochhammer(pair.lam, m) - lfact,
            log_pochhammer(pair.mu, m) - lfact,
        ])
        coeffs[alpha] = hermpd_from_log_diag(logs)
        grams[alpha] = hermpd_from_log_diag(-logs)
    spec = KernelSpec(d, top_degree, 2, coeffs, provenance="pochhammer")
    return spec, MomentSystem(d, top_degree, 2, grams)


def pochhammer_ground_truth(pair: PochhammerPair, other: PochhammerPair) -> bool:
    """Whether the two kernels' shift tuples are similar: unordered pair equality.

    Exact comparison of the input parameters, not of computed values.
    """
    return sorted((pair.lam, pair.mu)) == sorted((other.lam, other.mu))


def homogeneous_kernel(coeffs_by_degree, d: int) -> KernelSpec:
    """Unitary-group homogeneous kernel: C_alpha = (|alpha|!/alpha!) A_{|alpha|}.

    coeffs_by_degree lists A_0..A_N as HermPDs of one shared dimension; the
    multinomial factor rides in the logscale.
    """
    coeffs_by_degree = list(coeffs_by_degree)
    if not coeffs_by_degree:
        raise ValueError("need at least A_0")
    n = coeffs_by_degree[0].dim
    for m, a in enumerate(coeffs_by_degree):
        if not isinstance(a, HermPD):
            raise ValueError(f"A_{m} is not a HermPD")
        if a.dim != n:
            raise ValueError(
                f"A_{m} has dimension {a.dim}, expected {n}"
            )
    top = len(coeffs_by_degree) - 1
    out = {}
    for alpha in Truncation(d, top):
        m = degree(alpha)
        log_multinomial = log_factorial(m) - log_multi_factorial(alpha)
        out[alpha] = coeffs_by_degree[m].logscaled(log_multinomial)
    return KernelSpec(d, top, n, out, provenance="homogeneous")


def perturb_kernel(spec: KernelSpec, replacements: dict):
    """Replace finitely many low-degree coefficients; return the closed-form certificate.

    replacements maps alpha -> HermPD for indices with |alpha| <= n0 (n0 the
    largest replaced degree). The certificate is (C = I, m1 = min{1, c1},
    m2 = max{1, c2}) with c1 = min 1/||C_a^{-1/2} D_a C_a^{-1/2}|| and
    c2 = max ||C_a^{1/2} D_a^{-1} C_a^{1/2}|| over |alpha| <= n0, evaluated as
    extreme generalized eigenvalues of the pencils (D_a, C_a).
    """
    trunc = spec.truncation()
    cleaned = {}
    for alpha, dmat in replacements.items():
        alpha = tuple(alpha)
        if alpha not in trunc:
            raise IndexError(f"replacement index {alpha} outside the truncation")
        if not isinstance(dmat, HermPD) or dmat.dim != spec.fiber_dim:
            raise ValueError(f"replacement at {alpha} is not an n x n HermPD")
        cleaned[alpha] = dmat
    n0 = max((degree(a) for a in cleaned), default=-1)
    coeffs = dict(spec.coeffs)
    coeffs.update(cleaned)
    perturbed = KernelSpec(spec.d, spec.N, spec.fiber_dim, coeffs,
                           provenance="perturbed")
    log_c1 = 0.0
    log_c2 = 0.0
    for alpha in trunc:
        if degree(alpha) > n0:
            break
        logeigs = pencil_logeigs(coeffs[alpha], spec.coeff(alpha))
        log_c1 = min(log_c1, -float(logeigs[-1]))
        log_c2 = max(log_c2, -float(logeigs[0]))
    cert = SimilarityCertificate(
        C=np.eye(spec.fiber_dim, dtype=np.complex128),
        log_m1=min(0.0, log_c1),
        log_m2=max(0.0, log_c2),
    )
    return perturbed, cert


def boundedness_estimate(spec: KernelSpec, j: int) -> float:
    """Operator-norm estimate of the j-th coordinate shift on the kernel space.

    sup over alpha of ||C_alpha^{-1/2} C_{alpha-e_j} C_alpha^{-1/2}||^{1/2},
    with C_{alpha-e_j} = 0 whenever alpha_j = 0 (so a degree-0 truncation
    reports 0). Matches the norm estimate of build_mz on the kernel's moments.
    """
    if not 0 <= j < spec.d:
        raise ValueError(f"coordinate j={j} outside 0..{spec.d - 1}")
    best = -math.inf
    for alpha in spec.truncation():
        if alpha[j] == 0:
            continue
        logeigs = pencil_logeigs(spec.coeff(shifted(alpha, j, -1)), spec.coeff(alpha))
        best = max(best, float(logeigs[-1]))
    if best == -math.inf:
        return 0.0
    return math.exp(0.5 * best)
