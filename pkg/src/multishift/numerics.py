"""Dense complex linear algebra for small Hermitian positive-definite matrices.

Everything here is self-contained: eigendecompositions use a cyclic Jacobi
sweep, positive-definite factorizations use Cholesky, and general solves use
LU with partial pivoting. numpy supplies array storage and elementwise
arithmetic only. All routines exist in a batched form operating on a stack
of matrices with a shared pivot schedule, so callers that evaluate thousands
of small pencils (one per lattice point) stay vectorized.

Scalars are complex128 throughout, even for real inputs: the similarity and
unitary-equivalence criteria downstream need complex phases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LOG2 = math.log(2.0)

JACOBI_SWEEP_CAP = 64
JACOBI_OFFDIAG_TOL = 1e-14
HERMITIAN_ASYMMETRY_TOL = 1e-8


class LinAlgError(Exception):
    """Base class for numerical failures in this module."""


class NonHermitianError(LinAlgError):
    """Input matrix is too far from Hermitian to symmetrize silently."""


class ConvergenceError(LinAlgError):
    """Iteration failed to converge within its sweep cap."""


class CholeskyError(LinAlgError):
    """Matrix is numerically indefinite."""


class PositiveDefiniteError(LinAlgError):
    """Matrix fails a positive-definiteness requirement."""


class RankDeficientError(LinAlgError):
    """Matrix is numerically rank deficient."""


class SingularMatrixError(LinAlgError):
    """Linear solve hit a negligible pivot."""


def as_complex_matrix(a, name: str = "matrix") -> np.ndarray:
    """Copy input into a C-ordered complex128 2-D array, rejecting non-finite entries."""
    arr = np.array(a, dtype=np.complex128, order="C", copy=True)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def frob_norm(a: np.ndarray) -> float:
    return math.sqrt(float(np.vdot(a, a).real))


def _require_square(a: np.ndarray, name: str = "matrix") -> None:
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")


def symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().swapaxes(-1, -2))


def check_hermitian(a: np.ndarray, tol: float = HERMITIAN_ASYMMETRY_TOL) -> None:
    """Raise NonHermitian when the relative asymmetry exceeds tol."""
    scale = frob_norm(a)
    if scale == 0.0:
        return
    asym = frob_norm(a - a.conj().T)
    if asym > tol * scale:
        raise NonHermitianError(
            f"relative asymmetry {asym / scale:.3e} exceeds {tol:.1e}"
        )


# ---------------------------------------------------------------------------
# Cyclic Jacobi eigensolver (Hermitian), batched over a stack of matrices.
# ---------------------------------------------------------------------------

def _jacobi_rotate(a, v, p, q, thresh):
    """Apply one batched Jacobi rotation at pivot (p, q), in place.

    a: (m, n, n) Hermitian stack, v: (m, n, n) accumulated transforms or None.
    thresh: (m,) per-matrix off-diagonal threshold; matrices whose pivot entry
    is already below threshold get the identity rotation.
    """
    apq = a[:, p, q]
    r = np.abs(apq)
    active = r > thresh
    if not np.any(active):
        return active

    # Identity rotation where inactive keeps the update branch-free.
    safe_r = np.where(active, r, 1.0)
    phase = np.where(active, apq / safe_r, 1.0)
    tau = (a[:, q, q].real - a[:, p, p].real) / (2.0 * safe_r)
    sgn = np.where(tau >= 0.0, 1.0, -1.0)
    t = sgn / (np.abs(tau) + np.sqrt(tau * tau + 1.0))
    t = np.where(active, t, 0.0)
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c

    cc = c[:, None]
    sp = (s * phase)[:, None]

    # A <- R* A R with R[p,p]=c, R[p,q]=s*phase, R[q,p]=-s*conj(phase), R[q,q]=c.
    col_p = a[:, :, p].copy()
    col_q = a[:, :, q].copy()
    a[:, :, p] = cc * col_p - sp.conj() * col_q
    a[:, :, q] = sp * col_p + cc * col_q
    row_p = a[:, p, :].copy()
    row_q = a[:, q, :].copy()
    a[:, p, :] = cc * row_p - sp * row_q
    a[:, q, :] = sp.conj() * row_p + cc * row_q

    # Re-impose exact Hermitian structure at the pivot.
    a[:, p, q] = np.where(active, 0.0, a[:, p, q])
    a[:, q, p] = a[:, p, q].conj()
    a[:, p, p] = a[:, p, p].real
    a[:, q, q] = a[:, q, q].real

    if v is not None:
        vcol_p = v[:, :, p].copy()
        vcol_q = v[:, :, q].copy()
        v[:, :, p] = cc * vcol_p - sp.conj() * vcol_q
        v[:, :, q] = sp * vcol_p + cc * vcol_q
    return active


def _offdiag_max(a: np.ndarray) -> np.ndarray:
    m, n, _ = a.shape
    mask = ~np.eye(n, dtype=bool)
    return np.abs(a[:, mask]).max(axis=1) if n > 1 else np.zeros(m)


def herm_eig_batch(stack: np.ndarray, vectors: bool = True,
                   sweep_cap: int = JACOBI_SWEEP_CAP):
    """Eigendecompose a (m, n, n) stack of Hermitian matrices by cyclic Jacobi.

    Returns (eigenvalues, eigenvectors) with eigenvalues (m, n) ascending and
    eigenvectors (m, n, n) unitary columns, or (eigenvalues, None) when
    vectors=False. The pivot schedule is fixed, so results are deterministic.
    """
    a = np.array(stack, dtype=np.complex128, copy=True)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ValueError(f"expected (m, n, n) stack, got {a.shape}")
    m, n, _ = a.shape
    a = symmetrize(a)
    v = None
    if vectors:
        v = np.zeros_like(a)
        v[:, range(n), range(n)] = 1.0

    thresh = JACOBI_OFFDIAG_TOL * np.sqrt((np.abs(a) ** 2).sum(axis=(1, 2)))

    if n > 1:
        converged = False
        for _ in range(sweep_cap):
            any_active = False
            for p in range(n - 1):
                for q in range(p + 1, n):
                    active = _jacobi_rotate(a, v, p, q, thresh)
                    any_active = any_active or bool(np.any(active))
            if not any_active:
                converged = True
                break
        if not converged and np.any(_offdiag_max(a) > thresh):
            raise ConvergenceError(
                f"Jacobi sweep cap {sweep_cap} hit with off-diagonal mass left"
            )

    eigs = np.diagonal(a, axis1=1, axis2=2).real.copy()
    order = np.argsort(eigs, axis=1, kind="stable")
    eigs = np.take_along_axis(eigs, order, axis=1)
    if vectors:
        v = np.take_along_axis(v, order[:, None, :], axis=2)
    return eigs, v


def herm_eig(mat) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and unitary eigenvectors of one Hermitian matrix.

    The input is symmetrized internally; inputs with relative asymmetry above
    1e-8 raise NonHermitian.
    """
    a = as_complex_matrix(mat)
    _require_square(a)
    check_hermitian(a)
    eigs, v = herm_eig_batch(a[None], vectors=True)
    return eigs[0], v[0]


def herm_eigvals(mat) -> np.ndarray:
    a = as_complex_matrix(mat)
    _require_square(a)
    check_hermitian(a)
    eigs, _ = herm_eig_batch(a[None], vectors=False)
    return eigs[0]


# ---------------------------------------------------------------------------
# Cholesky and triangular solves, batched.
# ---------------------------------------------------------------------------

def cholesky_batch(stack: np.ndarray) -> np.ndarray:
    """Lower Cholesky factors of a (m, n, n) Hermitian PD stack; L @ L* = A."""
    a = np.asarray(stack, dtype=np.complex128)
    m, n, _ = a.shape
    low = np.zeros_like(a)
    for j in range(n):
        d = a[:, j, j].real - (np.abs(low[:, j, :j]) ** 2).sum(axis=1)
        if np.any(d <= 0.0) or np.any(~np.isfinite(d)):
            raise CholeskyError("matrix is numerically indefinite")
        low[:, j, j] = np.sqrt(d)
        if j + 1 < n:
            # column j below the diagonal, vectorized over the batch
            s = a[:, j + 1:, j] - np.einsum(
                "mik,mk->mi", low[:, j + 1:, :j], low[:, j, :j].conj()
            )
            low[:, j + 1:, j] = s / low[:, j, j][:, None]
    return low


def cholesky(mat) -> np.ndarray:
    a = as_complex_matrix(mat)
    _require_square(a)
    check_hermitian(a)
    return cholesky_batch(symmetrize(a)[None])[0]


def solve_lower_batch(low: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve L X = B by forward substitution for a (m, n, n) stack."""
    n = low.shape[1]
    x = np.array(rhs, dtype=np.complex128, copy=True)
    for i in range(n):
        if i:
            x[:, i, :] -= np.einsum("mk,mkj->mj", low[:, i, :i], x[:, :i, :])
        x[:, i, :] /= low[:, i, i][:, None]
    return x


def whiten_batch(low: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Congruence L^{-1} A L^{-*} for stacks, via two forward substitutions."""
    y = solve_lower_batch(low, a)
    w = solve_lower_batch(low, y.conj().swapaxes(1, 2))
    return symmetrize(w.conj().swapaxes(1, 2))


# ---------------------------------------------------------------------------
# General solves (LU with partial pivoting).
# ---------------------------------------------------------------------------

def solve(mat, rhs) -> np.ndarray:
    """Solve A X = B for general square complex A."""
    a = as_complex_matrix(mat)
    _require_square(a)
    b = np.array(rhs, dtype=np.complex128, copy=True)
    if b.ndim == 1:
        return solve(a, b[:, None])[:, 0]
    n = a.shape[0]
    scale = np.abs(a).max() or 1.0
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if not np.abs(a[piv, k]) > 1e-30 * scale:
            raise SingularMatrixError("negligible pivot in LU solve")
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            b[[k, piv]] = b[[piv, k]]
        inv_piv = 1.0 / a[k, k]
        if k + 1 < n:
            mult = a[k + 1:, k] * inv_piv
            a[k + 1:, k + 1:] -= np.outer(mult, a[k, k + 1:])
            b[k + 1:, :] -= np.outer(mult, b[k, :])
    x = np.zeros_like(b)
    for k in range(n - 1, -1, -1):
        x[k, :] = (b[k, :] - a[k, k + 1:] @ x[k + 1:, :]) / a[k, k]
    return x


def inv(mat) -> np.ndarray:
    a = as_complex_matrix(mat)
    _require_square(a)
    return solve(a, np.eye(a.shape[0], dtype=np.complex128))


def singular_range(mat) -> tuple[float, float]:
    """(smallest, largest) singular value via the eigenvalues of A*A."""
    a = as_complex_matrix(mat)
    gram = symmetrize(a.conj().T @ a)
    eigs, _ = herm_eig_batch(gram[None], vectors=False)
    lo = math.sqrt(max(float(eigs[0, 0]), 0.0))
    hi = math.sqrt(max(float(eigs[0, -1]), 0.0))
    return lo, hi


def spectral_norm(mat) -> float:
    return singular_range(mat)[1]


def nullspace(mat, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) for the null space of a complex matrix.

    Gauss-Jordan elimination with full pivoting; columns whose pivot falls
    below rtol times the largest initial entry are treated as free.
    """
    a = as_complex_matrix(mat)
    m, n = a.shape
    if a.size == 0:
        return np.eye(n, dtype=np.complex128)
    scale = np.abs(a).max()
    if scale == 0.0:
        return np.eye(n, dtype=np.complex128)
    col_perm = list(range(n))
    rank = 0
    for k in range(min(m, n)):
        sub = np.abs(a[k:, k:])
        flat = int(np.argmax(sub))
        pi, pj = divmod(flat, n - k)
        if sub[pi, pj] <= rtol * scale:
            break
        pi += k
        pj += k
        if pi != k:
            a[[k, pi]] = a[[pi, k]]
        if pj != k:
            a[:, [k, pj]] = a[:, [pj, k]]
            col_perm[k], col_perm[pj] = col_perm[pj], col_perm[k]
        a[k, :] /= a[k, k]
        others = np.concatenate([np.arange(k), np.arange(k + 1, m)]).astype(int)
        if others.size:
            a[others, :] -= np.outer(a[others, k], a[k, :])
        rank += 1
    free = n - rank
    basis = np.zeros((n, free), dtype=np.complex128)
    for f in range(free):
        basis[col_perm[rank + f], f] = 1.0
        for i in range(rank):
            basis[col_perm[i], f] = -a[i, rank + f]
    # modified Gram-Schmidt, deterministic order
    for j in range(free):
        for i in range(j):
            basis[:, j] -= np.vdot(basis[:, i], basis[:, j]) * basis[:, i]
        nrm = math.sqrt(float(np.vdot(basis[:, j], basis[:, j]).real))
        basis[:, j] /= nrm
    return basis


# ---------------------------------------------------------------------------
# Polar decomposition.
# ---------------------------------------------------------------------------

def polar_unitary(mat) -> np.ndarray:
    """Nearest unitary factor U of a full-rank square matrix (Frobenius norm).

    Built from the eigendecomposition of A*A, then polished by Heron steps
    U <- (U + U^{-*})/2 until U*U = I to ~1e-13.
    """
    a = as_complex_matrix(mat)
    _require_square(a)
    n = a.shape[0]
    gram = symmetrize(a.conj().T @ a)
    eigs, v = herm_eig_batch(gram[None], vectors=True)
    eigs, v = eigs[0], v[0]
    smax = math.sqrt(max(float(eigs[-1]), 0.0))
    smin = math.sqrt(max(float(eigs[0]), 0.0))
    if smax == 0.0 or smin <= 1e-12 * smax:
        raise RankDeficientError(
            f"singular value ratio {smin / smax if smax else 0.0:.3e} below 1e-12"
        )
    u = a @ (v * (1.0 / np.sqrt(eigs))[None, :]) @ v.conj().T
    eye = np.eye(n, dtype=np.complex128)
    tol = 1e-13 * math.sqrt(n)
    for _ in range(30):
        if frob_norm(u.conj().T @ u - eye) <= tol:
            break
        u = 0.5 * (u + inv(u).conj().T)
    return u


# ---------------------------------------------------------------------------
# Log-scaled Hermitian positive-definite matrices.
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HermPD:
    """A positive-definite matrix stored as exp(logscale) * matrix.

    The stored matrix is exactly Hermitian with spectral norm balanced into
    [1/2, 2]; the logscale absorbs Pochhammer-type growth so pencils stay
    well-conditioned out to degree 200+. Instances are immutable.
    """

    matrix: np.ndarray
    logscale: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def value(self) -> np.ndarray:
        """Represented matrix exp(logscale)*matrix; may overflow for large scales."""
        return math.exp(self.logscale) * self.matrix

    def logscaled(self, dlog: float) -> "HermPD":
        """The represented value multiplied by exp(dlog), exactly."""
        return HermPD(self.matrix, self.logscale + float(dlog))

    def log_eigvals(self) -> np.ndarray:
        """log of the represented eigenvalues, ascending."""
        eigs, _ = herm_eig_batch(self.matrix[None], vectors=False)
        return np.log(eigs[0]) + self.logscale


def hermpd(matrix, logscale: float = 0.0) -> HermPD:
    """Validate, symmetrize, and balance a matrix into a HermPD.

    Balancing rescales by an exact power of two so the spectral norm lands in
    [2^-1/2, 2^1/2]; re-running it is a bit-identical no-op.
    """
    a = as_complex_matrix(matrix)
    _require_square(a)
    check_hermitian(a)
    a = symmetrize(a)
    eigs, _ = herm_eig_batch(a[None], vectors=False)
    lo, hi = float(eigs[0, 0]), float(eigs[0, -1])
    if lo <= 0.0:
        raise PositiveDefiniteError(f"smallest eigenvalue {lo:.3e} is not positive")
    snorm = max(abs(lo), abs(hi))
    k = round(math.log2(snorm))
    out_log = float(logscale)
    if k != 0:
        a = a * 2.0 ** (-k)
        out_log = out_log + k * LOG2
    a.flags.writeable = False
    return HermPD(a, out_log)


def rebalance(h: HermPD) -> HermPD:
    """Re-run the balancing convention; idempotent bit-for-bit."""
    return hermpd(h.matrix, h.logscale)


def hermpd_from_log_diag(log_entries) -> HermPD:
    """HermPD with diagonal exp(log_entries); safe for widely spread scales.

    Raises PositiveDefiniteError when the spread exceeds what a shared
    logscale can represent in double precision.
    """
    logs = np.asarray(log_entries, dtype=np.float64)
    if logs.ndim != 1 or logs.size == 0 or not np.all(np.isfinite(logs)):
        raise ValueError("log_entries must be a finite 1-D array")
    top = float(logs.max())
    if top - float(logs.min()) > 690.0:
        raise PositiveDefiniteError(
            "diagonal spread exceeds double-precision range under one logscale"
        )
    return hermpd(np.diag(np.exp(logs - top)).astype(np.complex128), top)


def _eig_transform(h: HermPD, fn, out_logscale: float) -> HermPD:
    eigs, v = herm_eig_batch(h.matrix[None], vectors=True)
    eigs, v = eigs[0], v[0]
    if eigs[0] <= 0.0:
        raise PositiveDefiniteError(f"smallest eigenvalue {eigs[0]:.3e} is not positive")
    out = (v * fn(eigs)[None, :]) @ v.conj().T
    return hermpd(out, out_logscale)


def sqrt_pd(h: HermPD) -> HermPD:
    """Positive square root; represented value squares back to h (logscale halved)."""
    return _eig_transform(h, np.sqrt, h.logscale / 2.0)


def inv_sqrt_pd(h: HermPD) -> HermPD:
    return _eig_transform(h, lambda e: 1.0 / np.sqrt(e), -h.logscale / 2.0)


def inv_pd(h: HermPD) -> HermPD:
    return _eig_transform(h, lambda e: 1.0 / e, -h.logscale)


# ---------------------------------------------------------------------------
# Definite pencils.
# ---------------------------------------------------------------------------

def pencil_logeigs(a: HermPD, b: HermPD) -> np.ndarray:
    """log of the generalized eigenvalues of A x = lambda B x, ascending.

    Solved as the ordinary spectrum of L^{-1} A L^{-*} with B = L L*; the
    logscale difference is applied additively in the log domain.
    """
    if a.dim != b.dim:
        raise ValueError(f"pencil dimension mismatch: {a.dim} vs {b.dim}")
    low = cholesky_batch(b.matrix[None])
    w = whiten_batch(low, a.matrix[None])
    eigs, _ = herm_eig_batch(w, vectors=False)
    eigs = eigs[0]
    if eigs[0] <= 0.0:
        raise PositiveDefiniteError("pencil numerator is not positive definite")
    return np.log(eigs) + (a.logscale - b.logscale)


def pencil_eigs(a: HermPD, b: HermPD) -> np.ndarray:
    """Generalized eigenvalues of the definite pencil (A, B), ascending, all > 0."""
    return np.exp(pencil_logeigs(a, b))


def pencil_logrange_batch(a_mats, a_logs, b_mats, b_logs):
    """Per-matrix (min, max) log generalized eigenvalues for stacked pencils.

    a_mats, b_mats: (m, n, n) Hermitian PD stacks; a_logs, b_logs: (m,) logscales.
    Returns (lo, hi) arrays of shape (m,). Raises CholeskyError if any B is
    indefinite, PositiveDefiniteError if any whitened A has a non-positive
    eigenvalue.
    """
    low = cholesky_batch(b_mats)
    w = whiten_batch(low, a_mats)
    eigs, _ = herm_eig_batch(w, vectors=False)
    if np.any(eigs[:, 0] <= 0.0):
        raise PositiveDefiniteError("pencil numerator is not positive definite")
    off = np.asarray(a_logs, dtype=np.float64) - np.asarray(b_logs, dtype=np.float64)
    return np.log(eigs[:, 0]) + off, np.log(eigs[:, -1]) + off
