"""
Real symmetric eigensolvers and small spectral utilities.

Two independent solvers live here and are used as oracles for each other:

* :func:`eig_tridiagonal` -- Sturm-sequence bisection for eigenvalues
  (numba kernel for the counts), inverse iteration for eigenvectors.
* :func:`eig_dense` -- cyclic-by-row Jacobi rotations (numba kernel).

Everything is plain float64 numpy; no LAPACK eigensolver is called.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from numba import njit
from scipy.linalg import solve_banded

from .errors import AsymmetricInput, DegenerateVector, InvalidMatrix, TooLarge

__all__ = [
    "SymTridiagonal",
    "DenseSymmetric",
    "Spectrum",
    "sturm_count",
    "eig_tridiagonal",
    "eigvals_tridiagonal_batch",
    "eig_dense",
    "eigvalsh_stack",
    "householder_tridiagonal",
    "spectral_norm",
    "is_psd",
    "rayleigh",
    "DEFAULT_DENSE_CAP",
]

DEFAULT_DENSE_CAP = 4096
SYMMETRY_TOL = 1e-12
BISECTION_TOL = 1e-13


@dataclass(frozen=True)
class SymTridiagonal:
    """Real symmetric tridiagonal matrix stored as two arrays."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.array(self.diag, dtype=float).reshape(-1)
        e = np.array(self.offdiag, dtype=float).reshape(-1)
        if d.size < 1:
            raise InvalidMatrix("tridiagonal matrix needs at least one row")
        if e.size != d.size - 1:
            raise InvalidMatrix(
                f"offdiag has length {e.size}, expected {d.size - 1}")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise InvalidMatrix("non-finite entry in tridiagonal matrix")
        d.flags.writeable = False
        e.flags.writeable = False
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def n(self) -> int:
        return self.diag.size

    def to_dense(self) -> np.ndarray:
        m = np.diag(self.diag)
        if self.n > 1:
            idx = np.arange(self.n - 1)
            m[idx, idx + 1] = self.offdiag
            m[idx + 1, idx] = self.offdiag
        return m

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        out = self.diag[:, None] * v if v.ndim == 2 else self.diag * v
        if self.n > 1:
            e = self.offdiag[:, None] if v.ndim == 2 else self.offdiag
            out[:-1] += e * v[1:]
            out[1:] += e * v[:-1]
        return out

    def gershgorin(self) -> tuple[float, float]:
        r = np.zeros(self.n)
        r[:-1] += np.abs(self.offdiag)
        r[1:] += np.abs(self.offdiag)
        return float(np.min(self.diag - r)), float(np.max(self.diag + r))

    def norm(self) -> float:
        """Infinity-norm bound, used to scale tolerances."""
        lo, hi = self.gershgorin()
        return max(abs(lo), abs(hi), np.finfo(float).tiny)


@dataclass(frozen=True)
class DenseSymmetric:
    """Dense real symmetric matrix, validated on construction."""

    matrix: np.ndarray
    symmetry_tol: float = SYMMETRY_TOL

    def __post_init__(self):
        a = np.array(self.matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise InvalidMatrix(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidMatrix("non-finite entry in dense matrix")
        asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
        if asym > self.symmetry_tol:
            raise AsymmetricInput(
                f"max |M_ij - M_ji| = {asym:.3e} exceeds {self.symmetry_tol:.1e}")
        a = 0.5 * (a + a.T)
        a.flags.writeable = False
        object.__setattr__(self, "matrix", a)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


MatrixLike = Union[DenseSymmetric, np.ndarray, Sequence[Sequence[float]]]


def _as_dense(m: MatrixLike) -> DenseSymmetric:
    return m if isinstance(m, DenseSymmetric) else DenseSymmetric(m)


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues, optional orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None
    residual: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def min(self) -> float:
        return float(self.eigenvalues[0])


# ---------------------------------------------------------------------------
# Sturm bisection
# ---------------------------------------------------------------------------

@njit(cache=True)
def _sturm_kernel(d, e2, x, pivmin):
    # d: (R, n) with R == 1 (shared matrix) or R == x.size (one row per shift)
    out = np.empty(x.size, dtype=np.int64)
    n = d.shape[1]
    shared = d.shape[0] == 1
    for j in range(x.size):
        row = 0 if shared else j
        xj = x[j]
        q = d[row, 0] - xj
        if abs(q) < pivmin:
            q = -pivmin
        c = 1 if q < 0 else 0
        for i in range(1, n):
            q = d[row, i] - xj - e2[i - 1] / q
            if abs(q) < pivmin:
                q = -pivmin
            if q < 0:
                c += 1
        out[j] = c
    return out


def _sturm_counts(d: np.ndarray, e2: np.ndarray, x: np.ndarray, pivmin: float) -> np.ndarray:
    """Number of eigenvalues strictly below ``x``.

    ``d`` has shape ``(n,)`` (any shape of ``x``) or ``(B, n)`` (``x`` of
    length ``B``, one shift per matrix).  Zero pivots are replaced by
    ``-pivmin``.
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    d2 = d.reshape(1, -1) if d.ndim == 1 else d
    e2 = np.ascontiguousarray(e2, dtype=float)
    counts = _sturm_kernel(np.ascontiguousarray(d2), e2, np.ascontiguousarray(x.reshape(-1)), float(pivmin))
    return counts.reshape(x.shape)


def _pivmin(m: SymTridiagonal) -> float:
    e2max = float(np.max(m.offdiag ** 2)) if m.n > 1 else 0.0
    return np.finfo(float).tiny * max(1.0, e2max) / np.finfo(float).eps


def sturm_count(m: SymTridiagonal, x) -> np.ndarray:
    """Count eigenvalues of ``m`` strictly less than each shift in ``x``."""
    return _sturm_counts(m.diag, m.offdiag ** 2, np.asarray(x, dtype=float), _pivmin(m))


def _bisect(d, e2, lo, hi, k, pivmin, tol, max_iter=200):
    # lo/hi/k are arrays of equal shape; d broadcasts as (B, n) or (n,)
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    for _ in range(max_iter):
        width = hi - lo
        if np.all(width <= tol):
            break
        mid = 0.5 * (lo + hi)
        below = _sturm_counts(d, e2, mid, pivmin) <= k
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def _inverse_iteration(m: SymTridiagonal, lam: np.ndarray, rng) -> np.ndarray:
    n = m.n
    scale = m.norm()
    vecs = np.empty((n, lam.size))
    if n == 1:
        vecs[0, :] = 1.0
        return vecs
    ab = np.zeros((3, n))
    ab[0, 1:] = m.offdiag
    ab[2, :-1] = m.offdiag
    eps = np.finfo(float).eps
    cluster_start = 0
    for j, lj in enumerate(lam):
        if j > 0 and lj - lam[j - 1] > 1e-10 * scale:
            cluster_start = j
        shift = lj + 4 * eps * scale * (j - cluster_start + 1)
        ab[1, :] = m.diag - shift
        v = rng.standard_normal(n)
        for _ in range(3):
            try:
                v = solve_banded((1, 1), ab, v, check_finite=False)
            except np.linalg.LinAlgError:
                ab[1, :] -= 10 * eps * scale
                v = solve_banded((1, 1), ab, v, check_finite=False)
            # reorthogonalise inside a cluster of (near-)equal eigenvalues
            for i in range(cluster_start, j):
                v -= np.dot(vecs[:, i], v) * vecs[:, i]
            v /= np.linalg.norm(v)
        vecs[:, j] = v
    return vecs


def eig_tridiagonal(m: SymTridiagonal, want_vectors: bool = False,
                    tol: float = BISECTION_TOL, seed: int = 0) -> Spectrum:
    """Full spectrum of a symmetric tridiagonal matrix.

    Eigenvalues come from simultaneous Sturm-sequence bisection on every
    index, each bracketed by the Gershgorin interval and refined to absolute
    width ``tol``.  Eigenvectors, if requested, come from inverse iteration
    seeded with a fixed-seed random start.
    """
    if not isinstance(m, SymTridiagonal):
        m = SymTridiagonal(*m)
    n = m.n
    lo, hi = m.gershgorin()
    span = max(hi - lo, 1.0)
    lo -= 1e-3 * span
    hi += 1e-3 * span
    k = np.arange(n)
    lam = _bisect(m.diag, m.offdiag ** 2, np.full(n, lo), np.full(n, hi), k, _pivmin(m), tol)
    lam = np.sort(lam)
    vecs = None
    residual = tol
    if want_vectors:
        vecs = _inverse_iteration(m, lam, np.random.default_rng(seed))
        r = m.matvec(vecs) - vecs * lam
        residual = float(np.max(np.abs(r))) if r.size else 0.0
    return Spectrum(lam, vecs, residual, {"method": "sturm-bisection"})


def eigvals_tridiagonal_batch(diags: np.ndarray, offdiag: np.ndarray,
                              index: int = 0, tol: float = BISECTION_TOL) -> np.ndarray:
    """The ``index``-th smallest eigenvalue of each matrix in a batch.

    ``diags`` has shape ``(B, n)``; all matrices share ``offdiag``.  Used by
    sweeps (e.g. every penalty position of one walk) where one bisection
    pass over the whole batch is much cheaper than ``B`` separate calls.
    """
    diags = np.atleast_2d(np.asarray(diags, dtype=float))
    e = np.asarray(offdiag, dtype=float)
    if not np.all(np.isfinite(diags)) or not np.all(np.isfinite(e)):
        raise InvalidMatrix("non-finite entry in tridiagonal batch")
    B, n = diags.shape
    r = np.zeros(n)
    r[:-1] += np.abs(e)
    r[1:] += np.abs(e)
    lo = np.min(diags - r, axis=1) - 1e-3
    hi = np.max(diags + r, axis=1) + 1e-3
    pivmin = np.finfo(float).tiny * max(1.0, float(np.max(e ** 2, initial=0.0))) / np.finfo(float).eps
    return _bisect(diags, e ** 2, lo, hi, np.full(B, index), pivmin, tol)


# ---------------------------------------------------------------------------
# Jacobi
# ---------------------------------------------------------------------------

@njit(cache=True)
def _jacobi_kernel(a, v, want_vectors, max_sweeps):
    n = a.shape[0]
    eps = np.finfo(np.float64).eps
    scale = 0.0
    for i in range(n):
        for j in range(n):
            scale += a[i, j] * a[i, j]
    scale = np.sqrt(scale)
    if scale == 0.0:
        scale = 1.0
    sweeps = 0
    while sweeps < max_sweeps:
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += a[i, j] * a[i, j]
        if np.sqrt(off) <= eps * scale:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                sgn = 1.0 if tau >= 0.0 else -1.0
                t = sgn / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                if want_vectors:
                    for k in range(n):
                        vkp = v[k, p]
                        vkq = v[k, q]
                        v[k, p] = c * vkp - s * vkq
                        v[k, q] = s * vkp + c * vkq
    return sweeps


def _jacobi(a: np.ndarray, want_vectors: bool, max_sweeps: int = 60):
    """Cyclic-by-row Jacobi; ``a`` is copied, returns (diag, V, sweeps)."""
    a = np.array(a, dtype=np.float64, order="C", copy=True)
    n = a.shape[0]
    v = np.eye(n)
    sweeps = _jacobi_kernel(a, v, want_vectors, max_sweeps)
    return np.diag(a).copy(), (v if want_vectors else None), sweeps


def _cap(max_dim: Optional[int]) -> int:
    return DEFAULT_DENSE_CAP if max_dim is None else int(max_dim)


def eig_dense(m: MatrixLike, want_vectors: bool = False,
              max_dim: Optional[int] = None) -> Spectrum:
    """Full spectrum of a dense real symmetric matrix by cyclic Jacobi."""
    ds = _as_dense(m)
    if ds.dim > _cap(max_dim):
        raise TooLarge(f"dimension {ds.dim} exceeds dense cap {_cap(max_dim)}")
    lam, v, sweeps = _jacobi(ds.matrix, want_vectors)
    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    vecs = None
    norm = max(float(np.max(np.abs(lam))), np.finfo(float).tiny)
    residual = np.finfo(float).eps * norm * ds.dim
    if want_vectors:
        vecs = v[:, order]
        r = ds.matrix @ vecs - vecs * lam
        residual = float(np.max(np.abs(r)))
    return Spectrum(lam, vecs, residual, {"method": "jacobi", "sweeps": sweeps})


def eigvalsh_stack(mats, max_dim: Optional[int] = None) -> np.ndarray:
    """Ascending eigenvalues of each matrix in a stack ``(B, n, n)``."""
    a = np.asarray(mats, dtype=float)
    if a.ndim == 2:
        a = a[None]
    if a.shape[-1] > _cap(max_dim):
        raise TooLarge(f"dimension {a.shape[-1]} exceeds dense cap {_cap(max_dim)}")
    if not np.all(np.isfinite(a)):
        raise InvalidMatrix("non-finite entry in matrix stack")
    asym = np.max(np.abs(a - np.swapaxes(a, 1, 2)))
    if asym > SYMMETRY_TOL:
        raise AsymmetricInput(f"max |M_ij - M_ji| = {asym:.3e}")
    a = 0.5 * (a + np.swapaxes(a, 1, 2))
    return np.array([np.sort(_jacobi(x, False)[0]) for x in a])


def householder_tridiagonal(m: MatrixLike) -> tuple[SymTridiagonal, np.ndarray]:
    """Reduce ``m`` to tridiagonal form ``Q^T m Q`` by Householder reflections.

    Returns the tridiagonal matrix and the orthogonal ``Q``.
    """
    a = np.array(_as_dense(m).matrix, dtype=float)
    n = a.shape[0]
    q = np.eye(n)
    for k in range(n - 2):
        x = a[k + 1:, k].copy()
        alpha = -np.copysign(np.linalg.norm(x), x[0] if x[0] != 0 else 1.0)
        u = x
        u[0] -= alpha
        un = np.linalg.norm(u)
        if un == 0.0:
            continue
        u /= un
        h = np.eye(n)
        h[k + 1:, k + 1:] -= 2.0 * np.outer(u, u)
        a = h @ a @ h
        q = q @ h
    return SymTridiagonal(np.diag(a).copy(), np.diag(a, 1).copy()), q


# ---------------------------------------------------------------------------
# Small utilities
# ---------------------------------------------------------------------------

def spectral_norm(m: MatrixLike) -> float:
    """Largest absolute eigenvalue."""
    lam = eig_dense(m).eigenvalues
    return float(max(abs(lam[0]), abs(lam[-1])))


def is_psd(m: MatrixLike, tol: float = 1e-12) -> bool:
    return eig_dense(m).min >= -tol


def rayleigh(m: MatrixLike, v) -> float:
    """``<v|M|v> / <v|v>`` for a real vector ``v``."""
    a = m.matrix if isinstance(m, DenseSymmetric) else (
        m.to_dense() if isinstance(m, SymTridiagonal) else _as_dense(m).matrix)
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size != a.shape[0]:
        raise InvalidMatrix(f"vector length {v.size} does not match dimension {a.shape[0]}")
    nv = float(v @ v)
    if nv == 0.0 or not np.isfinite(nv):
        raise DegenerateVector("Rayleigh quotient of a zero vector")
    return float(v @ a @ v) / nv
