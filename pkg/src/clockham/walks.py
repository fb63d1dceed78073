"""
Quantum walks on a line with diagonal penalties.

The basic object is the path-graph Laplacian ``laplacian(N)`` (diagonal
``[1/2, 1, ..., 1, 1/2]``, off-diagonal ``-1/2``), optionally with weighted
projectors ``mu_k |k><k|`` added at chosen sites.  Sites are 1-indexed
throughout this module, matching the usual ``|1>, ..., |T>`` labelling.

Endpoint walks ``laplacian(T) + mu |T><T|`` are solved through the secular
function ``g_T``; under the substitution ``lam = 1 - cos(theta)`` it reduces
to the real expression

    g_T(lam) = tan(theta / 2) * tan(T * theta),

whose poles are the full-penalty spectrum ``1 - cos((2k-1) pi / 2T)`` and
whose zeros are the free spectrum ``1 - cos(k pi / T)``.  Eigenvalues of the
endpoint walk solve ``g_T(lam) = mu / (1 - mu)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, InvalidSize, NearPole, NoDecomposition
from .linalg import (DenseSymmetric, SymTridiagonal, eig_tridiagonal,
                     eigvals_tridiagonal_batch)

__all__ = [
    "PenalizedWalk",
    "Continuant",
    "Uncoupling",
    "PenaltyScan",
    "one_minus_cos",
    "laplacian",
    "free_spectrum",
    "analytic_spectrum_full_penalty",
    "analytic_spectrum_half_penalty",
    "char_poly_continuant",
    "continuant_g",
    "g_eval",
    "g_poles",
    "g_zeros",
    "endpoint_spectrum",
    "endpoint_ground_energy",
    "uncouple",
    "starting_penalty_scan",
    "penalized_spectrum",
]

POLE_TOL = 1e-13


def one_minus_cos(x):
    """``1 - cos(x)`` without cancellation for small ``x``."""
    s = np.sin(0.5 * np.asarray(x, dtype=float))
    out = 2.0 * s * s
    return float(out) if np.ndim(out) == 0 else out


def laplacian(N: int) -> SymTridiagonal:
    """Path-graph Laplacian on ``N`` vertices with edge weight 1/2.

    Equal to ``sum_t 1/2 (|t+1> - |t>)(<t+1| - <t|)``; a single vertex has no
    edges, so ``N = 1`` gives ``[0]``.
    """
    if int(N) != N or N < 1:
        raise InvalidSize(f"walk length must be a positive integer, got {N!r}")
    N = int(N)
    d = np.ones(N)
    d[0] = d[-1] = 0.5
    if N == 1:
        d[0] = 0.0
    return SymTridiagonal(d, np.full(N - 1, -0.5))


@dataclass(frozen=True)
class PenalizedWalk:
    """``laplacian(T) + sum_k mu_k |k><k|`` with 1-indexed sites ``k``."""

    T: int
    penalties: tuple = ()

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 1:
            raise InvalidSize(f"walk length must be a positive integer, got {self.T!r}")
        pens = tuple((int(k), float(mu)) for k, mu in self.penalties)
        seen = set()
        for k, mu in pens:
            if not 1 <= k <= self.T:
                raise DomainError(f"penalty position {k} outside [1, {self.T}]")
            if k in seen:
                raise DomainError(f"duplicate penalty position {k}")
            if not np.isfinite(mu) or mu < 0:
                raise DomainError(f"penalty weight must be finite and >= 0, got {mu}")
            seen.add(k)
        object.__setattr__(self, "T", int(self.T))
        object.__setattr__(self, "penalties", tuple(sorted(pens)))

    @classmethod
    def endpoint(cls, T: int, mu: float) -> "PenalizedWalk":
        return cls(T, ((T, mu),))

    def to_matrix(self) -> SymTridiagonal:
        lap = laplacian(self.T)
        d = np.array(lap.diag)
        for k, mu in self.penalties:
            d[k - 1] += mu
        return SymTridiagonal(d, lap.offdiag)

    def reflected(self) -> "PenalizedWalk":
        return PenalizedWalk(self.T, tuple((self.T + 1 - k, mu) for k, mu in self.penalties))


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def _check_T(T):
    if int(T) != T or T < 1:
        raise InvalidSize(f"walk length must be a positive integer, got {T!r}")
    return int(T)


def free_spectrum(T: int) -> np.ndarray:
    """Eigenvalues ``1 - cos(k pi / T)``, ``k = 0..T-1`` of ``laplacian(T)``."""
    T = _check_T(T)
    return one_minus_cos(np.arange(T) * np.pi / T) * np.ones(T)


def analytic_spectrum_full_penalty(T: int) -> np.ndarray:
    """Eigenvalues of ``laplacian(T) + |T><T|``, ascending."""
    T = _check_T(T)
    k = np.arange(1, T + 1)
    return np.atleast_1d(one_minus_cos((2 * k - 1) * np.pi / (2 * T)))


def analytic_spectrum_half_penalty(T: int) -> np.ndarray:
    """Eigenvalues of ``laplacian(T) + 1/2 |T><T|``, ascending."""
    T = _check_T(T)
    k = np.arange(1, T + 1)
    return np.atleast_1d(one_minus_cos((2 * k - 1) * np.pi / (2 * T + 1)))


# ---------------------------------------------------------------------------
# Continuants
# ---------------------------------------------------------------------------

class Continuant(NamedTuple):
    """``det(M - lam I)`` as ``sign * exp(logabs)``; ``value`` may over/underflow."""

    value: np.ndarray
    sign: np.ndarray
    logabs: np.ndarray


def char_poly_continuant(w, lam) -> Continuant:
    """Characteristic polynomial ``det(M - lam)`` by the three-term recurrence.

    ``w`` is a :class:`PenalizedWalk` or any :class:`SymTridiagonal`.  The
    pair ``(f_i, f_{i-1})`` is rescaled by ``|f_i|`` at every step, so the
    recurrence never overflows; the accumulated scale goes into ``logabs``.
    """
    m = w.to_matrix() if isinstance(w, PenalizedWalk) else w
    lam = np.asarray(lam, dtype=float)
    d, e2 = m.diag, m.offdiag ** 2
    prev = np.ones_like(lam)
    cur = d[0] - lam
    logscale = np.zeros_like(lam)
    for i in range(1, m.n):
        nxt = (d[i] - lam) * cur - e2[i - 1] * prev
        prev, cur = cur, nxt
        s = np.maximum(np.abs(cur), np.abs(prev))
        s = np.where(s > 0, s, 1.0)
        prev = prev / s
        cur = cur / s
        logscale = logscale + np.log(s)
    sign = np.sign(cur)
    with np.errstate(divide="ignore"):
        logabs = np.log(np.abs(cur)) + logscale
    with np.errstate(over="ignore"):
        value = sign * np.exp(logabs)
    return Continuant(value, sign, logabs)


def continuant_g(T: int, lam):
    """``-p0(lam) / p1(lam)`` from the free (``mu=0``) and full (``mu=1``)
    endpoint continuants.

    Eigenvalues of ``laplacian(T) + mu |T><T|`` are the roots of
    ``p0 + mu (p1 - p0)``, i.e. of ``-p0 / p1 = mu / (1 - mu)``.
    """
    p0 = char_poly_continuant(PenalizedWalk(T), lam)
    p1 = char_poly_continuant(PenalizedWalk.endpoint(T, 1.0), lam)
    with np.errstate(over="ignore", invalid="ignore"):
        return -p0.sign * p1.sign * np.exp(p0.logabs - p1.logabs)


# ---------------------------------------------------------------------------
# Secular function
# ---------------------------------------------------------------------------

def g_poles(T: int) -> np.ndarray:
    return analytic_spectrum_full_penalty(T)


def g_zeros(T: int) -> np.ndarray:
    return free_spectrum(T)


def g_eval(T: int, lam):
    """Secular function ``g_T(lam) = tan(theta/2) tan(T theta)``,
    ``lam = 1 - cos(theta)``, for ``lam`` strictly inside ``(0, 2)``.
    """
    T = _check_T(T)
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(~np.isfinite(lam_arr)) or np.any(lam_arr <= 0.0) or np.any(lam_arr >= 2.0):
        raise DomainError("g_T is evaluated only for lam strictly inside (0, 2)")
    theta = 2.0 * np.arcsin(np.sqrt(0.5 * lam_arr))
    # distance to the nearest pole, measured in lam
    j = np.clip(np.rint(T * theta / np.pi - 0.5), 0, T - 1)
    pole = one_minus_cos((2 * j + 1) * np.pi / (2 * T))
    if np.any(np.abs(lam_arr - pole) < POLE_TOL):
        raise NearPole(f"lam within {POLE_TOL:g} of a pole of g_{T}")
    out = np.tan(0.5 * theta) * np.tan(T * theta)
    return float(out) if np.ndim(out) == 0 else out


def endpoint_spectrum(T: int, mu: float) -> np.ndarray:
    """All eigenvalues of ``laplacian(T) + mu |T><T|`` for ``0 <= mu <= 1``.

    Root ``k`` (``k = 0..T-1``) lies at ``theta = (k pi + phi) / T`` with
    ``phi`` in ``[0, pi/2]`` solving ``tan(theta/2) sin(phi) = c cos(phi)``,
    ``c = mu / (1 - mu)``; the left side minus the right is increasing in
    ``phi`` there, so bisection on ``phi`` is safe.
    """
    T = _check_T(T)
    mu = float(mu)
    if not 0.0 <= mu <= 1.0 or not np.isfinite(mu):
        raise DomainError(f"endpoint penalty weight must lie in [0, 1], got {mu}")
    if mu == 0.0:
        return free_spectrum(T)
    if mu == 1.0:
        return analytic_spectrum_full_penalty(T)
    c = mu / (1.0 - mu)
    k = np.arange(T, dtype=float)

    def h(phi):
        theta = (k * np.pi + phi) / T
        return np.tan(0.5 * theta) * np.sin(phi) - c * np.cos(phi)

    lo = np.zeros(T)
    hi = np.full(T, 0.5 * np.pi)
    if not (np.all(h(lo) < 0.0) and np.all(h(hi) > 0.0)):
        return eig_tridiagonal(PenalizedWalk.endpoint(T, mu).to_matrix()).eigenvalues
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        neg = h(mid) < 0.0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
        if np.all(hi - lo <= 4 * np.finfo(float).eps):
            break
    theta = (k * np.pi + 0.5 * (lo + hi)) / T
    return np.sort(one_minus_cos(theta) * np.ones(T))


def endpoint_ground_energy(T: int, mu: float) -> float:
    return float(endpoint_spectrum(T, mu)[0])


# ---------------------------------------------------------------------------
# Uncoupling and the penalty-position scan
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Uncoupling:
    """``H = (left (+) right) + J`` with ``J >= 0`` on sites ``(k-1, k)``."""

    T: int
    k: int
    left: SymTridiagonal
    right: SymTridiagonal
    coupling: DenseSymmetric

    def block_matrix(self) -> np.ndarray:
        out = np.zeros((self.T, self.T))
        a = self.left.n
        out[:a, :a] = self.left.to_dense()
        out[a:, a:] = self.right.to_dense()
        return out

    def coupling_matrix(self) -> np.ndarray:
        out = np.zeros((self.T, self.T))
        i = self.k - 2
        out[i:i + 2, i:i + 2] = self.coupling.matrix
        return out

    def block_ground_energy(self) -> float:
        return min(eig_tridiagonal(self.left).min, eig_tridiagonal(self.right).min)


def uncouple(w: PenalizedWalk) -> Uncoupling:
    """Split ``laplacian(T) + |k><k|`` into two shorter penalized walks.

    Left block: ``laplacian(k-1) + 1/4 |k-1><k-1|``; right block:
    ``laplacian(T-k+1) + 1/2`` on its first site.  The remainder is the PSD
    matrix ``[[1/4, -1/2], [-1/2, 1]]`` on sites ``(k-1, k)``.
    """
    if len(w.penalties) != 1 or w.penalties[0][1] != 1.0:
        raise NoDecomposition("uncoupling needs exactly one unit-weight penalty")
    k = w.penalties[0][0]
    T = w.T
    if not 2 <= k <= T - 1:
        raise NoDecomposition(
            f"penalty at k={k} is an endpoint; use the full-penalty closed form")
    left = laplacian(k - 1)
    ld = np.array(left.diag)
    ld[-1] += 0.25
    right = laplacian(T - k + 1)
    rd = np.array(right.diag)
    rd[0] += 0.5
    J = DenseSymmetric(np.array([[0.25, -0.5], [-0.5, 1.0]]))
    return Uncoupling(T, k, SymTridiagonal(ld, left.offdiag),
                      SymTridiagonal(rd, right.offdiag), J)


class PenaltyScan(NamedTuple):
    values: np.ndarray  # values[k-1] = lambda_0(laplacian(T) + |k><k|)
    argmin: tuple
    minimum: float


def starting_penalty_scan(T: int, tol: float = 1e-12) -> PenaltyScan:
    """Ground energy of ``laplacian(T) + |k><k|`` for every ``k = 1..T``."""
    T = _check_T(T)
    if T < 4:
        raise DomainError("the penalty-position scan is stated for T >= 4")
    base = laplacian(T)
    diags = np.tile(base.diag, (T, 1))
    diags[np.arange(T), np.arange(T)] += 1.0
    values = eigvals_tridiagonal_batch(diags, base.offdiag, index=0)
    vmin = float(np.min(values))
    argmin = tuple(int(i) + 1 for i in np.flatnonzero(values <= vmin + tol))
    return PenaltyScan(values, argmin, vmin)


def penalized_spectrum(T: int, penalties: Sequence[tuple[int, float]]) -> np.ndarray:
    """Sturm spectrum of an arbitrary penalized walk."""
    return eig_tridiagonal(PenalizedWalk(T, tuple(penalties)).to_matrix()).eigenvalues
