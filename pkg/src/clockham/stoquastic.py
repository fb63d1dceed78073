"""
Block-diagonal conjugation of a projector into stoquastic 2x2 form.

Given a projector ``M`` on ``C^d`` and a split ``s``, find ``V = V' (+) V''``
with ``dim V' = s`` such that ``D = V^dag M V`` is real with non-positive
off-diagonal entries and splits into 1x1 blocks and 2x2 blocks

    [[1 - mu, -sqrt(mu (1 - mu))],
     [-sqrt(mu (1 - mu)), mu]]

coupling a-side index ``i`` to b-side index ``s + i``.

Construction: take an orthonormal basis ``Q`` of ``range(M)`` and the SVD of
its top ``s`` rows, ``Q_a = A diag(c) Z^dag``.  Then ``Q z_i = (c_i a_i, s_i b_i)``
with ``c_i^2 + s_i^2 = 1`` and the ``b_i`` orthonormal, so ``M`` is a direct
sum of rank-one 2x2 projectors in the ``(a_i, b_i)`` planes.  ``mu_i = s_i^2``
is the weight of the ``i``-th range vector in the bottom ``d - s``
coordinates, i.e. the squared cosine of its principal angle with that
coordinate subspace.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import (DecompositionFailed, DomainError, InstanceContractViolation,
                     NotAProjector)

__all__ = [
    "Block",
    "ProjectorBlockForm",
    "MuReport",
    "stoquastize",
    "extract_mu",
    "circuit_block_form",
    "INSTANCE_KINDS",
]

PROJECTOR_TOL = 1e-11
COUPLING_SNAP = 1e-11
RECONSTRUCTION_TOL = 1e-9
MU_SNAP = 1e-10
INSTANCE_KINDS = ("YES", "NO", "EQMA-YES", "EQMA-NO")


@dataclass(frozen=True)
class Block:
    """One diagonal block of ``D``.

    ``kind`` is ``"pair"`` (2x2, indices ``(a, b)``), ``"a"`` or ``"b"``
    (1x1 on one side with ``value`` 0 or 1).
    """

    kind: str
    a: Optional[int]
    b: Optional[int]
    mu: Optional[float]
    value: Optional[float] = None

    def matrix(self) -> np.ndarray:
        if self.kind != "pair":
            return np.array([[self.value]])
        mu = self.mu
        off = -np.sqrt(mu * (1.0 - mu))
        return np.array([[1.0 - mu, off], [off, mu]])


@dataclass(frozen=True)
class ProjectorBlockForm:
    s: int
    V: np.ndarray
    D: np.ndarray
    blocks: tuple
    r_a: int
    r_b: int
    residual: float
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self) -> int:
        return self.D.shape[0]

    @property
    def pairs(self) -> list:
        return [b for b in self.blocks if b.kind == "pair"]

    @property
    def D_aa(self) -> np.ndarray:
        return self.D[:self.s, :self.s]

    @property
    def D_bb(self) -> np.ndarray:
        return self.D[self.s:, self.s:]

    @property
    def D_ab(self) -> np.ndarray:
        return self.D[:self.s, self.s:]

    @property
    def mu_values(self) -> np.ndarray:
        """Weight of ``M`` on each b-side basis vector (``diag D_bb``)."""
        return np.diag(self.D_bb).copy()

    def reconstruct(self) -> np.ndarray:
        return self.V @ self.D @ self.V.conj().T

    def pattern(self) -> np.ndarray:
        """Boolean mask of the entries allowed to be nonzero."""
        d, s = self.dim, self.s
        mask = np.zeros((d, d), dtype=bool)
        da = np.diag(self.D_aa) != 0
        db = np.diag(self.D_bb) != 0
        mask[np.arange(s), np.arange(s)] = da
        mask[s + np.arange(d - s), s + np.arange(d - s)] = db
        p = len(self.pairs)
        mask[np.arange(p), s + np.arange(p)] = True
        mask[s + np.arange(p), np.arange(p)] = True
        return mask


def _check_projector(m: np.ndarray, tol: float = PROJECTOR_TOL) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotAProjector(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NotAProjector("matrix has non-finite entries")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > tol:
        raise NotAProjector("matrix is not Hermitian")
    if np.max(np.abs(m @ m - m), initial=0.0) > tol:
        raise NotAProjector("matrix is not idempotent")
    m = 0.5 * (m + m.conj().T)
    return m.real.copy() if np.all(m.imag == 0) else m


def _complete(vectors: np.ndarray, n: int) -> np.ndarray:
    """Orthonormal basis of the complement of the columns of ``vectors`` in ``C^n``."""
    if vectors.shape[1] == 0:
        return np.eye(n, dtype=vectors.dtype)
    if vectors.shape[1] >= n:
        return np.zeros((n, 0), dtype=vectors.dtype)
    return scipy.linalg.null_space(vectors.conj().T, rcond=1e-8)


def _orthonormalize(vectors: np.ndarray) -> np.ndarray:
    if vectors.shape[1] == 0:
        return vectors
    q, r = np.linalg.qr(vectors)
    ph = np.diag(r)
    ph = np.where(np.abs(ph) > 0, ph / np.abs(ph), 1.0)
    return q * ph.conj()


def _block_form(m: np.ndarray, s: int) -> ProjectorBlockForm:
    d = m.shape[0]
    lam, vecs = np.linalg.eigh(m)
    q = vecs[:, lam > 0.5]
    r = q.shape[1]
    qa, qb = q[:s], q[s:]
    dtype = np.result_type(m.dtype, np.float64)

    if s > 0 and r > 0:
        ua, c, zh = np.linalg.svd(qa, full_matrices=True)
        z = zh.conj().T
    else:
        ua, c, z = np.eye(s, dtype=dtype), np.zeros(0), np.eye(r, dtype=dtype)
    c = np.clip(np.concatenate([c, np.zeros(r - c.size)]), 0.0, 1.0)
    bz = qb @ z  # columns s_i * b_i
    # s_i from the column norms: sqrt(1 - c^2) loses everything near c = 1
    sn = np.linalg.norm(bz, axis=0) if r else np.zeros(0)
    norm = np.sqrt(c * c + sn * sn)
    c, sn = c / norm, sn / norm
    pair_idx, a_only, b_only = [], [], []
    for i in range(r):
        if c[i] * sn[i] < COUPLING_SNAP:
            (a_only if c[i] >= sn[i] else b_only).append(i)
        else:
            pair_idx.append(i)
    # descending mu, ties by original index
    pair_idx.sort(key=lambda i: (-sn[i] ** 2, i))

    a_vecs = [ua[:, i] for i in pair_idx] + [ua[:, i] for i in a_only]
    b_order = pair_idx + b_only
    b_raw = np.column_stack([bz[:, i] / sn[i] for i in b_order]) if b_order else np.zeros((d - s, 0), dtype=dtype)
    # Gram-Schmidt in descending s_i for stability, then restore order
    by_size = sorted(range(len(b_order)), key=lambda j: -sn[b_order[j]])
    b_q = _orthonormalize(b_raw[:, by_size]) if b_order else b_raw
    b_cols = np.empty_like(b_raw)
    for k, j in enumerate(by_size):
        v = b_q[:, k]
        # keep the direction of the raw vector
        ph = np.vdot(v, b_raw[:, j])
        b_cols[:, j] = v * (ph / abs(ph) if abs(ph) > 0 else 1.0)

    a_used = np.column_stack(a_vecs) if a_vecs else np.zeros((s, 0), dtype=dtype)
    # phase of a_i follows the range vector: q_i = (c_i a_i, s_i b_i) with a_i = A e_i
    v1 = np.hstack([a_used, _complete(a_used, s)]) if s else np.zeros((0, 0), dtype=dtype)
    v2 = np.hstack([b_cols, _complete(b_cols, d - s)]) if d - s else np.zeros((0, 0), dtype=dtype)

    p = len(pair_idx)
    # align phases so that D_ab entries are real and negative
    for k, i in enumerate(pair_idx):
        x = np.vdot(v1[:, k], m[:s, s:] @ v2[:, k]) if s else 0.0
        if abs(x) > 0:
            v2[:, k] *= -(abs(x) / x)

    V = scipy.linalg.block_diag(v1, v2) if s and d - s else (v2 if s == 0 else v1)
    D = np.zeros((d, d))
    blocks = []
    for k, i in enumerate(pair_idx):
        mu = float(sn[i] ** 2)
        D[k, k] = 1.0 - mu
        D[s + k, s + k] = mu
        D[k, s + k] = D[s + k, k] = -np.sqrt(mu * (1.0 - mu))
        blocks.append(Block("pair", k, s + k, mu))
    na = len(a_only)
    nb = len(b_only)
    for k in range(p, p + na):
        D[k, k] = 1.0
        blocks.append(Block("a", k, None, None, 1.0))
    for k in range(p + na, s):
        blocks.append(Block("a", k, None, None, 0.0))
    for k in range(p, p + nb):
        D[s + k, s + k] = 1.0
        blocks.append(Block("b", None, s + k, 1.0, 1.0))
    for k in range(p + nb, d - s):
        blocks.append(Block("b", None, s + k, 0.0, 0.0))

    conj = V.conj().T @ m @ V
    residual = float(max(np.max(np.abs(conj - D), initial=0.0),
                         np.max(np.abs(V @ D @ V.conj().T - m), initial=0.0)))
    if not np.isfinite(residual) or residual > RECONSTRUCTION_TOL:
        raise DecompositionFailed(f"block form reconstruction residual {residual:.3e}")
    r_a = int(np.count_nonzero(np.diag(D)[:s]))
    r_b = int(np.count_nonzero(np.diag(D)[s:]))
    return ProjectorBlockForm(s, V, D, tuple(blocks), r_a, r_b, residual,
                              {"rank": r, "pairs": p})


def stoquastize(m, s: int) -> ProjectorBlockForm:
    """Conjugate the projector ``m`` into stoquastic block form with split ``s``."""
    m = _check_projector(m)
    d = m.shape[0]
    if not 1 <= s < d:
        raise DomainError(f"split s must satisfy 1 <= s < {d}, got {s}")
    return _block_form(m, int(s))


@dataclass(frozen=True)
class MuReport:
    kind: str
    eta: float
    mu: np.ndarray
    tags: tuple

    @property
    def min_mu(self) -> float:
        return float(np.min(self.mu)) if self.mu.size else float("nan")


def extract_mu(b: ProjectorBlockForm, instance_kind: str, eta: float = 0.0) -> MuReport:
    """b-side block parameters, tagged and checked against the instance kind.

    ``mu`` is the rejection weight of each correctly initialised block, so
    a NO instance with error ``eta`` needs every ``mu >= 1 - eta`` and a YES
    instance needs some ``mu <= eta``.  Values within ``1e-10`` of 0 or 1
    are snapped.
    """
    if instance_kind not in INSTANCE_KINDS:
        raise DomainError(f"unknown instance kind {instance_kind!r}")
    if not 0.0 <= eta < 1.0:
        raise DomainError("eta must lie in [0, 1)")
    if instance_kind.startswith("EQMA"):
        eta = 0.0
    mu = b.mu_values
    mu = np.where(mu < MU_SNAP, 0.0, mu)
    mu = np.where(mu > 1.0 - MU_SNAP, 1.0, mu)
    tags = tuple("rejecting" if x >= 0.5 else "accepting" for x in mu)
    if mu.size == 0:
        raise InstanceContractViolation("no correctly initialised inputs")
    if instance_kind in ("NO", "EQMA-NO"):
        if mu.min() < 1.0 - eta - MU_SNAP:
            raise InstanceContractViolation(
                f"{instance_kind}: min mu = {mu.min():.6g} < 1 - eta = {1 - eta:.6g}")
    elif mu.min() > eta + MU_SNAP:
        raise InstanceContractViolation(
            f"{instance_kind}: min mu = {mu.min():.6g} > eta = {eta:.6g}")
    return MuReport(instance_kind, float(eta), mu, tags)


def circuit_block_form(circuit, clock) -> ProjectorBlockForm:
    """Block form of ``U^dag Pi_out U`` split by the input-penalty support.

    The register is first rotated so that ``G = supp(sum_t Pi_t)`` spans the
    leading coordinates (a plain permutation when the penalties are
    diagonal).  The returned ``V`` includes that rotation.  ``s`` may be 0
    (no penalties) or the full dimension.
    """
    dim = circuit.dim
    m = circuit.rotated_output_projector()
    pens = clock.penalty_projectors(circuit)
    total = sum(pens.values(), np.zeros((dim, dim), dtype=complex))
    if np.allclose(total, np.diag(np.diag(total))):
        support = np.real(np.diag(total)) > 0.5
        order = np.concatenate([np.flatnonzero(support), np.flatnonzero(~support)])
        basis = np.eye(dim)[:, order]
    else:
        lam, vecs = np.linalg.eigh(total)
        order = np.argsort(-(lam > 0.5), kind="stable")
        support = lam > 0.5
        basis = vecs[:, order]
    s = int(np.count_nonzero(support))
    mm = basis.conj().T @ m @ basis
    mm = _check_projector(mm, tol=1e-10)
    form = _block_form(mm, s)
    V = basis @ form.V
    return ProjectorBlockForm(form.s, V, form.D, form.blocks, form.r_a, form.r_b,
                              form.residual, dict(form.meta, register_basis=basis))
