"""
Predicted energy bounds and their numerical verification.

Every check produces a :class:`BoundReport` holding the predicted interval,
the computed value, a tolerance and the method used on each side.  Reports
serialise to JSON and to CSV with the columns in :data:`CSV_COLUMNS`.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .circuitham import (StandardFormHamiltonian, acceptance_probability,
                         mixed_subspace_bound, penalty_segments)
from .errors import DomainError
from .linalg import (DenseSymmetric, eig_dense, eig_tridiagonal, is_psd,
                     rayleigh, spectral_norm)
from .stoquastic import circuit_block_form, extract_mu
from .walks import (PenalizedWalk, endpoint_ground_energy, laplacian,
                    one_minus_cos)

__all__ = [
    "CSV_COLUMNS",
    "BoundReport",
    "TrialVector",
    "ScalingTable",
    "format_number",
    "reports_to_csv",
    "reports_to_json",
    "predict_eqma",
    "verify_eqma",
    "verify_qma_window",
    "verify_subspaces",
    "compute_eta",
    "sample_eta",
    "kkr_check",
    "two_block_matrix",
    "constant_rejection_bound",
    "verify_constant_rejection",
    "eqma_no_chain",
    "scaling_study",
]

CSV_COLUMNS = ("bound", "T", "params", "predicted_lo", "predicted_hi", "computed", "verdict")


def format_number(x) -> str:
    """Shortest decimal that round-trips to the same double."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


@dataclass(frozen=True)
class BoundReport:
    """Predicted interval ``[lo, hi]`` against a computed value.

    ``holds`` iff ``lo - tol <= computed <= hi + tol``.
    """

    name: str
    predicted_lo: float
    predicted_hi: float
    computed: float
    tol: float
    T: Optional[int] = None
    params: dict = field(default_factory=dict)
    predicted_by: str = ""
    computed_by: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def holds(self) -> bool:
        c = self.computed
        return bool(np.isfinite(c) and self.predicted_lo - self.tol <= c <= self.predicted_hi + self.tol)

    @property
    def verdict(self) -> str:
        return "holds" if self.holds else "violated"

    def params_string(self) -> str:
        return ";".join(f"{k}={format_number(v) if not isinstance(v, str) else v}"
                        for k, v in self.params.items())

    def row(self) -> dict:
        return {
            "bound": self.name,
            "T": format_number(self.T),
            "params": self.params_string(),
            "predicted_lo": format_number(self.predicted_lo),
            "predicted_hi": format_number(self.predicted_hi),
            "computed": format_number(self.computed),
            "verdict": self.verdict,
        }

    def to_dict(self) -> dict:
        """JSON-ready dict; non-finite numbers (open interval ends) become ``None``."""
        def num(x):
            x = float(x)
            return x if math.isfinite(x) else None

        def clean(v):
            if isinstance(v, (np.floating, float)):
                return num(v)
            if isinstance(v, (np.integer,)):
                return int(v)
            if isinstance(v, np.ndarray):
                return v.tolist()
            return v
        return {
            "bound": self.name,
            "T": self.T,
            "params": {k: clean(v) for k, v in self.params.items()},
            "predicted_lo": num(self.predicted_lo),
            "predicted_hi": num(self.predicted_hi),
            "computed": num(self.computed),
            "tol": num(self.tol),
            "verdict": self.verdict,
            "predicted_by": self.predicted_by,
            "computed_by": self.computed_by,
        }


def reports_to_csv(reports: Iterable[BoundReport], fh=None) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow(r.row())
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def reports_to_json(reports: Iterable[BoundReport], fh=None) -> str:
    text = json.dumps([r.to_dict() for r in reports], indent=2, allow_nan=False) + "\n"
    if fh is not None:
        fh.write(text)
    return text


# ---------------------------------------------------------------------------
# Exact-error instances
# ---------------------------------------------------------------------------

def predict_eqma(T: int, instance: str) -> float:
    if T < 2:
        raise DomainError("T must be at least 2")
    if instance == "YES":
        return 0.0
    if instance == "NO":
        return one_minus_cos(math.pi / (2 * T))
    raise DomainError(f"instance must be YES or NO, got {instance!r}")


def _legal_ground_energy(h: StandardFormHamiltonian) -> float:
    legal = [s for s in h.clock.partition if s.kind == "legal-only"]
    return float(min(h.block_spectrum(s)[0] for s in legal))


def classify_eqma(h: StandardFormHamiltonian) -> str:
    """``"YES"``/``"NO"`` from the block parameters; raises if neither."""
    form = circuit_block_form(h.circuit, h.clock)
    try:
        extract_mu(form, "EQMA-NO")
        return "NO"
    except Exception:
        extract_mu(form, "EQMA-YES")
        return "YES"


def verify_eqma(h: StandardFormHamiltonian, instance: Optional[str] = None,
                tol: float = 1e-9) -> BoundReport:
    """Legal-block ground energy of an exact-error instance vs the closed form."""
    T = h.circuit.steps
    kind = instance or classify_eqma(h)
    extract_mu(circuit_block_form(h.circuit, h.clock), "EQMA-" + kind)
    lam0 = _legal_ground_energy(h)
    pred = predict_eqma(T, kind)
    return BoundReport(f"eqma-{kind.lower()}", pred, pred, lam0, tol, T,
                       {"instance": kind, "t_init": h.clock.t_init},
                       "0 (YES) or 1-cos(pi/2T) (NO)", "eig_dense on legal-only block")


def verify_subspaces(h: StandardFormHamiltonian, tol: float = 1e-10) -> list:
    """Lower bounds on the illegal-only (>= 1) and mixed subspaces."""
    out = []
    for s in h.clock.partition:
        if s.kind == "legal-only":
            continue
        lam0 = float(h.block_spectrum(s)[0])
        if s.kind == "illegal-only":
            lo, how = 1.0, "illegal-only block >= 1"
        else:
            lo, how = mixed_subspace_bound(s), "1-cos(pi/2l), l = longest penalty segment"
        out.append(BoundReport(f"subspace-{s.kind}", lo, math.inf, lam0, tol, len(s),
                               {"first": s.labels[0], "cycle": s.is_cycle,
                                "segments": "/".join(map(str, penalty_segments(s))) if s.kind == "mixed" else ""},
                               how, "eig_dense on block"))
    return out


# ---------------------------------------------------------------------------
# Bounded-error instances
# ---------------------------------------------------------------------------

def compute_eta(circuit, clock, instance: str) -> float:
    """Exact error parameter of a circuit instance.

    The extreme rejection probability over correctly initialised witnesses
    is the smallest eigenvalue of the rotated output projector restricted to
    the kernel of the input penalties; ``YES`` returns it, ``NO`` returns one
    minus it.
    """
    form = circuit_block_form(circuit, clock)
    mu = form.mu_values
    if mu.size == 0:
        raise DomainError("no correctly initialised witnesses")
    best = float(np.clip(mu.min(), 0.0, 1.0))
    if instance == "YES":
        return best
    if instance == "NO":
        return 1.0 - best
    raise DomainError(f"instance must be YES or NO, got {instance!r}")


def sample_eta(circuit, clock, instance: str, samples: int = 64, seed: int = 0) -> float:
    """Sampled error parameter over kernel basis states and random kernel states.

    Always on the pessimistic side of :func:`compute_eta`: it can only
    over-estimate the YES error and under-estimate the NO error.
    """
    pens = list(clock.penalty_projectors(circuit).values())
    total = sum(pens, np.zeros((circuit.dim, circuit.dim), dtype=complex))
    lam, vecs = np.linalg.eigh(total)
    kernel = vecs[:, lam < 0.5]
    rng = np.random.default_rng(seed)
    cands = [kernel[:, i] for i in range(kernel.shape[1])]
    for _ in range(samples):
        z = kernel @ (rng.normal(size=kernel.shape[1]) + 1j * rng.normal(size=kernel.shape[1]))
        cands.append(z / np.linalg.norm(z))
    rej = [1.0 - acceptance_probability(circuit, x, pens) for x in cands]
    return float(min(rej)) if instance == "YES" else float(1.0 - min(rej))


def verify_qma_window(h: StandardFormHamiltonian, eta: float, instance: str) -> BoundReport:
    """``lambda_0`` of the legal block inside the bounded-error window.

    YES: ``[0, sqrt(eta)]``.  NO: ``[1 - cos(pi/2T) - sqrt(eta), 1 - cos(pi/2T)]``.
    """
    if not 0.0 <= eta < 1.0:
        raise DomainError("eta must lie in [0, 1)")
    if instance not in ("YES", "NO"):
        raise DomainError(f"instance must be YES or NO, got {instance!r}")
    extract_mu(circuit_block_form(h.circuit, h.clock), instance, eta)
    T = h.circuit.steps
    lam0 = _legal_ground_energy(h)
    gap = one_minus_cos(math.pi / (2 * T))
    root = math.sqrt(eta)
    if instance == "YES":
        lo, hi, how = 0.0, root, "[0, sqrt(eta)]"
    else:
        lo, hi, how = gap - root, gap, "[1-cos(pi/2T) - sqrt(eta), 1-cos(pi/2T)]"
    return BoundReport(f"qma-window-{instance.lower()}", lo, hi, lam0, 1e-10, T,
                       {"eta": float(eta), "instance": instance},
                       how, "eig_dense on legal-only block")


def kkr_check(h1, h2, tol: float = 1e-10) -> BoundReport:
    """Sorted eigenvalues move by at most the spectral norm of the difference."""
    a = h1 if isinstance(h1, DenseSymmetric) else DenseSymmetric(h1)
    b = h2 if isinstance(h2, DenseSymmetric) else DenseSymmetric(h2)
    if a.dim != b.dim:
        raise DomainError(f"dimension mismatch: {a.dim} vs {b.dim}")
    la = eig_dense(a).eigenvalues
    lb = eig_dense(b).eigenvalues
    gap = float(np.max(np.abs(la - lb)))
    norm = spectral_norm(a.matrix - b.matrix)
    return BoundReport("kkr", 0.0, norm, gap, tol, None, {"dim": a.dim},
                       "||H1 - H2||", "max_j |lambda_j(H1) - lambda_j(H2)| via eig_dense")


# ---------------------------------------------------------------------------
# Constant rejection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialVector:
    """Trial state on the two-block space ``(G walk) (+) (G^c walk)``.

    The G part is the ground state ``u`` of ``laplacian(T') + 1/2 |first>``
    scaled so that its last entry is ``sqrt(mu)``; the G^c part is the
    constant vector ``sqrt(1 - mu)``.  Both coupled sites then sit in the
    kernel of ``P(mu)``.
    """

    T: int
    t_init: int
    mu: float
    u: np.ndarray

    @property
    def T_prime(self) -> int:
        return self.T - self.t_init

    @property
    def u_last(self) -> float:
        return float(self.u[-1])

    @property
    def gamma0(self) -> float:
        return one_minus_cos(math.pi / (2 * self.T_prime + 1))

    @property
    def vector(self) -> np.ndarray:
        g = math.sqrt(self.mu) / self.u_last * self.u
        w = np.full(self.T, math.sqrt(1.0 - self.mu))
        return np.concatenate([g, w])

    def closed_form_quotient(self) -> float:
        tu2 = self.T * self.u_last ** 2
        return self.mu * self.gamma0 / (self.mu + (1.0 - self.mu) * tu2)


def half_penalty_ground_state(n: int) -> np.ndarray:
    """Unit ground state of ``laplacian(n) + 1/2 |first><first|``."""
    t = np.arange(1, n + 1)
    u = np.sin(t * np.pi / (2 * n + 1))
    return u / np.linalg.norm(u)


def two_block_matrix(T: int, t_init: int, mu: float) -> np.ndarray:
    """``(laplacian(T') + 1/2|first>) (+) laplacian(T)`` coupled by ``P(mu)``.

    ``P(mu)`` acts on the last site of each walk (the final clock time),
    with diagonal ``1 - mu`` on the G side and ``mu`` on the G^c side.
    """
    tp = T - t_init
    n = tp + T
    b = np.zeros((n, n))
    b[:tp, :tp] = laplacian(tp).to_dense()
    b[0, 0] += 0.5
    b[tp:, tp:] = laplacian(T).to_dense()
    i, j = tp - 1, n - 1
    off = -math.sqrt(mu * (1.0 - mu))
    b[i, i] += 1.0 - mu
    b[j, j] += mu
    b[i, j] += off
    b[j, i] += off
    return b


def constant_rejection_bound(T: int, t_init: int, mu: float, c: float = 2.0):
    """Trial vector and the bound ``mu (1 - cos(pi/(2T'+1)))``.

    Requires ``t_init <= ceil(c sqrt(T))`` and ``T - t_init >= 2``.  Checks
    that the trial quotient does not exceed the bound and that
    ``T u_{T'}^2 >= 1``.
    """
    if not 0.0 <= mu <= 1.0:
        raise DomainError("mu must lie in [0, 1]")
    if t_init < 0 or t_init > math.ceil(c * math.sqrt(T)):
        raise DomainError(f"t_init = {t_init} exceeds ceil({c} sqrt(T))")
    if T - t_init < 2:
        raise DomainError("need T - t_init >= 2")
    trial = TrialVector(T, t_init, float(mu), half_penalty_ground_state(T - t_init))
    bound = mu * trial.gamma0
    tu2 = T * trial.u_last ** 2
    if tu2 < 1.0:
        raise AssertionError(f"T u_T'^2 = {tu2} < 1")
    q = rayleigh(two_block_matrix(T, t_init, mu), trial.vector)
    if q > bound * (1 + 1e-9) + 1e-300:
        raise AssertionError(f"trial quotient {q} exceeds bound {bound}")
    return trial, bound


def verify_constant_rejection(T: int, t_init: int, mu: float,
                              h: Optional[StandardFormHamiltonian] = None) -> list:
    trial, bound = constant_rejection_bound(T, t_init, mu)
    b = two_block_matrix(T, t_init, mu)
    q = rayleigh(b, trial.vector)
    params = {"t_init": t_init, "mu": float(mu)}
    pred = "mu (1-cos(pi/(2T'+1)))"
    out = [
        BoundReport("constant-rejection-trial", 0.0, bound * (1 + 1e-9), q, 0.0, T, params,
                    pred, "Rayleigh quotient of trial vector"),
        BoundReport("constant-rejection-aux", 1.0, math.inf, T * trial.u_last ** 2, 0.0, T, params,
                    "T u_T'^2 >= 1", "explicitly normalised u"),
        BoundReport("constant-rejection-block", 0.0, q, float(eig_dense(b).eigenvalues[0]), 1e-12,
                    T, params, "trial quotient", "eig_dense on two-block matrix"),
    ]
    if h is not None:
        out.append(BoundReport("constant-rejection-assembled", 0.0, bound * (1 + 1e-9),
                               _legal_ground_energy(h), 1e-12, T, params, pred,
                               "eig_dense on assembled legal block"))
    return out


# ---------------------------------------------------------------------------
# Penalty comparisons
# ---------------------------------------------------------------------------

def eqma_no_chain(T: int, Z: Sequence[int]) -> dict:
    """Compare ``K_in(Z) = laplacian(T) + sum_{z in Z} |z><z|`` with ``K_out``.

    Sites are 1-indexed and ``K_out = laplacian(T) + |T><T|``.  Returns the
    PSD check of ``K_in(Z) - (laplacian(T) + |j><j|)`` (``j = min Z``), the
    ground-energy comparison with ``K_out``, and whether the second step
    also holds in the PSD order.
    """
    Z = sorted(set(int(z) for z in Z))
    if not Z or Z[0] < 1 or Z[-1] > T:
        raise DomainError("Z must be a non-empty subset of 1..T")
    j = Z[0]
    k_in = PenalizedWalk(T, [(z, 1.0) for z in Z]).to_matrix().to_dense()
    k_j = PenalizedWalk(T, [(j, 1.0)]).to_matrix().to_dense()
    k_out = PenalizedWalk(T, [(T, 1.0)]).to_matrix().to_dense()
    lam_j = eig_tridiagonal(PenalizedWalk(T, [(j, 1.0)]).to_matrix()).eigenvalues[0]
    lam_out = eig_tridiagonal(PenalizedWalk(T, [(T, 1.0)]).to_matrix()).eigenvalues[0]
    return {
        "j": j,
        "in_ge_j_psd": is_psd(k_in - k_j),
        "j_ge_out_ground": bool(lam_j >= lam_out - 1e-12),
        "j_ge_out_psd": is_psd(k_j - k_out),
        "lambda_j": float(lam_j),
        "lambda_out": float(lam_out),
    }


# ---------------------------------------------------------------------------
# Scaling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingTable:
    rows: tuple  # (k, T, lambda_0, lambda_0 T^2 / k)
    factor: float

    @property
    def ratios(self) -> np.ndarray:
        return np.array([r[3] for r in self.rows if r[0] > 0])

    @property
    def band(self) -> tuple:
        r = self.ratios
        return (float(r.min()), float(r.max())) if r.size else (float("nan"), float("nan"))

    @property
    def band_ratio(self) -> float:
        lo, hi = self.band
        return hi / lo if lo > 0 else math.inf

    @property
    def holds(self) -> bool:
        zero_ok = all(r[2] <= 1e-12 for r in self.rows if r[0] == 0)
        return zero_ok and (self.ratios.size == 0 or self.band_ratio < self.factor)

    def reports(self) -> list:
        lo, hi = self.band
        out = []
        for k, T, lam, ratio in self.rows:
            if k == 0:
                out.append(BoundReport("scaling", 0.0, 0.0, lam, 1e-12, T, {"k": k},
                                       "lambda_0 = 0", "endpoint secular roots"))
            else:
                out.append(BoundReport("scaling", lo, lo * self.factor, ratio, 0.0, T, {"k": k},
                                       f"band [min, {self.factor:g} min] of lambda_0 T^2/k",
                                       "endpoint secular roots"))
        return out


def _scaling_point(args):
    k, T = args
    lam = endpoint_ground_energy(T, k / T) if k > 0 else endpoint_ground_energy(T, 0.0)
    return (k, T, lam, lam * T * T / k if k > 0 else 0.0)


def scaling_study(k_values: Sequence[float], T_grid: Sequence[int], factor: float = 10.0,
                  jobs: Optional[int] = 1) -> ScalingTable:
    """``lambda_0(H_T(k/T)) T^2 / k`` over a grid, with a band-ratio gate."""
    if list(T_grid) != sorted(T_grid):
        raise DomainError("T grid must be ascending")
    points = [(float(k), int(T)) for k in k_values for T in T_grid]
    for k, T in points:
        if k < 0 or k > T:
            raise DomainError(f"k = {k} gives mu outside [0, 1] at T = {T}")
    if jobs and jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_scaling_point, points))
    else:
        rows = [_scaling_point(p) for p in points]
    return ScalingTable(tuple(rows), factor)
