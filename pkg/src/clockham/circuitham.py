"""
Standard-form Hamiltonians built from a circuit and an explicit clock.

Conventions
-----------
* The valid clock path has ``T = circuit.steps`` states, labelled in order
  ``path[0] -> path[1] -> ... -> path[T-1]``.  Gate ``t`` (``1 <= t <= T-1``)
  drives the transition ``path[t-1] -> path[t]``; steps with no gate are the
  identity.  Walks restricted to the path are therefore ``T``-site walks.
* Every transition ``a -> b`` contributes
  ``1/2 (|a><a| + |b><b|) (x) 1 - 1/2 (|b><a| (x) U + h.c.)``, so a
  gate-free path is exactly ``laplacian(T) (x) 1``.
* Qubit 0 is the most significant bit of the register index.
* Complex Hamiltonians are realified entrywise, ``a + ib -> [[a, -b], [b, a]]``;
  every eigenvalue then appears twice and reported spectra are halved.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import (ClockContractViolation, DomainError, InvalidGate,
                     NotInitialized, TooLarge)
from .linalg import DenseSymmetric, eig_dense
from .walks import laplacian, one_minus_cos

__all__ = [
    "Gate",
    "CircuitSpec",
    "biased_coin_circuit",
    "ClockSpec",
    "Subspace",
    "StandardFormHamiltonian",
    "HistoryState",
    "UnionFind",
    "assemble",
    "invariant_partition",
    "conjugation_W",
    "history_state",
    "acceptance_probability",
    "realify",
    "realify_vector",
    "linear_clock",
    "dynamic_init_clock",
    "penalty_segments",
    "mixed_subspace_bound",
    "max_dim",
]

UNITARY_TOL = 1e-12
PROJECTOR_TOL = 1e-12
DEFAULT_MAX_DIM = 16384


def max_dim() -> int:
    """Dimension cap for assembled Hamiltonians (``CLOCKHAM_MAX_DIM`` overrides)."""
    raw = os.environ.get("CLOCKHAM_MAX_DIM")
    return int(raw) if raw else DEFAULT_MAX_DIM


# ---------------------------------------------------------------------------
# Register helpers
# ---------------------------------------------------------------------------

def embed_gate(matrix: np.ndarray, targets: Sequence[int], qubits: int) -> np.ndarray:
    """Full ``2^q x 2^q`` operator of a gate acting on ``targets``."""
    targets = list(targets)
    w = len(targets)
    order = targets + [q for q in range(qubits) if q not in targets]
    full = np.kron(np.asarray(matrix, dtype=complex), np.eye(2 ** (qubits - w)))
    full = full.reshape((2,) * (2 * qubits))
    inv = list(np.argsort(order))
    full = full.transpose(inv + [qubits + i for i in inv])
    return full.reshape(2 ** qubits, 2 ** qubits)


def qubit_projector(qubit: int, value: int, qubits: int) -> np.ndarray:
    """Diagonal projector onto ``qubit == value``."""
    idx = np.arange(2 ** qubits)
    bit = (idx >> (qubits - 1 - qubit)) & 1
    return np.diag((bit == value).astype(float))


def realify(h: np.ndarray) -> np.ndarray:
    """Real symmetric embedding of a Hermitian matrix (entrywise 2x2 blocks)."""
    h = np.asarray(h)
    j = np.array([[0.0, -1.0], [1.0, 0.0]])
    return np.kron(h.real, np.eye(2)) + np.kron(h.imag, j)


def realify_vector(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    out = np.empty(2 * z.size)
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def _is_projector(p: np.ndarray, tol: float = PROJECTOR_TOL) -> bool:
    return (np.max(np.abs(p - p.conj().T)) <= tol
            and np.max(np.abs(p @ p - p)) <= tol)


# ---------------------------------------------------------------------------
# Circuit
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Gate:
    t: int
    targets: tuple
    matrix: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, Gate):
            return NotImplemented
        return (self.t == other.t and self.targets == other.targets
                and np.array_equal(self.matrix, other.matrix))

    def __hash__(self):
        return hash((self.t, self.targets, self.matrix.tobytes()))

    def __post_init__(self):
        targets = tuple(int(q) for q in self.targets)
        m = np.array(self.matrix, dtype=complex)
        w = len(targets)
        if w not in (1, 2) or len(set(targets)) != w:
            raise InvalidGate(f"gate at step {self.t}: needs 1 or 2 distinct targets, got {targets}")
        if m.shape != (2 ** w, 2 ** w):
            raise InvalidGate(f"gate at step {self.t}: matrix shape {m.shape} does not match {w} target(s)")
        if not np.all(np.isfinite(m)):
            raise InvalidGate(f"gate at step {self.t}: non-finite entry")
        err = np.max(np.abs(m.conj().T @ m - np.eye(2 ** w)))
        if err > UNITARY_TOL:
            raise InvalidGate(f"gate at step {self.t} is not unitary (deviation {err:.2e})")
        m.flags.writeable = False
        object.__setattr__(self, "t", int(self.t))
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class CircuitSpec:
    """A circuit of ``steps - 1`` (possibly identity) gates on ``qubits`` qubits.

    The rejection projector is ``|1><1|`` on the ``output`` qubit, or zero
    when ``output`` is ``None``.
    """

    qubits: int
    steps: int
    gates: tuple = ()
    ancillas: tuple = ()
    output: Optional[int] = 0

    def __post_init__(self):
        if self.qubits < 1:
            raise DomainError("a circuit needs at least one qubit")
        if self.steps < 2:
            raise DomainError("a circuit needs at least two clock steps")
        gates = tuple(g if isinstance(g, Gate) else Gate(*g) for g in self.gates)
        seen = set()
        for g in gates:
            if not 1 <= g.t <= self.steps - 1:
                raise InvalidGate(f"gate step {g.t} outside [1, {self.steps - 1}]")
            if g.t in seen:
                raise InvalidGate(f"more than one gate at step {g.t}")
            if any(not 0 <= q < self.qubits for q in g.targets):
                raise InvalidGate(f"gate at step {g.t} targets a qubit outside [0, {self.qubits})")
            seen.add(g.t)
        anc = tuple(sorted(set(int(a) for a in self.ancillas)))
        if any(not 0 <= a < self.qubits for a in anc):
            raise DomainError("ancilla index out of range")
        if self.output is not None and not 0 <= self.output < self.qubits:
            raise DomainError("output qubit out of range")
        object.__setattr__(self, "gates", tuple(sorted(gates, key=lambda g: g.t)))
        object.__setattr__(self, "ancillas", anc)

    @property
    def T(self) -> int:
        return self.steps

    @property
    def dim(self) -> int:
        return 2 ** self.qubits

    @property
    def is_real(self) -> bool:
        return all(np.all(g.matrix.imag == 0) for g in self.gates)

    def step_unitary(self, t: int) -> np.ndarray:
        for g in self.gates:
            if g.t == t:
                return embed_gate(g.matrix, g.targets, self.qubits)
        return np.eye(self.dim, dtype=complex)

    def unitaries(self) -> list:
        """``[U_1, ..., U_{T-1}]`` as full register operators."""
        return [self.step_unitary(t) for t in range(1, self.steps)]

    def prefix_unitaries(self) -> list:
        """``V_t = U_t ... U_1`` for ``t = 0..T-1`` (``V_0 = 1``)."""
        out = [np.eye(self.dim, dtype=complex)]
        for u in self.unitaries():
            out.append(u @ out[-1])
        return out

    def total_unitary(self) -> np.ndarray:
        return self.prefix_unitaries()[-1]

    def rejection_projector(self) -> np.ndarray:
        if self.output is None:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return qubit_projector(self.output, 1, self.qubits).astype(complex)

    def ancilla_penalty(self) -> np.ndarray:
        """Projector onto register states with any ancilla set to ``|1>``."""
        ok = np.eye(self.dim)
        for a in self.ancillas:
            ok = ok @ qubit_projector(a, 0, self.qubits)
        return np.eye(self.dim) - ok

    def rotated_output_projector(self) -> np.ndarray:
        u = self.total_unitary()
        return u.conj().T @ self.rejection_projector() @ u


def biased_coin_circuit(T: int, t_init: int, p_reject: float) -> CircuitSpec:
    """One qubit, both ancilla and output; its valid input is rejected with ``p_reject``.

    An ``Ry`` rotation at step ``t_init + 1`` (no gate when ``p_reject`` is 0).
    """
    if not 0.0 <= p_reject <= 1.0:
        raise DomainError("rejection probability must lie in [0, 1]")
    th = 2.0 * math.asin(math.sqrt(p_reject))
    ry = np.array([[math.cos(th / 2), -math.sin(th / 2)], [math.sin(th / 2), math.cos(th / 2)]])
    gates = (Gate(t_init + 1, (0,), ry),) if p_reject > 0 else ()
    return CircuitSpec(1, T, gates, (0,), 0)


# ---------------------------------------------------------------------------
# Clock
# ---------------------------------------------------------------------------

class UnionFind:
    """Disjoint-set forest with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, a: int) -> int:
        p = self.parent
        while p[a] != a:
            p[a] = p[p[a]]
            a = p[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]

    def groups(self) -> list:
        out: dict = {}
        for i in range(len(self.parent)):
            out.setdefault(self.find(i), []).append(i)
        return list(out.values())


@dataclass(frozen=True)
class Subspace:
    """One invariant clock subspace: labels in transition order."""

    labels: tuple
    kind: str  # "illegal-only" | "mixed" | "legal-only"
    is_cycle: bool
    illegal_mask: tuple

    def __len__(self):
        return len(self.labels)


@dataclass(frozen=True)
class ClockSpec:
    """Clock basis, deterministic transition rules and penalties.

    ``input_penalties`` maps a path time ``t < t_init`` to a register
    projector; ``None`` means "penalise any ancilla in |1>" at every such
    ``t``.  ``final_state_detectable`` records the locality assumption on
    the final clock state; it is carried along but cannot be checked here.
    """

    labels: tuple
    rules: tuple = ()
    illegal: frozenset = frozenset()
    t_init: int = 0
    input_penalties: Optional[Mapping] = None
    start: Optional[str] = None
    final_state_detectable: bool = True

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        if len(set(labels)) != len(labels) or not labels:
            raise ClockContractViolation("clock labels must be non-empty and distinct")
        rules = tuple((str(a), str(b)) for a, b in self.rules)
        known = set(labels)
        out_deg: dict = {}
        in_deg: dict = {}
        for a, b in rules:
            if a not in known or b not in known:
                raise ClockContractViolation(f"rule {a}->{b} references an unknown label")
            if a == b:
                raise ClockContractViolation(f"self-transition on {a}")
            out_deg[a] = out_deg.get(a, 0) + 1
            in_deg[b] = in_deg.get(b, 0) + 1
        bad = [x for x, d in list(out_deg.items()) + list(in_deg.items()) if d > 1]
        if bad:
            raise ClockContractViolation(
                f"more than one transition applies in one direction to {sorted(set(bad))}")
        illegal = frozenset(str(x) for x in self.illegal)
        if not illegal <= known:
            raise ClockContractViolation("illegal set references unknown labels")
        if self.t_init < 0:
            raise ClockContractViolation("t_init must be non-negative")
        pens = None
        if self.input_penalties is not None:
            pens = {}
            for t, p in dict(self.input_penalties).items():
                t = int(t)
                if not 0 <= t < self.t_init:
                    raise ClockContractViolation(f"input penalty at t={t} outside [0, t_init)")
                p = np.array(p, dtype=complex)
                if p.ndim != 2 or p.shape[0] != p.shape[1] or not _is_projector(p):
                    raise ClockContractViolation(f"input penalty at t={t} is not a projector")
                p.flags.writeable = False
                pens[t] = p
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "rules", rules)
        object.__setattr__(self, "illegal", illegal)
        object.__setattr__(self, "input_penalties", pens)

    @cached_property
    def successor(self) -> dict:
        return dict(self.rules)

    @cached_property
    def predecessor(self) -> dict:
        return {b: a for a, b in self.rules}

    @cached_property
    def partition(self) -> tuple:
        return tuple(invariant_partition(self))

    @cached_property
    def valid_path(self) -> Subspace:
        legal = [s for s in self.partition if s.kind == "legal-only"]
        if self.start is not None:
            hit = [s for s in self.partition if self.start in s.labels]
            if not hit or hit[0].kind != "legal-only":
                raise ClockContractViolation(f"start label {self.start} is not in a legal-only subspace")
            path = hit[0]
            if path.labels[0] != self.start:
                raise ClockContractViolation(f"start label {self.start} has a backward transition")
            return path
        if len(legal) != 1:
            raise ClockContractViolation(
                f"expected exactly one legal-only subspace, found {len(legal)}; set `start`")
        return legal[0]

    @property
    def T(self) -> int:
        return len(self.valid_path)

    def penalty_projectors(self, circuit: CircuitSpec) -> dict:
        """``{t: Pi_t}`` for ``t < t_init`` as register matrices."""
        if self.input_penalties is None:
            p = circuit.ancilla_penalty().astype(complex)
            return {t: p for t in range(self.t_init)}
        for t, p in self.input_penalties.items():
            if p.shape != (circuit.dim, circuit.dim):
                raise ClockContractViolation(
                    f"input penalty at t={t} has shape {p.shape}, register is {circuit.dim}")
        return dict(self.input_penalties)

    def check_against(self, circuit: CircuitSpec) -> None:
        path = self.valid_path
        if len(path) != circuit.steps:
            raise ClockContractViolation(
                f"valid clock path has {len(path)} states, circuit has {circuit.steps} steps")
        for g in circuit.gates:
            if g.t <= self.t_init and not np.allclose(g.matrix, np.eye(len(g.matrix)), atol=UNITARY_TOL):
                raise ClockContractViolation(
                    f"gate at step {g.t} is not the identity but t <= t_init = {self.t_init}")
        if self.t_init >= circuit.steps:
            raise ClockContractViolation("t_init must be smaller than the number of clock steps")


def invariant_partition(clock: ClockSpec) -> list:
    """Connected components of the transition graph, each tagged by legality.

    Each component is a simple path or a cycle (determinism guarantees
    this); labels are returned in transition order.  A legal-only cycle
    violates the clock contract.
    """
    index = {lab: i for i, lab in enumerate(clock.labels)}
    uf = UnionFind(len(clock.labels))
    for a, b in clock.rules:
        uf.union(index[a], index[b])
    succ, pred = clock.successor, clock.predecessor
    out = []
    for group in sorted(uf.groups(), key=min):
        members = [clock.labels[i] for i in group]
        heads = [x for x in members if x not in pred]
        is_cycle = not heads
        first = members[0] if is_cycle else heads[0]
        order = [first]
        while order[-1] in succ and succ[order[-1]] != first:
            order.append(succ[order[-1]])
        mask = tuple(lab in clock.illegal for lab in order)
        kind = "illegal-only" if all(mask) else ("mixed" if any(mask) else "legal-only")
        if kind == "legal-only" and is_cycle:
            raise ClockContractViolation(f"legal-only component {order} forms a loop")
        out.append(Subspace(tuple(order), kind, is_cycle, mask))
    return out


def linear_clock(T: int, t_init: int = 0, input_penalties=None) -> ClockSpec:
    """Plain ``T``-state line clock with no illegal states."""
    labels = tuple(str(t) for t in range(T))
    rules = tuple((labels[t], labels[t + 1]) for t in range(T - 1))
    return ClockSpec(labels, rules, frozenset(), t_init, input_penalties)


def dynamic_init_clock(T: int, t_init: Optional[int] = None, branches: int = 0,
                       branch_length: int = 6, reach: int = 3,
                       input_penalties=None) -> ClockSpec:
    """Line clock with an identity initialisation prefix and illegal branches.

    ``t_init`` defaults to ``ceil(sqrt(T))``.  Each branch is a separate chain
    of ``branch_length`` clock states in which every ``reach``-th state is
    illegal, so any legal state is at most ``reach`` transitions from an
    illegal one.
    """
    if t_init is None:
        t_init = math.ceil(math.sqrt(T))
    labels = [str(t) for t in range(T)]
    rules = [(labels[t], labels[t + 1]) for t in range(T - 1)]
    illegal = []
    for b in range(branches):
        chain = [f"b{b}_{j}" for j in range(branch_length)]
        labels += chain
        rules += list(zip(chain[:-1], chain[1:]))
        illegal += [chain[j] for j in range(reach - 1, branch_length, reach)]
        if not illegal or illegal[-1] not in chain:
            illegal.append(chain[-1])
    return ClockSpec(tuple(labels), tuple(rules), frozenset(illegal), t_init,
                     input_penalties, start="0")


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StandardFormHamiltonian:
    """``H = H_trans + H_pen + H_in + H_out`` on clock (x) register.

    Components are real symmetric; ``factor`` is 2 when realified.
    """

    circuit: CircuitSpec
    clock: ClockSpec
    components: dict
    factor: int
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def register_dim(self) -> int:
        return self.circuit.dim * self.factor

    @property
    def dim(self) -> int:
        return len(self.clock.labels) * self.register_dim

    @property
    def matrix(self) -> np.ndarray:
        return sum(self.components[k].matrix for k in ("trans", "pen", "in", "out"))

    def indices(self, labels: Iterable[str]) -> np.ndarray:
        pos = {lab: i for i, lab in enumerate(self.clock.labels)}
        r = self.register_dim
        return np.concatenate([np.arange(pos[x] * r, (pos[x] + 1) * r) for x in labels])

    def restrict(self, subspace, component: Optional[str] = None) -> np.ndarray:
        labels = subspace.labels if isinstance(subspace, Subspace) else tuple(subspace)
        idx = self.indices(labels)
        m = self.matrix if component is None else self.components[component].matrix
        return m[np.ix_(idx, idx)]

    def block_spectrum(self, subspace) -> np.ndarray:
        """Spectrum of ``H`` on one invariant subspace, multiplicity-halved."""
        lam = eig_dense(self.restrict(subspace), max_dim=self.dim).eigenvalues
        return halve_multiplicity(lam) if self.factor == 2 else lam

    def spectrum(self) -> np.ndarray:
        lam = np.concatenate([self.block_spectrum(s) for s in self.clock.partition])
        return np.sort(lam)

    def ground_energy(self) -> float:
        return float(min(self.block_spectrum(s)[0] for s in self.clock.partition))

    def legal_ground_energy(self) -> float:
        return float(self.block_spectrum(self.clock.valid_path)[0])

    def embed_state(self, z: np.ndarray, subspace=None) -> np.ndarray:
        """Real vector for a complex state given on ``subspace`` (default: valid path)."""
        z = np.asarray(z, dtype=complex).reshape(-1)
        return realify_vector(z) if self.factor == 2 else z.real.copy()


def halve_multiplicity(lam: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    lam = np.sort(lam)
    a, b = lam[0::2], lam[1::2]
    if a.size != b.size or np.max(np.abs(a - b), initial=0.0) > tol * max(1.0, np.max(np.abs(lam))):
        raise ValueError("realified spectrum is not pairwise degenerate")
    return 0.5 * (a + b)


def assemble(circuit: CircuitSpec, clock: ClockSpec, realify_always: bool = False,
             cap: Optional[int] = None) -> StandardFormHamiltonian:
    """Build all four standard-form components as dense real matrices."""
    clock.check_against(circuit)
    R = circuit.dim
    L = len(clock.labels)
    complex_needed = realify_always or not circuit.is_real
    pens = clock.penalty_projectors(circuit)
    if any(np.any(p.imag != 0) for p in pens.values()):
        complex_needed = True
    factor = 2 if complex_needed else 1
    cap = max_dim() if cap is None else cap
    if L * R * factor > cap:
        raise TooLarge(f"assembled dimension {L * R * factor} exceeds cap {cap}")

    pos = {lab: i for i, lab in enumerate(clock.labels)}
    path = clock.valid_path.labels
    step_of = {(path[t - 1], path[t]): t for t in range(1, len(path))}
    eye = np.eye(R, dtype=complex)

    def put(mat, a, b, block):
        mat[pos[a] * R:(pos[a] + 1) * R, pos[b] * R:(pos[b] + 1) * R] += block

    n = L * R
    h_trans = np.zeros((n, n), dtype=complex)
    for a, b in clock.rules:
        u = circuit.step_unitary(step_of[(a, b)]) if (a, b) in step_of else eye
        put(h_trans, a, a, 0.5 * eye)
        put(h_trans, b, b, 0.5 * eye)
        put(h_trans, b, a, -0.5 * u)
        put(h_trans, a, b, -0.5 * u.conj().T)

    h_pen = np.zeros((n, n), dtype=complex)
    for x in clock.illegal:
        put(h_pen, x, x, eye)

    h_in = np.zeros((n, n), dtype=complex)
    for t, p in pens.items():
        put(h_in, path[t], path[t], p)

    h_out = np.zeros((n, n), dtype=complex)
    put(h_out, path[-1], path[-1], circuit.rejection_projector())

    def finish(m):
        m = 0.5 * (m + m.conj().T)
        return DenseSymmetric(realify(m) if factor == 2 else m.real)

    comps = {"trans": finish(h_trans), "pen": finish(h_pen),
             "in": finish(h_in), "out": finish(h_out)}
    return StandardFormHamiltonian(circuit, clock, comps, factor,
                                   {"labels": clock.labels, "valid_path": path})


# ---------------------------------------------------------------------------
# Conjugation, history states, acceptance
# ---------------------------------------------------------------------------

def conjugation_W(circuit: CircuitSpec, clock: Optional[ClockSpec] = None,
                  factor: Optional[int] = None) -> np.ndarray:
    """Block-diagonal ``W = sum_t |t><t| (x) U_t ... U_1`` on the valid path.

    Satisfies ``W^T H_trans W = laplacian(T) (x) 1`` on that block.  Returned
    realified (real orthogonal) when ``factor == 2``.
    """
    if clock is not None:
        clock.check_against(circuit)
    factor = factor or (1 if circuit.is_real else 2)
    blocks = circuit.prefix_unitaries()
    R = circuit.dim
    T = circuit.steps
    w = np.zeros((T * R, T * R), dtype=complex)
    for t, v in enumerate(blocks):
        w[t * R:(t + 1) * R, t * R:(t + 1) * R] = v
    return realify(w) if factor == 2 else w.real


def walk_tensor_identity(T: int, register_dim: int) -> np.ndarray:
    return np.kron(laplacian(T).to_dense(), np.eye(register_dim))


@dataclass(frozen=True)
class HistoryState:
    """``sum_t c_t |t> (x) |psi_t>`` over the valid path."""

    coefficients: np.ndarray
    trajectory: np.ndarray  # shape (T, register dim), complex

    def vector(self) -> np.ndarray:
        return (self.coefficients[:, None] * self.trajectory).reshape(-1)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector()))


def no_profile(T: int) -> np.ndarray:
    """Ground state of ``laplacian(T) + |T><T|``, unit norm."""
    t = np.arange(T)
    c = np.sin((t + 1) * np.pi / (2 * T)) - np.sin(t * np.pi / (2 * T))
    return c / np.linalg.norm(c)


def history_state(circuit: CircuitSpec, initial, profile: str = "uniform") -> HistoryState:
    """History state with a uniform (YES) or penalised-end (NO) profile."""
    psi0 = np.asarray(initial, dtype=complex).reshape(-1)
    if psi0.size != circuit.dim:
        raise DomainError(f"initial state has length {psi0.size}, register is {circuit.dim}")
    nrm = np.linalg.norm(psi0)
    if abs(nrm - 1.0) > 1e-10:
        raise DomainError("initial register state must have unit norm")
    T = circuit.steps
    traj = np.array([v @ psi0 for v in circuit.prefix_unitaries()])
    if profile == "uniform":
        c = np.full(T, 1.0 / math.sqrt(T))
    elif profile in ("no_profile", "no"):
        c = no_profile(T)
    else:
        raise DomainError(f"unknown profile {profile!r}")
    return HistoryState(c, traj)


def acceptance_probability(circuit: CircuitSpec, witness, penalties=None) -> float:
    """``1 - <psi_T| Pi_out |psi_T>`` for a correctly initialised witness.

    ``penalties`` is an iterable of register projectors the witness must be
    annihilated by; default is the circuit's ancilla penalty.
    """
    x = np.asarray(witness, dtype=complex).reshape(-1)
    if x.size != circuit.dim:
        raise DomainError(f"witness has length {x.size}, register is {circuit.dim}")
    if abs(np.linalg.norm(x) - 1.0) > 1e-10:
        raise DomainError("witness must have unit norm")
    projs = [circuit.ancilla_penalty()] if penalties is None else list(penalties)
    for p in projs:
        leak = float(np.real(x.conj() @ p @ x))
        if leak > 1e-12:
            raise NotInitialized(f"witness has weight {leak:.3e} on a penalised input subspace")
    psi = circuit.total_unitary() @ x
    rej = float(np.real(psi.conj() @ circuit.rejection_projector() @ psi))
    return float(min(1.0, max(0.0, 1.0 - rej)))


# ---------------------------------------------------------------------------
# Mixed subspaces
# ---------------------------------------------------------------------------

def penalty_segments(subspace: Subspace) -> list:
    """Lengths of the sub-walks obtained by cutting just before each penalty.

    Every segment holds exactly one penalised site (the first segment may
    hold it anywhere, the others start with it).  The discarded cut edges
    are PSD, and a single penalty anywhere on an ``l``-site walk costs at
    least as much as one at the end.  A cycle is first rotated so that it
    starts on an illegal state.
    """
    mask = list(subspace.illegal_mask)
    if not any(mask):
        raise DomainError("subspace carries no penalties")
    if subspace.is_cycle:
        first = mask.index(True)
        mask = mask[first:] + mask[:first]
    hits = [i for i, m in enumerate(mask) if m]
    cuts = [0] + hits[1:] + [len(mask)]
    return [b - a for a, b in zip(cuts[:-1], cuts[1:])]


def mixed_subspace_bound(subspace: Subspace) -> float:
    """Lower bound ``1 - cos(pi / 2 l_max)`` on a penalised subspace's energy."""
    ell = max(penalty_segments(subspace))
    return one_minus_cos(math.pi / (2 * ell))
