import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import ortho_group, unitary_group

from clockham.circuitham import (CircuitSpec, Gate, acceptance_probability,
                                 biased_coin_circuit, linear_clock)
from clockham.errors import DomainError, InstanceContractViolation, NotAProjector
from clockham.stoquastic import circuit_block_form, extract_mu, stoquastize

X = np.array([[0, 1], [1, 0]])


def random_projector(rng, d, r, complex_=False):
    if complex_:
        q = unitary_group.rvs(d, random_state=rng)[:, :r] if d > 1 else np.ones((1, 1))
    else:
        q = ortho_group.rvs(d, random_state=rng)[:, :r] if d > 1 else np.ones((1, 1))
    return q @ q.conj().T


def structured_projector(rng, d, r, s):
    """Range mixes coordinate vectors on both sides with generic ones."""
    cols = []
    if s > 0:
        cols.append(np.eye(d)[:, rng.integers(0, s)])
    if s < d:
        cols.append(np.eye(d)[:, rng.integers(s, d)])
    while len(cols) < r:
        cols.append(rng.normal(size=d))
    q, _ = np.linalg.qr(np.column_stack(cols[:r]))
    return q @ q.T


def check_form(m, s):
    f = stoquastize(m, s)
    d = m.shape[0]
    assert np.max(np.abs(f.reconstruct() - m)) < 1e-10
    assert np.allclose(f.V.conj().T @ f.V, np.eye(d), atol=1e-10)
    # V is block diagonal with the split
    assert np.max(np.abs(f.V[:s, s:]), initial=0.0) == 0.0
    assert np.max(np.abs(f.V[s:, :s]), initial=0.0) == 0.0
    off = np.where(f.pattern(), 0.0, f.D)
    assert np.max(np.abs(off)) < 1e-11
    offdiag = f.D - np.diag(np.diag(f.D))
    assert np.all(offdiag <= 0.0)
    mu = np.array([b.mu for b in f.pairs])
    assert np.all((mu >= 0) & (mu <= 1))
    for b in f.pairs:
        p = b.matrix()
        assert np.max(np.abs(p @ p - p)) < 1e-11
    assert np.all((f.mu_values >= 0) & (f.mu_values <= 1))
    return f


# -- examples -----------------------------------------------------------------

def test_plus_state_gives_single_half_block():
    v = np.array([1.0, 1.0]) / math.sqrt(2)
    f = check_form(np.outer(v, v), 1)
    assert len(f.pairs) == 1
    assert f.pairs[0].mu == pytest.approx(0.5, abs=1e-15)
    assert np.allclose(f.D, [[0.5, -0.5], [-0.5, 0.5]], atol=1e-15)


def test_coordinate_projector_is_uncoupled():
    f = check_form(np.diag([1.0, 0.0]), 1)
    assert f.pairs == []
    assert np.array_equal(f.D, np.diag([1.0, 0.0]))
    assert sorted((b.kind, b.value) for b in f.blocks) == [("a", 1.0), ("b", 0.0)]


def test_random_rank_projector_in_dim_eight():
    rng = np.random.default_rng(0)
    for r in range(0, 9):
        f = check_form(random_projector(rng, 8, r), 4)
        assert f.meta["rank"] == r


def test_rejects_non_projectors():
    with pytest.raises(NotAProjector):
        stoquastize(np.diag([0.5, 1.0]), 1)
    with pytest.raises(NotAProjector):
        stoquastize(np.array([[0.0, 1.0], [0.0, 0.0]]), 1)
    with pytest.raises(DomainError):
        stoquastize(np.eye(2), 0)
    with pytest.raises(DomainError):
        stoquastize(np.eye(2), 2)


def test_pairs_ordered_by_descending_mu():
    rng = np.random.default_rng(3)
    f = check_form(random_projector(rng, 12, 5), 6)
    mu = [b.mu for b in f.pairs]
    assert mu == sorted(mu, reverse=True)


def test_complex_projector():
    rng = np.random.default_rng(4)
    m = random_projector(rng, 6, 3, complex_=True)
    f = check_form(m, 3)
    assert np.iscomplexobj(f.V)


# -- random sweep -------------------------------------------------------------

def test_thousand_random_projectors():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for i in range(1000):
        d = int(rng.integers(2, 17))
        s = int(rng.integers(1, d))
        r = int(rng.integers(0, d + 1))
        m = structured_projector(rng, d, r, s) if i % 4 == 0 and r >= 2 else random_projector(rng, d, r)
        f = check_form(m, s)
        worst = max(worst, f.residual)
        # rank of the coupling block equals the rank of the original cross block
        rank_ab = np.linalg.matrix_rank(f.D_ab, tol=1e-9)
        assert rank_ab == np.linalg.matrix_rank(m[:s, s:], tol=1e-9)
        assert rank_ab <= min(f.r_a, f.r_b)
        assert rank_ab == len(f.pairs)
    assert worst < 1e-10


@settings(max_examples=80, deadline=None)
@given(d=st.integers(2, 10), data=st.data())
def test_generic_projectors_have_full_coupling(d, data):
    # generic range with rank <= min(s, d - s) couples every a-side 1
    s = data.draw(st.integers(1, d - 1))
    r = data.draw(st.integers(0, min(s, d - s)))
    seed = data.draw(st.integers(0, 2**31 - 1))
    f = check_form(random_projector(np.random.default_rng(seed), d, r), s)
    assert np.linalg.matrix_rank(f.D_ab, tol=1e-9) == min(f.r_a, f.r_b) == r


def test_coupling_rank_can_fall_below_min_of_side_ranks():
    # a 1 on each side with nothing linking them: rank D_ab = 0 < min(r_a, r_b)
    f = check_form(np.diag([1.0, 0.0, 1.0]), 2)
    assert f.r_a == 1 and f.r_b == 1
    assert np.linalg.matrix_rank(f.D_ab) == 0
    v = np.array([0.0, 1.0, 1.0]) / math.sqrt(2)
    f = check_form(np.diag([1.0, 0.0, 0.0]) + np.outer(v, v), 2)
    assert (f.r_a, f.r_b, len(f.pairs)) == (2, 1, 1)


# -- mu extraction ------------------------------------------------------------

def reject_circuit(T):
    return CircuitSpec(1, T, (Gate(2, (0,), X),), (0,), 0)


def test_eqma_no_has_all_mu_one():
    c = reject_circuit(6)
    rep = extract_mu(circuit_block_form(c, linear_clock(6, 1)), "EQMA-NO")
    assert np.all(rep.mu == 1.0)
    assert set(rep.tags) == {"rejecting"}


def test_eqma_yes_has_some_mu_zero():
    c = CircuitSpec(1, 6, (), (0,), 0)
    rep = extract_mu(circuit_block_form(c, linear_clock(6, 1)), "EQMA-YES")
    assert rep.min_mu == 0.0
    with pytest.raises(InstanceContractViolation):
        extract_mu(circuit_block_form(c, linear_clock(6, 1)), "EQMA-NO")


def test_biased_no_instance_with_third_error():
    c = biased_coin_circuit(8, 1, 2.0 / 3.0)
    clock = linear_clock(8, 1)
    rep = extract_mu(circuit_block_form(c, clock), "NO", eta=1.0 / 3.0)
    assert rep.min_mu >= 2.0 / 3.0 - 1e-12
    # direct sweep over the kernel basis
    pens = list(clock.penalty_projectors(c).values())
    rej = 1.0 - acceptance_probability(c, [1, 0], pens)
    assert rep.min_mu == pytest.approx(rej, abs=1e-12)
    with pytest.raises(InstanceContractViolation):
        extract_mu(circuit_block_form(c, clock), "NO", eta=0.25)


def test_two_qubit_mu_matches_kernel_sweep():
    # ancilla 0, output 1; H on the output and a controlled flip
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    c = CircuitSpec(2, 5, (Gate(2, (1,), h), Gate(3, (1, 0), np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]))), (0,), 1)
    clock = linear_clock(5, 1)
    f = circuit_block_form(c, clock)
    assert f.s == 2
    pens = list(clock.penalty_projectors(c).values())
    kernel_rej = [1.0 - acceptance_probability(c, e, pens) for e in ([1, 0, 0, 0], [0, 1, 0, 0])]
    # mu are the eigenvalues of the rejection projector on the kernel
    pk = c.rotated_output_projector()[:2, :2]
    assert np.allclose(np.sort(f.mu_values), np.sort(np.linalg.eigvalsh(pk)), atol=1e-12)
    assert min(f.mu_values) <= min(kernel_rej) + 1e-12


def test_extract_mu_validates_arguments():
    f = stoquastize(np.diag([1.0, 0.0]), 1)
    with pytest.raises(DomainError):
        extract_mu(f, "MAYBE")
    with pytest.raises(DomainError):
        extract_mu(f, "YES", eta=1.0)


def test_no_penalties_gives_s_zero():
    c = CircuitSpec(1, 3, (), (), 0)
    f = circuit_block_form(c, linear_clock(3, 0))
    assert f.s == 0
    assert np.allclose(f.reconstruct(), c.rotated_output_projector())
