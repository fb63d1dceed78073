import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from clockham.errors import DomainError, InvalidSize, NearPole, NoDecomposition
from clockham.linalg import eig_dense, eig_tridiagonal, is_psd
from clockham.walks import (PenalizedWalk, analytic_spectrum_full_penalty,
                            analytic_spectrum_half_penalty,
                            char_poly_continuant, continuant_g,
                            endpoint_ground_energy, endpoint_spectrum,
                            free_spectrum, g_eval, g_poles, g_zeros,
                            laplacian, one_minus_cos, penalized_spectrum,
                            starting_penalty_scan, uncouple)


def lapack(walk):
    m = walk.to_matrix()
    return scipy.linalg.eigh_tridiagonal(m.diag, m.offdiag, eigvals_only=True)


# -- laplacian ------------------------------------------------------------------

def test_laplacian_two_sites():
    assert np.array_equal(laplacian(2).to_dense(), [[0.5, -0.5], [-0.5, 0.5]])


def test_laplacian_single_site_and_zero():
    assert np.array_equal(laplacian(1).to_dense(), [[0.0]])
    with pytest.raises(InvalidSize):
        laplacian(0)


@pytest.mark.parametrize("n", [2, 4, 17])
def test_laplacian_rows_sum_to_zero(n):
    assert np.allclose(laplacian(n).to_dense().sum(axis=1), 0.0)


def test_laplacian_is_sum_of_edge_projectors():
    n = 7
    m = np.zeros((n, n))
    for t in range(n - 1):
        e = np.zeros(n)
        e[t], e[t + 1] = -1.0, 1.0
        m += 0.5 * np.outer(e, e)
    assert np.allclose(laplacian(n).to_dense(), m)


# -- PenalizedWalk ------------------------------------------------------------------

def test_penalized_walk_validation():
    with pytest.raises(DomainError):
        PenalizedWalk(4, ((5, 1.0),))
    with pytest.raises(DomainError):
        PenalizedWalk(4, ((2, 1.0), (2, 0.5)))
    with pytest.raises(DomainError):
        PenalizedWalk(4, ((2, -1.0),))
    with pytest.raises(InvalidSize):
        PenalizedWalk(0)


def test_penalized_walk_matrix():
    w = PenalizedWalk(5, ((2, 0.3), (5, 1.0)))
    d = w.to_matrix().diag
    assert np.allclose(d, [0.5, 1.3, 1.0, 1.0, 1.5])


@pytest.mark.parametrize("T", [4, 9, 64])
def test_reflection_symmetry(T):
    for k in range(1, T + 1):
        w = PenalizedWalk(T, ((k, 1.0),))
        assert np.allclose(penalized_spectrum(T, w.penalties),
                           penalized_spectrum(T, w.reflected().penalties), atol=1e-12)


# -- closed forms ---------------------------------------------------------------------

def test_full_penalty_two_sites():
    assert np.allclose(analytic_spectrum_full_penalty(2),
                       [one_minus_cos(math.pi / 4), one_minus_cos(3 * math.pi / 4)])


def test_full_penalty_first_term_large_T():
    assert analytic_spectrum_full_penalty(1000)[0] == pytest.approx(1 - math.cos(math.pi / 2000), rel=1e-12)
    assert analytic_spectrum_full_penalty(1000)[0] == pytest.approx(1.2337e-6, rel=1e-4)


@pytest.mark.parametrize("T", [1, 2, 8, 31, 128])
def test_full_penalty_matches_sturm(T):
    got = eig_tridiagonal(PenalizedWalk.endpoint(T, 1.0).to_matrix()).eigenvalues
    assert np.max(np.abs(got - analytic_spectrum_full_penalty(T))) < 1e-12


def test_half_penalty_three_sites():
    expect = [one_minus_cos(j * math.pi / 7) for j in (1, 3, 5)]
    assert np.allclose(analytic_spectrum_half_penalty(3), expect)


@pytest.mark.parametrize("T", [1, 7, 50, 128])
def test_half_penalty_matches_sturm(T):
    got = eig_tridiagonal(PenalizedWalk.endpoint(T, 0.5).to_matrix()).eigenvalues
    assert np.max(np.abs(got - analytic_spectrum_half_penalty(T))) < 1e-12


def test_half_penalty_ground_energy_decreases():
    e = [analytic_spectrum_half_penalty(T)[0] for T in range(1, 60)]
    assert np.all(np.diff(e) < 0)


@pytest.mark.parametrize("T", [1, 5, 40])
def test_free_spectrum_matches_lapack(T):
    assert np.allclose(free_spectrum(T), lapack(PenalizedWalk(T)), atol=1e-12)


# -- continuant -----------------------------------------------------------------------

def test_continuant_zero_at_eigenvalue():
    assert abs(char_poly_continuant(PenalizedWalk(2), 0.0).value) < 1e-15
    lam = one_minus_cos(math.pi / 6)
    assert abs(char_poly_continuant(PenalizedWalk.endpoint(3, 1.0), lam).value) < 1e-12


def cofactor_det(a):
    n = a.shape[0]
    if n == 1:
        return a[0, 0]
    return sum((-1) ** j * a[0, j] * cofactor_det(np.delete(a[1:], j, axis=1)) for j in range(n))


def test_continuant_sign_matches_cofactor_expansion():
    rng = np.random.default_rng(2)
    for _ in range(50):
        w = PenalizedWalk(4, tuple((k, rng.uniform(0, 2)) for k in rng.choice(np.arange(1, 5), 2, replace=False)))
        lam = rng.uniform(-0.5, 3.5)
        det = cofactor_det(w.to_matrix().to_dense() - lam * np.eye(4))
        c = char_poly_continuant(w, lam)
        assert c.sign == np.sign(det)
        assert c.value == pytest.approx(det, rel=1e-10, abs=1e-14)


def test_continuant_does_not_overflow_at_large_T():
    c = char_poly_continuant(PenalizedWalk(4096), 1.7)
    assert np.isfinite(c.logabs)
    assert c.sign != 0


def test_free_walk_zeros_are_laplacian_eigenvalues():
    # the zeros of the mu=0 determinant are 1-cos(k pi/T), not 1-cos(2k pi/(2T+1))
    T = 9
    p0 = lambda lam: char_poly_continuant(PenalizedWalk(T), lam)
    scale = np.exp(p0(0.37).logabs)
    for k in range(T):
        assert abs(p0(one_minus_cos(k * math.pi / T)).value) < 1e-12 * max(1, scale)
    others = [abs(p0(one_minus_cos(2 * k * math.pi / (2 * T + 1))).value) for k in range(1, T)]
    assert min(others) > 1e-4


# -- secular function -----------------------------------------------------------------

def test_g_poles_and_zeros():
    T = 7
    assert np.allclose(g_poles(T), analytic_spectrum_full_penalty(T))
    for z in g_zeros(T)[1:]:
        assert abs(g_eval(T, z)) < 1e-12
    poles = g_poles(T)
    for p in poles[:-1] if poles[-1] >= 2 else poles:
        assert abs(g_eval(T, p - 1e-7)) > 1e3


def test_g_interlacing():
    # between consecutive poles g increases from -inf to +inf through one zero
    T = 7
    poles = g_poles(T)
    zeros = g_zeros(T)
    for k in range(1, T):
        assert poles[k - 1] < zeros[k] < poles[k]
        grid = np.linspace(poles[k - 1] + 1e-6, poles[k] - 1e-6, 200)
        assert np.all(np.diff(g_eval(T, grid)) > 0)


@pytest.mark.parametrize("T", [1, 3, 8, 25])
def test_g_is_one_at_half_penalty_eigenvalues(T):
    for lam in analytic_spectrum_half_penalty(T):
        assert g_eval(T, lam) == pytest.approx(1.0, rel=1e-9)


def test_g_domain_errors():
    with pytest.raises(DomainError):
        g_eval(5, 0.0)
    with pytest.raises(DomainError):
        g_eval(5, 2.0)
    with pytest.raises(NearPole):
        g_eval(5, g_poles(5)[2])


@settings(max_examples=200, deadline=None)
@given(T=st.integers(1, 64), u=st.floats(0.001, 0.999))
def test_g_matches_continuant_ratio(T, u):
    lam = 2.0 * u
    if np.min(np.abs(g_poles(T) - lam)) < 1e-6:
        return
    g = g_eval(T, lam)
    ref = continuant_g(T, lam)
    assert g == pytest.approx(ref, rel=1e-9, abs=1e-12)


# -- endpoint spectrum ---------------------------------------------------------------

def test_endpoint_special_cases():
    assert np.allclose(endpoint_spectrum(10, 0.5), analytic_spectrum_half_penalty(10), atol=1e-14)
    assert np.allclose(endpoint_spectrum(10, 1.0), analytic_spectrum_full_penalty(10))
    assert np.allclose(endpoint_spectrum(10, 0.0), free_spectrum(10))
    with pytest.raises(DomainError):
        endpoint_spectrum(10, 1.5)


@pytest.mark.parametrize("T", [1, 2, 3, 8, 50, 200])
@pytest.mark.parametrize("mu", [0.001, 0.1, 0.37, 0.9, 0.999])
def test_endpoint_matches_sturm(T, mu):
    ref = eig_tridiagonal(PenalizedWalk.endpoint(T, mu).to_matrix()).eigenvalues
    assert np.max(np.abs(endpoint_spectrum(T, mu) - ref)) < 1e-9


@pytest.mark.parametrize("T", [5, 32])
def test_endpoint_monotone_in_mu(T):
    mus = np.linspace(0, 1, 21)
    spec = np.array([endpoint_spectrum(T, m) for m in mus])
    assert np.all(np.diff(spec, axis=0) >= -1e-13)


@pytest.mark.parametrize("T", [3, 16, 64])
def test_endpoint_lower_bound_by_mu_times_full(T):
    full = analytic_spectrum_full_penalty(T)
    for mu in (0.05, 0.3, 0.75, 1.0):
        assert np.all(endpoint_spectrum(T, mu) >= mu * full - 1e-12)


def test_endpoint_ground_energy_large_T():
    T = 4096
    lam = endpoint_ground_energy(T, 1.0 / T)
    # x tan x = 2 with lam ~ x^2 / T^2 at leading order
    assert 0.4 < lam * T * T < 0.9


# -- uncoupling -------------------------------------------------------------------------

def test_uncoupling_example():
    u = uncouple(PenalizedWalk(6, ((3, 1.0),)))
    assert np.allclose(eig_dense(u.coupling.matrix).eigenvalues, [0.0, 1.25], atol=1e-14)
    assert u.left.n == 2 and u.right.n == 4


@pytest.mark.parametrize("T", [3, 10, 64])
def test_uncoupling_reconstructs_and_bounds(T):
    for k in range(2, T):
        w = PenalizedWalk(T, ((k, 1.0),))
        u = uncouple(w)
        assert np.array_equal(u.block_matrix() + u.coupling_matrix(), w.to_matrix().to_dense())
        assert is_psd(u.coupling_matrix())
        lam_h = eig_dense(w.to_matrix().to_dense()).min
        assert lam_h >= u.block_ground_energy() - 1e-12


def test_uncoupling_rejects_endpoints():
    with pytest.raises(NoDecomposition):
        uncouple(PenalizedWalk(6, ((1, 1.0),)))
    with pytest.raises(NoDecomposition):
        uncouple(PenalizedWalk(6, ((6, 1.0),)))
    with pytest.raises(NoDecomposition):
        uncouple(PenalizedWalk(6, ((3, 0.5),)))


# -- starting penalty ------------------------------------------------------------------

def test_starting_penalty_T8():
    scan = starting_penalty_scan(8)
    assert scan.argmin == (1, 8)
    assert scan.minimum == pytest.approx(one_minus_cos(math.pi / 16), abs=1e-12)
    assert scan.values[math.ceil(8 / 2) - 1] > scan.values[0]


def test_starting_penalty_scan_matches_lapack():
    T = 20
    scan = starting_penalty_scan(T)
    ref = [lapack(PenalizedWalk(T, ((k, 1.0),)))[0] for k in range(1, T + 1)]
    assert np.allclose(scan.values, ref, atol=1e-12)


def test_starting_penalty_needs_T4():
    with pytest.raises(DomainError):
        starting_penalty_scan(3)
