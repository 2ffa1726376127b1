import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import eval_genlaguerre

from pacsloss.errors import TruncationTooSmall
from pacsloss.fock import (
    DensityMatrix, PacsSpec, StateVector, build_pacs, coherent_state, coherent_tail_mass,
    default_dim, density_from_state, fock_state, genlaguerre, ladder_matrices, laguerre,
    pacs_norm_numeric, pacs_tail_mass,
)


# -- Laguerre ---------------------------------------------------------------

@pytest.mark.parametrize("m, x, expected", [
    (0, 3.7, 1.0),
    (1, -0.25, 1.0 - (-0.25)),
    (2, -1.0, ((-1.0) ** 2 - 4 * (-1.0) + 2) / 2),
])
def test_laguerre_examples(m, x, expected):
    assert laguerre(m, x) == pytest.approx(expected, abs=1e-15)
    assert laguerre(2, -1.0) == pytest.approx(3.5)


@given(m=st.integers(1, 29), x=st.floats(-10, 10))
def test_laguerre_three_term_recurrence(m, x):
    lhs = (m + 1) * laguerre(m + 1, x)
    rhs = (2 * m + 1 - x) * laguerre(m, x) - m * laguerre(m - 1, x)
    assert lhs == pytest.approx(rhs, abs=1e-12 * max(1.0, abs(lhs)))


@pytest.mark.parametrize("n", [0, 1, 3, 10, 25])
@pytest.mark.parametrize("k", [0, 1, 4, 11])
def test_genlaguerre_matches_scipy(n, k):
    x = np.linspace(0.0, 60.0, 97)
    ref = eval_genlaguerre(n, k, x)
    np.testing.assert_allclose(genlaguerre(n, k, x), ref, rtol=1e-10, atol=1e-10)


def test_laguerre_vectorized_shape():
    x = np.zeros((3, 4))
    assert laguerre(3, x).shape == (3, 4)
    assert isinstance(laguerre(3, 0.5), float)


def test_laguerre_rejects_negative_order():
    with pytest.raises(ValueError):
        laguerre(-1, 0.0)


# -- ladder operators -------------------------------------------------------

def test_ladder_dim2():
    a, adag = ladder_matrices(2)
    expected = np.zeros((2, 2))
    expected[0, 1] = 1.0
    np.testing.assert_array_equal(a, expected)
    np.testing.assert_array_equal(adag, a.conj().T)


def test_number_operator_diagonal():
    a, adag = ladder_matrices(4)
    np.testing.assert_allclose(np.diag(adag @ a).real, [0, 1, 2, 3], atol=0)


def test_commutator_exact_away_from_corner():
    a, adag = ladder_matrices(16)
    comm = a @ adag - adag @ a
    block = comm[:15, :15]
    # sqrt(n)^2 is not bitwise n in double precision; exact up to rounding
    assert np.max(np.abs(block - np.eye(15))) < 1e-14
    assert comm[15, 15] == pytest.approx(-15.0)


def test_lowering_action():
    a, _ = ladder_matrices(8)
    for n in range(1, 8):
        out = a @ fock_state(n, 8).amplitudes
        assert out[n - 1] == pytest.approx(math.sqrt(n))


def test_ladder_requires_dim_two():
    with pytest.raises(ValueError):
        ladder_matrices(1)


# -- coherent states ----------------------------------------------------------

def test_coherent_vacuum():
    psi = coherent_state(0.0, 10)
    np.testing.assert_array_equal(psi.amplitudes, fock_state(0, 10).amplitudes)


def test_coherent_mean_photon_example():
    psi = coherent_state(0.5, 32)
    assert psi.mean_photon() == pytest.approx(0.25, abs=1e-10)


def test_coherent_truncation_error():
    # oracle: direct Poisson tail sum at |alpha|^2 = 2.25 beyond n = 7
    lam = 2.25
    tail = 1.0 - sum(math.exp(-lam) * lam**n / math.factorial(n) for n in range(8))
    assert tail > 1e-10
    with pytest.raises(TruncationTooSmall):
        coherent_state(1.5, 8)


@given(re=st.floats(-2, 2), im=st.floats(-2, 2))
@settings(max_examples=40)
def test_coherent_mean_photon_property(re, im):
    alpha = complex(re, im)
    psi = coherent_state(alpha)
    assert psi.mean_photon() == pytest.approx(abs(alpha) ** 2, abs=1e-9)
    assert psi.norm == pytest.approx(1.0, abs=1e-12)


def test_coherent_is_eigenstate_of_lowering():
    alpha = 0.7 - 0.4j
    psi = coherent_state(alpha, 40)
    a, _ = ladder_matrices(40)
    np.testing.assert_allclose((a @ psi.amplitudes)[:30], alpha * psi.amplitudes[:30], atol=1e-12)


@pytest.mark.parametrize("alpha, dim", [(0.5, 6), (1.0, 12), (1.5, 10), (2.0, 20)])
def test_coherent_tail_matches_direct_sum(alpha, dim):
    lam = alpha**2
    direct = 1.0 - sum(math.exp(-lam) * lam**n / math.factorial(n) for n in range(dim))
    assert coherent_tail_mass(alpha, dim) == pytest.approx(direct, rel=1e-6, abs=1e-15)


# -- PACS ---------------------------------------------------------------------

def test_default_dim_formula():
    assert default_dim(0.0, 0) == 16
    assert default_dim(1.5, 2) == math.ceil(2.25 + 2 + 10 * math.sqrt(5.25))
    assert default_dim(10.0, 0) == math.ceil(100 + 10 * math.sqrt(101))


def test_pacs_tail_matches_brute_force():
    # oracle: normalize a^+ |alpha> in a very large space and sum the top of it
    alpha, m, dim = 1.2, 1, 9
    big = 80
    _, adag = ladder_matrices(big)
    n = np.arange(big)
    coh = np.array([alpha**k / math.sqrt(math.factorial(k)) for k in n]) * math.exp(-alpha**2 / 2)
    vec = adag @ coh
    probs = np.abs(vec) ** 2 / np.sum(np.abs(vec) ** 2)
    assert pacs_tail_mass(alpha, m, dim) == pytest.approx(probs[dim:].sum(), rel=1e-8)


def test_pacs_fock_limit():
    psi = build_pacs(PacsSpec(0.0, 1, 16))
    np.testing.assert_allclose(psi.amplitudes, fock_state(1, 16).amplitudes, atol=1e-15)


def test_pacs_m0_is_coherent():
    psi = build_pacs(PacsSpec(0.5, 0, 32))
    np.testing.assert_allclose(psi.amplitudes, coherent_state(0.5, 32).amplitudes, atol=1e-14)


def test_pacs_norm_factor_example():
    spec = PacsSpec(0.5, 1, 32)
    assert spec.norm_factor == pytest.approx(1.25, abs=1e-15)
    # brute force: squared norm of a^+|alpha> from the raising matrix
    assert pacs_norm_numeric(spec) == pytest.approx(1.25, abs=1e-8)


def test_norm_sign_convention_pinned():
    # m! L_m(-|a|^2) with the minus sign inside: positive and growing with |a|
    spec = PacsSpec(0.5, 2, 32)
    assert spec.norm_factor == pytest.approx(2 * (0.0625 + 1.0 + 2.0) / 2)
    assert spec.norm_factor > PacsSpec(0.0, 2).norm_factor == pytest.approx(2.0)


@given(m=st.integers(0, 2), r=st.floats(0, 2), phase=st.floats(0, 2 * math.pi))
@settings(max_examples=40)
def test_numeric_norm_matches_laguerre(m, r, phase):
    spec = PacsSpec(r * np.exp(1j * phase), m)
    analytic = math.factorial(m) * laguerre(m, -r * r)
    assert pacs_norm_numeric(spec) == pytest.approx(analytic, abs=1e-8)


@given(r=st.floats(0, 2), phase=st.floats(0, 2 * math.pi))
@settings(max_examples=30)
def test_spacs_mean_photon_closed_form(r, phase):
    psi = build_pacs(PacsSpec(r * np.exp(1j * phase), 1))
    # brute-force expectation over Fock amplitudes
    brute = float(np.sum(np.arange(psi.dim) * np.abs(psi.amplitudes) ** 2))
    n2 = r * r
    assert brute == pytest.approx((n2**2 + 3 * n2 + 1) / (1 + n2), abs=1e-8)


def test_pacs_truncation_too_small():
    with pytest.raises(TruncationTooSmall):
        PacsSpec(1.5, 2, 8)


def test_pacs_rejects_bad_order():
    with pytest.raises(ValueError):
        PacsSpec(0.5, -1)
    with pytest.raises(ValueError):
        PacsSpec(0.5, 1.5)


def test_default_truncation_covers_studied_range():
    for alpha in (0.1, 0.5, 1.0, 1.5):
        for m in (0, 1, 2):
            spec = PacsSpec(alpha, m)
            assert pacs_tail_mass(alpha, m, spec.dim) < 1e-10


# -- density matrices -----------------------------------------------------------

def test_density_vacuum():
    rho = density_from_state(fock_state(0, 5))
    expected = np.zeros((5, 5))
    expected[0, 0] = 1.0
    np.testing.assert_array_equal(rho.elements, expected)


def test_density_superposition():
    psi = StateVector(np.array([1.0, 1.0, 0, 0]) / math.sqrt(2))
    rho = density_from_state(psi)
    np.testing.assert_allclose(rho.elements[:2, :2], 0.5, atol=1e-15)


def test_density_pacs_is_pure():
    rho = density_from_state(build_pacs(PacsSpec(0.5, 1, 32)))
    assert rho.purity == pytest.approx(1.0, abs=1e-12)
    assert rho.trace == pytest.approx(1.0, abs=1e-12)
    assert rho.hermiticity_error() < 1e-12
    assert np.linalg.matrix_rank(rho.elements, tol=1e-10) == 1


def test_state_vector_is_immutable():
    psi = coherent_state(0.3, 16)
    with pytest.raises(ValueError):
        psi.amplitudes[0] = 2.0


def test_density_rejects_nonsquare():
    with pytest.raises(ValueError):
        DensityMatrix(np.zeros((2, 3)))


def test_factorial_free_large_dim():
    # log-space amplitudes stay finite well past n = 170
    psi = coherent_state(12.0, 256)
    assert np.all(np.isfinite(psi.amplitudes))
    assert psi.mean_photon() == pytest.approx(144.0, rel=1e-9)
    ref = float(mpmath.exp(-72) * mpmath.mpf(12) ** 200 / mpmath.sqrt(mpmath.factorial(200)))
    assert abs(psi.amplitudes[200]) == pytest.approx(ref, rel=1e-9)
