import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm
from scipy.special import eval_hermite, factorial

from gkpforge import fock, kernels
from gkpforge.errors import ZeroProbabilityError

complexes = st.builds(complex, st.floats(-2.5, 2.5), st.floats(-2.5, 2.5))


def laguerre_element(alpha, m, n):
    """<m|D(alpha)|n> from the associated Laguerre closed form, in high precision."""
    a = mpmath.mpc(alpha.real, alpha.imag)
    x = abs(a) ** 2
    if m >= n:
        v = mpmath.sqrt(mpmath.factorial(n) / mpmath.factorial(m)) * a ** (m - n) * mpmath.exp(-x / 2) \
            * mpmath.laguerre(n, m - n, x)
    else:
        v = mpmath.sqrt(mpmath.factorial(m) / mpmath.factorial(n)) * (-mpmath.conj(a)) ** (n - m) \
            * mpmath.exp(-x / 2) * mpmath.laguerre(m, n - m, x)
    return complex(v)


def test_displacement_matches_laguerre_oracle():
    alpha = 2.3 - 1.1j
    D = fock.make_displacement(alpha, 120).entries
    rng = np.random.default_rng(0)
    for m, n in rng.integers(0, 121, size=(40, 2)):
        assert abs(D[m, n] - laguerre_element(alpha, int(m), int(n))) < 1e-12


def test_displacement_closed_form_equals_expm():
    for alpha in (0.3 + 0.2j, 1.7, 3.0j):
        a = fock.make_displacement(alpha, 60, method="closed").entries
        b = fock.make_displacement(alpha, 60, method="expm").entries
        # the expm route truncates the generator, so only the inner block is exact
        assert np.max(np.abs(a[:40, :40] - b[:40, :40])) < 1e-10


def test_displacement_large_dimension_is_stable():
    D = fock.make_displacement(4.0 + 3.0j, 600).entries
    safe = 300
    gram = D[:, :safe].conj().T @ D[:, :safe]
    assert np.max(np.abs(gram - np.eye(safe))) < 1e-10


@settings(max_examples=25, deadline=None)
@given(complexes, complexes)
def test_displacement_composition_phase(a, b):
    cut = 90
    psi = fock.vacuum(cut)
    lhs = fock.displace(fock.displace(psi, b), a).amplitudes
    rhs = np.exp(1j * (a * np.conj(b)).imag) * fock.displace(psi, a + b).amplitudes
    assert np.max(np.abs(lhs - rhs)) < 1e-9


@settings(max_examples=25, deadline=None)
@given(complexes)
def test_coherent_state_is_displaced_vacuum(alpha):
    cut = 80
    a = fock.coherent_amplitudes(alpha, cut)
    b = fock.displace(fock.vacuum(cut), alpha).amplitudes
    assert np.max(np.abs(a - b)) < 1e-10
    # annihilation eigenvalue on the safe part of the space
    la = fock.annihilation(cut).entries @ a
    assert np.max(np.abs(la[:40] - alpha * a[:40])) < 1e-10


def test_coherent_leak_and_cutoff_policy():
    st_ = fock.make_coherent(3.0, 15)
    assert st_.norm_leak > 1e-3
    assert not st_.converged()
    cut = fock.suggest_cutoff(9.0)
    assert fock.make_coherent(3.0, cut).converged()


def test_squeezed_vacuum_variance_and_operator():
    params = fock.SqueezeParams(1.1513, 0.0)
    sv = fock.squeezed_vacuum(params, 200)
    _, vx = fock.quadrature_moments(sv, 0.0)
    _, vp = fock.quadrature_moments(sv, math.pi / 2)
    assert vx == pytest.approx(0.5 * math.exp(-2 * 1.1513), rel=1e-8)
    assert vp == pytest.approx(0.5 * math.exp(2 * 1.1513), rel=1e-6)
    assert params.db == pytest.approx(10.0, abs=1e-3)
    via_op = fock.make_squeeze(params, 200).apply(fock.vacuum(200))
    assert fock.fidelity(via_op, sv) > 1 - 1e-10


def test_squeeze_angle_convention():
    sv = fock.squeezed_vacuum(fock.SqueezeParams(0.8, math.pi), 120)
    _, vp = fock.quadrature_moments(sv, math.pi / 2)
    assert vp == pytest.approx(0.5 * math.exp(-1.6), rel=1e-8)


def test_hermite_functions_match_scipy():
    x = np.linspace(-5, 5, 41)
    h = kernels.hermite_functions(30, x)
    for n in (0, 1, 7, 30):
        ref = eval_hermite(n, x) * np.exp(-x * x / 2) / math.sqrt(2.0 ** n * factorial(n) * math.sqrt(math.pi))
        assert np.max(np.abs(h[n] - ref)) < 1e-12


def test_hermite_functions_orthonormal_at_high_order():
    x = np.linspace(-45, 45, 20001)
    h = kernels.hermite_functions(800, x)
    dx = x[1] - x[0]
    gram = (h[[0, 400, 799, 800]] @ h[[0, 400, 799, 800]].T) * dx
    assert np.max(np.abs(gram - np.eye(4))) < 1e-8


def test_quadrature_wavefunction_of_fock_one():
    grid = np.linspace(-4, 4, 17)
    psi = fock.quadrature_wavefunction(fock.fock_state(1, 5), 0.0, grid)
    ref = math.pi ** -0.25 * math.sqrt(2) * grid * np.exp(-grid ** 2 / 2)
    assert np.max(np.abs(psi - ref)) < 1e-14


def test_rotated_quadrature_of_coherent_state():
    alpha = 1.5 + 0.5j
    st_ = fock.make_coherent(alpha, 60)
    for phi in (0.0, 0.7, math.pi / 2):
        mean, var = fock.quadrature_moments(st_, phi)
        assert mean == pytest.approx(math.sqrt(2) * (alpha * np.exp(-1j * phi)).real, abs=1e-10)
        assert var == pytest.approx(0.5, abs=1e-10)


def test_wigner_normalization_and_peak():
    x = np.linspace(-7, 7, 281)
    w = fock.wigner(fock.make_coherent(1 + 0.5j, 40), x, x)
    assert w.integral() == pytest.approx(1.0, abs=1e-6)
    j, i = np.unravel_index(np.argmax(w.values), w.values.shape)
    assert x[i] == pytest.approx(math.sqrt(2) * 1.0, abs=0.05)
    assert x[j] == pytest.approx(math.sqrt(2) * 0.5, abs=0.05)
    assert w.values.max() == pytest.approx(1 / math.pi, rel=1e-3)


def test_wigner_marginal_is_x_distribution():
    st_ = fock.squeezed_vacuum(fock.SqueezeParams(0.5, 0.3), 60)
    x = np.linspace(-6, 6, 121)
    p = np.linspace(-8, 8, 321)
    w = fock.wigner(st_, x, p)
    ref = np.abs(fock.quadrature_wavefunction(st_, 0.0, x)) ** 2
    assert np.max(np.abs(w.x_marginal() - ref)) < 1e-6


def test_displaced_parity_backends_agree():
    rng = np.random.default_rng(3)
    psi = rng.normal(size=50) + 1j * rng.normal(size=50)
    psi /= np.linalg.norm(psi)
    betas = rng.normal(size=30) + 1j * rng.normal(size=30)
    a = kernels._displaced_parity_numba(psi, betas)
    b = kernels._displaced_parity_numpy(psi, betas)
    assert np.max(np.abs(a - b)) < 1e-12
    # brute force: (2/pi) <psi| D(2b) P |psi>
    par = (-1.0) ** np.arange(50)
    for beta, val in zip(betas[:5], a[:5]):
        dim = 250
        up = np.diag(np.sqrt(np.arange(1, dim)), -1)
        D = expm(2 * beta * up - np.conj(2 * beta) * up.T)
        full = np.zeros(dim, complex)
        full[:50] = psi * par
        v = np.vdot(np.pad(psi, (0, dim - 50)), D @ full)
        assert val == pytest.approx(2 / math.pi * v.real, abs=1e-8)


def test_kernel_backends_agree_on_displacement_and_hermite():
    a = kernels._displacement_matrix_numba(2.2 - 0.7j, 150)
    b = kernels._displacement_matrix_numpy(2.2 - 0.7j, 150)
    assert np.max(np.abs(a - b)) < 1e-13
    x = np.linspace(-30, 30, 301)
    assert np.max(np.abs(kernels._hermite_functions_numba(300, x) - kernels._hermite_functions_numpy(300, x))) < 1e-13


def test_fidelity_embeds_different_cutoffs_and_parity():
    a = fock.make_coherent(0.5, 20)
    b = fock.make_coherent(0.5, 40)
    assert fock.fidelity(a, b) == pytest.approx(1.0, abs=1e-10)
    assert fock.parity(fock.fock_state(3, 5)) == -1.0


def test_zero_state_normalization_raises():
    with pytest.raises(ZeroProbabilityError):
        fock.PhotonState(np.zeros(4)).normalized()


def test_embed_crop_reports_leak():
    st_ = fock.make_coherent(2.0, 40).embed(3)
    assert st_.norm_leak > 0.5
