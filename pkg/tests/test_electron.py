import math

import numpy as np
import pytest

from gkpforge import electron


def test_ideal_comb_support_and_norm():
    c = electron.ideal_comb(3, shift=2, window=9)
    assert np.all((c.support - 2) % 3 == 0)
    assert c.support.size == 7
    assert np.linalg.norm(c.amplitudes) == pytest.approx(1.0)
    assert c.is_ideal


def test_gaussian_comb_weights_and_convergence():
    c = electron.gaussian_comb(2, sigma=5.0)
    assert c.converged
    p = c.spectrum()
    idx = c.indices
    var = float(np.sum(p * idx.astype(float) ** 2))
    # a comb with spacing 2 samples the Gaussian finely enough for its variance to match
    assert var == pytest.approx(25.0, rel=1e-6)
    narrow = electron.gaussian_comb(2, sigma=5.0, window=6)
    assert not narrow.converged


def test_single_peak_and_rewindow():
    s = electron.single_peak(4)
    assert s.amplitude_map() == {4: 1.0}
    wide = electron.with_window(electron.ideal_comb(2, window=4), 10)
    assert wide.window == 10
    assert set(wide.amplitude_map()) == set(range(-4, 5, 2))


def test_peak_phases_validation():
    ph = np.exp(1j * np.linspace(0, 1, 5))
    c = electron.ideal_comb(2, window=4, peak_phases=ph)
    assert np.allclose(c.peak_phases, ph)
    with pytest.raises(ValueError):
        electron.ideal_comb(2, window=4, peak_phases=np.ones(3))
    with pytest.raises(ValueError):
        electron.ideal_comb(2, window=4, peak_phases=2 * np.ones(5))


def test_fourier_profile_parseval_and_inverse():
    c = electron.gaussian_comb(3, sigma=4.0)
    M = 4 * c.amplitudes.size
    vals = electron.fourier_profile(c, M)
    assert np.mean(np.abs(vals) ** 2) == pytest.approx(1.0, abs=1e-12)
    back = electron.inverse_fourier_profile(vals, c)
    assert np.max(np.abs(back - c.amplitudes)) < 1e-12
    with pytest.raises(ValueError):
        electron.fourier_profile(c, c.amplitudes.size - 1)


def test_fourier_profile_direct_sum():
    c = electron.ideal_comb(2, shift=1, window=4)
    theta = electron.theta_grid(16)
    vals = electron.fourier_profile(c, 16)
    ref = np.array([np.sum(c.amplitudes * np.exp(1j * c.indices * t)) for t in theta])
    assert np.max(np.abs(vals - ref)) < 1e-12


def test_quadratic_phase_profile():
    c = electron.ideal_comb(2, window=6)
    prof = electron.PhaseProfile("quadratic", beta=0.1, z=2.0)
    out = electron.apply_phase_profile(c, prof)
    n = c.indices
    expect = c.amplitudes * np.exp(-1j * 0.1 * n.astype(float) ** 2 * 2.0)
    assert np.allclose(out.amplitudes, expect)


def test_explicit_phase_profile_coverage():
    prof = electron.PhaseProfile("explicit", phases={0: 0.5, 1: 1.0})
    assert np.allclose(prof.phases_for([0, 1]), [0.5, 1.0])
    with pytest.raises(ValueError):
        prof.phases_for([0, 2])


def test_dispersion_beta_matches_momentum_curvature():
    # independent route: second difference of the electron wavenumber over ladder energies
    from scipy import constants as k
    mc2 = k.m_e * k.c ** 2
    hw = k.hbar * 2 * math.pi * k.c / 1550e-9

    def wavenumber(n):
        e_tot = mc2 + 200e3 * k.e + n * hw
        return math.sqrt(e_tot ** 2 - mc2 ** 2) / (k.c * k.hbar)

    curv = (wavenumber(1000) - 2 * wavenumber(0) + wavenumber(-1000)) / 1000 ** 2
    assert electron.dispersion_beta(200e3, 1550e-9) == pytest.approx(-0.5 * curv, rel=1e-4)
    b1 = electron.dispersion_beta(200e3, 1550e-9)
    assert electron.dispersion_beta(200e3, 775e-9) / b1 == pytest.approx(4.0, rel=1e-12)


def test_invalid_combs():
    with pytest.raises(ValueError):
        electron.ideal_comb(0)
    with pytest.raises(ValueError):
        electron.gaussian_comb(2, sigma=0)
    with pytest.raises(ValueError):
        electron.ElectronComb(2, "ideal", 2, np.ones(3))
