import math

import numpy as np
import pytest
from scipy.signal import find_peaks

from gkpforge import fock, gkp
from gkpforge.gkp import HEXAGONAL, SQUARE

SQRT_PI = math.sqrt(math.pi)


def peak_positions(state, angle, lo=-9, hi=9):
    x = np.linspace(lo, hi, 3601)
    dens = np.abs(fock.quadrature_wavefunction(state, angle, x)) ** 2
    idx, _ = find_peaks(dens, height=0.05 * dens.max())
    return x[idx]


@pytest.fixture(scope="module")
def square_states():
    return {lg: gkp.code_state(SQUARE, lg, 0.3, 400) for lg in ("0", "1", "+", "-")}


def test_lattices_satisfy_commutation():
    for lat in (SQUARE, HEXAGONAL):
        assert (lat.lz * np.conj(lat.lx)).imag == pytest.approx(math.pi / 2)
    # hexagonal generators have equal length and sit 60 degrees apart (mod 180)
    assert abs(HEXAGONAL.lx) == pytest.approx(abs(HEXAGONAL.lz))
    ang = math.degrees(np.angle(HEXAGONAL.lz / HEXAGONAL.lx)) % 180
    assert ang == pytest.approx(120.0)
    with pytest.raises(ValueError):
        gkp.Lattice("bad", 1.0, 1j)
    with pytest.raises(ValueError):
        gkp.lattice_by_name("triangle")


def test_zero_and_one_peak_positions(square_states):
    for logical, offset in (("0", 0.0), ("1", SQRT_PI)):
        peaks = peak_positions(square_states[logical], 0.0)
        n = (peaks - offset) / (2 * SQRT_PI)
        assert np.max(np.abs(n - np.round(n))) < 0.02
        assert peaks.size >= 3


def test_plus_minus_peaks_in_p(square_states):
    for logical, offset in (("+", 0.0), ("-", SQRT_PI)):
        peaks = peak_positions(square_states[logical], math.pi / 2)
        n = (peaks - offset) / (2 * SQRT_PI)
        assert np.max(np.abs(n - np.round(n))) < 0.02


def test_logical_states_orthogonal_and_dual(square_states):
    s = square_states
    assert fock.fidelity(s["0"], s["1"]) < 1e-6
    assert fock.fidelity(s["+"], s["-"]) < 1e-6
    # a quarter rotation maps the x lattice onto the p lattice
    rot = fock.rotation(math.pi / 2, s["0"].cutoff).apply(s["0"])
    assert fock.fidelity(rot, s["+"]) > 0.999
    # |+> is close to (|0> + |1>)/sqrt(2)
    mix = (s["0"].amplitudes + s["1"].amplitudes) / math.sqrt(2)
    assert abs(np.vdot(mix, s["+"].amplitudes)) ** 2 > 0.99


def test_peak_width_tracks_delta():
    delta = 0.25
    st = gkp.code_state(SQUARE, "0", delta)
    x = np.linspace(-1.5, 1.5, 3001)
    dens = np.abs(fock.quadrature_wavefunction(st, 0.0, x)) ** 2
    dens /= dens.sum()
    var = float(np.sum(dens * x * x))
    assert var == pytest.approx(0.5 * delta ** 2, rel=0.05)


def test_superposition_bloch_vectors():
    cut = 520
    zero = gkp.code_state(SQUARE, "0", 0.25, cut)
    one = gkp.code_state(SQUARE, "1", 0.25, cut)
    for name, (t, f) in gkp.BLOCH_ANGLES.items():
        st = gkp.code_state(SQUARE, name, 0.25, cut)
        c0 = np.vdot(zero.amplitudes, st.amplitudes)
        c1 = np.vdot(one.amplitudes, st.amplitudes)
        assert abs(c0) ** 2 == pytest.approx(math.cos(t / 2) ** 2, abs=1e-3)
        assert np.angle(c1 / c0) == pytest.approx(f, abs=1e-3)
    # the face state has equal Bloch components
    t, f = gkp.BLOCH_ANGLES["T"]
    vec = (math.sin(t) * math.cos(f), math.sin(t) * math.sin(f), math.cos(t))
    assert np.allclose(vec, 1 / math.sqrt(3))


def test_fidelity_to_code_matches_fock_overlap():
    ref = gkp.code_state(HEXAGONAL, "T", 0.3)
    assert ref.converged()
    assert gkp.fidelity_to_code(HEXAGONAL, "T", 0.3, ref.amplitudes) == pytest.approx(1.0, abs=1e-8)
    other = gkp.code_state(HEXAGONAL, "0", 0.3)
    f = gkp.fidelity_to_code(HEXAGONAL, "T", 0.3, other.amplitudes)
    assert f == pytest.approx(fock.fidelity(ref, other), abs=1e-8)


def test_coherent_sum_norm_is_exact():
    cs = gkp.code_state_sum(SQUARE, "1", 0.4)
    amps = cs.to_fock(gkp.required_cutoff(cs))
    assert cs.norm_sq() == pytest.approx(float(np.sum(np.abs(amps) ** 2)), rel=1e-9)


def test_displaced_coherent_sum():
    cs = gkp.CoherentSum(np.array([0.3 + 0.1j]), np.array([1.0 + 0j]))
    moved = cs.displaced(0.5 - 0.2j).to_fock(40)
    ref = fock.displace(fock.make_coherent(0.3 + 0.1j, 40), 0.5 - 0.2j).amplitudes
    assert np.max(np.abs(moved - ref)) < 1e-12


def test_kappa_and_validation():
    assert gkp.kappa_from_delta(0.5) == pytest.approx(1 / 3)
    with pytest.raises(ValueError):
        gkp.kappa_from_delta(1.0)
    with pytest.raises(ValueError):
        gkp.code_state(SQUARE, "2", 0.3)
