"""Electron energy-ladder wavefunctions (combs) and their phase profiles.

Ladder index ``n`` labels the electron energy ``E0 + n hbar omega``. A comb
with spacing ``N`` and shift ``m`` populates indices ``m + j N``. The window
keeps indices ``shift - W .. shift + W``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import constants

EDGE_TOL = 1e-10


@dataclass(frozen=True)
class ElectronComb:
    spacing: int
    envelope: str  # "ideal", "gaussian" or "single"
    window: int
    amplitudes: np.ndarray  # over indices shift-window .. shift+window
    shift: int = 0
    sigma: float | None = None
    converged: bool = True

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        if amps.size != 2 * self.window + 1:
            raise ValueError("amplitude vector must cover 2*window+1 ladder indices")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def indices(self) -> np.ndarray:
        return self.shift + np.arange(-self.window, self.window + 1)

    @property
    def is_ideal(self) -> bool:
        return self.envelope == "ideal"

    @property
    def support(self) -> np.ndarray:
        return self.indices[np.abs(self.amplitudes) > 0]

    @property
    def peak_phases(self) -> np.ndarray:
        a = self.amplitudes[np.abs(self.amplitudes) > 0]
        return a / np.abs(a)

    def spectrum(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def edge_population(self, width: int = 1) -> float:
        p = self.spectrum()
        return float(p[:width].sum() + p[-width:].sum())

    def amplitude_map(self) -> dict:
        return {int(i): complex(a) for i, a in zip(self.indices, self.amplitudes) if a != 0}


def _normalize(amps):
    return amps / np.linalg.norm(amps)


def ideal_comb(N: int, shift: int = 0, window: int = 64, peak_phases=None) -> ElectronComb:
    """Uniform, equal-phase comb truncated to the window.

    The analytic engine never looks at the amplitudes of an ideal comb; the
    window matters only when an ideal comb is fed to a simulation engine.
    """
    if N < 1 or window < 1:
        raise ValueError("need N >= 1 and window >= 1")
    offs = np.arange(-window, window + 1)
    amps = np.where(offs % N == 0, 1.0, 0.0).astype(complex)
    amps = _with_phases(amps, peak_phases)
    return ElectronComb(N, "ideal", window, _normalize(amps), shift=shift)


def gaussian_comb(N: int, sigma: float, window: int | None = None, shift: int = 0,
                  peak_phases=None) -> ElectronComb:
    """Comb with spectral weights ``|c|^2`` Gaussian of standard deviation ``sigma``.

    Amplitude at offset ``jN`` is ``exp(-(jN)^2 / (4 sigma^2))``. The default
    window reaches 7 sigma, past which the spectral weight is below 1e-10.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if window is None:
        window = int(math.ceil(7.0 * sigma)) + N
    offs = np.arange(-window, window + 1)
    amps = np.where(offs % N == 0, np.exp(-offs.astype(float) ** 2 / (4.0 * sigma ** 2)), 0.0)
    amps = _normalize(_with_phases(amps.astype(complex), peak_phases))
    edge = float(np.abs(amps[0]) ** 2 + np.abs(amps[-1]) ** 2)
    return ElectronComb(N, "gaussian", window, amps, shift=shift, sigma=float(sigma),
                        converged=edge < EDGE_TOL)


def single_peak(index: int = 0, window: int = 0) -> ElectronComb:
    """An unshaped electron: one ladder state."""
    amps = np.zeros(2 * window + 1, dtype=complex)
    amps[window] = 1.0
    return ElectronComb(1, "single", window, amps, shift=index)


def _with_phases(amps, peak_phases):
    if peak_phases is None:
        return amps
    ph = np.asarray(peak_phases, dtype=complex)
    nz = np.flatnonzero(amps)
    if ph.size != nz.size:
        raise ValueError(f"expected {nz.size} peak phases, got {ph.size}")
    if not np.allclose(np.abs(ph), 1.0, atol=1e-12):
        raise ValueError("peak phases must have unit modulus")
    out = amps.copy()
    out[nz] *= ph
    return out


def with_window(comb: ElectronComb, window: int) -> ElectronComb:
    """Re-window a comb (zero-pad or crop symmetrically) keeping its amplitudes."""
    if window == comb.window:
        return comb
    amps = np.zeros(2 * window + 1, dtype=complex)
    if window > comb.window:
        d = window - comb.window
        amps[d:d + comb.amplitudes.size] = comb.amplitudes
    else:
        d = comb.window - window
        amps = comb.amplitudes[d:d + amps.size].copy()
    return replace(comb, window=window, amplitudes=_normalize(amps))


# --------------------------------------------------------------------------
# phase profiles
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseProfile:
    """Per-index phases, either explicit or ``phi_n = -beta n^2 z``."""

    model: str = "quadratic"
    beta: float = 0.0
    z: float = 0.0
    phases: dict | None = None  # explicit: ladder index -> radians

    def phases_for(self, indices) -> np.ndarray:
        idx = np.asarray(indices)
        if self.model == "quadratic":
            return -self.beta * idx.astype(float) ** 2 * self.z
        if self.model == "explicit":
            missing = [int(i) for i in idx if int(i) not in self.phases]
            if missing:
                raise ValueError(f"explicit profile does not cover indices {missing[:5]}...")
            return np.array([self.phases[int(i)] for i in idx], dtype=float)
        raise ValueError(f"unknown phase model {self.model!r}")


def apply_phase_profile(comb: ElectronComb, profile: PhaseProfile) -> ElectronComb:
    ph = profile.phases_for(comb.indices)
    return replace(comb, amplitudes=comb.amplitudes * np.exp(1j * ph))


def dispersion_beta(kinetic_energy_ev: float = 200e3, wavelength: float = 1550e-9) -> float:
    """Quadratic free-flight dispersion ``hbar omega^2 / (2 m v^3 gamma^3)`` in rad per m.

    Multiplying by ``n^2`` and the drift length gives the phase of ladder
    index ``n`` relative to the comb center.
    """
    me_c2 = constants.m_e * constants.c ** 2
    gamma = 1.0 + kinetic_energy_ev * constants.e / me_c2
    v = constants.c * math.sqrt(1.0 - 1.0 / gamma ** 2)
    omega = 2.0 * math.pi * constants.c / wavelength
    return constants.hbar * omega ** 2 / (2.0 * constants.m_e * v ** 3 * gamma ** 3)


# --------------------------------------------------------------------------
# angle representation
# --------------------------------------------------------------------------

def fourier_profile(comb: ElectronComb, theta_samples: int) -> np.ndarray:
    """``psi(theta_j) = sum_n c_n e^{i n theta_j}`` on ``theta_j = 2 pi j / M``.

    Discrete Parseval: ``mean_j |psi(theta_j)|^2 = sum_n |c_n|^2`` whenever
    ``M >= 2W + 1``.
    """
    m = int(theta_samples)
    if m < comb.amplitudes.size:
        raise ValueError("theta_samples must be at least the window size 2W+1")
    buf = np.zeros(m, dtype=complex)
    np.add.at(buf, comb.indices % m, comb.amplitudes)
    return m * np.fft.ifft(buf)


def inverse_fourier_profile(values: np.ndarray, comb: ElectronComb) -> np.ndarray:
    """Recover the comb amplitudes on its window from ``fourier_profile`` samples."""
    m = values.size
    buf = np.fft.fft(values) / m
    return buf[comb.indices % m]


def theta_grid(theta_samples: int) -> np.ndarray:
    return 2.0 * math.pi * np.arange(theta_samples) / theta_samples
