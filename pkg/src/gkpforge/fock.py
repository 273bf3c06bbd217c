"""Truncated Fock-space states and operators for a single bosonic mode.

Quadrature convention: ``x = (a + a^dag)/sqrt(2)``, ``p = (a - a^dag)/(i sqrt(2))``,
so the vacuum has variance 1/2 in every direction and ``D(alpha)`` with real
``alpha`` moves the x-distribution by ``sqrt(2) alpha``. Squeezing is
``S(xi) = exp(conj(xi) a^2 / 2 - xi a^dag^2 / 2)``; with ``theta = 0`` it
narrows x.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from . import kernels
from .errors import ZeroProbabilityError

LEAK_TOL = 1e-10


@dataclass(frozen=True)
class PhotonState:
    """Amplitudes ``c_n`` for ``n = 0..cutoff`` plus the norm lost to truncation."""

    amplitudes: np.ndarray
    norm_leak: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        if amps.size < 2:
            raise ValueError("a photon state needs cutoff >= 1")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "norm_leak", float(max(self.norm_leak, 0.0)))

    @property
    def cutoff(self) -> int:
        return self.amplitudes.size - 1

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "PhotonState":
        nrm = self.norm()
        if nrm < 1e-300:
            raise ZeroProbabilityError("cannot normalize a zero-norm state")
        return PhotonState(self.amplitudes / nrm, self.norm_leak)

    def converged(self, tol: float = LEAK_TOL) -> bool:
        return self.norm_leak <= tol

    def mean_photon(self) -> float:
        p = np.abs(self.amplitudes) ** 2
        return float(np.dot(np.arange(self.dim), p) / p.sum())

    def embed(self, cutoff: int) -> "PhotonState":
        """Zero-pad to a larger cutoff (or crop, adding the cropped norm to the leak)."""
        if cutoff == self.cutoff:
            return self
        if cutoff > self.cutoff:
            amps = np.zeros(cutoff + 1, dtype=complex)
            amps[: self.dim] = self.amplitudes
            return PhotonState(amps, self.norm_leak)
        lost = float(np.sum(np.abs(self.amplitudes[cutoff + 1:]) ** 2))
        return PhotonState(self.amplitudes[: cutoff + 1].copy(), self.norm_leak + lost)

    def tail_population(self, width: int = 5) -> float:
        """Population in the top ``width`` levels; a cheap truncation sentinel."""
        p = np.abs(self.amplitudes) ** 2
        return float(p[-width:].sum() / p.sum())


@dataclass(frozen=True)
class OperatorMatrix:
    entries: np.ndarray
    label: str = ""

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def apply(self, state: PhotonState) -> PhotonState:
        """Apply to a state; norm lost relative to the input is added to the leak."""
        psi = state.embed(self.dim - 1) if state.dim < self.dim else state
        if psi.dim != self.dim:
            raise ValueError(f"state dim {psi.dim} exceeds operator dim {self.dim}")
        out = self.entries @ psi.amplitudes
        return PhotonState(out, psi.norm_leak)

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            return OperatorMatrix(self.entries @ other.entries, f"{self.label}*{other.label}")
        if isinstance(other, PhotonState):
            return self.apply(other)
        return self.entries @ other


@dataclass(frozen=True)
class SqueezeParams:
    r: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("squeezing magnitude r must be >= 0")

    @property
    def xi(self) -> complex:
        return self.r * complex(math.cos(self.theta), math.sin(self.theta))

    @property
    def db(self) -> float:
        """Squeezing of the narrowed quadrature relative to vacuum."""
        return 20.0 * self.r / math.log(10.0)

    @classmethod
    def from_db(cls, db: float, theta: float = 0.0) -> "SqueezeParams":
        return cls(db * math.log(10.0) / 20.0, theta)


@dataclass(frozen=True)
class WignerGrid:
    x: np.ndarray
    p: np.ndarray
    values: np.ndarray  # shape (len(p), len(x)); rows are p
    meta: dict = field(default_factory=dict)

    def integral(self) -> float:
        return float(np.trapezoid(np.trapezoid(self.values, self.x, axis=1), self.p))

    def x_marginal(self) -> np.ndarray:
        return np.trapezoid(self.values, self.p, axis=0)


# --------------------------------------------------------------------------
# ladder operators and sizing
# --------------------------------------------------------------------------

def annihilation(cutoff: int) -> OperatorMatrix:
    return OperatorMatrix(np.diag(np.sqrt(np.arange(1, cutoff + 1)), 1).astype(complex), "a")


def creation(cutoff: int) -> OperatorMatrix:
    return OperatorMatrix(np.diag(np.sqrt(np.arange(1, cutoff + 1)), -1).astype(complex), "a_dag")


def suggest_cutoff(mean_photons: float) -> int:
    """Cutoff ``ceil(A + 6 sqrt(A) + 10)`` for a state with ``A`` mean photons."""
    a = max(float(mean_photons), 0.0)
    return int(math.ceil(a + 6.0 * math.sqrt(a) + 10.0))


def displacement_buffer(alpha: complex) -> int:
    return int(math.ceil(6 * abs(alpha) + 10))


# --------------------------------------------------------------------------
# states
# --------------------------------------------------------------------------

def vacuum(cutoff: int) -> PhotonState:
    return fock_state(0, cutoff)


def fock_state(n: int, cutoff: int) -> PhotonState:
    if not 0 <= n <= cutoff:
        raise ValueError(f"Fock index {n} outside 0..{cutoff}")
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[n] = 1.0
    return PhotonState(amps)


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    alpha = complex(alpha)
    n = np.arange(cutoff + 1)
    if alpha == 0:
        out = np.zeros(cutoff + 1, dtype=complex)
        out[0] = 1.0
        return out
    mag = np.exp(-0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1))
    return mag * np.exp(1j * n * np.angle(alpha))


def make_coherent(alpha: complex, cutoff: int) -> PhotonState:
    amps = coherent_amplitudes(alpha, cutoff)
    leak = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
    return PhotonState(amps, leak)


def squeezed_vacuum(params: SqueezeParams, cutoff: int) -> PhotonState:
    """Closed-form ``S(xi)|0>``; only even photon numbers are populated."""
    amps = np.zeros(cutoff + 1, dtype=complex)
    if params.r == 0:
        amps[0] = 1.0
        return PhotonState(amps)
    k = np.arange(cutoff // 2 + 1)
    t = math.tanh(params.r)
    logmag = (-0.5 * math.log(math.cosh(params.r)) + k * math.log(t)
              + 0.5 * gammaln(2 * k + 1) - k * math.log(2.0) - gammaln(k + 1))
    amps[2 * k] = np.exp(logmag) * (-np.exp(1j * params.theta)) ** k
    leak = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
    return PhotonState(amps, leak)


def squeeze_cutoff(r: float) -> int:
    return int(math.ceil(10 * math.exp(2 * r)))


# --------------------------------------------------------------------------
# operators
# --------------------------------------------------------------------------

def make_displacement(alpha: complex, cutoff: int, method: str = "closed") -> OperatorMatrix:
    """``D(alpha)`` on levels ``0..cutoff``.

    ``method="closed"`` gives the exact matrix elements of the untruncated
    operator; ``method="expm"`` exponentiates the generator on an enlarged
    space and crops, which agrees with the closed form away from the edge.
    """
    alpha = complex(alpha)
    dim = cutoff + 1
    if method == "closed":
        mat = kernels.displacement_matrix(alpha, dim)
    elif method == "expm":
        big = dim + displacement_buffer(alpha) + int(abs(alpha) ** 2)
        a = np.diag(np.sqrt(np.arange(1, big)), 1)
        gen = alpha * a.T - alpha.conjugate() * a
        mat = expm(gen)[:dim, :dim]
    else:
        raise ValueError(f"unknown displacement method {method!r}")
    return OperatorMatrix(mat, f"D({alpha:.6g})")


def make_squeeze(params: SqueezeParams, cutoff: int, pad: int | None = None) -> OperatorMatrix:
    """``S(xi)`` by matrix exponential on an enlarged space, cropped to the cutoff."""
    dim = cutoff + 1
    if pad is None:
        pad = min(dim, 400) + 20 if params.r > 0 else 0
    big = dim + pad
    a = np.diag(np.sqrt(np.arange(1, big)), 1).astype(complex)
    xi = params.xi
    gen = 0.5 * xi.conjugate() * (a @ a) - 0.5 * xi * (a.T @ a.T)
    return OperatorMatrix(expm(gen)[:dim, :dim], f"S({params.r:.6g},{params.theta:.6g})")


def rotation(phi: float, cutoff: int) -> OperatorMatrix:
    """Phase rotation ``exp(-i phi n)``; maps ``D(alpha)`` to ``D(alpha e^{-i phi})``."""
    return OperatorMatrix(np.diag(np.exp(-1j * phi * np.arange(cutoff + 1))), f"R({phi:.6g})")


def displace(state: PhotonState, alpha: complex) -> PhotonState:
    """``D(alpha)|psi>`` with the norm pushed past the cutoff added to the leak."""
    mat = kernels.displacement_matrix(complex(alpha), state.dim)
    out = mat @ state.amplitudes
    lost = max(0.0, state.norm() ** 2 - float(np.vdot(out, out).real))
    return PhotonState(out, state.norm_leak + lost)


# --------------------------------------------------------------------------
# measures
# --------------------------------------------------------------------------

def _common(a: PhotonState, b: PhotonState):
    cut = max(a.cutoff, b.cutoff)
    return a.embed(cut).amplitudes, b.embed(cut).amplitudes


def overlap(a: PhotonState, b: PhotonState) -> complex:
    u, v = _common(a, b)
    return complex(np.vdot(u, v))


def fidelity(a: PhotonState, b: PhotonState) -> float:
    """Pure-state fidelity ``|<a|b>|^2`` of the normalized inputs."""
    u, v = _common(a, b)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu < 1e-300 or nv < 1e-300:
        raise ZeroProbabilityError("fidelity with a zero-norm state")
    return float(min(1.0, abs(np.vdot(u, v)) ** 2 / (nu * nv) ** 2))


def array_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """Fidelity of two pure states given as arrays of the same shape (any rank)."""
    u = np.ravel(u)
    v = np.ravel(v)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu < 1e-300 or nv < 1e-300:
        raise ZeroProbabilityError("fidelity with a zero-norm state")
    return float(min(1.0, abs(np.vdot(u, v)) ** 2 / (nu * nv) ** 2))


def parity(state: PhotonState) -> float:
    p = np.abs(state.amplitudes) ** 2
    sign = np.where(np.arange(state.dim) % 2 == 0, 1.0, -1.0)
    return float(np.dot(sign, p) / p.sum())


def quadrature_wavefunction(state: PhotonState, angle: float, grid) -> np.ndarray:
    """``<q_angle|psi>`` on ``grid``; angle 0 is x and angle pi/2 is p."""
    grid = np.asarray(grid, dtype=float)
    herm = kernels.hermite_functions(state.cutoff, grid)
    coeff = state.amplitudes * np.exp(-1j * angle * np.arange(state.dim))
    return coeff @ herm


def quadrature_moments(state: PhotonState, angle: float = 0.0):
    """Mean and variance of ``q = (a e^{-i angle} + a^dag e^{i angle})/sqrt(2)``."""
    psi = state.normalized().amplitudes
    n = np.arange(state.dim)
    sq = np.sqrt(n[1:])
    a_psi = np.zeros_like(psi)
    a_psi[:-1] = sq * psi[1:]
    aa_psi = np.zeros_like(psi)
    aa_psi[:-2] = np.sqrt(n[1:-1] * n[2:]) * psi[2:]
    ea = np.vdot(psi, a_psi)
    eaa = np.vdot(psi, aa_psi)
    en = float(np.dot(n, np.abs(psi) ** 2))
    ph = np.exp(-1j * angle)
    mean = math.sqrt(2.0) * (ea * ph).real
    second = 0.5 * (2 * (eaa * ph * ph).real + 2 * en + 1)
    return float(mean), float(second - mean ** 2)


def wigner(state: PhotonState, x, p) -> WignerGrid:
    """Wigner function on the grid ``x`` by ``p`` via displaced parity.

    Normalized so that it integrates to one; ``W(0, 0) = <parity>/pi``.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    psi = state.normalized().amplitudes
    xx, pp = np.meshgrid(x, p)
    beta = (xx + 1j * pp) / math.sqrt(2.0)
    # the kernel is normalized over d^2 beta = dx dp / 2
    vals = 0.5 * kernels.displaced_parity(psi, beta.ravel()).reshape(beta.shape)
    return WignerGrid(x, p, vals, {"cutoff": state.cutoff})
