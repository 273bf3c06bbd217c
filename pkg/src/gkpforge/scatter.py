"""Electron-photon scattering ``S = exp(g b a^dag - conj(g) b^dag a)``.

``b`` lowers the electron ladder index by one, so emitting a photon costs the
electron one quantum. ``n_e + n`` is conserved. In the angle basis
``|theta> = sum_n e^{i n theta}|n>`` the ladder shift is diagonal
(``b|theta> = e^{i theta}|theta>``) and ``S`` acts on the light as
``D(g e^{i theta})``. Expanding back into ladder states gives the closed form

    out[n', n] = sum_m c[n' + n - m] D(g)[n, m] phi[m]

for an electron ``sum c_k |k>`` and light ``sum phi_m |m>``.

Post-selection labels follow the cat order: residue ``k`` (mod ``N``) keeps
outcomes whose energy loss relative to the comb shift is ``k`` mod ``N``, so
for an ideal comb the photon number changes by ``k`` mod ``N``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import fft as sfft
from scipy.linalg import expm, eigh
from scipy.sparse import csr_matrix, diags, identity, kron
from scipy.sparse.linalg import expm_multiply

from . import kernels
from .electron import ElectronComb
from .errors import ZeroProbabilityError
from .fock import OperatorMatrix, PhotonState

# branch probabilities below this are FFT round-off, not physics
ZERO_PROB = 1e-24


@dataclass(frozen=True)
class PostSelection:
    """Which electron energies herald success.

    ``residue``: energy loss ``= k (mod N)``; ``parity``: ``residue`` with
    ``N = 2`` (``k = 0`` even, ``k = 1`` odd); ``exact``: final ladder index ``n``.
    """

    rule: str = "residue"
    k: int = 0
    N: int = 2

    def __post_init__(self):
        if self.rule not in ("residue", "parity", "exact"):
            raise ValueError(f"unknown post-selection rule {self.rule!r}")
        if self.rule == "parity":
            object.__setattr__(self, "N", 2)
            if self.k not in (0, 1):
                raise ValueError("parity rule takes k = 0 (even) or 1 (odd)")
        if self.rule == "residue" and not 0 <= self.k < self.N:
            raise ValueError("residue k must satisfy 0 <= k < N")

    @classmethod
    def even(cls):
        return cls("parity", 0)

    @classmethod
    def odd(cls):
        return cls("parity", 1)

    @classmethod
    def parse(cls, text: str) -> "PostSelection":
        """``E``/``O``, ``even``/``odd``, ``res:k/N`` or ``exact:n``."""
        t = text.strip().lower()
        if t in ("e", "even"):
            return cls.even()
        if t in ("o", "odd"):
            return cls.odd()
        if t.startswith("res:"):
            k, n = t[4:].split("/")
            return cls("residue", int(k), int(n))
        if t.startswith("exact:"):
            return cls("exact", int(t[6:]))
        raise ValueError(f"cannot parse post-selection {text!r}")

    def label(self) -> str:
        if self.rule == "parity":
            return "even" if self.k == 0 else "odd"
        if self.rule == "residue":
            return f"res:{self.k}/{self.N}"
        return f"exact:{self.k}"

    def mask(self, electron_indices: np.ndarray, shift: int = 0) -> np.ndarray:
        idx = np.asarray(electron_indices)
        if self.rule == "exact":
            return idx == self.k
        return (shift - idx) % self.N == self.k

    def photon_change(self) -> int:
        """Photon-number change (mod N) heralded by this rule on an ideal comb."""
        if self.rule == "exact":
            raise ValueError("exact-index rules have no residue")
        return self.k


def complete_partition(N: int):
    return [PostSelection("residue", k, N) for k in range(N)]


@dataclass(frozen=True)
class JointState:
    """Electron-photon amplitudes, rows indexed by ladder index."""

    amplitudes: np.ndarray  # (E, d) or (E, d1, d2)
    electron_indices: np.ndarray
    shift: int = 0
    norm_leak: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def n_modes(self) -> int:
        return self.amplitudes.ndim - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def electron_spectrum(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes.reshape(self.amplitudes.shape[0], -1)) ** 2, axis=1)

    def photon_number_mean(self) -> float:
        p = np.abs(self.amplitudes) ** 2
        if self.n_modes == 1:
            return float(np.sum(p * np.arange(p.shape[1])[None, :]))
        n1 = np.arange(p.shape[1])[None, :, None]
        n2 = np.arange(p.shape[2])[None, None, :]
        return float(np.sum(p * (n1 + n2)))

    def total_excitation(self) -> float:
        """``<n_e + n>`` (single mode) or ``<n_e + n1 + n2>``; conserved by scattering."""
        ne = float(np.dot(self.electron_indices, self.electron_spectrum()))
        return (ne + self.photon_number_mean()) / self.norm() ** 2

    def photon_edge_population(self, width: int = 3) -> float:
        p = np.abs(self.amplitudes) ** 2
        if self.n_modes == 1:
            return float(p[:, -width:].sum())
        return float(p[:, -width:, :].sum() + p[:, :, -width:].sum())

    def rows(self, indices) -> np.ndarray:
        """Amplitudes for the given ladder indices (zeros if outside the stored range)."""
        idx = np.asarray(indices)
        pos = idx - self.electron_indices[0]
        out = np.zeros((idx.size,) + self.amplitudes.shape[1:], dtype=complex)
        ok = (pos >= 0) & (pos < self.electron_indices.size)
        out[ok] = self.amplitudes[pos[ok]]
        return out


# --------------------------------------------------------------------------
# analytic conditional displacements (ideal combs)
# --------------------------------------------------------------------------

def residue_mask(dim: int, N: int, k: int) -> np.ndarray:
    n = np.arange(dim)
    return ((n[:, None] - n[None, :]) % N) == (k % N)


def conditional_kraus(g: complex, N: int, k: int, cutoff: int) -> OperatorMatrix:
    """``K = (1/N) sum_m e^{-2 pi i k m / N} D(g e^{2 pi i m / N})``.

    Summing the N rotated displacements keeps exactly the matrix elements of
    ``D(g)`` whose photon-number change is ``k`` mod ``N``; that mask is what
    is evaluated here.
    """
    if not 0 <= k < N:
        raise ValueError("need 0 <= k < N")
    dim = cutoff + 1
    mat = kernels.displacement_matrix(complex(g), dim)
    return OperatorMatrix(np.where(residue_mask(dim, N, k), mat, 0.0), f"K[N={N},k={k}]({g:.6g})")


def conditional_kraus_sum(g: complex, N: int, k: int, cutoff: int) -> OperatorMatrix:
    """The same operator assembled literally as a phased sum of N displacements."""
    dim = cutoff + 1
    acc = np.zeros((dim, dim), dtype=complex)
    for m in range(N):
        w = np.exp(-2j * math.pi * k * m / N)
        acc += w * kernels.displacement_matrix(complex(g) * np.exp(2j * math.pi * m / N), dim)
    return OperatorMatrix(acc / N, f"Ksum[N={N},k={k}]({g:.6g})")


def coherent_overlap(a: complex, b: complex) -> complex:
    """``<a|b>`` for coherent states."""
    return complex(np.exp(-0.5 * abs(a) ** 2 - 0.5 * abs(b) ** 2 + np.conj(a) * b))


def cat_probability(g: complex, N: int, k: int) -> float:
    """Probability of heralding the order-``k`` N-component cat from vacuum."""
    if not 0 <= k < N:
        raise ValueError("need 0 <= k < N")
    roots = complex(g) * np.exp(2j * math.pi * np.arange(N) / N)
    ph = np.exp(-2j * math.pi * k * np.arange(N) / N)
    gram = np.exp(-0.5 * np.abs(roots[:, None]) ** 2 - 0.5 * np.abs(roots[None, :]) ** 2
                  + np.conj(roots[:, None]) * roots[None, :])
    val = np.conj(ph) @ gram @ ph
    return float(val.real) / N ** 2


# --------------------------------------------------------------------------
# joint-space engines
# --------------------------------------------------------------------------

def _output_indices(comb: ElectronComb, cutoff: int, pad: int | None = None) -> np.ndarray:
    """Every ladder index reachable from the comb window given at most ``cutoff`` photons."""
    pad = cutoff if pad is None else pad
    lo = int(comb.indices[0]) - pad
    hi = int(comb.indices[-1]) + pad
    return np.arange(lo, hi + 1)


@lru_cache(maxsize=512)
def _block_propagator(g: complex, n0: int, n1: int) -> np.ndarray:
    n = np.arange(n0, n1 + 1)
    size = n.size
    gen = np.zeros((size, size), dtype=complex)
    sq = np.sqrt(n[1:].astype(float))
    # <n+1|G|n> = g sqrt(n+1), <n|G|n+1> = -conj(g) sqrt(n+1)
    gen[np.arange(1, size), np.arange(size - 1)] = g * sq
    gen[np.arange(size - 1), np.arange(1, size)] = -np.conj(g) * sq
    return expm(gen)


def joint_scatter_ladder(comb: ElectronComb, photon: PhotonState, g: complex) -> JointState:
    """Exact exponential of the coupling on the windowed joint space.

    The joint generator splits into blocks of fixed ``n_e + n``; each block is
    the displacement generator on a photon-number interval, exponentiated
    with scipy's scaling-and-squaring Pade ``expm``.
    """
    g = complex(g)
    cutoff = photon.cutoff
    out_idx = _output_indices(comb, cutoff)
    lo, hi = int(out_idx[0]), int(out_idx[-1])
    amps = np.zeros((out_idx.size, cutoff + 1), dtype=complex)
    cidx = comb.indices
    nz = np.flatnonzero(comb.amplitudes)
    phi = photon.amplitudes
    for ne_i in nz:
        amps[cidx[ne_i] - lo] += comb.amplitudes[ne_i] * phi
    out = np.zeros_like(amps)
    kmin = int(cidx[nz].min())
    kmax = int(cidx[nz].max()) + cutoff
    for K in range(kmin, kmax + 1):
        n0 = max(0, K - hi)
        n1 = min(cutoff, K - lo)
        if n1 < n0:
            continue
        n = np.arange(n0, n1 + 1)
        rows = K - n - lo
        vec = amps[rows, n]
        if not np.any(vec):
            continue
        out[rows, n] = _block_propagator(g, n0, n1) @ vec
    leak = max(0.0, float(np.sum(np.abs(amps) ** 2) - np.sum(np.abs(out) ** 2)))
    return JointState(out, out_idx, comb.shift, photon.norm_leak + leak,
                      {"engine": "ladder", "g": g})


def fourier_samples(comb: ElectronComb, cutoff: int, minimum: int | None = None) -> int:
    span = comb.amplitudes.size + 2 * cutoff + 1
    m = max(8 * comb.amplitudes.size, span)
    if minimum:
        m = max(m, int(minimum))
    return sfft.next_fast_len(m)


def joint_scatter_fourier(comb: ElectronComb, photon: PhotonState, g: complex,
                          theta_samples: int | None = None) -> JointState:
    """Joint state from the angle-basis decomposition, sampled on ``M`` angles.

    For each angle the light is displaced by ``g e^{i theta}``; an inverse FFT
    over angles returns to ladder indices. Exact (no aliasing) once ``M``
    exceeds the reachable index span ``2W + 1 + 2 * cutoff``.
    """
    g = complex(g)
    cutoff = photon.cutoff
    dim = cutoff + 1
    m_req = fourier_samples(comb, cutoff)
    M = int(theta_samples) if theta_samples else m_req
    theta = 2.0 * math.pi * np.arange(M) / M
    buf = np.zeros(M, dtype=complex)
    np.add.at(buf, comb.indices % M, comb.amplitudes)
    a_theta = np.fft.fft(buf)  # sum_k c_k e^{-i k theta_j}
    n = np.arange(dim)
    D = kernels.displacement_matrix(g, dim)
    phase_m = np.exp(-1j * np.outer(n, theta))  # (dim, M)
    V = D @ (photon.amplitudes[:, None] * phase_m)
    V *= np.conj(phase_m) * a_theta[None, :]
    # out[n', n] = (1/M) sum_j V[n, j] e^{i n' theta_j}
    full = np.fft.ifft(V, axis=1)  # (dim, M), column index n' mod M
    out_idx = _output_indices(comb, cutoff)
    amps = full[:, out_idx % M].T.copy()
    leak = max(0.0, photon.norm() ** 2 - float(np.sum(np.abs(amps) ** 2)))
    return JointState(amps, out_idx, comb.shift, photon.norm_leak + leak,
                      {"engine": "fourier", "g": g, "theta_samples": M, "aliasing_safe": M >= m_req})


def scatter_direct(comb: ElectronComb, photon_amps: np.ndarray, g: complex) -> tuple:
    """Direct evaluation of ``c[n'+n-m] D[n, m] phi[m]``; returns (amplitudes, ladder indices).

    Independent of the FFT path; used as an oracle and for small problems.
    """
    dim = photon_amps.size
    D = kernels.displacement_matrix(complex(g), dim)
    cmap = comb.amplitude_map()
    n = np.arange(dim)
    lo = int(comb.indices[0]) - (dim - 1)
    hi = int(comb.indices[-1]) + (dim - 1)
    out = np.zeros((hi - lo + 1, dim), dtype=complex)
    Dphi = D * photon_amps[None, :]
    for k, ck in cmap.items():
        # n' = k + m - n
        for mm in np.flatnonzero(photon_amps):
            npr = k + mm - n
            out[npr - lo, n] += ck * Dphi[:, mm]
    return out, np.arange(lo, hi + 1)


# --------------------------------------------------------------------------
# post-selection
# --------------------------------------------------------------------------

def _selected(joint: JointState, rule: PostSelection):
    mask = rule.mask(joint.electron_indices, joint.shift)
    return joint.amplitudes[mask]


def branch_probability(joint: JointState, rule: PostSelection) -> float:
    sel = _selected(joint, rule)
    return float(np.sum(np.abs(sel) ** 2) / joint.norm() ** 2)


def conditional_density(joint: JointState, rule: PostSelection) -> tuple:
    """Normalized conditional density matrix of the light and the branch probability."""
    if joint.n_modes != 1:
        raise ValueError("conditional_density handles single-mode joint states")
    sel = _selected(joint, rule)
    prob = float(np.sum(np.abs(sel) ** 2) / joint.norm() ** 2)
    if prob < ZERO_PROB:
        raise ZeroProbabilityError(f"branch {rule.label()} has zero probability")
    rho = sel.T @ sel.conj()
    return rho / np.trace(rho).real, prob


def postselect(joint: JointState, rule: PostSelection) -> tuple:
    """Herald on ``rule``; returns (photonic state, probability).

    When several ladder outcomes fall in the class and leave different light
    states, the conditional state is mixed; the returned state is then its
    dominant eigenvector and ``state.norm_leak`` is unchanged. Use
    :func:`conditional_density` for the full mixture.
    """
    sel = _selected(joint, rule)
    prob = float(np.sum(np.abs(sel) ** 2) / joint.norm() ** 2)
    if prob < ZERO_PROB:
        raise ZeroProbabilityError(f"branch {rule.label()} has zero probability")
    if joint.n_modes == 1:
        rows = np.flatnonzero(np.sum(np.abs(sel) ** 2, axis=1) > 1e-30 * prob)
        if rows.size == 1:
            vec = sel[rows[0]]
        else:
            rho = sel.T @ sel.conj()
            w, v = eigh(rho)
            vec = v[:, -1]
            ov = np.vdot(vec, sel[rows[np.argmax(np.abs(sel[rows]).sum(axis=1))]])
            if abs(ov) > 0:
                vec = vec * (ov / abs(ov))
        return PhotonState(vec / np.linalg.norm(vec), joint.norm_leak), prob
    flat = sel.reshape(sel.shape[0], -1)
    rho = flat.T @ flat.conj()
    w, v = eigh(rho)
    vec = v[:, -1].reshape(sel.shape[1:])
    return vec / np.linalg.norm(vec), prob


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


# --------------------------------------------------------------------------
# heralded steps on pure-state ensembles (finite combs)
# --------------------------------------------------------------------------

@dataclass
class Ensemble:
    """Unnormalized mixture ``sum_i |v_i><v_i|`` stored as columns of ``vectors``."""

    vectors: np.ndarray  # (dim, rank)

    @classmethod
    def pure(cls, amps: np.ndarray) -> "Ensemble":
        return cls(np.asarray(amps, dtype=complex).reshape(-1, 1))

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def rank(self) -> int:
        return self.vectors.shape[1]

    def trace(self) -> float:
        return float(np.sum(np.abs(self.vectors) ** 2))

    def density(self) -> np.ndarray:
        return self.vectors @ self.vectors.conj().T

    def compress(self, rel_tol: float = 1e-14) -> "Ensemble":
        """Re-express through the eigenvectors of the mixture, dropping tiny weights."""
        if self.rank <= 1:
            return self
        u, s, _ = np.linalg.svd(self.vectors, full_matrices=False)
        keep = s ** 2 > rel_tol * (s[0] ** 2)
        return Ensemble(u[:, keep] * s[keep][None, :])

    def dominant(self) -> np.ndarray:
        u, s, _ = np.linalg.svd(self.vectors, full_matrices=False)
        return u[:, 0]

    def purity(self) -> float:
        s = np.linalg.svd(self.vectors, compute_uv=False) ** 2
        return float(np.sum(s ** 2) / np.sum(s) ** 2)


def heralded_step(ens: Ensemble, comb: ElectronComb, g: complex, rule: PostSelection,
                  rel_tol: float = 1e-14, engine: str = "fourier") -> tuple:
    """One electron interaction plus heralding on a mixed light state.

    Returns the (unnormalized) ensemble of the accepted branch, its
    probability relative to the input trace, and the norm pushed past the
    cutoff. Every accepted ladder outcome contributes one pure component.
    """
    tr_in = ens.trace()
    cols = []
    lost = 0.0
    for j in range(ens.rank):
        ph = PhotonState(ens.vectors[:, j])
        if engine == "ladder":
            joint = joint_scatter_ladder(comb, ph, g)
        else:
            joint = joint_scatter_fourier(comb, ph, g)
        lost += max(0.0, float(np.sum(np.abs(ens.vectors[:, j]) ** 2)) - joint.norm() ** 2)
        sel = _selected(joint, rule)
        cols.append(sel.T)
    new = Ensemble(np.concatenate(cols, axis=1)).compress(rel_tol)
    prob = new.trace() / tr_in
    return new, prob, lost / tr_in


# --------------------------------------------------------------------------
# two modes sharing one electron
# --------------------------------------------------------------------------

def two_mode_kraus_apply(psi: np.ndarray, g1: complex, g2: complex, N: int, k: int) -> np.ndarray:
    """Ideal comb_N heralding residue ``k`` on a two-mode amplitude matrix.

    ``(1/N) sum_m e^{-2 pi i k m/N} D1(g1 w^m) D2(g2 w^m) |psi>`` with ``w = e^{2 pi i/N}``.
    """
    d1, d2 = psi.shape
    acc = np.zeros_like(psi, dtype=complex)
    for m in range(N):
        w = np.exp(2j * math.pi * m / N)
        D1 = kernels.displacement_matrix(complex(g1) * w, d1)
        D2 = kernels.displacement_matrix(complex(g2) * w, d2)
        acc += np.exp(-2j * math.pi * k * m / N) * (D1 @ psi @ D2.T)
    return acc / N


def two_mode_scatter(comb: ElectronComb, ph1, ph2, g1: complex, g2: complex,
                     theta_samples: int | None = None) -> JointState:
    """``S2 S1`` on electron x mode1 x mode2 via the angle decomposition.

    ``ph1``/``ph2`` are PhotonStates (product input) or ``ph2=None`` with
    ``ph1`` a two-mode amplitude matrix.
    """
    if ph2 is None:
        psi = np.asarray(ph1, dtype=complex)
    else:
        psi = np.outer(ph1.amplitudes, ph2.amplitudes)
    d1, d2 = psi.shape
    span = comb.amplitudes.size + 2 * (d1 + d2)
    M = int(theta_samples) if theta_samples else sfft.next_fast_len(max(8 * comb.amplitudes.size, span))
    theta = 2.0 * math.pi * np.arange(M) / M
    buf = np.zeros(M, dtype=complex)
    np.add.at(buf, comb.indices % M, comb.amplitudes)
    a_theta = np.fft.fft(buf)
    D1 = kernels.displacement_matrix(complex(g1), d1)
    D2 = kernels.displacement_matrix(complex(g2), d2)
    n1 = np.arange(d1)
    n2 = np.arange(d2)
    lo = int(comb.indices[0]) - (d1 - 1) - (d2 - 1)
    hi = int(comb.indices[-1]) + (d1 - 1) + (d2 - 1)
    out_idx = np.arange(lo, hi + 1)
    V = np.empty((M, d1, d2), dtype=complex)
    for j, th in enumerate(theta):
        e1 = np.exp(1j * th * n1)
        e2 = np.exp(1j * th * n2)
        rotated = psi * np.conj(e1)[:, None] * np.conj(e2)[None, :]
        V[j] = a_theta[j] * (e1[:, None] * (D1 @ rotated @ D2.T) * e2[None, :])
    full = np.fft.ifft(V, axis=0)
    amps = full[out_idx % M]
    leak = max(0.0, float(np.sum(np.abs(psi) ** 2) - np.sum(np.abs(amps) ** 2)))
    return JointState(amps, out_idx, comb.shift, leak, {"engine": "fourier2", "g1": g1, "g2": g2})


def two_mode_scatter_ladder(comb: ElectronComb, ph1: PhotonState, ph2: PhotonState,
                            g1: complex, g2: complex) -> JointState:
    """Sparse-generator reference: ``expm_multiply`` of each coupling in turn on the windowed joint space."""
    d1, d2 = ph1.dim, ph2.dim
    lo = int(comb.indices[0]) - (d1 - 1) - (d2 - 1)
    hi = int(comb.indices[-1]) + (d1 - 1) + (d2 - 1)
    E = hi - lo + 1
    out_idx = np.arange(lo, hi + 1)
    b = diags(np.ones(E - 1), 1, shape=(E, E), format="csr")  # |n-1><n| in row-ascending order
    a1 = diags(np.sqrt(np.arange(1, d1)), 1, shape=(d1, d1), format="csr")
    a2 = diags(np.sqrt(np.arange(1, d2)), 1, shape=(d2, d2), format="csr")
    i1 = identity(d1, format="csr")
    i2 = identity(d2, format="csr")
    gen1 = complex(g1) * kron(kron(b, a1.T), i2) - np.conj(g1) * kron(kron(b.T, a1), i2)
    gen2 = complex(g2) * kron(kron(b, i1), a2.T) - np.conj(g2) * kron(kron(b.T, i1), a2)
    elec = np.zeros(E, dtype=complex)
    elec[comb.indices - lo] = comb.amplitudes
    vec = np.kron(np.kron(elec, ph1.amplitudes), ph2.amplitudes)
    vec = expm_multiply(csr_matrix(gen1), vec)
    vec = expm_multiply(csr_matrix(gen2), vec)
    return JointState(vec.reshape(E, d1, d2), out_idx, comb.shift, 0.0, {"engine": "ladder2"})
