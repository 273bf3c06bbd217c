"""Finite-energy grid (GKP) states as Gaussian-weighted coherent-state lattices.

A qubit code is fixed by logical displacements ``X = D(lx)``, ``Z = D(lz)``
with ``Im(lz conj(lx)) = pi/2``; the stabilizers are ``D(2 lx)`` and ``D(2 lz)``.
The code state ``|0>`` is approximated by

    sum_{a,b} (-1)^{ab} exp(-kappa |lam|^2) |lam>,   lam = 2a lx + b lz,

with ``kappa = delta^2 / (1 - delta^2)``, so each peak has variance
``delta^2`` relative to vacuum. The same binomial-to-Gaussian limit describes
the electron-built states, which is why this family is the comparison class.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .fock import PhotonState, coherent_amplitudes, suggest_cutoff

SQRT_PI_2 = math.sqrt(math.pi / 2.0)
HEX_LENGTH = math.sqrt(math.pi / math.sqrt(3.0))

LOGICALS = ("0", "1", "+", "-", "+i", "-i", "H", "T")

# Bloch angles (polar, azimuth) of the states built as cos(t/2)|0> + e^{i f} sin(t/2)|1>.
# H is the +1 eigenstate of the logical Hadamard; T is the face state with Bloch
# vector (1, 1, 1)/sqrt(3), the eigenstate of the order-3 Clifford.
BLOCH_ANGLES = {"H": (math.pi / 4, 0.0), "T": (math.acos(1.0 / math.sqrt(3.0)), math.pi / 4),
                "+i": (math.pi / 2, math.pi / 2), "-i": (math.pi / 2, -math.pi / 2)}


@dataclass(frozen=True)
class Lattice:
    name: str
    lx: complex
    lz: complex

    def __post_init__(self):
        area = (self.lz * np.conj(self.lx)).imag
        if abs(area - math.pi / 2) > 1e-9:
            raise ValueError(f"logical displacements must satisfy Im(lz conj(lx)) = pi/2, got {area}")


SQUARE = Lattice("square", SQRT_PI_2, 1j * SQRT_PI_2)
# lattice directions at 90, 30 and 150 degrees; Z = D(lz) points along 30 degrees
HEXAGONAL = Lattice("hexagonal", -1j * HEX_LENGTH,
                    HEX_LENGTH * complex(math.cos(math.pi / 6), math.sin(math.pi / 6)))


def lattice_by_name(name: str) -> Lattice:
    if name == "square":
        return SQUARE
    if name in ("hexagonal", "hex"):
        return HEXAGONAL
    raise ValueError(f"unknown lattice {name!r}")


def kappa_from_delta(delta: float) -> float:
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    return delta ** 2 / (1.0 - delta ** 2)


@dataclass
class CoherentSum:
    """``sum_j w_j |d_j>`` with coherent states ``|d_j>``."""

    points: np.ndarray
    weights: np.ndarray

    def norm_sq(self, radius: float = 9.0) -> float:
        """Exact squared norm from coherent overlaps, skipping pairs farther than ``radius``."""
        pts = self.points
        w = self.weights
        tree = cKDTree(np.column_stack([pts.real, pts.imag]))
        pairs = tree.query_pairs(radius, output_type="ndarray")
        diag = float(np.sum(np.abs(w) ** 2))
        if pairs.size == 0:
            return diag
        i, j = pairs[:, 0], pairs[:, 1]
        a, b = pts[i], pts[j]
        ov = np.exp(-0.5 * np.abs(a) ** 2 - 0.5 * np.abs(b) ** 2 + np.conj(a) * b)
        return diag + 2.0 * float(np.sum(np.conj(w[i]) * w[j] * ov).real)

    def overlap_with(self, amps: np.ndarray) -> complex:
        """``<self|psi>`` for Fock amplitudes ``amps`` (exact for a truncated psi)."""
        cutoff = amps.size - 1
        total = 0.0 + 0.0j
        for start in range(0, self.points.size, 512):
            pts = self.points[start:start + 512]
            mat = np.stack([coherent_amplitudes(p, cutoff) for p in pts], axis=1)
            total += np.vdot(mat @ self.weights[start:start + 512], amps)
        return complex(total)

    def to_fock(self, cutoff: int) -> np.ndarray:
        out = np.zeros(cutoff + 1, dtype=complex)
        for start in range(0, self.points.size, 512):
            pts = self.points[start:start + 512]
            mat = np.stack([coherent_amplitudes(p, cutoff) for p in pts], axis=1)
            out += mat @ self.weights[start:start + 512]
        return out

    def scaled(self, c: complex) -> "CoherentSum":
        return CoherentSum(self.points, self.weights * c)

    def displaced(self, alpha: complex) -> "CoherentSum":
        """``D(alpha)`` applied: ``D(alpha)|d> = e^{i Im(alpha conj(d))} |alpha + d>``."""
        ph = np.exp(1j * (alpha * np.conj(self.points)).imag)
        return CoherentSum(self.points + alpha, self.weights * ph)

    def max_radius(self) -> float:
        return float(np.max(np.abs(self.points)))

    @staticmethod
    def concat(parts, coeffs) -> "CoherentSum":
        pts = np.concatenate([p.points for p in parts])
        w = np.concatenate([p.weights * c for p, c in zip(parts, coeffs)])
        return CoherentSum(pts, w)


def _code_sum(gen_a: complex, gen_b: complex, kappa: float, tol: float) -> CoherentSum:
    """``sum (-1)^{ab} exp(-kappa|lam|^2)|lam>`` over ``lam = a gen_a + b gen_b``."""
    rmax = math.sqrt(-math.log(tol) / kappa) + 1.0
    # lattice index ranges large enough to cover the disc |lam| <= rmax
    det = abs((gen_a * np.conj(gen_b)).imag)
    na = int(math.ceil(rmax * abs(gen_b) / det)) + 1
    nb = int(math.ceil(rmax * abs(gen_a) / det)) + 1
    a, b = np.meshgrid(np.arange(-na, na + 1), np.arange(-nb, nb + 1), indexing="ij")
    a = a.ravel()
    b = b.ravel()
    lam = a * gen_a + b * gen_b
    keep = np.abs(lam) <= rmax
    a, b, lam = a[keep], b[keep], lam[keep]
    w = np.where((a * b) % 2 == 0, 1.0, -1.0) * np.exp(-kappa * np.abs(lam) ** 2)
    return CoherentSum(lam.astype(complex), w.astype(complex))


def _shifted_coset(base: CoherentSum, shift: complex, kappa: float) -> CoherentSum:
    """``D(shift)`` applied to the ideal lattice sum, then the origin-centered envelope."""
    moved = CoherentSum(base.points, np.sign(base.weights.real).astype(complex)).displaced(shift)
    return CoherentSum(moved.points, moved.weights * np.exp(-kappa * np.abs(moved.points) ** 2))


def code_state_sum(lattice: Lattice, logical: str, delta: float, tol: float = 1e-9) -> CoherentSum:
    """Coherent-state expansion of the finite-energy logical state (unnormalized).

    Every logical state carries the same origin-centered envelope, so ``|1>``
    is not literally ``D(lx)|0>`` at finite delta.
    """
    kappa = kappa_from_delta(delta)
    lx, lz = lattice.lx, lattice.lz
    if logical in ("0", "1") or logical in BLOCH_ANGLES:
        zero = _code_sum(lz, 2 * lx, kappa, tol)
        # the (-1)^{ab} sign is the phase of D(a lz) D(2b lx)
        if logical == "0":
            return zero
        one = _shifted_coset(zero, lx, kappa)
        if logical == "1":
            return one
        t, f = BLOCH_ANGLES[logical]
        c0 = math.cos(t / 2) / math.sqrt(zero.norm_sq())
        c1 = np.exp(1j * f) * math.sin(t / 2) / math.sqrt(one.norm_sq())
        return CoherentSum.concat([zero, one], [c0, c1])
    if logical in ("+", "-"):
        plus = _code_sum(lx, 2 * lz, kappa, tol)
        return plus if logical == "+" else _shifted_coset(plus, lz, kappa)
    raise ValueError(f"unknown logical state {logical!r}")


def required_cutoff(cs: CoherentSum) -> int:
    return suggest_cutoff(cs.max_radius() ** 2)


def code_state(lattice: Lattice, logical: str, delta: float, cutoff: int | None = None) -> PhotonState:
    """Normalized Fock amplitudes of the finite-energy logical state.

    ``norm_leak`` reports the exact squared norm beyond ``cutoff``.
    """
    cs = code_state_sum(lattice, logical, delta)
    if cutoff is None:
        cutoff = required_cutoff(cs)
    nrm = math.sqrt(cs.norm_sq())
    amps = cs.to_fock(cutoff) / nrm
    leak = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
    return PhotonState(amps, leak)


def fidelity_to_code(lattice: Lattice, logical: str, delta: float, amps: np.ndarray) -> float:
    """``|<ref|psi>|^2`` with the reference normalized exactly (not truncated)."""
    cs = code_state_sum(lattice, logical, delta)
    nrm2 = cs.norm_sq()
    psi = np.asarray(amps, dtype=complex)
    ov = cs.overlap_with(psi)
    return float(min(1.0, abs(ov) ** 2 / (nrm2 * np.vdot(psi, psi).real)))
