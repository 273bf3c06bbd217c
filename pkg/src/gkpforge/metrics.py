"""Characterization: squeezing, reference states, fidelities, robustness sweeps."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.signal import find_peaks

from . import electron as el
from . import gkp
from .errors import ZeroProbabilityError
from .fock import (PhotonState, coherent_amplitudes, fidelity, quadrature_moments, quadrature_wavefunction,
                   suggest_cutoff, vacuum)
from .protocols import (CombSpec, Protocol, coefficient_expansion, expansion_state, initial_state, run_protocol,
                        table1_preset)
from .scatter import Ensemble, heralded_step, joint_scatter_fourier

PEAK_THRESHOLD = 0.01  # local maxima below this fraction of the global maximum are ignored
GRID_STEP = 0.01
VAR_VAC = 0.5
DELTA_BOUNDS = (0.05, 0.99)


@dataclass
class MetricsBundle:
    squeezing_db: list = field(default_factory=list)  # (axis angle, dB)
    fidelities: list = field(default_factory=list)  # (label, value, optimized delta or None)
    probability: float | None = None
    peak_fit: list = field(default_factory=list)  # (axis angle, centers, variances)
    notes: list = field(default_factory=list)

    def best_fidelity(self):
        if not self.fidelities:
            return None
        return max(self.fidelities, key=lambda t: t[1])

    def headline_squeezing(self):
        vals = [v for _, v in self.squeezing_db if np.isfinite(v)]
        return min(vals) if vals else float("nan")

    def to_dict(self) -> dict:
        return {
            "probability": self.probability,
            "squeezing_db": [{"axis": float(a), "db": float(v)} for a, v in self.squeezing_db],
            "squeezing_db_worst_axis": self.headline_squeezing() if self.squeezing_db else None,
            "fidelities": [{"reference": lab, "fidelity": float(v),
                            "delta": None if d is None else float(d)} for lab, v, d in self.fidelities],
            "peak_fit": [{"axis": float(a), "centers": [float(c) for c in cs],
                          "variances": [float(v) for v in vs]} for a, cs, vs in self.peak_fit],
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class GKPReference:
    lattice: str = "square"
    logical: str = "0"
    delta: float = 0.3
    construction: str = "auto"  # envelope_comb | protocol_limit | auto

    @property
    def label(self) -> str:
        return f"gkp-{self.lattice}-{self.logical}"


# --------------------------------------------------------------------------
# squeezing
# --------------------------------------------------------------------------

def quadrature_grid(state: PhotonState, angle: float, step: float = GRID_STEP) -> np.ndarray:
    mean, var = quadrature_moments(state, angle)
    half = 8.0 * math.sqrt(var) + 4.0
    return np.arange(mean - half, mean + half + step, step)


def peak_analysis(state: PhotonState, angle: float, step: float = GRID_STEP):
    """Peak centers, within-peak variances and weights of the quadrature distribution."""
    q = quadrature_grid(state, angle, step)
    prob = np.abs(quadrature_wavefunction(state, angle, q)) ** 2
    idx, _ = find_peaks(prob, height=PEAK_THRESHOLD * prob.max())
    if prob.argmax() not in idx and (prob.argmax() in (0, q.size - 1)):
        raise ValueError("distribution peaks at the grid edge; widen the grid")
    if idx.size == 0:
        raise ValueError("no resolvable peaks; use the analytic squeezing estimate")
    qp = q[idx]
    if idx.size > 1:
        mids = 0.5 * (qp[1:] + qp[:-1])
        first = qp[0] - 0.5 * (qp[1] - qp[0])
        last = qp[-1] + 0.5 * (qp[-1] - qp[-2])
        edges = np.concatenate([[first], mids, [last]])
    else:
        edges = np.array([q[0], q[-1]])
    centers, variances, weights = [], [], []
    for a, b in zip(edges[:-1], edges[1:]):
        sel = (q >= a) & (q < b)
        w = np.trapezoid(prob[sel], q[sel]) if sel.sum() > 1 else 0.0
        if w <= 0:
            continue
        mu = np.trapezoid(prob[sel] * q[sel], q[sel]) / w
        var = np.trapezoid(prob[sel] * (q[sel] - mu) ** 2, q[sel]) / w
        centers.append(mu)
        variances.append(var)
        weights.append(w)
    return np.array(centers), np.array(variances), np.array(weights)


def squeezing_db_peaks(state: PhotonState, angle: float = 0.0) -> float:
    """``10 log10(Var_vac / Var)`` with Var the probability-weighted within-peak variance."""
    _, var, w = peak_analysis(state, angle)
    v = float(np.dot(w, var) / w.sum())
    return 10.0 * math.log10(VAR_VAC / v)


def squeezing_db_analytic(kind: str, m: int = 0, ne: int = 0, r: float = 0.0) -> float:
    """Closed forms: ``10 log10(1 + pi m)`` (vacuum seed) or ``10 log10(e^{-2r} + ne pi)`` (seeded)."""
    if kind == "vacuum":
        return 10.0 * math.log10(1.0 + math.pi * m)
    if kind == "seeded":
        return 10.0 * math.log10(math.exp(-2.0 * r) + ne * math.pi)
    raise ValueError(f"unknown scheme {kind!r}")


def squeezing_axes(lattice: str, protocol: Protocol | None = None) -> list:
    """Square: x and p. Hexagonal: the three axes orthogonal to the lattice directions."""
    if lattice == "square":
        return [0.0, math.pi / 2]
    dirs = [gkp.HEXAGONAL.lz, gkp.HEXAGONAL.lx, -(gkp.HEXAGONAL.lx + gkp.HEXAGONAL.lz)]
    # the quadrature measured at angle phi is displaced by Re(alpha e^{-i phi}); the axis
    # orthogonal to a displacement direction psi is phi = psi + pi/2 (mod pi)
    return sorted(float((np.angle(d) + math.pi / 2) % math.pi) for d in dirs)


# --------------------------------------------------------------------------
# references and fidelities
# --------------------------------------------------------------------------

def make_cat_reference(N: int, k: int, alpha: complex, cutoff: int) -> PhotonState:
    """Normalized ``sum_m e^{-2 pi i m k/N} |alpha e^{2 pi i m/N}>``."""
    amps = np.zeros(cutoff + 1, dtype=complex)
    for m in range(N):
        amps += np.exp(-2j * math.pi * m * k / N) * coherent_amplitudes(alpha * np.exp(2j * math.pi * m / N), cutoff)
    nrm = np.linalg.norm(amps)
    if nrm < 1e-12:
        raise ZeroProbabilityError("cat reference has zero norm (alpha=0 with k != 0?)")
    return PhotonState(amps / nrm)


_LIMIT_ROWS = {("square", "0"): 2, ("square", "1"): 2, ("square", "H"): 3,
               ("hexagonal", "0"): 6, ("hexagonal", "T"): 7}


def delta_to_m(delta: float) -> int:
    """Protocol length whose peak variance ``1/(1 + pi m)`` matches ``delta^2``."""
    return max(1, int(round((1.0 / delta ** 2 - 1.0) / math.pi)))


def make_gkp_reference(ref: GKPReference, cutoff: int | None = None) -> PhotonState:
    """Finite-energy grid state.

    ``envelope_comb`` is the Gaussian-weighted coherent lattice; ``protocol_limit``
    runs the matching ideal-comb protocol (at ``m >= 12`` and parity fixed by
    the logical label) through the displacement expansion. ``auto`` picks the
    protocol limit for hexagonal and magic states and the envelope otherwise.
    """
    construction = ref.construction
    if construction == "auto":
        hexish = ref.lattice == "hexagonal" or ref.logical in ("H", "T")
        construction = "protocol_limit" if hexish and (ref.lattice, ref.logical) in _LIMIT_ROWS else "envelope_comb"
    if construction == "envelope_comb":
        return gkp.code_state(gkp.lattice_by_name(ref.lattice), ref.logical, ref.delta, cutoff)
    if construction != "protocol_limit":
        raise ValueError(f"unknown construction {construction!r}")
    key = (ref.lattice, ref.logical)
    if key not in _LIMIT_ROWS:
        raise ValueError(f"no protocol limit for {key}")
    row = _LIMIT_ROWS[key]
    m = max(12, delta_to_m(ref.delta))
    # row 2 alternates |0>/|1> with m; row 3 gives |H> for even m
    want_odd = row == 2 and ref.logical == "1"
    if row in (2, 3) and (m % 2 == 1) != want_odd:
        m += 1
    p = table1_preset(row, m)
    exp = coefficient_expansion(p, prune=1e-14)
    if cutoff is None:
        cutoff = suggest_cutoff(float(np.max(np.abs(exp.displacements))) ** 2)
    return expansion_state(exp, p.initial, cutoff)


def gkp_fidelity(state: PhotonState, lattice: str, logical: str, delta: float) -> float:
    return gkp.fidelity_to_code(gkp.lattice_by_name(lattice), logical, delta, state.amplitudes)


def optimize_delta(state: PhotonState, lattice: str, logical: str, bounds=DELTA_BOUNDS, xtol: float = 1e-3):
    """Maximize fidelity over the envelope parameter; returns (fidelity, delta)."""
    res = minimize_scalar(lambda d: -gkp_fidelity(state, lattice, logical, d), bounds=bounds,
                          method="bounded", options={"xatol": xtol})
    return float(-res.fun), float(res.x)


def fidelity_report(state: PhotonState, refs) -> list:
    """``(label, fidelity, delta)`` per reference; GKP references are delta-optimized."""
    out = []
    for ref in refs:
        if isinstance(ref, GKPReference):
            f, d = optimize_delta(state, ref.lattice, ref.logical)
            out.append((ref.label, f, d))
        elif isinstance(ref, tuple) and ref[0] == "cat":
            _, N, k, alpha = ref
            out.append((f"cat-N{N}-k{k}", fidelity(state, make_cat_reference(N, k, alpha, state.cutoff)), None))
        else:
            label, target = ref
            out.append((label, fidelity(state, target), None))
    return out


def default_references(lattice: str) -> list:
    if lattice == "hexagonal":
        return [GKPReference("hexagonal", lg) for lg in ("0", "1", "+", "-", "T")]
    return [GKPReference("square", lg) for lg in ("0", "1", "+", "-", "H")]


def evaluate(outcome, protocol: Protocol, refs=None, squeeze: bool = True) -> MetricsBundle:
    """Metrics for a single-mode outcome: squeezing on the lattice axes plus reference fidelities."""
    mb = MetricsBundle(probability=outcome.probability)
    state = outcome.state
    if squeeze and protocol.steps:
        for ax in squeezing_axes(protocol.lattice):
            try:
                c, v, w = peak_analysis(state, ax)
                mb.squeezing_db.append((ax, 10.0 * math.log10(VAR_VAC / float(np.dot(w, v) / w.sum()))))
                mb.peak_fit.append((ax, c, v))
            except ValueError as exc:
                mb.notes.append(f"axis {ax:.4f}: {exc}")
    refs = default_references(protocol.lattice) if refs is None else refs
    if refs:
        mb.fidelities = fidelity_report(state, refs)
    return mb


# --------------------------------------------------------------------------
# robustness
# --------------------------------------------------------------------------

def jitter_robustness(protocol: Protocol, delta_g: float, samples: int, seed: int = 0):
    """Mean and std of the fidelity to the nominal output under Gaussian |g| jitter.

    Each step's magnitude is drawn from Normal(|g|, delta_g); its phase is kept.
    """
    nominal = run_protocol(protocol).state
    if delta_g == 0:
        return 1.0, 0.0
    rng = np.random.default_rng(seed)
    vals = np.empty(samples)
    for i in range(samples):
        steps = []
        for s in protocol.steps:
            mag = abs(s.g) + delta_g * rng.standard_normal()
            steps.append(replace(s, g=mag * np.exp(1j * np.angle(s.g))))
        vals[i] = fidelity(run_protocol(replace(protocol, steps=tuple(steps))).state, nominal)
    return float(vals.mean()), float(vals.std())


def fit_quadratic_loss(delta_g, fidelities):
    """Fit ``F = 1 - c dg^2``; returns (c, R^2)."""
    x = np.asarray(delta_g, float) ** 2
    y = 1.0 - np.asarray(fidelities, float)
    c = float(np.dot(x, y) / np.dot(x, x))
    resid = y - c * x
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return c, r2


def finite_comb_cat_fidelity(g: complex, sigma: float, N: int = 2, comb: el.ElectronComb | None = None,
                             cutoff: int | None = None, nsigma: float = 3.0):
    """Probability-weighted fidelity of single-outcome states to the ideal cat of matching order.

    Every exact ladder outcome ``n'`` within ``nsigma * sigma`` of the comb
    center heralds a pure state; it is compared with the order-``k`` cat,
    ``k = (shift - n') mod N``, and weighted by its probability.
    """
    comb = comb or el.gaussian_comb(N, sigma)
    cutoff = cutoff or suggest_cutoff(abs(g) ** 2)
    joint = joint_scatter_fourier(comb, vacuum(cutoff), g)
    cats = [make_cat_reference(N, k, g, cutoff) for k in range(N)]
    num = 0.0
    den = 0.0
    for row, n_out in zip(joint.amplitudes, joint.electron_indices):
        if abs(n_out - comb.shift) > nsigma * sigma:
            continue
        p = float(np.vdot(row, row).real)
        if p < 1e-300:
            continue
        k = (comb.shift - n_out) % N
        num += p * fidelity(PhotonState(row), cats[k])
        den += p
    return num / den


def dispersion_sweep(g: complex, sigma: float, zs, beta: float | None = None, N: int = 2):
    """Cat fidelity as the comb drifts a distance ``z`` under quadratic dispersion."""
    beta = el.dispersion_beta() if beta is None else beta
    base = el.gaussian_comb(N, sigma)
    out = []
    for z in zs:
        comb = el.apply_phase_profile(base, el.PhaseProfile("quadratic", beta, z))
        out.append(finite_comb_cat_fidelity(g, sigma, N, comb))
    return np.array(out)


def comb_width_fidelity(row: int, m: int, sigma: float, cutoff: int | None = None, rel_tol: float = 1e-12):
    """Fidelity of the Gaussian-comb run of a preset to its ideal-comb output, ``<ideal|rho|ideal>``."""
    ideal = table1_preset(row, m, cutoff=cutoff)
    ref = run_protocol(ideal)
    cut = ref.cutoff
    ens = Ensemble.pure(initial_state(ideal.initial, cut).amplitudes)
    comb_cache = {}
    prob = 1.0
    for step in ideal.steps:
        N = step.post.N
        if N not in comb_cache:
            comb_cache[N] = CombSpec(N=N, envelope="gaussian", sigma=sigma).build()
        ens = Ensemble(ens.vectors / math.sqrt(ens.trace()))
        ens, pr, _ = heralded_step(ens, comb_cache[N], step.g, step.post, rel_tol)
        prob *= pr
    vec = ref.state.amplitudes
    proj = vec.conj() @ ens.vectors
    fid = float(np.sum(np.abs(proj) ** 2) / ens.trace())
    return fid, prob, ref.probability, ens.rank
