"""Embedded acceptance suite, shared by ``gkpforge validate`` and the test suite.

Each check returns a ``CheckResult`` with the measured and expected values;
``run_checks`` executes a tier and ``format_result`` renders one status line.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import electron as el
from . import gkp
from . import metrics as M
from . import protocols as P
from .fock import PhotonState, SqueezeParams, fidelity, fock_state, vacuum, wigner
from .scatter import (PostSelection, branch_probability, cat_probability, conditional_kraus,
                      joint_scatter_fourier, joint_scatter_ladder)

SQRT_PI_2 = math.sqrt(math.pi / 2)


@dataclass
class CheckResult:
    cid: str
    name: str
    passed: bool
    measured: str
    expected: str
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {"id": self.cid, "name": self.name, "passed": self.passed, "measured": self.measured,
                "expected": self.expected, "seconds": round(self.seconds, 3)}


def format_result(r: CheckResult) -> str:
    status = "PASS" if r.passed else "FAIL"
    return f"{status} [{r.cid}] {r.name}: measured {r.measured}; expected {r.expected} ({r.seconds:.1f} s)"


# --------------------------------------------------------------------------
# checks
# --------------------------------------------------------------------------

def check_cat_probabilities():
    worst = 0.0
    for g in (0.5, SQRT_PI_2, 2.0, 4.0):
        cutoff = int(math.ceil(g * g + 8 * g + 20))
        for N in (2, 3, 4):
            comb = el.ideal_comb(N, window=N * 400)
            joint = joint_scatter_ladder(comb, vacuum(cutoff), g)
            for k in range(N):
                p_sim = branch_probability(joint, PostSelection("residue", k, N)) / joint.norm()
                worst = max(worst, abs(p_sim - cat_probability(g, N, k)))
        worst = max(worst, abs(cat_probability(g, 2, 0) - 0.5 * (1 + math.exp(-2 * g * g))))
    return worst < 1e-6, f"max |dP| = {worst:.2e}", "< 1e-6", {"max_abs_dp": worst}


def check_completeness():
    worst_k = 0.0
    for g, N in ((SQRT_PI_2, 2), (2.0, 3), (1.0 + 1.0j, 4)):
        cutoff = 120
        safe = 60
        tot = sum(conditional_kraus(g, N, k, cutoff).entries.conj().T @ conditional_kraus(g, N, k, cutoff).entries
                  for k in range(N))
        worst_k = max(worst_k, float(np.max(np.abs(tot[:safe, :safe] - np.eye(safe)))))
    worst_b = 0.0
    seed = P.initial_state(P.InitialState("squeezed", SqueezeParams(0.5, 0.3)), 60)
    for comb, g in ((el.gaussian_comb(2, 4.0), SQRT_PI_2), (el.gaussian_comb(3, 6.0), 1.5),
                    (el.ideal_comb(4, window=60), 1.0j)):
        joint = joint_scatter_fourier(comb, seed, g)
        tot = sum(branch_probability(joint, PostSelection("residue", k, comb.spacing))
                  for k in range(comb.spacing))
        worst_b = max(worst_b, abs(tot - seed.norm()))
    ok = worst_k < 1e-10 and worst_b < 1e-10
    return ok, f"kraus {worst_k:.1e}, branches {worst_b:.1e}", "< 1e-10 each", {}


def check_engine_equivalence():
    worst_f = 0.0
    worst_e = 0.0
    cases = [(el.gaussian_comb(2, 4.0), SQRT_PI_2), (el.gaussian_comb(3, 3.0), 1.2 - 0.7j),
             (el.ideal_comb(4, window=40), 2.0), (el.ideal_comb(1, window=30), 0.8j)]
    for comb, g in cases:
        seed = PhotonState(np.ones(6, dtype=complex) / math.sqrt(6)).embed(60)
        a = joint_scatter_ladder(comb, seed, g)
        b = joint_scatter_fourier(comb, seed, g)
        ov = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2 / (a.norm() * b.norm())
        worst_f = max(worst_f, 1 - ov)
        # excitation conservation, meaningful when both ladders stay inside their windows
        n_in = float(np.dot(np.arange(seed.dim), np.abs(seed.amplitudes) ** 2)) + \
            float(np.dot(comb.indices, comb.spectrum()))
        worst_e = max(worst_e, abs(b.total_excitation() - n_in))
    ok = worst_f < 1e-8 and worst_e < 1e-10
    return ok, f"1-F = {worst_f:.1e}, excitation drift {worst_e:.1e}", "1-F <= 1e-8, drift < 1e-10", {}


def check_vacuum_gkp_probability():
    closed = P.gkp_vacuum_probability(3)
    sim = P.run_protocol(P.table1_preset(2, 3)).probability
    rel = abs(sim - closed) / closed
    ok = 0.094 <= closed <= 0.100 and 0.094 <= sim <= 0.100 and rel < 1e-6
    return ok, f"closed {closed:.6f}, simulated {sim:.6f}, rel {rel:.1e}", "both in [0.094, 0.100], rel < 1e-6", {}


def check_seeded_probability():
    closed = P.seeded_gkp_probability(3, 1.1513)
    sim = P.run_protocol(P.table1_preset(5, 3)).probability
    rel = abs(sim - closed) / closed
    ok = abs(closed - 0.3125) <= 1e-3 and rel < 1e-6
    return ok, f"closed {closed:.6f}, simulated {sim:.6f}, rel {rel:.1e}", "0.3125 +- 0.001, rel < 1e-6", {}


def check_squeezing_laws():
    devs = []
    for m in (1, 2, 3):
        st = P.run_protocol(P.table1_preset(2, m)).state
        devs.append(M.squeezing_db_peaks(st, 0.0) - M.squeezing_db_analytic("vacuum", m))
    seeded = P.run_protocol(P.table1_preset(5, 3)).state
    s_db = min(M.squeezing_db_peaks(seeded, 0.0), M.squeezing_db_peaks(seeded, math.pi / 2))
    ok = max(abs(d) for d in devs) <= 0.5 and abs(s_db - 9.8) <= 0.3
    return ok, (f"row-2 x-axis deviations {', '.join(f'{d:+.2f}' for d in devs)} dB; seeded {s_db:.2f} dB"), \
        "|dev| <= 0.5 dB; seeded 9.8 +- 0.3 dB", {}


def _row_probability(row):
    m = P.TEN_DB_M[row]
    p = P.run_protocol(P.table1_preset(row, m)).probability
    return p, m * P.ELECTRONS_PER_M[row]


def _preset_probability_check(targets):
    ok = True
    parts = []
    for row, target, tol in targets:
        p, ne = _row_probability(row)
        ok &= abs(100 * p - target) <= tol
        parts.append(f"row {row} (Ne={ne}) {100 * p:.3g}%")
    expected = ", ".join(f"row {r} {t}% +- {tl} pp" for r, t, tl in targets)
    return ok, "; ".join(parts), expected, {}


def check_preset_probabilities():
    return _preset_probability_check([(3, 11.1, 0.5), (7, 9.5, 0.5), (8, 27.3, 0.5)])


def check_preset_probabilities_extended():
    return _preset_probability_check([(1, 5.0, 1.0), (6, 2.6, 0.7), (4, 0.4, 0.2)])


def check_scaling_laws():
    ms = np.arange(1, 7)
    p_vac = [P.run_protocol(P.table1_preset(2, int(m))).probability for m in ms]
    e_vac = np.polyfit(np.log(5 * ms), np.log(p_vac), 1)[0]
    p_seed = [P.run_protocol(P.table1_preset(5, int(m))).probability for m in ms]
    e_seed = np.polyfit(np.log(ms), np.log(p_seed), 1)[0]
    ok = abs(e_vac + 1.0) <= 0.15 and abs(e_seed + 0.5) <= 0.1
    return ok, f"vacuum exponent {e_vac:.3f}, seeded exponent {e_seed:.3f}", "-1.0 +- 0.15, -0.5 +- 0.1", {}


def _finite_comb(g):
    f4 = M.finite_comb_cat_fidelity(g, 4.0)
    f8 = M.finite_comb_cat_fidelity(g, 8.0)
    ok = abs(f4 - 0.97) <= 0.01 and abs(f8 - 0.99) <= 0.01
    return ok, f"sigma=4: {f4:.4f}, sigma=8: {f8:.4f}", "0.97 +- 0.01, 0.99 +- 0.01", {}


def check_finite_comb():
    return _finite_comb(4.0)


def check_finite_comb_low_g():
    return _finite_comb(SQRT_PI_2)


def check_comb_width():
    f, p_sim, p_ideal, rank = M.comb_width_fidelity(2, 3, 30.0)
    return abs(f - 0.98) <= 0.01, f"{f:.4f} (finite-comb P {p_sim:.4f} vs ideal {p_ideal:.4f})", "0.98 +- 0.01", {}


def check_jitter_law():
    proto = P.cat_preset(2, SQRT_PI_2, 0)
    dgs = np.array([0.05, 0.10, 0.15, 0.20, 0.25])
    means = [M.jitter_robustness(proto, float(d), 400, seed=7)[0] for d in dgs]
    c, r2 = M.fit_quadratic_loss(dgs, means)
    return r2 > 0.99, f"R^2 = {r2:.4f}, c = {c:.3f}", "R^2 > 0.99", {"c": c}


def _seeded_steps(ne):
    steps = tuple(P._family(ne, SQRT_PI_2))
    proto = P.Protocol(steps, P.InitialState("squeezed", SqueezeParams(1.1513, 0.0)), 1, "analytic", None,
                       f"seeded-{ne}", "square")
    return P.run_protocol(proto).state


def check_x_gate_stabilizer():
    alternation = True
    f0_even = []
    for ne in range(0, 7):
        st = _seeded_steps(ne)
        f0, _ = M.optimize_delta(st, "square", "0")
        f1, _ = M.optimize_delta(st, "square", "1")
        alternation &= (f0 > f1) == (ne % 2 == 0)
        if ne % 2 == 0:
            f0_even.append(f0)
    monotone = all(b >= a - 1e-9 for a, b in zip(f0_even, f0_even[1:]))
    return alternation and monotone, \
        f"alternation {'ok' if alternation else 'broken'}; |0> fidelity at Ne=0,2,4,6: " + \
        ", ".join(f"{f:.4f}" for f in f0_even), "alternating dominance; non-decreasing", {}


def check_stabilizer_invariance():
    overlaps = []
    prev = _seeded_steps(0)
    for ne in range(2, 9, 2):
        cur = _seeded_steps(ne)
        overlaps.append(fidelity(cur, prev))
        prev = cur
    ok = all(b >= a for a, b in zip(overlaps, overlaps[1:]))
    return ok, "F(step 2j, step 2j+2) = " + ", ".join(f"{f:.4f}" for f in overlaps), "non-decreasing", {}


def bell_reference(pair, delta, cutoff):
    s = {lg: gkp.code_state(gkp.SQUARE, lg, delta, cutoff).amplitudes for lg in "+-"}
    v = sum(np.outer(s[a], s[b]) for a, b in pair)
    return v / np.linalg.norm(v)


def bell_fidelity(state, pair):
    from scipy.optimize import minimize_scalar

    res = minimize_scalar(lambda d: -abs(np.vdot(bell_reference(pair, d, state.shape[0] - 1), state)) ** 2,
                          bounds=(0.1, 0.6), method="bounded", options={"xatol": 1e-3})
    return float(-res.fun), float(res.x)


def check_bell():
    o0 = P.run_protocol(P.bell_protocol(residue=0))
    o2 = P.run_protocol(P.bell_protocol(residue=2))
    f0, _ = bell_fidelity(o0.state, ("++", "--"))
    f2, _ = bell_fidelity(o2.state, ("+-", "-+"))
    mutual = abs(np.vdot(o0.state, o2.state)) ** 2
    ok = f0 > 0.9 and f2 > 0.9 and mutual < 0.1
    return ok, f"residue 0: {f0:.4f}, residue 2: {f2:.4f}, mutual {mutual:.1e}", "> 0.9, > 0.9, < 0.1", {}


def check_wigner_parity():
    from .metrics import make_cat_reference

    states = [vacuum(10), fock_state(1, 10), make_cat_reference(2, 0, 2.0, 60), make_cat_reference(2, 1, 2.0, 60)]
    parities = [1.0, -1.0, 1.0, -1.0]
    worst = 0.0
    w_odd = None
    for st, par in zip(states, parities):
        w0 = wigner(st, np.array([0.0]), np.array([0.0])).values[0, 0]
        worst = max(worst, abs(math.pi * w0 - par))
        w_odd = w0
    ok = worst < 1e-8 and w_odd < 0
    return ok, f"max |pi W(0,0) - parity| = {worst:.1e}, odd cat W(0,0) = {w_odd:.4f}", "< 1e-8, negative", {}


# (id, name, tier, function)
CHECKS = [
    ("c01", "cat post-selection probabilities", "default", check_cat_probabilities),
    ("c02", "Kraus and heralding completeness", "default", check_completeness),
    ("c03", "ladder/Fourier engine equivalence", "default", check_engine_equivalence),
    ("c04", "vacuum-seeded grid-state probability", "default", check_vacuum_gkp_probability),
    ("c05", "squeezed-seeded grid-state probability", "default", check_seeded_probability),
    ("c06", "squeezing laws", "default", check_squeezing_laws),
    ("c07", "10 dB success probabilities (rows 3, 7, 8)", "default", check_preset_probabilities),
    ("c07x", "10 dB success probabilities (rows 1, 6, 4)", "extended", check_preset_probabilities_extended),
    ("c08", "probability scaling exponents", "default", check_scaling_laws),
    ("c09", "finite-comb even-cat fidelity, g=4", "default", check_finite_comb),
    ("c09b", "finite-comb even-cat fidelity, g=sqrt(pi/2) (extra)", "default", check_finite_comb_low_g),
    ("c10", "comb width sigma=30 on the row-2 scheme", "default", check_comb_width),
    ("c11", "quadratic jitter law", "default", check_jitter_law),
    ("c12", "X-gate alternation and double-step |0> fidelity", "default", check_x_gate_stabilizer),
    ("c12b", "double-step invariance (extra)", "default", check_stabilizer_invariance),
    ("c13", "two-mode Bell branches", "default", check_bell),
    ("c14", "Wigner origin equals parity", "default", check_wigner_parity),
]


def select(tier: str = "default", only=None):
    if tier not in ("default", "extended"):
        raise ValueError("tier must be 'default' or 'extended'")
    if only is not None:
        unknown = sorted(set(only) - {c[0] for c in CHECKS})
        if unknown:
            raise ValueError(f"unknown check id(s) {unknown}")
    out = []
    for cid, name, t, fn in CHECKS:
        if only is not None and cid not in only:
            continue
        if t == "extended" and tier != "extended":
            continue
        out.append((cid, name, fn))
    return out


def run_check(cid: str) -> CheckResult:
    for c, name, _, fn in CHECKS:
        if c == cid:
            t0 = time.perf_counter()
            ok, measured, expected, details = fn()
            return CheckResult(c, name, bool(ok), measured, expected, time.perf_counter() - t0, details)
    raise KeyError(cid)


def run_checks(tier: str = "default", only=None, echo=None) -> list:
    results = []
    for cid, _, _ in select(tier, only):
        r = run_check(cid)
        if echo is not None:
            echo(format_result(r))
        results.append(r)
    return results
