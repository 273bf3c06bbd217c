"""Protocols: ordered electron interactions with heralding, presets and closed forms.

Operator products act right to left: the step listed first in a protocol is
applied to the light first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.special import comb as binom

from . import electron as el
from . import gkp, kernels
from .errors import ConfigError, UnconvergedError, ZeroProbabilityError
from .fock import (LEAK_TOL, PhotonState, SqueezeParams, coherent_amplitudes, squeezed_vacuum,
                   suggest_cutoff, vacuum)
from .scatter import (ZERO_PROB, Ensemble, PostSelection, heralded_step, residue_mask,
                      two_mode_kraus_apply)

G_MAX = 10.0
SQRT_PI_2 = math.sqrt(math.pi / 2.0)
SQRT_PI_8 = math.sqrt(math.pi / 8.0)
HEX = gkp.HEX_LENGTH


@dataclass(frozen=True)
class CombSpec:
    """Electron comb description; ``build()`` returns the ElectronComb."""

    N: int = 2
    envelope: str = "ideal"
    sigma: float | None = None
    shift: int = 0
    window: int | None = None
    dispersion_beta: float = 0.0
    dispersion_z: float = 0.0

    def build(self) -> el.ElectronComb:
        if self.envelope == "ideal":
            comb = el.ideal_comb(self.N, self.shift, self.window or 64)
        elif self.envelope == "gaussian":
            if self.sigma is None:
                raise ConfigError("gaussian comb needs sigma")
            comb = el.gaussian_comb(self.N, self.sigma, self.window, self.shift)
        elif self.envelope == "single":
            comb = el.single_peak(self.shift, self.window or 0)
        else:
            raise ConfigError(f"unknown comb envelope {self.envelope!r}")
        if self.dispersion_z:
            comb = el.apply_phase_profile(comb, el.PhaseProfile("quadratic", self.dispersion_beta,
                                                                self.dispersion_z))
        return comb


@dataclass(frozen=True)
class InteractionStep:
    g: complex
    comb: CombSpec = CombSpec()
    post: PostSelection = PostSelection.even()
    g2: complex | None = None  # second mode, sharing the electron

    def __post_init__(self):
        if abs(self.g) > G_MAX or (self.g2 is not None and abs(self.g2) > G_MAX):
            raise ConfigError(f"|g| exceeds the sanity bound {G_MAX}")


@dataclass(frozen=True)
class InitialState:
    kind: str = "vacuum"  # vacuum | squeezed | gkp
    squeeze: SqueezeParams = SqueezeParams()
    lattice: str = "square"
    logical: str = "0"
    delta: float = 0.3


@dataclass(frozen=True)
class Protocol:
    steps: tuple = ()
    initial: InitialState = InitialState()
    modes: int = 1
    engine: str = "analytic"
    cutoff: int | None = None
    label: str = ""
    lattice: str = "square"  # reference family for metrics

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if self.engine not in ("analytic", "ladder", "fourier"):
            raise ConfigError(f"unknown engine {self.engine!r}")
        if self.modes not in (1, 2):
            raise ConfigError("modes must be 1 or 2")
        if self.engine == "analytic" and any(s.comb.envelope != "ideal" for s in self.steps):
            raise ConfigError("the analytic engine needs ideal combs in every step")

    @property
    def n_electrons(self) -> int:
        return len(self.steps)

    def resolved_cutoff(self) -> int:
        return self.cutoff if self.cutoff is not None else auto_cutoff(self)


@dataclass
class Outcome:
    state: object  # PhotonState, or (d1, d2) amplitude matrix for two modes
    probability: float
    step_probabilities: list
    norm_leak: float
    cutoff: int
    engine: str
    purity: float = 1.0
    ensemble: Ensemble | None = None
    metrics: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.norm_leak <= LEAK_TOL


# --------------------------------------------------------------------------
# sizing
# --------------------------------------------------------------------------

def _seed_radius(initial: InitialState) -> float:
    if initial.kind == "squeezed" and initial.squeeze.r > 0:
        # photon number where the squeezed-vacuum tail falls below 1e-14
        t = math.tanh(initial.squeeze.r)
        return math.sqrt(2.0 * 14 * math.log(10.0) / (-2.0 * math.log(t)) + math.sinh(initial.squeeze.r) ** 2)
    if initial.kind == "gkp":
        cs = gkp.code_state_sum(gkp.lattice_by_name(initial.lattice), initial.logical, initial.delta)
        return cs.max_radius()
    return 0.0


def auto_cutoff(p: Protocol) -> int:
    """``ceil(A + 6 sqrt(A) + 10)`` with ``A = (sum |g| + seed radius)^2``."""
    reach = sum(abs(s.g) for s in p.steps) + _seed_radius(p.initial)
    return suggest_cutoff(reach ** 2)


def initial_state(init: InitialState, cutoff: int) -> PhotonState:
    if init.kind == "vacuum":
        return vacuum(cutoff)
    if init.kind == "squeezed":
        return squeezed_vacuum(init.squeeze, cutoff)
    if init.kind == "gkp":
        return gkp.code_state(gkp.lattice_by_name(init.lattice), init.logical, init.delta, cutoff)
    raise ConfigError(f"unknown initial state {init.kind!r}")


# --------------------------------------------------------------------------
# execution
# --------------------------------------------------------------------------

def _kraus_apply(amps: np.ndarray, g: complex, rule: PostSelection):
    """Ideal-comb heralded map; returns (new amplitudes, norm pushed past cutoff)."""
    dim = amps.size
    D = kernels.displacement_matrix(complex(g), dim)
    full = D @ amps
    lost = max(0.0, float(np.vdot(amps, amps).real - np.vdot(full, full).real))
    if rule.rule == "exact":
        raise ConfigError("exact-index heralding needs a simulated engine")
    out = np.where(residue_mask(dim, rule.N, rule.photon_change()), D, 0.0) @ amps
    return out, lost


def run_protocol(p: Protocol, strict: bool = False) -> Outcome:
    """Apply every step in order, herald, and renormalize.

    ``analytic`` uses the conditional-displacement Kraus operators of ideal
    combs. ``ladder``/``fourier`` simulate the electron explicitly and keep
    the light as a (possibly mixed) pure-state ensemble. With ``strict`` an
    unconverged truncation raises instead of being reported.
    """
    if p.modes == 2:
        return _run_two_mode(p)
    cutoff = p.resolved_cutoff()
    psi0 = initial_state(p.initial, cutoff)
    leak = psi0.norm_leak
    probs = []
    if p.engine == "analytic":
        amps = psi0.amplitudes.copy()
        for step in p.steps:
            amps_n = amps / np.linalg.norm(amps)
            new, lost = _kraus_apply(amps_n, step.g, step.post)
            leak += lost
            pr = float(np.vdot(new, new).real)
            if pr < ZERO_PROB:
                raise ZeroProbabilityError(f"step with g={step.g} heralds a zero-probability branch")
            probs.append(pr)
            amps = new
        state = PhotonState(amps / np.linalg.norm(amps), leak)
        out = Outcome(state, float(np.prod(probs)) if probs else 1.0, probs, leak, cutoff, "analytic")
    else:
        ens = Ensemble.pure(psi0.amplitudes)
        for step in p.steps:
            comb = step.comb.build()
            if not comb.converged:
                raise UnconvergedError("comb window truncates the envelope")
            ens_n = Ensemble(ens.vectors / math.sqrt(ens.trace()))
            ens, pr, lost = heralded_step(ens_n, comb, step.g, step.post, engine=p.engine)
            leak += lost
            if pr < ZERO_PROB:
                raise ZeroProbabilityError(f"step with g={step.g} heralds a zero-probability branch")
            probs.append(pr)
        vec = ens.dominant()
        state = PhotonState(vec, leak)
        out = Outcome(state, float(np.prod(probs)) if probs else 1.0, probs, leak, cutoff, p.engine,
                      purity=ens.purity(), ensemble=Ensemble(ens.vectors / math.sqrt(ens.trace())))
    if strict and not out.converged:
        raise UnconvergedError(f"norm leak {out.norm_leak:.3e} exceeds {LEAK_TOL:g}; raise the cutoff")
    return out


def _run_two_mode(p: Protocol) -> Outcome:
    if p.engine != "analytic":
        raise ConfigError("two-mode protocols run on the analytic engine")
    cutoff = p.resolved_cutoff()
    a = initial_state(p.initial, cutoff)
    psi = np.outer(a.amplitudes, a.amplitudes)
    leak = 2 * a.norm_leak
    probs = []
    for step in p.steps:
        if step.post.rule == "exact":
            raise ConfigError("exact-index heralding needs a simulated engine")
        psi = psi / np.linalg.norm(psi)
        g2 = step.g2 if step.g2 is not None else 0.0
        new = two_mode_kraus_apply(psi, step.g, g2, step.post.N, step.post.k)
        pr = float(np.sum(np.abs(new) ** 2))
        if pr < ZERO_PROB:
            raise ZeroProbabilityError("two-mode branch has zero probability")
        probs.append(pr)
        psi = new
    psi = psi / np.linalg.norm(psi)
    return Outcome(psi, float(np.prod(probs)) if probs else 1.0, probs, leak, cutoff, "analytic")


# --------------------------------------------------------------------------
# presets
# --------------------------------------------------------------------------

def _family(count: int, g: complex, post="E", comb: CombSpec = CombSpec()):
    rule = PostSelection.parse(post)
    return [InteractionStep(complex(g), comb, rule) for _ in range(count)]


# electrons per unit of m, per row
ELECTRONS_PER_M = {1: 4, 2: 5, 3: 2, 4: 8, 5: 1, 6: 4, 7: 3, 8: 1}
# m giving ~10 dB in each row
TEN_DB_M = {1: 6, 2: 3, 3: 3, 4: 12, 5: 3, 6: 11, 7: 2, 8: 4}
ROW_LATTICE = {1: "square", 2: "square", 3: "square", 4: "square", 5: "square",
               6: "hexagonal", 7: "hexagonal", 8: "hexagonal"}
ROW_TARGET = {1: "0", 2: "0/1", 3: "H", 4: "-", 5: "0/1", 6: "0", 7: "T", 8: "0/1"}
SEED_R = {5: 1.1513, 8: 1.64}


def table1_preset(row: int, m: int | None = None, comb: CombSpec = CombSpec(),
                  engine: str = "analytic", cutoff: int | None = None) -> Protocol:
    """The grid-state protocols, one per row; ``m`` defaults to the ~10 dB value.

    Families are listed in application order. Electron count per row:
    4m, 5m, 2m, 8m, m, 4m, 3m, m for rows 1..8.
    """
    if row not in ELECTRONS_PER_M:
        raise ConfigError("row must be 1..8")
    m = TEN_DB_M[row] if m is None else int(m)
    if m < 1:
        raise ConfigError("m must be >= 1")
    h = HEX
    init = InitialState()
    if row == 1:
        steps = _family(2 * m, 0.5 * SQRT_PI_2, "E", comb) + _family(2 * m, 0.5j * SQRT_PI_2, "E", comb)
    elif row == 2:
        steps = _family(4 * m, 1j * SQRT_PI_8, "E", comb) + _family(m, SQRT_PI_2, "E", comb)
    elif row == 3:
        steps = _family(m, 1j * SQRT_PI_2, "E", comb) + _family(m, SQRT_PI_2, "E", comb)
    elif row == 4:
        steps = (_family(4 * m, 0.5j * SQRT_PI_2, "E", comb) + _family(2 * m, 0.25 * SQRT_PI_2, "O", comb)
                 + _family(2 * m, 0.25 * SQRT_PI_2, "E", comb))
    elif row == 5:
        init = InitialState("squeezed", SqueezeParams(SEED_R[5], 0.0))
        steps = _family(m, SQRT_PI_2, "E", comb)
    elif row == 6:
        steps = (_family(2 * m, 0.5j * h, "E", comb)
                 + _family(2 * m, 0.5 * h * np.exp(1j * 7 * math.pi / 6), "E", comb))
    elif row == 7:
        steps = (_family(m, 1j * h, "E", comb) + _family(m, 1j * h * np.exp(2j * math.pi / 3), "E", comb)
                 + _family(m, 1j * h * np.exp(4j * math.pi / 3), "E", comb))
    else:
        # long axis of the seed along the lattice direction e^{i pi/6}
        init = InitialState("squeezed", SqueezeParams(SEED_R[8], 4 * math.pi / 3))
        steps = _family(m, 1j * h, "E", comb)
    return Protocol(tuple(steps), init, 1, engine, cutoff, f"table1-row{row}-m{m}", ROW_LATTICE[row])


def cat_preset(N: int = 2, g: complex = SQRT_PI_2, k: int = 0, comb: CombSpec | None = None,
               engine: str = "analytic", cutoff: int | None = None) -> Protocol:
    comb = comb or CombSpec(N=N)
    step = InteractionStep(complex(g), comb, PostSelection("residue", k, N))
    return Protocol((step,), InitialState(), 1, engine, cutoff, f"cat-N{N}-k{k}", "square")


def preset_names():
    return [f"table1-row{r}" for r in range(1, 9)] + ["cat", "bell"]


# --------------------------------------------------------------------------
# displacement-sum bookkeeping
# --------------------------------------------------------------------------

@dataclass
class CoefficientExpansion:
    """``sum_j w_j D(d_j)`` acting on the initial state; ``normalization`` is ``||.||``."""

    displacements: np.ndarray
    weights: np.ndarray
    normalization: float = float("nan")

    def __len__(self):
        return self.displacements.size


def _key(d: complex, scale=1e9):
    return (round(d.real * scale), round(d.imag * scale))


def coefficient_expansion(p: Protocol, prune: float = 0.0) -> CoefficientExpansion:
    """Expand the product of heralded operators into weighted displacements.

    Each ideal-comb step contributes ``(1/N) sum_j e^{-2 pi i jk/N} D(g w^j)``;
    products are merged with ``D(a) D(b) = e^{i Im(a conj(b))} D(a + b)``,
    so equal total displacements accumulate like a Pascal triangle.
    """
    if any(s.comb.envelope != "ideal" for s in p.steps):
        raise ConfigError("coefficient expansion needs ideal combs")
    terms = {(0, 0): [0j, 1.0 + 0j]}
    for step in p.steps:
        rule = step.post
        if rule.rule == "exact":
            raise ConfigError("coefficient expansion needs residue heralding")
        N = rule.N
        new = {}
        for j in range(N):
            a = complex(step.g) * np.exp(2j * math.pi * j / N)
            c = np.exp(-2j * math.pi * rule.k * j / N) / N
            for d, w in terms.values():
                nd = a + d
                nw = w * c * np.exp(1j * (a * np.conj(d)).imag)
                key = _key(nd)
                if key in new:
                    new[key][1] += nw
                else:
                    new[key] = [nd, nw]
        terms = new
        if prune > 0:
            wmax = max(abs(v[1]) for v in terms.values())
            terms = {k: v for k, v in terms.items() if abs(v[1]) > prune * wmax}
    d = np.array([v[0] for v in terms.values()], dtype=complex)
    w = np.array([v[1] for v in terms.values()], dtype=complex)
    exp = CoefficientExpansion(d, w)
    exp.normalization = math.sqrt(max(expansion_probability(exp, p.initial), 0.0))
    return exp


def _seed_overlap(delta: np.ndarray, init: InitialState) -> np.ndarray:
    """``<psi0|D(delta)|psi0>`` for vacuum or squeezed-vacuum seeds."""
    if init.kind == "vacuum":
        return np.exp(-0.5 * np.abs(delta) ** 2)
    if init.kind == "squeezed":
        r, th = init.squeeze.r, init.squeeze.theta
        dp = delta * math.cosh(r) + np.conj(delta) * np.exp(1j * th) * math.sinh(r)
        return np.exp(-0.5 * np.abs(dp) ** 2)
    raise ConfigError("closed-form overlaps need a vacuum or squeezed seed")


def expansion_probability(exp: CoefficientExpansion, init: InitialState = InitialState()) -> float:
    """``|| sum_j w_j D(d_j)|psi0> ||^2`` from displacement overlaps, no Fock truncation."""
    d = exp.displacements
    w = exp.weights
    total = 0.0
    for start in range(0, d.size, 2048):
        dj = d[start:start + 2048, None]
        wj = w[start:start + 2048, None]
        # D(dj)^dag D(dk) = D(-dj) D(dk) = e^{i Im(-dj conj(dk))} D(dk - dj)
        ph = np.exp(1j * (-dj * np.conj(d[None, :])).imag)
        total += float(np.sum(np.conj(wj) * w[None, :] * ph * _seed_overlap(d[None, :] - dj, init)).real)
    return total


def expansion_state(exp: CoefficientExpansion, init: InitialState, cutoff: int) -> PhotonState:
    """Fock amplitudes of ``sum_j w_j D(d_j)|psi0>``, normalized by the exact norm."""
    psi0 = initial_state(init, cutoff)
    out = np.zeros(cutoff + 1, dtype=complex)
    if init.kind == "vacuum":
        for dj, wj in zip(exp.displacements, exp.weights):
            out += wj * coherent_amplitudes(dj, cutoff)
    else:
        for dj, wj in zip(exp.displacements, exp.weights):
            out += wj * (kernels.displacement_matrix(dj, cutoff + 1) @ psi0.amplitudes)
    nrm = exp.normalization if np.isfinite(exp.normalization) else np.linalg.norm(out)
    amps = out / nrm
    return PhotonState(amps, max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2))))


def gkp_vacuum_probability(m: int) -> float:
    """Success probability of the vacuum-seeded square scheme (4m + m even steps).

    Written directly as the double binomial displacement sum over ``2^{5m}``
    (no step-by-step merging), then normed with coherent overlaps.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    n1 = np.arange(m + 1)
    n2 = np.arange(4 * m + 1)
    re = SQRT_PI_2 * (2 * n1 - m)  # x family, applied last
    im = 1j * SQRT_PI_8 * (2 * n2 - 4 * m)  # p family, applied first
    w = binom(m, n1)[:, None] * binom(4 * m, n2)[None, :] / 2.0 ** (5 * m)
    # D(re) D(im) = e^{i Im(re conj(im))} D(re + im)
    ph = np.exp(1j * (re[:, None] * np.conj(im[None, :])).imag)
    exp = CoefficientExpansion((re[:, None] + im[None, :]).ravel(), (w * ph).ravel())
    return expansion_probability(exp)


def seeded_gkp_probability(ne: int, r: float) -> float:
    """All-even heralding probability for ``ne`` steps of ``sqrt(pi/2)`` on an x-squeezed seed.

    ``4^{-ne} sum_n C(2ne, n) exp(-pi (ne - n)^2 e^{2r})``.
    """
    n = np.arange(2 * ne + 1)
    return float(np.sum(binom(2 * ne, n) * np.exp(-math.pi * (ne - n) ** 2 * math.exp(2 * r))) / 4.0 ** ne)


# --------------------------------------------------------------------------
# two-mode Bell pair
# --------------------------------------------------------------------------

def bell_protocol(g1: complex = SQRT_PI_2, g2: complex = SQRT_PI_2, input_delta_db: float = 10.0,
                  residue: int = 0, mode2_phase: float = 0.0, cutoff: int | None = None) -> Protocol:
    """comb_4 electron shared by two square-GKP ``|0>`` modes, heralded on ``residue`` (mod 4)."""
    delta = 10.0 ** (-input_delta_db / 20.0)
    init = InitialState("gkp", SqueezeParams(), "square", "0", delta)
    step = InteractionStep(complex(g1), CombSpec(N=4), PostSelection("residue", residue, 4),
                           complex(g2) * np.exp(1j * mode2_phase))
    return Protocol((step,), init, 2, "analytic", cutoff, f"bell-res{residue}", "square")


# --------------------------------------------------------------------------
# config round-trip
# --------------------------------------------------------------------------

SCHEMA_VERSION = "1"


def _cplx(v):
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, dict):
        if set(v) - {"re", "im", "abs", "phase"}:
            raise ConfigError(f"unknown complex fields {sorted(set(v) - {'re', 'im', 'abs', 'phase'})}")
        if "abs" in v:
            return complex(v["abs"] * np.exp(1j * v.get("phase", 0.0)))
        return complex(v.get("re", 0.0), v.get("im", 0.0))
    if isinstance(v, (int, float)):
        return complex(v)
    raise ConfigError(f"cannot read complex value {v!r}")


def _closed(d: dict, allowed: set, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be an object")
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"unknown field(s) {sorted(extra)} in {where}")


def protocol_from_config(cfg: dict) -> Protocol:
    """Build a Protocol from a JSON-like document (closed schema, unknown keys rejected).

    Either ``preset`` (with optional ``m``) or explicit ``steps`` may be given.
    """
    _closed(cfg, {"schema_version", "preset", "m", "N", "g", "k", "initial", "modes", "steps",
                  "engine", "cutoff", "comb", "label", "lattice"}, "config")
    ver = str(cfg.get("schema_version", SCHEMA_VERSION))
    if ver != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {ver}")
    engine = cfg.get("engine", "analytic")
    cutoff = cfg.get("cutoff")
    if cutoff is not None and (not isinstance(cutoff, int) or cutoff < 1):
        raise ConfigError("cutoff must be a positive integer")
    comb = _comb_from(cfg.get("comb", {}))
    if "preset" in cfg:
        name = cfg["preset"]
        if name.startswith("table1-row"):
            try:
                row = int(name[len("table1-row"):])
            except ValueError:
                raise ConfigError(f"bad preset {name!r}") from None
            return table1_preset(row, cfg.get("m"), comb, engine, cutoff)
        if name == "cat":
            N = int(cfg.get("N", 2))
            if "comb" not in cfg:
                comb = CombSpec(N=N)
            return cat_preset(N, _cplx(cfg.get("g", SQRT_PI_2)), int(cfg.get("k", 0)), comb, engine, cutoff)
        if name == "bell":
            return bell_protocol(residue=int(cfg.get("k", 0)), cutoff=cutoff)
        raise ConfigError(f"unknown preset {name!r}")
    steps = []
    for i, s in enumerate(cfg.get("steps", [])):
        _closed(s, {"g", "g2", "comb", "post", "repeat"}, f"steps[{i}]")
        if "g" not in s:
            raise ConfigError(f"steps[{i}] needs g")
        sc = _comb_from(s["comb"]) if "comb" in s else comb
        try:
            post = PostSelection.parse(s.get("post", "even"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        g2 = _cplx(s["g2"]) if "g2" in s else None
        for _ in range(int(s.get("repeat", 1))):
            steps.append(InteractionStep(_cplx(s["g"]), sc, post, g2))
    init = _initial_from(cfg.get("initial", {"kind": "vacuum"}))
    return Protocol(tuple(steps), init, int(cfg.get("modes", 1)), engine, cutoff, cfg.get("label", "custom"),
                    cfg.get("lattice", "square"))


def _comb_from(d: dict) -> CombSpec:
    _closed(d, {"N", "envelope", "sigma", "shift", "window", "dispersion_beta", "dispersion_z"}, "comb")
    try:
        return CombSpec(**d)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _initial_from(d: dict) -> InitialState:
    _closed(d, {"kind", "r", "theta", "lattice", "logical", "delta"}, "initial")
    kind = d.get("kind", "vacuum")
    if kind not in ("vacuum", "squeezed", "gkp"):
        raise ConfigError(f"unknown initial kind {kind!r}")
    try:
        sq = SqueezeParams(float(d.get("r", 0.0)), float(d.get("theta", 0.0)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return InitialState(kind, sq, d.get("lattice", "square"), d.get("logical", "0"), float(d.get("delta", 0.3)))


def protocol_to_config(p: Protocol) -> dict:
    """Canonical explicit form (every step spelled out), suitable for echoing in reports."""
    steps = []
    for s in p.steps:
        item = {"g": [s.g.real, s.g.imag], "post": s.post.label(),
                "comb": {k: v for k, v in asdict(s.comb).items() if v is not None}}
        if s.g2 is not None:
            item["g2"] = [s.g2.real, s.g2.imag]
        steps.append(item)
    init = p.initial
    init_d = {"kind": init.kind}
    if init.kind == "squeezed":
        init_d.update(r=init.squeeze.r, theta=init.squeeze.theta)
    if init.kind == "gkp":
        init_d.update(lattice=init.lattice, logical=init.logical, delta=init.delta)
    return {"schema_version": SCHEMA_VERSION, "label": p.label, "modes": p.modes, "engine": p.engine,
            "cutoff": p.resolved_cutoff(), "initial": init_d, "steps": steps, "lattice": p.lattice}
