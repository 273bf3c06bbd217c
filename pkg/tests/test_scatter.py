import math

import numpy as np
import pytest

from gkpforge import electron, fock, scatter
from gkpforge.errors import ZeroProbabilityError
from gkpforge.scatter import PostSelection


def cat_amplitudes(g, N, k, cutoff):
    acc = np.zeros(cutoff + 1, dtype=complex)
    for m in range(N):
        acc += np.exp(-2j * math.pi * k * m / N) * fock.coherent_amplitudes(g * np.exp(2j * math.pi * m / N), cutoff)
    return acc / np.linalg.norm(acc)


@pytest.mark.parametrize("N,k", [(2, 0), (2, 1), (3, 2), (4, 1)])
def test_mask_and_sum_kraus_agree(N, k):
    g = 1.3 * np.exp(0.4j)
    a = scatter.conditional_kraus(g, N, k, 50).entries
    b = scatter.conditional_kraus_sum(g, N, k, 50).entries
    assert np.max(np.abs(a - b)) < 1e-12


def test_kraus_completeness():
    cut, safe = 120, 60
    ops = [scatter.conditional_kraus(2.0, 3, k, cut).entries for k in range(3)]
    total = sum(K.conj().T @ K for K in ops)[:safe, :safe]
    assert np.max(np.abs(total - np.eye(safe))) < 1e-10


@pytest.mark.parametrize("N", [2, 3, 4])
def test_cat_probabilities_sum_and_match_state(N):
    g = 1.1
    probs = [scatter.cat_probability(g, N, k) for k in range(N)]
    assert sum(probs) == pytest.approx(1.0, abs=1e-13)
    cut = 60
    for k in range(N):
        out = scatter.conditional_kraus(g, N, k, cut).entries @ fock.vacuum(cut).amplitudes
        assert np.sum(np.abs(out) ** 2) == pytest.approx(probs[k], abs=1e-12)
        assert abs(np.vdot(cat_amplitudes(g, N, k, cut), out / np.linalg.norm(out))) ** 2 > 1 - 1e-12


def engines(comb, photon, g):
    lad = scatter.joint_scatter_ladder(comb, photon, g)
    fou = scatter.joint_scatter_fourier(comb, photon, g)
    direct, idx = scatter.scatter_direct(comb, photon.amplitudes, g)
    return lad, fou, (direct, idx)


def test_engines_agree_on_joint_state():
    comb = electron.gaussian_comb(2, sigma=3.0)
    photon = fock.make_coherent(0.4 + 0.3j, 40)
    g = 0.9 * np.exp(0.3j)
    lad, fou, (direct, idx) = engines(comb, photon, g)
    assert np.array_equal(lad.electron_indices, fou.electron_indices)
    assert np.max(np.abs(fou.amplitudes - direct[np.searchsorted(idx, fou.electron_indices)])) < 1e-12
    # the ladder engine propagates exactly; truncated D in the other two differs only at the edge
    inner = slice(0, 20)
    assert np.max(np.abs(lad.amplitudes[:, inner] - fou.amplitudes[:, inner])) < 1e-9


def test_excitation_is_conserved():
    comb = electron.gaussian_comb(3, sigma=2.0)
    photon = fock.make_coherent(0.5, 50)
    before = float(np.sum(comb.spectrum() * comb.indices)) + abs(0.5) ** 2
    joint = scatter.joint_scatter_ladder(comb, photon, 1.2)
    assert joint.total_excitation() == pytest.approx(before, abs=1e-8)


def test_spacing_one_comb_gives_coherent_state():
    # N = 1: the only Kraus operator is the full displacement
    K = scatter.conditional_kraus(1.5, 1, 0, 60).entries
    assert fock.fidelity(fock.PhotonState(K @ fock.vacuum(60).amplitudes), fock.make_coherent(1.5, 60)) > 1 - 1e-12
    # a finite uniform comb approaches it with a defect falling like 1/W^2
    defects = []
    for W in (100, 200):
        joint = scatter.joint_scatter_fourier(electron.ideal_comb(1, window=W), fock.vacuum(40), 1.5)
        state, prob = scatter.postselect(joint, PostSelection("residue", 0, 1))
        assert prob == pytest.approx(1.0, abs=1e-10)
        defects.append(1 - fock.fidelity(state, fock.make_coherent(1.5, 40)))
    assert defects[0] < 1e-3
    assert defects[0] / defects[1] == pytest.approx(4.0, rel=0.1)


def test_wide_ideal_comb_heralds_cat():
    g = 1.2
    comb = electron.ideal_comb(2, window=800)
    joint = scatter.joint_scatter_fourier(comb, fock.vacuum(40), g)
    for k in (0, 1):
        state, prob = scatter.postselect(joint, PostSelection("residue", k, 2))
        assert prob == pytest.approx(scatter.cat_probability(g, 2, k), abs=5e-3)
        assert abs(np.vdot(cat_amplitudes(g, 2, k, 40), state.amplitudes)) ** 2 > 0.999


def test_postselection_parsing_and_labels():
    assert PostSelection.parse("E") == PostSelection.even()
    assert PostSelection.parse("odd").label() == "odd"
    assert PostSelection.parse("res:2/3") == PostSelection("residue", 2, 3)
    assert PostSelection.parse("exact:5").label() == "exact:5"
    with pytest.raises(ValueError):
        PostSelection.parse("sideways")
    with pytest.raises(ValueError):
        PostSelection("residue", 3, 3)
    assert [r.k for r in scatter.complete_partition(3)] == [0, 1, 2]


def test_branch_probabilities_partition_unity():
    comb = electron.gaussian_comb(3, sigma=5.0)
    joint = scatter.joint_scatter_fourier(comb, fock.make_coherent(0.7, 40), 1.0)
    total = sum(scatter.branch_probability(joint, r) for r in scatter.complete_partition(3))
    assert total == pytest.approx(1.0, abs=1e-10)


def test_zero_probability_branch_raises():
    comb = electron.ideal_comb(2, window=50)
    joint = scatter.joint_scatter_fourier(comb, fock.vacuum(20), 0.0)
    with pytest.raises(ZeroProbabilityError):
        scatter.postselect(joint, PostSelection.odd())


def test_finite_comb_gives_mixed_conditional_state():
    comb = electron.gaussian_comb(2, sigma=2.0)
    joint = scatter.joint_scatter_fourier(comb, fock.vacuum(40), 1.2)
    rho, prob = scatter.conditional_density(joint, PostSelection.even())
    assert np.trace(rho).real == pytest.approx(1.0)
    assert scatter.purity(rho) < 1 - 1e-4
    ens, p2, _ = scatter.heralded_step(scatter.Ensemble.pure(fock.vacuum(40).amplitudes), comb, 1.2,
                                       PostSelection.even())
    assert p2 == pytest.approx(prob, abs=1e-12)
    assert ens.purity() == pytest.approx(scatter.purity(rho), abs=1e-10)


def test_ensemble_compress_preserves_density():
    rng = np.random.default_rng(5)
    base = rng.normal(size=(12, 3)) + 1j * rng.normal(size=(12, 3))
    vecs = np.concatenate([base, base @ rng.normal(size=(3, 5))], axis=1)
    ens = scatter.Ensemble(vecs)
    small = ens.compress()
    assert small.rank == 3
    assert np.max(np.abs(small.density() - ens.density())) < 1e-10
    assert small.trace() == pytest.approx(ens.trace())


def test_two_mode_engines_and_kraus_agree():
    d = 14
    ph1 = fock.make_coherent(0.3, d - 1)
    ph2 = fock.make_coherent(-0.2j, d - 1)
    comb = electron.ideal_comb(2, window=6)
    a = scatter.two_mode_scatter(comb, ph1, ph2, 0.5, 0.4j)
    b = scatter.two_mode_scatter_ladder(comb, ph1, ph2, 0.5, 0.4j)
    inner = (slice(None), slice(0, 6), slice(0, 6))
    assert np.max(np.abs(a.amplitudes[inner] - b.amplitudes[inner])) < 1e-8
    wide = electron.ideal_comb(2, window=400)
    joint = scatter.two_mode_scatter(wide, ph1, ph2, 0.5, 0.4j)
    state, prob = scatter.postselect(joint, PostSelection.even())
    ref = scatter.two_mode_kraus_apply(np.outer(ph1.amplitudes, ph2.amplitudes), 0.5, 0.4j, 2, 0)
    assert prob == pytest.approx(np.sum(np.abs(ref) ** 2), abs=2e-3)
    assert abs(np.vdot(ref / np.linalg.norm(ref), state)) ** 2 > 0.999
