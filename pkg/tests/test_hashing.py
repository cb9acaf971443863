import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hamprobe import hashing
from hamprobe.channels import ChannelOracle, PauliChannel, twirled_channel_from_evolution
from hamprobe.config import ProtocolConfig
from hamprobe.hamiltonian import Hamiltonian
from hamprobe.pauli import PauliString, SymplecticSubgroup, all_strings, random_subgroup, symplectic_inner
from hamprobe.simulator import EvolutionOracle, UnitarySpectrum, evolution_unitary
from hamprobe.testers import top_energy

EXAMPLE = PauliChannel.from_vector(1, np.array([0.7, 0.1, 0.1, 0.1]))
GEN_Z = SymplecticSubgroup(1, (PauliString.from_label("Z"),))


def brute_fourier(f, n):
    strs = list(all_strings(n))
    return np.array([sum(f[x.index] * (-1) ** symplectic_inner(a, x) for x in strs) for a in strs]) / 4**n


def coset(a, V):
    return {a.index ^ int(v) for v in V.elements()}


@pytest.mark.parametrize("n", [1, 2])
def test_projection_formulas_against_direct_fourier(n, rng):
    strs = list(all_strings(n))
    for _ in range(5):
        f = rng.normal(size=4**n)
        F = brute_fourier(f, n)
        assert np.allclose(hashing.fourier_coefficients(f, n), F, atol=1e-12)
        for t in range(2 * n + 1):
            V = random_subgroup(n, t, rng)
            a = strs[int(rng.integers(4**n))]
            members = coset(a, V)
            assert hashing.coset_weight(f, a, V) == pytest.approx(sum(F[i] ** 2 for i in members), abs=1e-12)
            for z in strs[:4]:
                direct = sum(F[i] * (-1) ** symplectic_inner(PauliString.from_index(n, i), z) for i in members)
                assert hashing.project_coset(f, a, V, z) == pytest.approx(direct, abs=1e-12)


def test_projection_trivial_cases(rng):
    n = 2
    ones = np.ones(16)
    V = random_subgroup(n, 2, rng)
    for a in all_strings(n):
        expected = 1.0 if 0 in coset(a, V) else 0.0
        assert hashing.coset_weight(ones, a, V) == pytest.approx(expected, abs=1e-12)
    f = rng.normal(size=16)
    F = brute_fourier(f, n)
    trivial = random_subgroup(n, 0, rng)
    a = PauliString.from_label("XZ")
    for z in all_strings(n):
        assert hashing.project_coset(f, a, trivial, z) == pytest.approx(F[a.index] * (-1) ** symplectic_inner(a, z))


def test_example_bucket_energies():
    table = hashing.bucket_energies_exact(EXAMPLE, GEN_Z)
    assert table.energies == pytest.approx([0.8, 0.2])
    assert hashing.coset_sums(EXAMPLE, GEN_Z) == pytest.approx([0.8, 0.2])
    assert table.representative(1).label in ("X", "Y")
    single = hashing.bucket_energies_exact(EXAMPLE, SymplecticSubgroup(1, ()))
    assert single.energies == pytest.approx([1.0])


@pytest.mark.parametrize("n", [1, 2, 3])
def test_coset_sum_equals_fidelity_sum_all_dims(n, rng):
    ch = PauliChannel.from_vector(n, rng.dirichlet(np.full(4**n, 0.5)))
    for t in range(2 * n + 1):
        table = hashing.bucket_energies_exact(ch, random_subgroup(n, t, rng))
        assert table.coset_sum_error <= 1e-9
        assert table.energies.sum() == pytest.approx(1.0)


def test_bucket_ranking_and_gammas():
    V = SymplecticSubgroup(2, (PauliString.from_label("ZI"), PauliString.from_label("IZ")))
    table = hashing.BucketTable(V, np.array([0.4, 0.2, 0.2, 0.2]))
    assert list(table.ranked()) == [0, 1, 2, 3]
    assert list(table.ranked(exclude_zero=True)) == [1, 2, 3]
    assert table.gamma_channel(2) == pytest.approx(0.6)
    assert table.gamma_hamiltonian(1) == pytest.approx(0.6)


def test_estimated_energies_exact_mode_and_ledger():
    ch = PauliChannel.from_vector(2, np.full(16, 1 / 16) * 0.2 + np.eye(16)[0] * 0.8)
    V = SymplecticSubgroup(2, (PauliString.from_label("XI"), PauliString.from_label("ZZ")))
    o = ChannelOracle(ch, mode="exact")
    est = hashing.estimate_bucket_energies(o, V, 0.05, 0.1)
    assert est.energies == pytest.approx(hashing.bucket_energies_exact(ch, V).energies)
    assert o.ledger.queries == 4 * hashing.fidelity_shots(0.05, 0.1, 2)
    assert hashing.fidelity_shots(0.05, 0.1, 2) == math.ceil(2 * math.log(2 * 4 / 0.1) / 0.05**2)


def test_estimated_energies_calibration():
    depol = PauliChannel.from_vector(2, np.full(16, 0.3 / 16) + np.eye(16)[0] * 0.7)
    V = SymplecticSubgroup(2, (PauliString.from_label("XI"), PauliString.from_label("IY")))
    exact = hashing.bucket_energies_exact(depol, V).energies
    eps, delta = 0.05, 0.1
    fails = sum(
        np.max(np.abs(hashing.estimate_bucket_energies(ChannelOracle(depol, seed=s), V, eps, delta).energies - exact))
        > eps
        for s in range(100)
    )
    assert fails <= 10


def test_channel_tester_examples():
    close = PauliChannel(2, {"II": 0.95, "XI": 0.05})
    dec = hashing.test_channel_sparsity(ChannelOracle(close, seed=0), 2, 0.1, 0.8)
    assert dec.verdict == "close"
    uniform = PauliChannel.from_vector(2, np.full(16, 1 / 16))
    dec = hashing.test_channel_sparsity(ChannelOracle(uniform, seed=0), 1, 0.05, 0.9)
    assert dec.verdict == "far"
    assert dec.extra["subgroup_dim"] == hashing.hashing_dimension(1, dec.thresholds["eps"], 2)
    with pytest.raises(ValueError):
        hashing.test_channel_sparsity(ChannelOracle(close), 1, 0.3, 0.5)


def test_channel_thresholds_separate_promise():
    th = hashing.channel_thresholds(0.05, 0.5)
    assert th["eps"] == pytest.approx(0.4 / 3)
    assert th["accept"] > th["reject"]


def test_hashing_dimension():
    assert hashing.hashing_dimension(2, 0.2, 4) == 7
    assert hashing.hashing_dimension(2, 0.05, 4) == 8


def test_diagnostics_examples():
    # two isolated support strings fall into different buckets
    ch = PauliChannel(1, {"I": 0.7, "X": 0.3})
    d = hashing.hashing_diagnostics(ch, GEN_Z, 1)
    assert d.err == pytest.approx(0.0) and d.collision_sum == pytest.approx(0.0)
    single = hashing.hashing_diagnostics(ch, SymplecticSubgroup(1, ()), 1)
    assert single.err == pytest.approx(0.3)


def test_collision_mean_bound(rng):
    n = 3
    for s, t in ((1, 2), (2, 3), (2, 4)):
        ch = PauliChannel.from_vector(n, rng.dirichlet(np.ones(4**n)))
        errs = [hashing.hashing_diagnostics(ch, random_subgroup(n, t, rng), s).collision_sum for _ in range(300)]
        assert np.mean(errs) <= math.sqrt(2 * s / 2**t)


@given(st.integers(0, 2**31), st.integers(1, 4))
def test_diagnostics_gamma_dominates_energy(seed, s):
    rng = np.random.default_rng(seed)
    ch = PauliChannel.from_vector(2, rng.dirichlet(np.full(16, 0.3)))
    d = hashing.hashing_diagnostics(ch, random_subgroup(2, int(rng.integers(0, 5)), rng), s)
    assert d.err >= -1e-12
    assert d.err <= d.collision_sum + 1e-12


def test_hamiltonian_bucket_examples():
    h = Hamiltonian.from_labels({"Z": 1.0})
    o = EvolutionOracle(h, mode="exact")
    table = hashing.estimate_bucket_energies_hamiltonian(o, math.pi / 4, GEN_Z, 10)
    assert table.energies == pytest.approx([1.0, 0.0], abs=1e-12)
    table = hashing.estimate_bucket_energies_hamiltonian(o, 0.0, GEN_Z, 10)
    assert table.fidelities == pytest.approx([1.0, 1.0])
    assert table.energies[0] == pytest.approx(1.0)


def test_hamiltonian_table_equals_twirled_channel_table(rng):
    for n in (1, 2, 3):
        idx = rng.choice(np.arange(1, 4**n), size=3, replace=False)
        h = Hamiltonian(n, {PauliString.from_index(n, int(i)): float(v) / 3 for i, v in zip(idx, rng.uniform(-1, 1, 3))})
        V = random_subgroup(n, n, rng)
        ours = hashing.estimate_bucket_energies_hamiltonian(EvolutionOracle(h, mode="exact"), 0.4, V, 1)
        ref = hashing.bucket_energies_exact(twirled_channel_from_evolution(h, 0.4), V)
        assert np.allclose(ours.energies, ref.energies, atol=1e-12)


def test_memoryless_hamiltonian_tester_examples():
    close = Hamiltonian.from_labels({"ZI": 0.9})
    dec = hashing.test_hamiltonian_sparsity_memoryless(EvolutionOracle(close, seed=0), 1, 0.2, 0.9)
    assert dec.verdict == "close"
    far = Hamiltonian.from_labels({"XI": 1 / math.sqrt(2), "ZI": 1 / math.sqrt(2)})
    for mode in ("exact", "shots"):
        dec = hashing.test_hamiltonian_sparsity_memoryless(EvolutionOracle(far, seed=1, mode=mode), 1, 0.05, 0.7)
        assert dec.verdict == "far"


def test_memoryless_hamiltonian_gamma_matches_top_energy(rng):
    for i in range(10):
        n = 1 + i % 3
        idx = rng.choice(np.arange(1, 4**n), size=min(3, 4**n - 1), replace=False)
        h = Hamiltonian(n, {PauliString.from_index(n, int(j)): float(v) / 3 for j, v in zip(idx, rng.uniform(-1, 1, len(idx)))})
        dec = hashing.test_hamiltonian_sparsity_memoryless(EvolutionOracle(h, mode="exact"), 2, 0.05, 0.7, rng=i)
        t = dec.thresholds["t"]
        te = top_energy(UnitarySpectrum.of(evolution_unitary(h, t)), 2, t, n).value
        assert abs(dec.gamma - te) <= dec.thresholds["eps"]


def test_sparsity_time_and_thresholds():
    cfg = ProtocolConfig(c_t=1.0)
    assert hashing.sparsity_time(2, 0.1, 0.5, cfg) == pytest.approx(0.12)
    th = hashing.sparsity_thresholds(1, 0.1, 0.5, 0.1)
    assert th["accept"] == pytest.approx(1 - 0.0001 - 0.0005)
    assert th["reject"] == pytest.approx(1 - 0.0025 + 0.0005)
