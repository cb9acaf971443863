import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hamprobe import testers
from hamprobe.config import ProtocolConfig
from hamprobe.hamiltonian import Hamiltonian
from hamprobe.pauli import PauliString, all_strings
from hamprobe.simulator import EvolutionOracle, UnitarySpectrum, evolution_unitary

CFG = ProtocolConfig(c_T=100.0)


def test_top_energy_examples():
    spectrum = UnitarySpectrum.of(evolution_unitary(Hamiltonian.from_labels({"Z": 1.0}), 0.3))
    assert testers.top_energy(spectrum, 1, 0.3, 1).value == pytest.approx(1.0)
    stat = testers.top_energy({PauliString.from_label(k): v for k, v in {"II": 0.5, "XI": 0.3, "ZZ": 0.2}.items()}, 1)
    assert stat.value == pytest.approx(0.8)


@given(st.integers(0, 2**31), st.integers(1, 5))
def test_top_energy_bounded_and_monotone(seed, s):
    p = np.random.default_rng(seed).dirichlet(np.ones(16))
    a = testers.top_energy(p, s).value
    b = testers.top_energy(p, s + 1).value
    assert p[0] - 1e-12 <= a <= b + 1e-12 <= 1 + 2e-12


def test_support_thresholds():
    th = testers.support_thresholds(0.05, 0.6)
    assert th["t"] == pytest.approx(0.55 / 3)
    assert th["phase1"] == pytest.approx(0.75 * 0.55**2)
    assert th["phase2"] < th["phase1"]
    with pytest.raises(ValueError):
        testers.test_locality(EvolutionOracle(Hamiltonian(2)), 1, 0.6, 0.05)


def test_locality_close_example():
    h = Hamiltonian.from_labels({"ZIII": 1.0})
    fails = sum(not testers.test_locality(EvolutionOracle(h, seed=s), 1, 0.05, 0.6, 0.1).close for s in range(100))
    assert fails <= 10
    assert testers.test_locality(EvolutionOracle(Hamiltonian(4), seed=0), 1, 0.05, 0.6).close


def test_locality_far_example():
    h = Hamiltonian.from_labels({"XXX": 1.0})
    fails = sum(not testers.test_locality(EvolutionOracle(h, seed=s), 2, 0.05, 0.6, 0.1, config=CFG).far for s in range(50))
    assert fails <= 5
    dec = testers.test_locality(EvolutionOracle(h, mode="exact"), 2, 0.05, 0.6, 0.1)
    assert dec.far and dec.extra["k"] == 2


def test_support_examples():
    h = Hamiltonian.from_labels({"Z": 1.0})
    full = list(all_strings(1))
    decs = testers.test_support(EvolutionOracle(h, seed=0), [full, []], 0.05, 0.6, config=CFG)
    assert [d.verdict for d in decs] == ["close", "far"]
    with pytest.raises(ValueError):
        testers.test_support(EvolutionOracle(h), [], 0.05, 0.6)
    with pytest.raises(ValueError):
        testers.test_support(EvolutionOracle(h), [[PauliString.from_label("ZZ")]], 0.05, 0.6)


def test_support_uses_one_shared_pass_and_is_monotone():
    h = Hamiltonian.from_labels({"ZII": 0.3, "IXI": 0.3, "IIY": 0.3})
    labels = ["ZII", "IXI", "IIY"]
    nested = [[PauliString.from_label(lab) for lab in labels[:m]] for m in range(4)]
    o = EvolutionOracle(h, seed=3)
    decs = testers.test_support(o, nested, 0.05, 0.6, config=CFG)
    alphas = [d.extra["alpha1"] for d in decs]
    assert alphas == sorted(alphas, reverse=True)
    assert decs[-1].close and decs[0].far
    shots = decs[0].extra["shots_per_phase"]
    assert o.ledger.queries in (shots, 2 * shots)


def test_sparsity_examples():
    close = Hamiltonian.from_labels({"ZI": 0.9})
    assert testers.test_sparsity(EvolutionOracle(close, seed=0), 1, 0.05, 0.7).close
    far = Hamiltonian.from_labels({lab: 1 / math.sqrt(3) for lab in ("XI", "YI", "ZI")})
    dec = testers.test_sparsity(EvolutionOracle(far, mode="exact"), 1, 0.05, 0.7)
    assert dec.far
    with pytest.raises(ValueError):
        testers.test_sparsity(EvolutionOracle(far), 0, 0.05, 0.7)


def test_subset_weights_and_best_subset():
    p = np.zeros(64)
    p[PauliString.from_label("III").index] = 0.5
    p[PauliString.from_label("IZX").index] = 0.3
    p[PauliString.from_label("XII").index] = 0.2
    w = dict(testers.subset_weights(p, 3, 2))
    assert w[(1, 2)] == pytest.approx(0.8)
    assert w[(0, 1)] == pytest.approx(0.7)
    assert testers.best_subset(p, 3, 2) == ((1, 2), pytest.approx(0.8))
    assert testers.best_subset(np.eye(64)[0], 3, 1)[0] == (0,)


def test_junta_examples():
    junta = Hamiltonian.from_labels({"IZI": 1.0})
    for memory in (True, False):
        dec = testers.test_junta(EvolutionOracle(junta, seed=1), 1, 0.05, 0.7, memory=memory)
        assert dec.close and dec.extra["subset"] == [1]
    far = Hamiltonian.from_labels({"XXX": math.pi / 4})
    for memory in (True, False):
        dec = testers.test_junta(EvolutionOracle(far, mode="exact"), 2, 0.05, 0.7, memory=memory)
        assert dec.far and dec.gamma == pytest.approx(0.5)
    with pytest.raises(ValueError):
        testers.test_junta(EvolutionOracle(far), 1, 0.4, 0.7)


def test_junta_memory_and_memoryless_agree_in_exact_mode(rng):
    for _ in range(5):
        labels = rng.choice(["XII", "IZZ", "YIX", "IIZ", "XYI"], size=3, replace=False)
        h = Hamiltonian.from_labels({lab: float(v) / 3 for lab, v in zip(labels, rng.uniform(-1, 1, 3))})
        a = testers.test_junta(EvolutionOracle(h, mode="exact"), 2, 0.05, 0.7, memory=True)
        b = testers.test_junta(EvolutionOracle(h, mode="exact"), 2, 0.05, 0.7, memory=False)
        assert a.verdict == b.verdict and a.gamma == pytest.approx(b.gamma, abs=1e-9)


def test_junta_parameters():
    assert testers.junta_threshold(0.05, 0.7) == pytest.approx(0.9375)
    assert testers.junta_accuracy(1, 0.05, 0.7) == pytest.approx((0.1225 - 0.0025) / 8)


def test_junta_distance_bounds():
    U = evolution_unitary(Hamiltonian.from_labels({"IZI": 1.0}), 1.0)
    lo, hi = testers.junta_distance_bounds(U, 1)
    assert lo == pytest.approx(0.0, abs=1e-7) and hi == pytest.approx(0.0, abs=1e-9)
    U = evolution_unitary(Hamiltonian.from_labels({"XXX": math.pi / 4}), 1.0)
    lo, hi = testers.junta_distance_bounds(U, 2)
    assert lo == pytest.approx(math.sqrt(2 - math.sqrt(2)))
    assert lo <= hi + 1e-12
