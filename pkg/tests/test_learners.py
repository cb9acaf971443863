import math

import numpy as np
import pytest

from hamprobe import learners
from hamprobe.config import ProtocolConfig
from hamprobe.hamiltonian import Hamiltonian, frobenius_distance, generate_instance
from hamprobe.simulator import EvolutionOracle

LOCAL = Hamiltonian.from_labels({"ZII": 0.7, "IXI": 0.3})
SPARSE = Hamiltonian.from_labels({"ZII": 0.5, "IXX": 0.5})


def test_local_parameters():
    p = learners.local_parameters(1, 0.1, ProtocolConfig(C_BH=1.0))
    assert p["t"] == pytest.approx(0.01)
    assert p["gamma"] == pytest.approx(1e-4)
    assert p["beta"] == pytest.approx(1e-7)
    assert learners.local_parameters(2, 0.1)["t"] == pytest.approx(0.1**3 / 8)


def test_learn_local_example():
    errs = []
    for seed in range(50):
        rep = learners.learn_local(EvolutionOracle(LOCAL, seed=seed), 1, 0.1)
        errs.append(rep.verify(LOCAL))
    assert sum(e > 0.1 for e in errs) <= 5
    assert rep.protocol == "learn_local" and set(x.label for x in rep.detected) <= {"ZII", "IXI"}


def test_learn_local_zero_hamiltonian():
    rep = learners.learn_local(EvolutionOracle(Hamiltonian(3), seed=0), 1, 0.1)
    assert len(rep.hamiltonian) == 0 and rep.detected == []
    assert rep.verify(Hamiltonian(3)) == 0.0


def test_learn_local_memoryless_exact():
    rep = learners.learn_local(EvolutionOracle(LOCAL, mode="exact"), 1, 0.1, memory=False)
    assert rep.protocol == "learn_local_memoryless"
    assert rep.verify(LOCAL) <= 0.1
    assert rep.params["coefficient_accuracy"] == pytest.approx(0.1 / (2 * math.sqrt(2)))


def test_learn_sparse_example():
    fails = 0
    for seed in range(30):
        rep = learners.learn_sparse(EvolutionOracle(SPARSE, seed=seed), 2, 0.1)
        fails += rep.verify(SPARSE) > 0.1
    assert fails <= 3
    rep = learners.learn_sparse(EvolutionOracle(SPARSE, mode="exact"), 2, 0.1, memory=False)
    assert rep.verify(SPARSE) <= 0.1


def test_sparse_detection_contained_in_support(rng):
    eps, s = 0.1, 4
    for seed in range(10):
        h = generate_instance("s_sparse", 3, s=s, rng=seed)
        rep = learners.learn_sparse(EvolutionOracle(h, seed=seed), s, eps)
        assert set(rep.detected) <= set(h.support)
        for x in set(h.support) - set(rep.detected):
            assert abs(h[x]) <= 4 * eps / math.sqrt(s)
        assert len(rep.detected) <= s


def test_learners_validate_arguments():
    o = EvolutionOracle(LOCAL)
    with pytest.raises(ValueError):
        learners.learn_local(o, 4, 0.1)
    with pytest.raises(ValueError):
        learners.learn_sparse(o, 0, 0.1)
    with pytest.raises(ValueError):
        learners.learn_local(o, 1, 1.5)


def test_branch_selection():
    k1 = learners.learn_local_sparse(EvolutionOracle(LOCAL, mode="exact"), 1, 1000, 0.1)
    assert k1.branch == "local" and k1.params["local_budget"] <= k1.params["sparse_budget"]
    assert k1.verify(LOCAL) <= 0.1
    kn = learners.learn_local_sparse(EvolutionOracle(SPARSE, mode="exact"), 3, 2, 0.1)
    assert kn.branch == "sparse" and kn.verify(SPARSE) <= 0.1


def test_report_serialization():
    rep = learners.learn_sparse(EvolutionOracle(SPARSE, seed=1), 2, 0.1)
    d = rep.to_dict()
    assert d["protocol"] == "learn_sparse" and d["eps"] == 0.1
    assert frobenius_distance(Hamiltonian.from_labels(d["hamiltonian"]), rep.hamiltonian) == 0.0
    assert '"ledger"' in rep.to_json()
    assert np.isfinite(d["params"]["t"])
