"""Two-stage learners for local and for sparse Hamiltonians.

Stage 1 finds the strings whose weight in U(t) is large. Stage 2 estimates
their coefficients. With memory, both stages use U(t) and its coefficients
U_x(t) ~ -i t lambda_x. Without memory, stage 1 uses MUB sampling and stage 2
the state-preparation estimator of lambda_x.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_CONFIG, ProtocolConfig
from .hamiltonian import Hamiltonian, frobenius_distance
from .pauli import PauliString, weights
from .simulator import (
    EvolutionOracle,
    coefficient_shots,
    estimate_coefficient,
    memoryless_estimate_coefficient,
    memoryless_frequencies,
    memoryless_rounds,
    pauli_distribution,
    sample_count,
)

DEFAULT_CT_SPARSE = 0.5


@dataclass
class LearnReport:
    protocol: str
    hamiltonian: Hamiltonian
    eps: float
    detected: list[PauliString]
    ledger: dict
    seed: object = None
    clamped: bool = False
    params: dict = field(default_factory=dict)
    branch: str | None = None
    achieved_error: float | None = None

    def verify(self, truth: Hamiltonian) -> float:
        """Fill in the exact error against the hidden Hamiltonian."""
        self.achieved_error = frobenius_distance(self.hamiltonian, truth)
        return self.achieved_error

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "branch": self.branch,
            "eps": self.eps,
            "achieved_error": self.achieved_error,
            "detected": [x.label for x in self.detected],
            "hamiltonian": {x.label: v for x, v in self.hamiltonian.items()},
            "params": self.params,
            "ledger": self.ledger,
            "seed": self.seed,
            "clamped": self.clamped,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=str)


def _check(eps: float, delta: float) -> None:
    if not 0 < eps < 1 or not 0 < delta < 1:
        raise ValueError("eps and delta must lie in (0, 1)")


def _seed_rng(oracle: EvolutionOracle, rng) -> None:
    if rng is not None:
        oracle.rng = np.random.default_rng(rng)


def _stage1(
    oracle: EvolutionOracle, t: float, candidates: np.ndarray, tol: float, delta: float, memory: bool, config
) -> tuple[np.ndarray, int]:
    """Weight estimates on ``candidates`` with l_inf error ``tol``."""
    if memory:
        shots = oracle.clamp(sample_count(tol, delta, const=0.5 * config.c_T), config.max_shots)
        return pauli_distribution(oracle, t, shots)[candidates.astype(np.int64)], shots
    shots = oracle.clamp(memoryless_rounds(oracle.n, len(candidates), tol, delta, config), config.max_shots)
    return memoryless_frequencies(oracle, t, candidates, shots), shots


def _stage2(
    oracle: EvolutionOracle,
    t: float,
    detected: list[PauliString],
    beta: float,
    eps: float,
    delta: float,
    memory: bool,
    config: ProtocolConfig,
) -> tuple[Hamiltonian, float]:
    """Coefficients of the detected strings; returns the per-coefficient accuracy used."""
    coeffs: dict[PauliString, float] = {}
    if not detected:
        return Hamiltonian(oracle.n), 0.0
    d = delta / len(detected)
    if memory:
        for x in detected:
            alpha = estimate_coefficient(oracle, t, x, beta, d, config)
            coeffs[x] = float((1j * alpha / t).real)
        return Hamiltonian(oracle.n, coeffs), beta / t
    acc = eps / (2.0 * math.sqrt(len(detected)))
    for x in detected:
        coeffs[x] = memoryless_estimate_coefficient(oracle, x, acc, d, config)
    return Hamiltonian(oracle.n, coeffs), acc


def local_parameters(k: int, eps: float, config: ProtocolConfig = DEFAULT_CONFIG) -> dict:
    t = eps ** (k + 1) * config.C_BH ** (-k * (k + 1) / 2)
    return {"t": t, "gamma": t**2, "beta": t**3 * eps, "threshold": t**4}


def learn_local(
    oracle: EvolutionOracle,
    k: int,
    eps: float,
    delta: float = 0.1,
    memory: bool = True,
    rng=None,
    config: ProtocolConfig = DEFAULT_CONFIG,
) -> LearnReport:
    """Learn a k-local Hamiltonian to normalized Frobenius error eps."""
    _check(eps, delta)
    if not 0 <= k <= oracle.n:
        raise ValueError(f"k={k} outside [0, {oracle.n}]")
    _seed_rng(oracle, rng)
    p = local_parameters(k, eps, config)
    t, gamma = p["t"], p["gamma"]
    n = oracle.n
    # with memory all strings come out of one Bell-sampling pass; without it
    # only the weight <= k strings are measured
    w = weights(n)
    cand = np.nonzero((w > 0) if memory else ((w > 0) & (w <= k)))[0].astype(np.uint64)
    name = "learn_local" if memory else "learn_local_memoryless"
    with oracle.ledger.protocol(name, oracle.seed):
        est, shots = _stage1(oracle, t, cand, gamma**2, delta / 2, memory, config)
        detected = [PauliString.from_index(n, int(x)) for x in cand[est > gamma**2]]
        h, acc = _stage2(oracle, t, detected, p["beta"], eps, delta / 2, memory, config)
    return LearnReport(
        protocol=name,
        hamiltonian=h,
        eps=eps,
        detected=sorted(detected),
        ledger=oracle.ledger.snapshot(),
        seed=oracle.seed,
        clamped=oracle.ledger.clamped,
        params={**p, "stage1_shots": shots, "coefficient_accuracy": acc},
    )


def sparse_parameters(s: int, eps: float, config: ProtocolConfig = DEFAULT_CONFIG) -> dict:
    c_t = DEFAULT_CT_SPARSE if config.c_t is None else config.c_t
    t = c_t * eps / math.sqrt(s)
    return {"t": t, "threshold": 2 * eps**4 / s**2, "beta": t * eps / math.sqrt(s)}


def learn_sparse(
    oracle: EvolutionOracle,
    s: int,
    eps: float,
    delta: float = 0.1,
    memory: bool = True,
    rng=None,
    config: ProtocolConfig = DEFAULT_CONFIG,
) -> LearnReport:
    """Learn an s-sparse Hamiltonian to normalized Frobenius error O(eps)."""
    _check(eps, delta)
    if s < 1:
        raise ValueError("s must be >= 1")
    _seed_rng(oracle, rng)
    p = sparse_parameters(s, eps, config)
    t, thr = p["t"], p["threshold"]
    n = oracle.n
    cand = np.arange(1, 1 << (2 * n), dtype=np.uint64)
    name = "learn_sparse" if memory else "learn_sparse_memoryless"
    with oracle.ledger.protocol(name, oracle.seed):
        est, shots = _stage1(oracle, t, cand, thr / 2, delta / 2, memory, config)
        detected = [PauliString.from_index(n, int(x)) for x in cand[est >= thr]]
        h, acc = _stage2(oracle, t, detected, p["beta"], eps, delta / 2, memory, config)
    return LearnReport(
        protocol=name,
        hamiltonian=h,
        eps=eps,
        detected=sorted(detected),
        ledger=oracle.ledger.snapshot(),
        seed=oracle.seed,
        clamped=oracle.ledger.clamped,
        params={**p, "stage1_shots": shots, "coefficient_accuracy": acc},
    )


def local_budget(n: int, k: int, eps: float, delta: float, config: ProtocolConfig = DEFAULT_CONFIG) -> float:
    """Nominal query count of the local learner (at most 1/gamma detected strings)."""
    p = local_parameters(k, eps, config)
    stage1 = sample_count(p["gamma"] ** 2, delta / 2, const=0.5 * config.c_T)
    detected = min(1.0 / p["gamma"], float(sum(math.comb(n, w) * 3**w for w in range(1, k + 1))))
    return float(stage1 + detected * 2 * coefficient_shots(p["beta"], delta / 2, config))


def sparse_budget(s: int, eps: float, delta: float, config: ProtocolConfig = DEFAULT_CONFIG) -> float:
    """Nominal query count of the sparse learner (at most s detected strings)."""
    p = sparse_parameters(s, eps, config)
    stage1 = sample_count(p["threshold"] / 2, delta / 2, const=0.5 * config.c_T)
    return float(stage1 + s * 2 * coefficient_shots(p["beta"], delta / 2, config))


def learn_local_sparse(
    oracle: EvolutionOracle,
    k: int,
    s: int,
    eps: float,
    delta: float = 0.1,
    memory: bool = True,
    rng=None,
    config: ProtocolConfig = DEFAULT_CONFIG,
) -> LearnReport:
    """Run whichever of the local and sparse learners has the smaller nominal budget."""
    _check(eps, delta)
    lb = local_budget(oracle.n, k, eps, delta, config)
    sb = sparse_budget(s, eps, delta, config)
    if lb <= sb:
        rep = learn_local(oracle, k, eps, delta, memory, rng, config)
        rep.branch = "local"
    else:
        rep = learn_sparse(oracle, s, eps, delta, memory, rng, config)
        rep.branch = "sparse"
    rep.params.update(local_budget=lb, sparse_budget=sb)
    return rep
