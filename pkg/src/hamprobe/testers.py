"""With-memory testers: locality, support, sparsity, and k-junta unitaries."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .config import DEFAULT_CONFIG, ProtocolConfig
from .decision import CLOSE, FAR, Decision, one_sided, two_sided
from .hashing import sparsity_thresholds, sparsity_time
from .pauli import PauliString, order_desc, weights
from .simulator import (
    EvolutionOracle,
    UnitarySpectrum,
    memoryless_frequencies,
    memoryless_rounds,
    pauli_distribution,
)

# ---- top energy ------------------------------------------------------------


@dataclass(frozen=True)
class TopEnergyStat:
    t: float | None
    s: int
    value: float
    identity_weight: float
    labels: tuple[str, ...]


def top_energy(probs, s: int, t: float | None = None, n: int | None = None) -> TopEnergyStat:
    """|U_0|^2 plus the s largest non-identity weights, ties by label.

    ``probs`` is a full 4^n vector, a UnitarySpectrum, or a dict of estimates.
    """
    if s < 0:
        raise ValueError("s must be non-negative")
    if isinstance(probs, dict):
        items = sorted(((x, float(v)) for x, v in probs.items() if not x.is_identity()), key=lambda kv: (-kv[1], kv[0].label))
        zero = next((float(v) for x, v in probs.items() if x.is_identity()), 0.0)
        top = items[:s]
        return TopEnergyStat(t, s, zero + sum(v for _, v in top), zero, tuple(x.label for x, _ in top))
    if hasattr(probs, "probabilities"):
        probs = probs.probabilities()
    probs = np.asarray(probs, dtype=np.float64)
    n = (len(probs).bit_length() - 1) // 2 if n is None else n
    rest = np.arange(1, len(probs))
    top = rest[order_desc(probs[rest], n, rest)[:s]]
    value = float(probs[0] + probs[top].sum())
    labels = tuple(PauliString.from_index(n, int(i)).label for i in top)
    return TopEnergyStat(t, s, value, float(probs[0]), labels)


# ---- support / locality ------------------------------------------------------


def _check_gap(eps1: float, eps2: float) -> None:
    if not 0 <= eps1 < eps2:
        raise ValueError(f"need 0 <= eps1 < eps2, got eps1={eps1}, eps2={eps2}")


def support_time(eps1: float, eps2: float, config: ProtocolConfig = DEFAULT_CONFIG) -> float:
    return (eps2 - eps1) / (3.0 * config.c_taylor)


def support_shots(eps1: float, eps2: float, delta: float, m: int = 1, config: ProtocolConfig = DEFAULT_CONFIG) -> int:
    return math.ceil(config.c_T * math.log(m / delta) / (eps2 - eps1) ** 4)


def support_thresholds(eps1: float, eps2: float, config: ProtocolConfig = DEFAULT_CONFIG) -> dict:
    gap = eps2 - eps1
    c = config.c_taylor
    mid = gap * (eps1 + 2 * eps2) / (9 * c) - gap**2 / (18 * c)
    return {"t": support_time(eps1, eps2, config), "phase1": 0.75 * gap**2, "phase2": mid**2}


def _mask(n: int, support: Iterable[PauliString]) -> np.ndarray:
    mask = np.zeros(1 << (2 * n), dtype=bool)
    mask[0] = True
    for x in support:
        if x.n != n:
            raise ValueError(f"support string {x.label} has {x.n} qubits, expected {n}")
        mask[x.index] = True
    return mask


def local_mask(n: int, k: int) -> np.ndarray:
    return weights(n) <= k


def _test_masks(
    oracle: EvolutionOracle,
    masks: Sequence[np.ndarray],
    eps1: float,
    eps2: float,
    delta: float,
    config: ProtocolConfig,
    name: str,
) -> list[Decision]:
    _check_gap(eps1, eps2)
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if not masks:
        raise ValueError("empty support list")
    th = support_thresholds(eps1, eps2, config)
    t = th["t"]
    shots = oracle.clamp(support_shots(eps1, eps2, delta, max(len(masks), 1), config), config.max_shots)
    with oracle.ledger.protocol(name, oracle.seed):
        p1 = pauli_distribution(oracle, t, shots)
        alpha1 = [float(p1[~m].sum()) for m in masks]
        need2 = [a < th["phase1"] for a in alpha1]
        alpha2: list[float | None] = [None] * len(masks)
        if any(need2):
            p2 = pauli_distribution(oracle, t, shots)
            alpha2 = [float(p2[~m].sum()) if nd else None for m, nd in zip(masks, need2)]
    out = []
    for a1, a2 in zip(alpha1, alpha2):
        verdict = FAR if a2 is None else one_sided(a2, th["phase2"])
        out.append(
            Decision(
                protocol=name,
                verdict=verdict,
                gamma=a1 if a2 is None else a2,
                thresholds=dict(th),
                ledger=oracle.ledger.snapshot(),
                seed=oracle.seed,
                clamped=oracle.ledger.clamped,
                extra={"alpha1": a1, "alpha2": a2, "shots_per_phase": shots},
            )
        )
    return out


def test_support(
    oracle: EvolutionOracle,
    supports: Sequence[Iterable[PauliString]],
    eps1: float,
    eps2: float,
    delta: float = 0.1,
    rng=None,
    config: ProtocolConfig = DEFAULT_CONFIG,
) -> list[Decision]:
    """One shared Bell-sampling pass decides, for each support set, close or far.

    The identity string is always treated as in-support.
    """
    if rng is not None:
        oracle.rng = np.random.default_rng(rng)
    masks = [_mask(oracle.n, S) for S in supports]
    return _test_masks(oracle, masks, eps1, eps2, delta, config, "test_support")


def test_locality(
    oracle: EvolutionOracle,
    k: int,
    eps1: float,
    eps2: float,
    delta: float = 0.1,
    rng=None,
    config: ProtocolConfig = DEFAULT_CONFIG,
) -> Decision:
    """Close to k-local or far from it, from the Bell-sampled weight above k."""
    if not 0 <= k <= oracle.n:
        raise ValueError(f"k={k} outside [0, {oracle.n}]")
    if rng is not None:
        oracle.rng = np.random.default_rng(rng)
    (dec,) = _test_masks(oracle, [local_mask(oracle.n, k)], eps1, eps2, delta, config, "test_locality")
    dec.extra["k"] = k
    return dec


# ---- sparsity ---------------------------------------------------------------


def sparsity_shots(s: int, eps1: float, eps2: float, delta: float, config: ProtocolConfig = DEFAULT_CONFIG) -> int:
    gap = eps2**2 - eps1**2
    return math.ceil(config.c_T * s**6 / gap**12 * math.log(1.0 / delta))


def test_sparsity(
    oracle: EvolutionOracle,
    s: int,
    eps1: float,
    eps2: float,
    delta: float = 0.1,
    rng=None,
    config: ProtocolConfig = DEFAULT_CONFIG,
) -> Decision:
    """Close to s-sparse or far from it, from the Bell-sampled top energy."""
    if s < 1:
        raise ValueError("s must be >= 1")
    if not 0 <= eps1 < eps2 <= 1:
        raise ValueError(f"need 0 <= eps1 < eps2 <= 1, got eps1={eps1}, eps2={eps2}")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if rng is not None:
        oracle.rng = np.random.default_rng(rng)
    t = sparsity_time(s, eps1, eps2, config)
    th = sparsity_thresholds(s, eps1, eps2, t)
    shots = oracle.clamp(sparsity_shots(s, eps1, eps2, delta, config), config.max_shots)
    with oracle.ledger.protocol("test_sparsity", oracle.seed):
        stat = top_energy(pauli_distribution(oracle, t, shots), s, t, oracle.n)
    return Decision(
        protocol="test_sparsity",
        verdict=two_sided(stat.value, th["accept"], th["reject"]),
        gamma=stat.value,
        thresholds=th,
        ledger=oracle.ledger.snapshot(),
        seed=oracle.seed,
        clamped=oracle.ledger.clamped,
        extra={"shots": shots, "top_labels": list(stat.labels)},
    )


# ---- juntas -------------------------------------------------------------------


def _support_masks(n: int) -> np.ndarray:
    """Qubit-support bitmask of every packed index (bit n-1-q is qubit q)."""
    idx = np.arange(1 << (2 * n), dtype=np.int64)
    return (idx >> n) | (idx & ((1 << n) - 1))


def subset_weights(probs: np.ndarray, n: int, k: int) -> list[tuple[tuple[int, ...], float]]:
    """Weight supported inside each k-subset K, subsets in lexicographic order."""
    probs = np.asarray(probs, dtype=np.float64)
    masks = _support_masks(n)
    out = []
    for K in itertools.combinations(range(n), k):
        km = sum(1 << (n - 1 - q) for q in K)
        out.append((K, float(probs[(masks & ~km) == 0].sum())))
    return out


def best_subset(probs: np.ndarray, n: int, k: int) -> tuple[tuple[int, ...], float]:
    """Heaviest K; the first in lexicographic order on ties."""
    best = None
    for K, w in subset_weights(probs, n, k):
        if best is None or w > best[1]:
            best = (K, w)
    return best


def junta_accuracy(k: int, eps1: float, eps2: float) -> float:
    return (eps2**2 / 4 - eps1**2) / (2 * 4**k)


def junta_threshold(eps1: float, eps2: float) -> float:
    return 1.0 - (eps1**2 + eps2**2 / 4) / 2


def test_junta(
    oracle: EvolutionOracle,
    k: int,
    eps1: float,
    eps2: float,
    memory: bool = True,
    rng=None,
    delta: float = 0.1,
    t: float = 1.0,
    config: ProtocolConfig = DEFAULT_CONFIG,
) -> Decision:
    """Is U(t) close to a unitary acting on only k qubits?

    Estimates the Pauli weights of U(t) (Bell sampling with memory, MUB
    sampling without) and accepts iff some k-subset carries enough weight.
    """
    if not 0 <= k <= oracle.n:
        raise ValueError(f"k={k} outside [0, {oracle.n}]")
    if not 0 < 2 * eps1 < eps2:
        raise ValueError(f"need 0 < 2*eps1 < eps2, got eps1={eps1}, eps2={eps2}")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if rng is not None:
        oracle.rng = np.random.default_rng(rng)
    n = oracle.n
    eta = junta_accuracy(k, eps1, eps2)
    thr = junta_threshold(eps1, eps2)
    name = "test_junta" if memory else "test_junta_memoryless"
    with oracle.ledger.protocol(name, oracle.seed):
        if memory:
            shots = oracle.clamp(config.c_T * math.log(1.0 / delta) / eta**2, config.max_shots)
            probs = pauli_distribution(oracle, t, shots)
        else:
            strings = np.arange(1 << (2 * n), dtype=np.uint64)
            shots = oracle.clamp(memoryless_rounds(n, len(strings), eta, delta, config), config.max_shots)
            probs = memoryless_frequencies(oracle, t, strings, shots)
    K, w = best_subset(probs, n, k)
    return Decision(
        protocol=name,
        verdict=CLOSE if w >= thr else FAR,
        gamma=w,
        thresholds={"accept": thr, "accuracy": eta, "t": t},
        ledger=oracle.ledger.snapshot(),
        seed=oracle.seed,
        clamped=oracle.ledger.clamped,
        extra={"subset": list(K), "shots": shots, "memory": memory},
    )


def junta_distance_bounds(unitary: np.ndarray, k: int) -> tuple[float, float]:
    """Bounds on the normalized Frobenius distance from U to the nearest k-junta.

    lower: sqrt(2 - 2 sqrt(max_K w_K)); upper: distance to the unitary part of
    the projection of U onto the best K.
    """
    U = np.asarray(unitary, dtype=np.complex128)
    dim = U.shape[0]
    n = dim.bit_length() - 1
    spectrum = UnitarySpectrum.of(U)
    probs = spectrum.probabilities()
    weights_by_K = subset_weights(probs, n, k)
    wmax = max(w for _, w in weights_by_K)
    lower = math.sqrt(max(2.0 - 2.0 * math.sqrt(min(wmax, 1.0)), 0.0))
    masks = _support_masks(n)
    upper = math.inf
    for K, _ in weights_by_K:
        km = sum(1 << (n - 1 - q) for q in K)
        proj = np.where((masks & ~km) == 0, spectrum.coefficients, 0)
        P = kernels.pauli_synthesize(proj, n)
        u, _, vh = np.linalg.svd(P)
        V = u @ vh
        upper = min(upper, float(np.linalg.norm(U - V) / math.sqrt(dim)))
    return lower, upper
