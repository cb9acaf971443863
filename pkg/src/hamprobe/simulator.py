"""Exact time evolution, Pauli spectra and budgeted query oracles.

Every protocol sees the hidden Hamiltonian only through the functions in this
module. Shot noise is drawn from exactly computed probabilities: a batch of
measurements is simulated by drawing its sufficient statistic (multinomial
counts for Bell or MUB sampling, binomial counts for +-1 observables), which
has the same law as repeating the single-shot experiment.
"""

from __future__ import annotations

import csv
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from . import kernels
from .config import DEFAULT_CONFIG, ProtocolConfig, check_dense
from .hamiltonian import Hamiltonian, synthesize
from .pauli import PauliString, mub_family, pauli_matrix, pauli_product

MODES = ("exact", "shots")


def normalize_mode(mode: str) -> str:
    mode = {"shot_noise": "shots", "shot": "shots"}.get(mode, mode)
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


# ---- ledger -------------------------------------------------------------


@dataclass
class Ledger:
    """Query and evolution-time accounting for one oracle."""

    queries: int = 0
    evolution_time: float = 0.0
    clamped: bool = False
    records: list[dict] = field(default_factory=list)

    def charge(self, queries: int, t: float) -> None:
        queries = int(queries)
        if queries < 0:
            raise ValueError("negative query count")
        self.queries += queries
        self.evolution_time += queries * abs(float(t))

    @contextmanager
    def protocol(self, name: str, seed=None):
        q0, e0, w0 = self.queries, self.evolution_time, time.perf_counter()
        rec = {"protocol": name, "seed": seed}
        try:
            yield rec
        finally:
            rec.update(
                queries=self.queries - q0,
                evolution_time=self.evolution_time - e0,
                wall_time=time.perf_counter() - w0,
            )
            self.records.append(rec)

    def snapshot(self) -> dict:
        return {
            "queries": self.queries,
            "evolution_time": self.evolution_time,
            "clamped": self.clamped,
            "records": [dict(r) for r in self.records],
        }


# ---- spectra --------------------------------------------------------------


@dataclass(frozen=True)
class UnitarySpectrum:
    """Pauli coefficients U_x = Tr(sigma_x U)/2^n, indexed by packed string."""

    n: int
    coefficients: np.ndarray

    @classmethod
    def of(cls, unitary: np.ndarray) -> "UnitarySpectrum":
        coeffs = kernels.pauli_coefficients(unitary)
        coeffs.flags.writeable = False
        return cls(unitary.shape[0].bit_length() - 1, coeffs)

    def __getitem__(self, x: PauliString) -> complex:
        return complex(self.coefficients[x.index])

    def probabilities(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    def rows(self) -> Iterable[tuple[str, float, float, float]]:
        probs = self.probabilities()
        for idx in range(len(self.coefficients)):
            c = self.coefficients[idx]
            yield PauliString.from_index(self.n, idx).label, c.real, c.imag, probs[idx]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["pauli_label", "re", "im", "prob"])
            for row in self.rows():
                w.writerow([row[0], repr(row[1]), repr(row[2]), repr(row[3])])


def evolution_unitary(h: Hamiltonian, t: float) -> np.ndarray:
    """e^{-iHt} through the Hermitian eigendecomposition."""
    if not math.isfinite(t):
        raise ValueError("evolution time must be finite")
    check_dense(h.n)
    vals, vecs = np.linalg.eigh(synthesize(h))
    return (vecs * np.exp(-1j * vals * t)) @ vecs.conj().T


# ---- oracle ---------------------------------------------------------------


class EvolutionOracle:
    """Seeded, budgeted access to U(t) = e^{-iHt}.

    In exact mode the estimators return true probabilities and means but the
    ledger is still charged the nominal budget.
    """

    def __init__(
        self,
        hamiltonian: Hamiltonian | None,
        seed=None,
        mode: str = "shots",
        check: bool = True,
        _unitary: np.ndarray | None = None,
    ):
        self.mode = normalize_mode(mode)
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.ledger = Ledger()
        self._h = hamiltonian
        self._fixed = _unitary
        self._spectra: dict[float, UnitarySpectrum] = {}
        self._units: dict[float, np.ndarray] = {}
        if hamiltonian is not None:
            check_dense(hamiltonian.n)
            self.n = hamiltonian.n
            self._vals, self._vecs = np.linalg.eigh(synthesize(hamiltonian))
            if check:
                if not hamiltonian.traceless:
                    raise ValueError("oracle target must be traceless")
                norm = float(np.max(np.abs(self._vals))) if len(self._vals) else 0.0
                if norm > 1 + 1e-9:
                    raise ValueError(f"oracle target has ||H||_inf = {norm:.6f} > 1")
        else:
            self.n = _unitary.shape[0].bit_length() - 1
            if check and np.max(np.abs(_unitary @ _unitary.conj().T - np.eye(_unitary.shape[0]))) > 1e-9:
                raise ValueError("supplied matrix is not unitary")

    @classmethod
    def from_unitary(cls, unitary: np.ndarray, seed=None, mode: str = "shots", check: bool = True):
        """Oracle for a fixed unitary; every query applies it once (t is only charged)."""
        unitary = np.asarray(unitary, dtype=np.complex128)
        check_dense(unitary.shape[0].bit_length() - 1)
        return cls(None, seed=seed, mode=mode, check=check, _unitary=unitary)

    @property
    def exact(self) -> bool:
        return self.mode == "exact"

    def _unitary(self, t: float) -> np.ndarray:
        if self._fixed is not None:
            return self._fixed
        key = float(t)
        if key not in self._units:
            if len(self._units) > 64:
                self._units.clear()
            self._units[key] = (self._vecs * np.exp(-1j * self._vals * key)) @ self._vecs.conj().T
        return self._units[key]

    def _spectrum(self, t: float) -> UnitarySpectrum:
        key = float(t)
        if key not in self._spectra:
            if len(self._spectra) > 64:
                self._spectra.clear()
            self._spectra[key] = UnitarySpectrum.of(self._unitary(key))
        return self._spectra[key]

    def _probabilities(self, t: float) -> np.ndarray:
        p = self._spectrum(t).probabilities()
        return p / p.sum()

    def clamp(self, count: float, cap: int) -> int:
        """Integer budget, clamped to ``cap`` with the ledger flag set."""
        count = math.ceil(count)
        if count > cap:
            self.ledger.clamped = True
            return int(cap)
        return max(int(count), 1)


# ---- sample sizing --------------------------------------------------------


def sample_count(
    eps: float,
    delta: float,
    flavor: str = "hoeffding",
    const: float = 0.5,
    variance: float | None = None,
    bound: float = 1.0,
) -> int:
    """Samples for eps accuracy with confidence 1-delta.

    hoeffding: ceil(const * ln(2/delta) / eps^2); const = 0.5 for [0,1]
    variables, 2 for +-1 variables.
    bernstein: ceil(const * 2 (v + eps*M/3) ln(2/delta) / eps^2).
    """
    if not (0 < eps < 1 or (flavor == "bernstein" and eps > 0)) or not 0 < delta < 1:
        raise ValueError("eps and delta must lie in (0, 1)")
    log_term = math.log(2.0 / delta)
    if flavor == "hoeffding":
        return math.ceil(const * log_term / eps**2)
    if flavor == "bernstein":
        if variance is None or variance < 0:
            raise ValueError("bernstein sizing needs a non-negative variance bound")
        return math.ceil(const * 2.0 * (variance + eps * bound / 3.0) * log_term / eps**2)
    raise ValueError(f"unknown flavor {flavor!r}")


def empirical_distribution(samples: Iterable[PauliString]) -> dict[PauliString, float]:
    samples = list(samples)
    if not samples:
        raise ValueError("empty sample list")
    counts: dict[PauliString, int] = {}
    for x in samples:
        counts[x] = counts.get(x, 0) + 1
    total = len(samples)
    return {x: c / total for x, c in counts.items()}


# ---- Bell sampling --------------------------------------------------------


def bell_sample(oracle: EvolutionOracle, t: float, shots: int, rng=None) -> list[PauliString]:
    """Draw ``shots`` strings from {|U_x(t)|^2}."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = oracle.rng if rng is None else np.random.default_rng(rng)
    probs = oracle._probabilities(t)
    oracle.ledger.charge(shots, t)
    draws = rng.choice(len(probs), size=shots, p=probs)
    return [PauliString.from_index(oracle.n, int(i)) for i in draws]


def pauli_distribution(oracle: EvolutionOracle, t: float, shots: int) -> np.ndarray:
    """Empirical Bell-sampling distribution over all strings (true one in exact mode)."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = oracle._probabilities(t)
    oracle.ledger.charge(shots, t)
    if oracle.exact:
        return probs.copy()
    return oracle.rng.multinomial(shots, probs) / shots


# ---- coefficient estimation ----------------------------------------------


def _pm_mean(oracle: EvolutionOracle, mean: float, shots: int) -> float:
    """Average of ``shots`` +-1 outcomes with the given mean."""
    p = min(max((1.0 + mean) / 2.0, 0.0), 1.0)
    return 2.0 * oracle.rng.binomial(shots, p) / shots - 1.0


def coefficient_shots(eps: float, delta: float, config: ProtocolConfig = DEFAULT_CONFIG) -> int:
    """Shots per quadrature so that |estimate - U_x| <= eps w.p. 1-delta."""
    return sample_count(eps / math.sqrt(2.0), delta / 2.0, const=2.0 * config.c_T)


def estimate_coefficient(
    oracle: EvolutionOracle,
    t: float,
    x: PauliString,
    eps: float,
    delta: float,
    config: ProtocolConfig = DEFAULT_CONFIG,
) -> complex:
    """Hadamard-test estimate of U_x(t); controlled-U costs one query of duration |t|."""
    shots = oracle.clamp(coefficient_shots(eps, delta, config), config.max_shots)
    value = oracle._spectrum(t)[x]
    oracle.ledger.charge(2 * shots, t)
    if oracle.exact:
        return value
    return complex(_pm_mean(oracle, value.real, shots), _pm_mean(oracle, value.imag, shots))


# ---- memoryless Pauli sampling ------------------------------------------


def _mub_outcome_table(oracle: EvolutionOracle, t: float) -> np.ndarray:
    """q[i, s] = Pr(basis i drawn and outcome l = j ^ s), over uniform (i, j)."""
    fam = mub_family(oracle.n)
    N = fam.N
    U = oracle._unitary(t)
    j = np.arange(N)
    table = np.empty((N + 1, N))
    for i in range(N + 1):
        B = fam.basis(i)
        P = np.abs(B.conj().T @ U @ B) ** 2  # P[l, j] = |<phi_l|U|phi_j>|^2
        table[i] = P[j[None, :] ^ j[:, None], j[None, :]].sum(axis=1)
    return table / (N * (N + 1))


def memoryless_rounds(n: int, size: int, eps: float, delta: float, config: ProtocolConfig = DEFAULT_CONFIG) -> int:
    N = 1 << n
    return sample_count(eps * N / (N + 1), min(delta / max(size, 1), 0.5), const=0.5 * config.c_T)


def memoryless_frequencies(oracle: EvolutionOracle, t: float, strings: np.ndarray, rounds: int) -> np.ndarray:
    """Debiased estimates ((N+1)/N)|alpha_x|^2 - 1/N for packed ``strings``."""
    fam = mub_family(oracle.n)
    N = fam.N
    strings = np.asarray(strings, dtype=np.uint64)
    table = _mub_outcome_table(oracle, t)
    oracle.ledger.charge(rounds, t)
    if oracle.exact:
        freq = table
    else:
        flat = table.reshape(-1)
        freq = (oracle.rng.multinomial(rounds, flat / flat.sum()) / rounds).reshape(table.shape)
    syn = fam.syndromes(strings)
    raw = freq[np.arange(N + 1)[:, None], syn].sum(axis=0)
    return ((N + 1) / N) * raw - 1.0 / N


def memoryless_pauli_sampling(
    oracle: EvolutionOracle,
    t: float,
    S: Iterable[PauliString],
    eps: float,
    delta: float,
    config: ProtocolConfig = DEFAULT_CONFIG,
) -> dict[PauliString, float]:
    """Estimate |U_x(t)|^2 for x in S using only MUB preparations and measurements."""
    S = list(S)
    if not S:
        return {}
    rounds = oracle.clamp(memoryless_rounds(oracle.n, len(S), eps, delta, config), config.max_shots)
    est = memoryless_frequencies(oracle, t, np.array([x.index for x in S], dtype=np.uint64), rounds)
    return {x: float(v) for x, v in zip(S, est)}


# ---- memoryless coefficient estimation ----------------------------------


def canonical_factorization(x: PauliString) -> tuple[PauliString, PauliString, complex]:
    """(x', x'', a) with sigma_x' sigma_x'' = a sigma_x, a = +-i, [x', x''] = 1."""
    if x.is_identity():
        raise ValueError("the identity string has no anticommuting factorization")
    q = x.support[0]
    ch = x.label[q]
    xp = PauliString.single(x.n, q, "X" if ch in "ZY" else "Z")
    xpp = x ^ xp
    prod = pauli_product(xp, xpp)
    return xp, xpp, prod.phase


def memoryless_coefficient_mean(oracle: EvolutionOracle, x: PauliString, eps: float) -> tuple[float, complex]:
    """Exact mean of the sigma_x'' outcome and the factor a."""
    xp, xpp, a = canonical_factorization(x)
    U = oracle._unitary(eps)
    dim = 1 << x.n
    rho = (np.eye(dim) - pauli_matrix(xp)) / dim
    mean = float(np.real(np.trace(pauli_matrix(xpp) @ U @ rho @ U.conj().T)))
    return mean, a


def memoryless_estimate_coefficient(
    oracle: EvolutionOracle,
    x: PauliString,
    eps: float,
    delta: float,
    config: ProtocolConfig = DEFAULT_CONFIG,
) -> float:
    """lambda_x from e^{-i eps H} applied to (I - sigma_x')/2^n and a sigma_x'' measurement."""
    if not 0 < eps < 1 or not 0 < delta < 1:
        raise ValueError("eps and delta must lie in (0, 1)")
    mean, a = memoryless_coefficient_mean(oracle, x, eps)
    rounds = oracle.clamp(sample_count(eps * eps, delta, const=2.0 * config.c_T), config.max_shots)
    oracle.ledger.charge(rounds, eps)
    if not oracle.exact:
        mean = _pm_mean(oracle, mean, rounds)
    return float((mean / (2j * eps * a)).real)
