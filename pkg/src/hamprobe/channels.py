"""Pauli channels: error rates, fidelities, energies and distances."""

from __future__ import annotations

import json
import math
from functools import lru_cache
from pathlib import Path
from typing import Mapping

import numpy as np

from . import kernels
from .hamiltonian import GenerationError, Hamiltonian, ValidationError
from .pauli import PauliString, sym_index
from .simulator import Ledger, UnitarySpectrum, _pm_mean, evolution_unitary, normalize_mode

SIMPLEX_TOL = 1e-9
LOAD_TOL = 1e-6


class PauliChannel:
    """rho -> sum_x p(x) sigma_x rho sigma_x, stored sparsely."""

    __slots__ = ("n", "_rates", "renormalized")

    def __init__(self, n: int, rates: Mapping[PauliString, float], tol: float = SIMPLEX_TOL):
        out: dict[PauliString, float] = {}
        for x, v in rates.items():
            if isinstance(x, str):
                x = PauliString.from_label(x)
            if x.n != n:
                raise ValidationError(f"{x.label} has {x.n} qubits, expected {n}")
            v = float(v)
            if not math.isfinite(v) or v < -tol:
                raise ValidationError(f"invalid error rate {v} for {x.label}")
            if v > 0:
                out[x] = v
        total = sum(out.values())
        if abs(total - 1.0) > tol:
            raise ValidationError(f"error rates sum to {total}, not 1")
        self.n = n
        self._rates = out
        self.renormalized = False

    @classmethod
    def from_vector(cls, n: int, vec: np.ndarray, tol: float = SIMPLEX_TOL) -> "PauliChannel":
        vec = np.asarray(vec, dtype=np.float64)
        nz = np.nonzero(vec > 0)[0]
        if np.any(vec < -tol):
            raise ValidationError("negative error rate")
        return cls(n, {PauliString.from_index(n, int(i)): vec[i] for i in nz}, tol)

    @classmethod
    def identity(cls, n: int) -> "PauliChannel":
        return cls(n, {PauliString.identity(n): 1.0})

    @property
    def rates(self) -> dict[PauliString, float]:
        return dict(self._rates)

    def __getitem__(self, x: PauliString | str) -> float:
        if isinstance(x, str):
            x = PauliString.from_label(x)
        return self._rates.get(x, 0.0)

    def items(self):
        return sorted(self._rates.items(), key=lambda kv: kv[0].label)

    def to_vector(self) -> np.ndarray:
        vec = np.zeros(1 << (2 * self.n))
        for x, v in self._rates.items():
            vec[x.index] = v
        return vec

    def to_text(self) -> str:
        return "".join(f"{x.label} {v!r}\n" for x, v in self.items())

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "rates": {x.label: v for x, v in self.items()}}, indent=2)

    @classmethod
    def from_text(cls, text: str, n: int | None = None) -> "PauliChannel":
        # same grammar as the Hamiltonian format, then the simplex check
        h = Hamiltonian.from_text(text, n)
        return cls._loaded(h.n, {x: v for x, v in h.items()})

    @classmethod
    def from_json(cls, text: str) -> "PauliChannel":
        data = json.loads(text)
        return cls._loaded(int(data["n"]), {PauliString.from_label(k): float(v) for k, v in data["rates"].items()})

    @classmethod
    def _loaded(cls, n: int, rates: dict) -> "PauliChannel":
        if any(v < -LOAD_TOL for v in rates.values()):
            raise ValidationError("negative error rate in channel file")
        rates = {x: max(v, 0.0) for x, v in rates.items()}
        total = sum(rates.values())
        if abs(total - 1.0) > LOAD_TOL:
            raise ValidationError(f"error rates sum to {total}, outside 1 +- {LOAD_TOL}")
        ch = cls(n, {x: v / total for x, v in rates.items()})
        ch.renormalized = total != 1.0
        return ch

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.write_text(self.to_text())
        path.with_suffix(path.suffix + ".json").write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path, n: int | None = None) -> "PauliChannel":
        path = Path(path)
        text = path.read_text()
        return cls.from_json(text) if path.suffix == ".json" else cls.from_text(text, n)


@lru_cache(maxsize=32)
def _swap_perm(n: int) -> np.ndarray:
    idx = np.arange(1 << (2 * n), dtype=np.int64)
    mask = (1 << n) - 1
    return ((idx & mask) << n) | (idx >> n)


def symplectic_fourier(vec: np.ndarray, n: int) -> np.ndarray:
    """out[y] = sum_x (-1)^{[x,y]} vec[x]."""
    work = np.array(vec, dtype=np.float64, order="C")
    kernels.fwht(work)
    return work[_swap_perm(n)]


def pauli_fidelities(channel: PauliChannel) -> np.ndarray:
    return symplectic_fourier(channel.to_vector(), channel.n)


def pauli_fidelity(channel: PauliChannel, y: PauliString) -> float:
    if y.n != channel.n:
        raise ValidationError("dimension mismatch")
    n = channel.n
    return float(sum(v * (-1) ** sym_index(n, x.index, y.index) for x, v in channel._rates.items()))


def rates_from_fidelities(fid: np.ndarray, n: int) -> np.ndarray:
    """Inverse transform: p(a) = 4^{-n} sum_y (-1)^{[a,y]} lambda(y)."""
    return symplectic_fourier(fid, n) / (1 << (2 * n))


def top_rates(channel: PauliChannel, s: int) -> list[tuple[PauliString, float]]:
    """The s largest error rates, ties by label."""
    ranked = sorted(channel._rates.items(), key=lambda kv: (-kv[1], kv[0].label))
    return ranked[: max(s, 0)]


def channel_energy(channel: PauliChannel, s: int) -> float:
    if s < 0:
        raise ValueError("s must be non-negative")
    return float(sum(v for _, v in top_rates(channel, s)))


def channel_distance(ch1: PauliChannel, ch2: PauliChannel) -> float:
    if ch1.n != ch2.n:
        raise ValidationError("dimension mismatch")
    keys = set(ch1._rates) | set(ch2._rates)
    return 0.5 * sum(abs(ch1[x] - ch2[x]) for x in keys)


def sparse_approximation(channel: PauliChannel, s: int) -> PauliChannel:
    """Top-s rates renormalized: the closest s-sparse channel."""
    top = top_rates(channel, s)
    total = sum(v for _, v in top)
    if total <= 0:
        raise ValueError("s must be positive")
    return PauliChannel(channel.n, {x: v / total for x, v in top})


def distance_to_sparse_channel(channel: PauliChannel, s: int) -> float:
    return 1.0 - channel_energy(channel, s)


def twirled_channel_from_evolution(h: Hamiltonian, t: float) -> PauliChannel:
    """Pauli twirl of rho -> U rho U^dag: rates |U_x(t)|^2."""
    probs = UnitarySpectrum.of(evolution_unitary(h, t)).probabilities()
    probs[probs < 1e-300] = 0.0
    return PauliChannel.from_vector(h.n, probs / probs.sum())


class ChannelOracle:
    """Simulated prepare-apply-measure access to a hidden Pauli channel."""

    def __init__(self, channel: PauliChannel, seed=None, mode: str = "shots"):
        self.mode = normalize_mode(mode)
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.ledger = Ledger()
        self.n = channel.n
        self._channel = channel
        self._fid: np.ndarray | None = None

    @property
    def exact(self) -> bool:
        return self.mode == "exact"

    def _fidelities(self) -> np.ndarray:
        if self._fid is None:
            self._fid = pauli_fidelities(self._channel)
        return self._fid

    def clamp(self, count: float, cap: int) -> int:
        count = math.ceil(count)
        if count > cap:
            self.ledger.clamped = True
            return int(cap)
        return max(int(count), 1)


def fidelity_shot(oracle: ChannelOracle, z: PauliString, shots: int) -> float:
    """Mean of +-1 outcomes from preparing a sigma_z eigenstate, applying the channel, measuring sigma_z."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    lam = float(oracle._fidelities()[z.index])
    oracle.ledger.charge(shots, 0.0)
    if oracle.exact:
        return lam
    return _pm_mean(oracle, lam, shots)


CHANNEL_KINDS = ("s_sparse", "close_to_s_sparse", "far_from_s_sparse")


def generate_channel(kind: str, n: int, s: int, eps: float = 0.0, rng=None, residual_terms: int = 4) -> PauliChannel:
    """Seeded channel with certified distance to the s-sparse set.

    close_to_s_sparse: distance <= eps. far_from_s_sparse: distance >= eps.
    """
    rng = np.random.default_rng(rng)
    size = 1 << (2 * n)
    if kind not in CHANNEL_KINDS:
        raise GenerationError(f"unknown channel kind {kind!r}")
    if not 1 <= s <= size:
        raise GenerationError(f"s={s} outside [1, {size}]")
    if kind in ("s_sparse", "close_to_s_sparse"):
        m = min(s + (residual_terms if kind == "close_to_s_sparse" else 0), size)
        picks = rng.choice(size, size=m, replace=False)
        base = rng.dirichlet(np.ones(s))
        r = eps * rng.uniform(0, 1) if kind == "close_to_s_sparse" and m > s else 0.0
        vec = np.zeros(size)
        vec[picks[:s]] = (1 - r) * base
        if m > s:
            vec[picks[s:]] = r * rng.dirichlet(np.ones(m - s))
        ch = PauliChannel.from_vector(n, vec)
        if distance_to_sparse_channel(ch, s) > eps + 1e-12:
            raise GenerationError("internal: close channel exceeds eps")
        return ch
    # far: spread over m strings with every rate <= (1 - eps)/s
    if eps >= 1:
        raise GenerationError("distance from s-sparse is always below 1")
    m_min = math.ceil(s / (1 - eps) - 1e-12)
    if m_min > size:
        raise GenerationError(f"distance {eps} from {s}-sparse needs {m_min} strings, only {size} exist")
    m = int(rng.integers(m_min, min(size, 2 * m_min + residual_terms) + 1))
    picks = rng.choice(size, size=m, replace=False)
    vec = np.zeros(size)
    vec[picks] = rng.dirichlet(np.full(m, 20.0))
    ch = PauliChannel.from_vector(n, vec)
    if distance_to_sparse_channel(ch, s) < eps:
        vec[picks] = 1.0 / m
        ch = PauliChannel.from_vector(n, vec)
    return ch
