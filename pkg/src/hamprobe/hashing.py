"""Pauli hashing: coset projections, bucket energies and the hashing testers.

A subgroup with generators g_1..g_t splits the strings into 2^t buckets
C(b) = {x : [x, g_j] = b_j}. Entry c of ``subgroup.elements()`` is the
product of the generators selected by the bits of c, so
[element_c, x] = c . b(x) and bucket energies are a Walsh-Hadamard
transform of the fidelities on the subgroup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .channels import ChannelOracle, PauliChannel, channel_energy, fidelity_shot, symplectic_fourier
from .config import DEFAULT_CONFIG, ProtocolConfig
from .decision import Decision, two_sided
from .pauli import PauliString, SymplecticSubgroup, random_subgroup, span
from .simulator import EvolutionOracle, _pm_mean, sample_count

DEFAULT_CT_HAMILTONIAN = 1.0 / 3.0


def _swap(n: int, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    mask = np.uint64((1 << n) - 1)
    return ((z & mask) << np.uint64(n)) | (z >> np.uint64(n))


def symplectic_signs(n: int, xs: np.ndarray, zs: np.ndarray) -> np.ndarray:
    """Matrix of (-1)^{[x, z]} for packed xs (rows) and zs (columns)."""
    xs = np.asarray(xs, dtype=np.uint64)
    sz = _swap(n, zs)
    par = np.bitwise_count(xs[:, None] & sz[None, :]) & 1
    return 1.0 - 2.0 * par


# ---- projections of functions on F_2^{2n} -------------------------------


def _complement(V: SymplecticSubgroup) -> np.ndarray:
    return span([g.index for g in V.centralizer_basis()])


def project_coset(f: np.ndarray, a: PauliString, V: SymplecticSubgroup, z: PauliString) -> float:
    """f restricted to the Fourier coset a + V, evaluated at z: E_{x in C(V)} f(x+z) chi_a(x)."""
    f = np.asarray(f, dtype=np.float64)
    cv = _complement(V)
    signs = symplectic_signs(V.n, np.array([a.index], dtype=np.uint64), cv)[0]
    return float(np.mean(f[(cv ^ np.uint64(z.index)).astype(np.int64)] * signs))


def coset_weight(f: np.ndarray, a: PauliString, V: SymplecticSubgroup) -> float:
    """sum over alpha in a + V of the squared Fourier coefficient, via E_{x, z in C(V)} chi_a(z) f(x) f(x+z)."""
    f = np.asarray(f, dtype=np.float64)
    n = V.n
    cv = _complement(V)
    signs = symplectic_signs(n, np.array([a.index], dtype=np.uint64), cv)[0]
    xs = np.arange(len(f), dtype=np.uint64)
    total = 0.0
    for z, sgn in zip(cv, signs):
        total += sgn * float(np.dot(f, f[(xs ^ z).astype(np.int64)]))
    return total / (len(f) * len(cv))


def fourier_coefficients(f: np.ndarray, n: int) -> np.ndarray:
    """f(x) = sum_alpha F(alpha) (-1)^{[alpha, x]}."""
    return symplectic_fourier(f, n) / (1 << (2 * n))


# ---- bucket tables ------------------------------------------------------


@dataclass
class BucketTable:
    subgroup: SymplecticSubgroup
    energies: np.ndarray
    provenance: str = "exact"
    eps: float | None = None
    delta: float | None = None
    coset_sum_error: float | None = None
    fidelities: np.ndarray | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.subgroup.dim

    def representative(self, bucket: int) -> PauliString:
        return self.subgroup.coset_representative(bucket)

    def ranked(self, exclude_zero: bool = False) -> np.ndarray:
        """Bucket indices by energy, descending, ties by index."""
        idx = np.arange(len(self.energies))
        if exclude_zero:
            idx = idx[1:]
        return idx[np.lexsort((idx, -self.energies[idx]))]

    def top_sum(self, s: int, exclude_zero: bool = False) -> float:
        return float(self.energies[self.ranked(exclude_zero)[:s]].sum())

    def gamma_channel(self, s: int) -> float:
        return self.top_sum(s)

    def gamma_hamiltonian(self, s: int) -> float:
        return float(self.energies[0]) + self.top_sum(s, exclude_zero=True)


def energies_from_fidelities(fid: np.ndarray) -> np.ndarray:
    """E(b) = 2^{-t} sum_c lambda(element_c) (-1)^{c . b}."""
    work = np.array(fid, dtype=np.float64, order="C")
    kernels.fwht(work)
    return work / len(work)


def _support_arrays(channel: PauliChannel) -> tuple[np.ndarray, np.ndarray]:
    items = channel.items()
    xs = np.array([x.index for x, _ in items], dtype=np.uint64)
    ps = np.array([v for _, v in items], dtype=np.float64)
    return xs, ps


def _fidelities_on(n: int, xs: np.ndarray, ps: np.ndarray, zs: np.ndarray, chunk: int = 4096) -> np.ndarray:
    out = np.empty(len(zs))
    for lo in range(0, len(zs), chunk):
        out[lo : lo + chunk] = ps @ symplectic_signs(n, xs, zs[lo : lo + chunk])
    return out


def coset_sums(channel: PauliChannel, subgroup: SymplecticSubgroup) -> np.ndarray:
    """E(b) as the direct sum of the rates in each bucket."""
    xs, ps = _support_arrays(channel)
    buckets = subgroup.bucket_indices(xs) if len(xs) else np.zeros(0, dtype=np.int64)
    return np.bincount(buckets, weights=ps, minlength=subgroup.size).astype(np.float64)


def bucket_energies_exact(channel: PauliChannel, subgroup: SymplecticSubgroup) -> BucketTable:
    """Fidelity-sum energies, cross-checked against the direct coset sums."""
    if channel.n != subgroup.n:
        raise ValueError("channel and subgroup act on different qubit counts")
    xs, ps = _support_arrays(channel)
    fid = _fidelities_on(channel.n, xs, ps, subgroup.elements())
    energies = energies_from_fidelities(fid)
    err = float(np.max(np.abs(energies - coset_sums(channel, subgroup))))
    return BucketTable(subgroup, energies, "exact", coset_sum_error=err, fidelities=fid)


def fidelity_shots(eps: float, delta: float, dim: int, config: ProtocolConfig = DEFAULT_CONFIG) -> int:
    """Shots per fidelity so that all 2^dim of them are within eps w.p. 1-delta."""
    return sample_count(eps, delta / (1 << dim), const=2.0 * config.c_T)


def estimate_bucket_energies(
    oracle: ChannelOracle,
    subgroup: SymplecticSubgroup,
    eps: float,
    delta: float,
    config: ProtocolConfig = DEFAULT_CONFIG,
) -> BucketTable:
    """Every bucket energy within eps w.p. 1-delta, from Pauli-eigenstate fidelity rounds."""
    if not 0 < eps < 1 or not 0 < delta < 1:
        raise ValueError("eps and delta must lie in (0, 1)")
    shots = oracle.clamp(fidelity_shots(eps, delta, subgroup.dim, config), config.max_shots)
    zs = subgroup.elements()
    fid = np.array([fidelity_shot(oracle, PauliString.from_index(oracle.n, int(z)), shots) for z in zs])
    return BucketTable(subgroup, energies_from_fidelities(fid), "estimated", eps, delta, fidelities=fid)


def _check_channel_params(s: int, eps1: float, eps2: float) -> None:
    if s < 1:
        raise ValueError("s must be >= 1")
    if not 0 <= 2 * eps1 < eps2 < 1:
        raise ValueError(f"need 0 <= 2*eps1 < eps2 < 1, got eps1={eps1}, eps2={eps2}")


def hashing_dimension(s: int, eps: float, n: int) -> int:
    """ceil(log2(2s/eps^2)), capped at 2n."""
    return min(max(math.ceil(math.log2(2 * s / eps**2)), 0), 2 * n)


def channel_thresholds(eps1: float, eps2: float) -> dict:
    eps = (eps2 - 2 * eps1) / 3.0
    return {"eps": eps, "accept": 1.0 - 2 * eps1 - eps, "reject": 1.0 - eps2 + eps}


def test_channel_sparsity(
    oracle: ChannelOracle,
    s: int,
    eps1: float,
    eps2: float,
    rng=None,
    delta: float = 0.1,
    config: ProtocolConfig = DEFAULT_CONFIG,
) -> Decision:
    """Tolerant test of s-sparsity for a Pauli channel through random-subgroup hashing."""
    _check_channel_params(s, eps1, eps2)
    rng = oracle.rng if rng is None else np.random.default_rng(rng)
    th = channel_thresholds(eps1, eps2)
    t = hashing_dimension(s, th["eps"], oracle.n)
    with oracle.ledger.protocol("test_channel_sparsity", oracle.seed):
        subgroup = random_subgroup(oracle.n, t, rng)
        # gamma adds s buckets, each within eps/(2s)
        table = estimate_bucket_energies(oracle, subgroup, th["eps"] / (2 * s), delta, config)
        gamma = table.gamma_channel(s)
    return Decision(
        protocol="test_channel_sparsity",
        verdict=two_sided(gamma, th["accept"], th["reject"]),
        gamma=gamma,
        thresholds=th,
        ledger=oracle.ledger.snapshot(),
        seed=oracle.seed,
        generators=subgroup.hex_generators(),
        clamped=oracle.ledger.clamped,
        extra={"subgroup_dim": t, "bucket_eps": th["eps"] / (2 * s)},
    )


# ---- diagnostics --------------------------------------------------------


@dataclass
class HashingDiagnostics:
    err: float
    collision_errors: list[float]
    collision_sum: float
    gamma: float
    energy: float
    top_buckets: list[int]
    separate_zero: bool = False

    @property
    def gap(self) -> float:
        return self.gamma - self.energy


def hashing_diagnostics(
    channel: PauliChannel, subgroup: SymplecticSubgroup, s: int, separate_zero: bool = False
) -> HashingDiagnostics:
    """Exact hashing and collision errors of the top-s buckets.

    With ``separate_zero`` the zero bucket is always kept and compared with
    p(0) plus the top-s non-identity rates, as in the Hamiltonian tester.
    """
    energies = coset_sums(channel, subgroup)
    xs, ps = _support_arrays(channel)
    buckets = subgroup.bucket_indices(xs) if len(xs) else np.zeros(0, dtype=np.int64)
    largest = np.zeros(subgroup.size)
    np.maximum.at(largest, buckets, ps)
    table = BucketTable(subgroup, energies)
    if separate_zero:
        top = [0] + [int(b) for b in table.ranked(exclude_zero=True)[:s]]
        zero = PauliString.identity(channel.n)
        rest = [(x, v) for x, v in sorted(channel.rates.items(), key=lambda kv: (-kv[1], kv[0].label)) if x != zero]
        energy = channel[zero] + sum(v for _, v in rest[:s])
        # the zero bucket's largest member is not necessarily the identity
        largest[0] = max(largest[0], channel[zero])
    else:
        top = [int(b) for b in table.ranked()[:s]]
        energy = channel_energy(channel, s)
    gamma = float(energies[top].sum())
    coll = [float(energies[b] - largest[b]) for b in top]
    return HashingDiagnostics(
        err=gamma - energy,
        collision_errors=coll,
        collision_sum=float(sum(coll)),
        gamma=gamma,
        energy=float(energy),
        top_buckets=top,
        separate_zero=separate_zero,
    )


# ---- Hamiltonian evolution through twirling ------------------------------


def twirled_fidelities(oracle: EvolutionOracle, t_evol: float, zs: np.ndarray) -> np.ndarray:
    """lambda(z) = sum_x (-1)^{[x,z]} |U_x(t)|^2 for packed zs."""
    lam = symplectic_fourier(oracle._probabilities(t_evol), oracle.n)
    return lam[np.asarray(zs, dtype=np.int64)]


def estimate_bucket_energies_hamiltonian(
    oracle: EvolutionOracle, t_evol: float, subgroup: SymplecticSubgroup, budget: int
) -> BucketTable:
    """Bucket energies of the twirled evolution channel from ``budget`` randomized rounds per subgroup element.

    Each round conjugates U(t) by a uniformly random Pauli, which makes the
    sigma_z outcome a +-1 variable with mean lambda(z).
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    zs = subgroup.elements()
    lam = twirled_fidelities(oracle, t_evol, zs)
    oracle.ledger.charge(budget * len(zs), t_evol)
    if not oracle.exact:
        lam = np.array([_pm_mean(oracle, float(v), budget) for v in lam])
    return BucketTable(subgroup, energies_from_fidelities(lam), oracle.mode, fidelities=lam)


def _check_hamiltonian_params(s: int, eps1: float, eps2: float) -> None:
    if s < 1:
        raise ValueError("s must be >= 1")
    if not 0 <= eps1 < eps2 <= 1:
        raise ValueError(f"need 0 <= eps1 < eps2 <= 1, got eps1={eps1}, eps2={eps2}")


def sparsity_time(s: int, eps1: float, eps2: float, config: ProtocolConfig = DEFAULT_CONFIG) -> float:
    c_t = DEFAULT_CT_HAMILTONIAN if config.c_t is None else config.c_t
    return c_t * (eps2**2 - eps1**2) / s


def sparsity_thresholds(s: int, eps1: float, eps2: float, t: float) -> dict:
    """Accept / reject cuts on the top-energy statistic at evolution time t."""
    cubic = 0.5 * t**3 * s
    return {
        "t": t,
        "accept": 1.0 - eps1**2 * t**2 - cubic,
        "reject": 1.0 - eps2**2 * t**2 + cubic,
    }


def test_hamiltonian_sparsity_memoryless(
    oracle: EvolutionOracle,
    s: int,
    eps1: float,
    eps2: float,
    rng=None,
    delta: float = 0.1,
    config: ProtocolConfig = DEFAULT_CONFIG,
) -> Decision:
    """s-sparsity test using only Pauli eigenstates, random Pauli conjugations and Pauli measurements."""
    _check_hamiltonian_params(s, eps1, eps2)
    rng = oracle.rng if rng is None else np.random.default_rng(rng)
    gap = eps2**2 - eps1**2
    t = sparsity_time(s, eps1, eps2, config)
    th = sparsity_thresholds(s, eps1, eps2, t)
    eps = t**2 * gap / 6.0
    th["eps"] = eps
    d = hashing_dimension(s, eps, oracle.n)
    with oracle.ledger.protocol("test_hamiltonian_sparsity_memoryless", oracle.seed):
        subgroup = random_subgroup(oracle.n, d, rng)
        # gamma adds s+1 buckets, each within eps/(s+1)
        shots = oracle.clamp(fidelity_shots(eps / (s + 1), delta, d, config), config.max_shots)
        table = estimate_bucket_energies_hamiltonian(oracle, t, subgroup, shots)
        gamma = table.gamma_hamiltonian(s)
    extra = {"subgroup_dim": d, "rounds_per_element": shots}
    if oracle.exact:
        probs = oracle._probabilities(t)
        extra["zero_in_top"] = bool(np.sum(probs > probs[0]) < s)
    return Decision(
        protocol="test_hamiltonian_sparsity_memoryless",
        verdict=two_sided(gamma, th["accept"], th["reject"]),
        gamma=gamma,
        thresholds=th,
        ledger=oracle.ledger.snapshot(),
        seed=oracle.seed,
        generators=subgroup.hex_generators(),
        clamped=oracle.ledger.clamped,
        extra=extra,
    )
