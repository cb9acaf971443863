"""Named verification suites that check structural facts by brute force.

Each suite runs exhaustive or Monte-Carlo checks at fixed small n and reports
the first violated inequality.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .channels import (
    PauliChannel,
    channel_distance,
    channel_energy,
    distance_to_sparse_channel,
    pauli_fidelities,
    rates_from_fidelities,
    twirled_channel_from_evolution,
)
from .hamiltonian import (
    Hamiltonian,
    distance_to_sparse,
    generate_instance,
    operator_norm,
    synthesize,
)
from .hashing import bucket_energies_exact
from .pauli import PauliString, mub_family, pauli_matrix, random_subgroup, weights
from .simulator import UnitarySpectrum, evolution_unitary
from .testers import top_energy

SUITES = (
    "taylor",
    "locality_dichotomy",
    "sparsity_dichotomy",
    "mub_design",
    "hashing_props",
    "bucket_energy",
    "twirl_identity",
    "channel_dichotomy",
)


@dataclass
class LemmaReport:
    suite: str
    checks: int = 0
    violations: list[str] = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def check(self, ok: bool, message) -> None:
        self.checks += 1
        if not ok:
            self.violations.append(message() if callable(message) else message)

    @property
    def first_violation(self) -> str | None:
        return self.violations[0] if self.violations else None

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        line = f"{self.suite}: {status} ({self.checks} checks)"
        if not self.passed:
            line += f"; first violation: {self.first_violation}"
        return line


def random_normalized(n: int, rng, terms: int | None = None) -> Hamiltonian:
    """Random traceless H with ||H||_inf = 1."""
    size = 1 << (2 * n)
    m = int(rng.integers(1, min(size - 1, terms or 2 * n + 2) + 1))
    idx = rng.choice(np.arange(1, size), size=m, replace=False)
    h = Hamiltonian(n, {PauliString.from_index(n, int(i)): float(v) for i, v in zip(idx, rng.normal(size=m))})
    return h.scaled(1.0 / operator_norm(h))


def taylor(rng, trials: int = 100, max_n: int = 4, times=(0.5, 0.25, 0.1)) -> LemmaReport:
    """||U(t) - I + itH||_inf <= t^2."""
    rep = LemmaReport("taylor")
    for i in range(trials):
        n = 1 + i % max_n
        h = random_normalized(n, rng)
        H = synthesize(h)
        for t in times:
            R = evolution_unitary(h, t) - np.eye(1 << n) + 1j * t * H
            val = float(np.linalg.norm(R, 2))
            rep.check(val <= t * t, lambda: f"trial {i}, n={n}, t={t}: remainder {val:.6g} > t^2 = {t * t:.6g}")
    return rep


def off_local_norm(h: Hamiltonian, k: int, t: float) -> float:
    """||U(t)_{>k}||_2: root of the Pauli weight of U(t) above weight k."""
    probs = UnitarySpectrum.of(evolution_unitary(h, t)).probabilities()
    return math.sqrt(float(probs[weights(h.n) > k].sum()))


def locality_dichotomy(
    rng, trials: int = 100, n: int = 4, k: int = 1, eps1: float = 0.05, eps2: float = 0.6, c: float = 1.0
) -> LemmaReport:
    """Close instances have small weight above k at time (eps2-eps1)/(3c); far ones large."""
    rep = LemmaReport("locality_dichotomy")
    gap = eps2 - eps1
    t = gap / (3 * c)
    upper = gap * (2 * eps1 + eps2) / (9 * c)
    lower = gap * (eps1 + 2 * eps2) / (9 * c)
    for i in range(trials):
        hc = generate_instance("close_to_k_local", n, k=k, eps=eps1, rng=rng)
        v = off_local_norm(hc, k, t)
        rep.check(v <= upper, lambda: f"close instance {i}: {v:.6g} > {upper:.6g}")
        hf = generate_instance("far_from_k_local", n, k=k, eps=eps2, rng=rng)
        v = off_local_norm(hf, k, t)
        rep.check(v >= lower, lambda: f"far instance {i}: {v:.6g} < {lower:.6g}")
    rep.notes.update(t=t, upper=upper, lower=lower)
    return rep


def exact_top_energy(h: Hamiltonian, s: int, t: float) -> float:
    return top_energy(UnitarySpectrum.of(evolution_unitary(h, t)), s, t, h.n).value


def sparsity_dichotomy(
    rng, trials: int = 40, n: int = 3, s: int = 2, eps1: float = 0.1, eps2: float = 0.6, times=(0.1, 0.05, 0.025)
) -> LemmaReport:
    """TopEnergy >= 1 - d^2 t^2 - C t^3 s (close) and <= 1 - d^2 t^2 + C t^3 s (far).

    C is fitted at the largest t and must then hold at every smaller t.
    """
    rep = LemmaReport("sparsity_dichotomy")
    inst = [generate_instance("close_to_s_sparse", n, s=s, eps=eps1, rng=rng) for _ in range(trials)]
    inst += [generate_instance("far_from_s_sparse", n, s=s, eps=eps2, rng=rng) for _ in range(trials)]
    dists = [distance_to_sparse(h, s) for h in inst]
    t0 = times[0]
    resid = [(exact_top_energy(h, s, t0) - (1 - d * d * t0 * t0)) / (t0**3 * s) for h, d in zip(inst, dists)]
    C = max(abs(r) for r in resid)
    rep.notes["C"] = C
    for t in times[1:]:
        for i, (h, d) in enumerate(zip(inst, dists)):
            te = exact_top_energy(h, s, t)
            bound = C * t**3 * s + 1e-12
            if i < trials:
                rep.check(te >= 1 - eps1**2 * t * t - bound, lambda: f"close {i}, t={t}: TopEnergy {te:.10g} too small")
            else:
                rep.check(te <= 1 - eps2**2 * t * t + bound, lambda: f"far {i}, t={t}: TopEnergy {te:.10g} too large")
    return rep


def mub_design(rng=None, ns=(1, 2), tol: float = 1e-10) -> LemmaReport:
    """The MUB states form a 2-design: their second moment is (I + F)/(N(N+1))."""
    rep = LemmaReport("mub_design")
    for n in ns:
        fam = mub_family(n)
        N = fam.N
        acc = np.zeros((N * N, N * N), dtype=complex)
        for i in range(N + 1):
            B = fam.basis(i)
            for j in range(N):
                v = np.kron(B[:, j], B[:, j])
                acc += np.outer(v, v.conj())
        acc /= N * (N + 1)
        F = np.zeros((N * N, N * N))
        for a, b in itertools.product(range(N), repeat=2):
            F[a * N + b, b * N + a] = 1
        err = float(np.max(np.abs(acc - (np.eye(N * N) + F) / (N * (N + 1)))))
        rep.check(err <= tol, lambda: f"n={n}: entrywise error {err:.3g} > {tol}")
        rep.notes[f"n={n}"] = err
    return rep


def hashing_props(rng, n: int = 4, t: int = 3, draws: int = 10_000) -> LemmaReport:
    """Random buckets: each string lands in C(b) w.p. 2^-t (except 0), and pairs are independent."""
    rep = LemmaReport("hashing_props")
    size = 1 << (2 * n)
    alpha, beta = (int(v) for v in rng.choice(np.arange(1, size), size=2, replace=False))
    b = int(rng.integers(1 << t))
    hits_a = hits_ab = 0
    for _ in range(draws):
        V = random_subgroup(n, t, rng)
        ba, bb = V.bucket_indices(np.array([alpha, beta], dtype=np.uint64))
        hits_a += ba == b
        hits_ab += (ba == b) and (bb == b)
    for name, hits, p in (("single", hits_a, 2.0**-t), ("pair", hits_ab, 4.0**-t)):
        sigma = math.sqrt(p * (1 - p) / draws)
        freq = hits / draws
        rep.check(abs(freq - p) <= 3 * sigma, lambda: f"{name}: frequency {freq:.5f} vs {p:.5f} (3 sigma {3 * sigma:.5f})")
        rep.notes[name] = (freq, p)
    return rep


def bucket_energy(rng, max_n: int = 3, tol: float = 1e-9) -> LemmaReport:
    """Fidelity-sum and coset-sum bucket energies agree for every subgroup dimension."""
    rep = LemmaReport("bucket_energy")
    for n in range(1, max_n + 1):
        p = rng.dirichlet(np.ones(1 << (2 * n)))
        ch = PauliChannel.from_vector(n, p)
        for t in range(2 * n + 1):
            V = random_subgroup(n, t, rng)
            tb = bucket_energies_exact(ch, V)
            rep.check(tb.coset_sum_error <= tol, lambda: f"n={n}, t={t}: disagreement {tb.coset_sum_error:.3g}")
            total = float(tb.energies.sum())
            rep.check(abs(total - 1) <= tol, lambda: f"n={n}, t={t}: energies sum to {total}")
    return rep


def _dense_twirl(h: Hamiltonian, t: float, rho: np.ndarray) -> np.ndarray:
    U = evolution_unitary(h, t)
    out = np.zeros_like(rho)
    n = h.n
    for idx in range(1 << (2 * n)):
        P = pauli_matrix(PauliString.from_index(n, idx))
        out += P @ U @ (P @ rho @ P) @ U.conj().T @ P
    return out / (1 << (2 * n))


def twirl_identity(rng, trials: int = 10, max_n: int = 2, tol: float = 1e-8) -> LemmaReport:
    """The twirled evolution channel has rates |U_x(t)|^2 and matches the dense Pauli average."""
    rep = LemmaReport("twirl_identity")
    for i in range(trials):
        n = 1 + i % max_n
        h = random_normalized(n, rng)
        t = float(rng.uniform(0.05, 1.0))
        ch = twirled_channel_from_evolution(h, t)
        probs = UnitarySpectrum.of(evolution_unitary(h, t)).probabilities()
        err = float(np.max(np.abs(ch.to_vector() - probs)))
        rep.check(err <= 1e-9, lambda: f"trial {i}: rates differ from |U_x|^2 by {err:.3g}")
        N = 1 << n
        for a in range(N):
            for b in range(N):
                rho = np.zeros((N, N), dtype=complex)
                rho[a, b] = 1
                dense = _dense_twirl(h, t, rho)
                via = sum(v * pauli_matrix(x) @ rho @ pauli_matrix(x) for x, v in ch.items())
                e = float(np.max(np.abs(dense - via)))
                rep.check(e <= tol, lambda: f"trial {i}, |{a}><{b}|: twirl mismatch {e:.3g}")
    return rep


def channel_dichotomy(rng, trials: int = 200, max_n: int = 2) -> LemmaReport:
    """dist <= e1 to some s-sparse channel implies Energy >= 1 - 2 e1; distance d >= e2 implies Energy <= 1 - e2."""
    rep = LemmaReport("channel_dichotomy")
    for i in range(trials):
        n = 1 + i % max_n
        size = 1 << (2 * n)
        p = rng.dirichlet(np.full(size, 0.3))
        ch = PauliChannel.from_vector(n, p)
        s = int(rng.integers(1, size + 1))
        energy = channel_energy(ch, s)
        d = distance_to_sparse_channel(ch, s)
        rep.check(energy <= 1 - d + 1e-12, lambda: f"trial {i}: Energy {energy} > 1 - dist {1 - d}")
        # any s-sparse channel q gives an upper bound on the distance, so (a) must hold for it
        supp = rng.choice(size, size=s, replace=False)
        q = np.zeros(size)
        q[supp] = rng.dirichlet(np.ones(s))
        dq = channel_distance(ch, PauliChannel.from_vector(n, q))
        rep.check(dq >= d - 1e-12, lambda: f"trial {i}: random s-sparse channel at {dq} beats {d}")
        rep.check(energy >= 1 - 2 * dq - 1e-12, lambda: f"trial {i}: Energy {energy} < 1 - 2*{dq}")
        lam = pauli_fidelities(ch)
        back = float(np.max(np.abs(rates_from_fidelities(lam, n) - p)))
        rep.check(back <= 1e-12, lambda: f"trial {i}: fidelity inversion error {back}")
    return rep


_RUNNERS = {
    "taylor": taylor,
    "locality_dichotomy": locality_dichotomy,
    "sparsity_dichotomy": sparsity_dichotomy,
    "mub_design": mub_design,
    "hashing_props": hashing_props,
    "bucket_energy": bucket_energy,
    "twirl_identity": twirl_identity,
    "channel_dichotomy": channel_dichotomy,
}


def verify_lemmas(suite: str, seed: int = 0, **kw) -> LemmaReport:
    if suite not in _RUNNERS:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    return _RUNNERS[suite](np.random.default_rng(seed), **kw)
