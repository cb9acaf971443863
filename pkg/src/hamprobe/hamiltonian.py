"""Hamiltonians as sparse real Pauli-coefficient maps, plus instance generators."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from . import kernels
from .config import check_dense
from .pauli import PauliString, weights


class ValidationError(ValueError):
    pass


class GenerationError(ValueError):
    pass


class Hamiltonian:
    """Real coefficients lambda_x on Pauli strings; zero entries are dropped."""

    __slots__ = ("n", "_coeffs")

    def __init__(self, n: int, coefficients: Mapping[PauliString, float] | None = None):
        self.n = n
        coeffs: dict[PauliString, float] = {}
        for x, v in (coefficients or {}).items():
            if isinstance(x, str):
                x = PauliString.from_label(x)
            if x.n != n:
                raise ValidationError(f"{x.label} has {x.n} qubits, expected {n}")
            v = float(v)
            if not math.isfinite(v):
                raise ValidationError(f"non-finite coefficient for {x.label}")
            if v != 0.0:
                coeffs[x] = v
        self._coeffs = coeffs

    @classmethod
    def from_labels(cls, terms: Mapping[str, float]) -> "Hamiltonian":
        if not terms:
            raise ValidationError("cannot infer n from an empty label map")
        n = len(next(iter(terms)))
        return cls(n, {PauliString.from_label(k): v for k, v in terms.items()})

    @classmethod
    def from_vector(cls, n: int, vec: np.ndarray, tol: float = 0.0) -> "Hamiltonian":
        vec = np.asarray(vec, dtype=np.float64)
        nz = np.nonzero(np.abs(vec) > tol)[0]
        return cls(n, {PauliString.from_index(n, int(i)): vec[i] for i in nz})

    @property
    def coefficients(self) -> dict[PauliString, float]:
        return dict(self._coeffs)

    def items(self):
        return sorted(self._coeffs.items(), key=lambda kv: kv[0].label)

    def __getitem__(self, x: PauliString | str) -> float:
        if isinstance(x, str):
            x = PauliString.from_label(x)
        return self._coeffs.get(x, 0.0)

    def __len__(self) -> int:
        return len(self._coeffs)

    def __eq__(self, other) -> bool:
        return isinstance(other, Hamiltonian) and self.n == other.n and self._coeffs == other._coeffs

    def __repr__(self) -> str:
        body = ", ".join(f"{x.label}: {v:.6g}" for x, v in self.items())
        return f"Hamiltonian(n={self.n}, {{{body}}})"

    @property
    def support(self) -> list[PauliString]:
        return [x for x, _ in self.items()]

    @property
    def traceless(self) -> bool:
        return PauliString.identity(self.n) not in self._coeffs

    def scaled(self, factor: float) -> "Hamiltonian":
        return Hamiltonian(self.n, {x: v * factor for x, v in self._coeffs.items()})

    def __add__(self, other: "Hamiltonian") -> "Hamiltonian":
        _check_n(self, other)
        out = dict(self._coeffs)
        for x, v in other._coeffs.items():
            out[x] = out.get(x, 0.0) + v
        return Hamiltonian(self.n, out)

    def __sub__(self, other: "Hamiltonian") -> "Hamiltonian":
        return self + other.scaled(-1.0)

    def restrict(self, keep) -> "Hamiltonian":
        """Terms whose string satisfies ``keep``."""
        return Hamiltonian(self.n, {x: v for x, v in self._coeffs.items() if keep(x)})

    def norm2(self) -> float:
        """Normalized Frobenius norm sqrt(Tr(H^2)/2^n)."""
        return math.sqrt(sum(v * v for v in self._coeffs.values()))

    def to_vector(self) -> np.ndarray:
        vec = np.zeros(1 << (2 * self.n))
        for x, v in self._coeffs.items():
            vec[x.index] = v
        return vec

    def to_dense(self) -> np.ndarray:
        return synthesize(self)

    # ---- text and JSON formats ----

    def to_text(self) -> str:
        return "".join(f"{x.label} {v!r}\n" for x, v in self.items())

    @classmethod
    def from_text(cls, text: str, n: int | None = None) -> "Hamiltonian":
        terms: dict[PauliString, float] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValidationError(f"line {lineno}: expected 'LABEL coefficient'")
            x = PauliString.from_label(parts[0])
            if n is None:
                n = x.n
            elif x.n != n:
                raise ValidationError(f"line {lineno}: label length {x.n}, expected {n}")
            if x in terms:
                raise ValidationError(f"line {lineno}: duplicate label {parts[0]}")
            v = float(parts[1])
            if not math.isfinite(v):
                raise ValidationError(f"line {lineno}: non-finite coefficient")
            terms[x] = v
        if n is None:
            raise ValidationError("empty Hamiltonian file needs an explicit n")
        return cls(n, terms)

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "terms": {x.label: v for x, v in self.items()}}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Hamiltonian":
        data = json.loads(text)
        terms = data.get("terms", {})
        n = int(data["n"])
        out: dict[PauliString, float] = {}
        for label, v in terms.items():
            v = float(v)
            if not math.isfinite(v):
                raise ValidationError(f"non-finite coefficient for {label}")
            out[PauliString.from_label(label)] = v
        return cls(n, out)

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.write_text(self.to_text())
        path.with_suffix(path.suffix + ".json").write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path, n: int | None = None) -> "Hamiltonian":
        path = Path(path)
        text = path.read_text()
        if path.suffix == ".json":
            return cls.from_json(text)
        return cls.from_text(text, n)


def _check_n(h1: Hamiltonian, h2: Hamiltonian) -> None:
    if h1.n != h2.n:
        raise ValidationError(f"dimension mismatch: {h1.n} vs {h2.n} qubits")


def synthesize(h: Hamiltonian) -> np.ndarray:
    """Dense matrix sum_x lambda_x sigma_x."""
    check_dense(h.n)
    return kernels.pauli_synthesize(h.to_vector().astype(np.complex128), h.n)


def pauli_decompose(mat: np.ndarray, tol: float = 1e-9) -> Hamiltonian:
    mat = np.asarray(mat, dtype=np.complex128)
    dim = mat.shape[0]
    if mat.shape != (dim, dim) or dim & (dim - 1):
        raise ValidationError("expected a square matrix of size 2^n")
    n = dim.bit_length() - 1
    check_dense(n)
    if np.max(np.abs(mat - mat.conj().T), initial=0.0) > tol:
        raise ValidationError("matrix is not Hermitian")
    coeffs = kernels.pauli_coefficients(mat).real
    coeffs[np.abs(coeffs) < 1e-15] = 0.0
    return Hamiltonian.from_vector(n, coeffs)


def frobenius_distance(h1: Hamiltonian, h2: Hamiltonian) -> float:
    _check_n(h1, h2)
    return (h1 - h2).norm2()


def distance_to_local(h: Hamiltonian, k: int) -> float:
    """||H_{>k}||_2."""
    return math.sqrt(sum(v * v for x, v in h._coeffs.items() if x.weight > k))


def sorted_magnitudes(h: Hamiltonian) -> list[tuple[PauliString, float]]:
    """(string, |lambda|) descending, ties by label."""
    return sorted(((x, abs(v)) for x, v in h._coeffs.items()), key=lambda kv: (-kv[1], kv[0].label))


def distance_to_sparse(h: Hamiltonian, s: int) -> float:
    if s < 0:
        raise ValueError("s must be non-negative")
    mags = [m for _, m in sorted_magnitudes(h)]
    return math.sqrt(sum(m * m for m in mags[s:]))


def operator_norm(h: Hamiltonian) -> float:
    if not len(h):
        return 0.0
    vals = np.linalg.eigvalsh(synthesize(h))
    return float(np.max(np.abs(vals)))


@dataclass(frozen=True)
class StructureDistanceReport:
    k: int
    s: int
    distance_to_k_local: float
    distance_to_s_sparse: float
    magnitudes: tuple[tuple[str, float], ...]


def structure_report(h: Hamiltonian, k: int, s: int) -> StructureDistanceReport:
    return StructureDistanceReport(
        k=k,
        s=s,
        distance_to_k_local=distance_to_local(h, k),
        distance_to_s_sparse=distance_to_sparse(h, s),
        magnitudes=tuple((x.label, m) for x, m in sorted_magnitudes(h)),
    )


# ---- instance generation ----------------------------------------------

KINDS = (
    "k_local",
    "s_sparse",
    "k_local_s_sparse",
    "close_to_k_local",
    "far_from_k_local",
    "close_to_s_sparse",
    "far_from_s_sparse",
)


def _pool(n: int, min_w: int = 1, max_w: int | None = None) -> np.ndarray:
    w = weights(n)
    max_w = n if max_w is None else max_w
    return np.nonzero((w >= min_w) & (w <= max_w))[0]


def _pick(pool: np.ndarray, m: int, rng: np.random.Generator, what: str) -> list[int]:
    if m > len(pool):
        raise GenerationError(f"need {m} {what} strings but only {len(pool)} exist")
    return [int(v) for v in rng.choice(pool, size=m, replace=False)]


def _signed(m: int, lo: float, hi: float, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(lo, hi, size=m) * rng.choice([-1.0, 1.0], size=m)


def _from_pairs(n: int, idx: Iterable[int], vals: Iterable[float]) -> Hamiltonian:
    return Hamiltonian(n, {PauliString.from_index(n, i): v for i, v in zip(idx, vals)})


def _cap_norm(h: Hamiltonian) -> Hamiltonian:
    norm = operator_norm(h)
    return h.scaled(1.0 / norm) if norm > 1.0 else h


def _anticommuting_family(n: int, rng: np.random.Generator) -> list[PauliString]:
    """2n+1 pairwise anticommuting strings, randomly relabelled per qubit."""
    labels = []
    for q in range(n):
        for ch in "XY":
            labels.append("Z" * q + ch + "I" * (n - q - 1))
    labels.append("Z" * n)
    perm = rng.permutation(n)
    maps = [dict(zip("XYZ", rng.permutation(list("XYZ")))) for _ in range(n)]
    out = []
    for lab in labels:
        chars = [lab[perm[q]] for q in range(n)]
        out.append(PauliString.from_label("".join(maps[q].get(c, c) for q, c in enumerate(chars))))
    return out


def generate_instance(kind: str, n: int, params: Mapping | None = None, rng=None, **kw) -> Hamiltonian:
    """Seeded traceless instance with ||H||_inf <= 1 and a certified structure.

    params: k, s, eps (target distance for close/far kinds), terms (structured
    part size), residual_terms, magnitude=(lo, hi).
    """
    p = dict(params or {})
    p.update(kw)
    rng = np.random.default_rng(rng)
    lo, hi = p.get("magnitude", (0.2, 1.0))
    k = int(p.get("k", 1))
    s = int(p.get("s", 1))
    eps = float(p.get("eps", 0.0))
    if kind not in KINDS:
        raise GenerationError(f"unknown instance kind {kind!r}")
    if kind in ("k_local", "close_to_k_local", "far_from_k_local", "k_local_s_sparse") and not 0 <= k <= n:
        raise GenerationError(f"locality k={k} outside [0, {n}]")

    if kind in ("k_local", "s_sparse", "k_local_s_sparse"):
        max_w = k if kind != "s_sparse" else n
        pool = _pool(n, 1, max_w)
        if kind == "k_local":
            m = int(p.get("terms", min(len(pool), 2 * n)))
        else:
            m = s
        idx = _pick(pool, m, rng, f"weight<={max_w}")
        h = _cap_norm(_from_pairs(n, idx, _signed(m, lo, hi, rng)))
        if kind != "s_sparse" and distance_to_local(h, k) != 0.0:
            raise GenerationError("internal: generated instance is not k-local")
        if kind != "k_local" and len(h) > s:
            raise GenerationError("internal: generated instance is not s-sparse")
        return h

    if kind == "close_to_k_local":
        pool = _pool(n, 1, k)
        m = int(p.get("terms", min(len(pool), 2 * n)))
        base = _from_pairs(n, _pick(pool, m, rng, "local"), _signed(m, lo, hi, rng))
        resid = _residual(n, _pool(n, k + 1, n), int(p.get("residual_terms", 2)), eps * rng.uniform(0, 1), rng)
        h = _cap_norm(base + resid)
        if distance_to_local(h, k) > eps + 1e-12:
            raise GenerationError("internal: close instance exceeds eps")
        return h

    if kind == "far_from_k_local":
        if k >= n:
            raise GenerationError(f"no string has weight above k={k} on {n} qubits")
        if eps > 1.0:
            raise GenerationError(f"distance {eps} exceeds the bound 1 implied by ||H||_inf <= 1")
        pool = _pool(n, 1, k)
        m = int(p.get("terms", min(len(pool), n)))
        base = _from_pairs(n, _pick(pool, m, rng, "local"), _signed(m, lo, hi, rng)) if k > 0 else Hamiltonian(n)
        rho = rng.uniform(eps, 1.0)
        far_pool = _pool(n, k + 1, n)
        r_terms = _pick(far_pool, min(int(p.get("residual_terms", 2)), len(far_pool)), rng, "non-local")
        resid = _residual_on(n, r_terms, rho, rng)
        return _calibrate(base, resid, r_terms, rho, lambda h: distance_to_local(h, k), eps, n, rng)

    if kind == "close_to_s_sparse":
        pool = _pool(n)
        planted = _pick(pool, s + int(p.get("residual_terms", 2)), rng, "non-identity")
        base = _from_pairs(n, planted[:s], _signed(s, lo, hi, rng))
        resid = _residual_on(n, planted[s:], eps * rng.uniform(0, 1), rng)
        h = _cap_norm(base + resid)
        if distance_to_sparse(h, s) > eps + 1e-12:
            raise GenerationError("internal: close instance exceeds eps")
        return h

    # far_from_s_sparse: pairwise anticommuting terms have ||H||_inf = ||H||_2
    fam_size = 2 * n + 1
    bound = math.sqrt(max(fam_size - s, 0) / fam_size)
    if eps > bound:
        raise GenerationError(
            f"distance {eps} from {s}-sparse exceeds the achievable {bound:.4f} on {n} qubits "
            "(at most 2n+1 pairwise anticommuting terms)"
        )
    m_min = next(m for m in range(s + 1, fam_size + 1) if (m - s) / m >= eps * eps - 1e-15)
    m = int(rng.integers(m_min, fam_size + 1))
    fam = _anticommuting_family(n, rng)
    chosen = [fam[i] for i in rng.choice(fam_size, size=m, replace=False)]
    mags = rng.uniform(0.85, 1.0, size=m)
    for attempt in range(2):
        vals = mags * rng.choice([-1.0, 1.0], size=m)
        h = _cap_norm(Hamiltonian(n, dict(zip(chosen, vals))))
        if distance_to_sparse(h, s) >= eps:
            return h
        mags = np.ones(m)  # equal magnitudes reach the bound
    raise GenerationError("internal: far-from-sparse calibration failed")


def _residual_on(n: int, idx: list[int], norm: float, rng) -> Hamiltonian:
    if not idx or norm == 0.0:
        return Hamiltonian(n)
    vals = _signed(len(idx), 0.5, 1.0, rng)
    vals *= norm / np.linalg.norm(vals)
    return _from_pairs(n, idx, vals)


def _residual(n: int, pool: np.ndarray, m: int, norm: float, rng) -> Hamiltonian:
    if len(pool) == 0:
        return Hamiltonian(n)
    return _residual_on(n, _pick(pool, min(m, len(pool)), rng, "residual"), norm, rng)


def _calibrate(base, resid, r_terms, rho, dist, eps, n, rng) -> Hamiltonian:
    """Shrink the structured part, then thin the residual, until the distance reaches eps."""
    scale = 1.0
    terms = list(r_terms)
    while True:
        h = _cap_norm(base.scaled(scale) + resid)
        if dist(h) >= eps:
            return h
        if scale > 1 / 64:
            scale /= 2
        elif len(terms) > 1:
            terms = terms[:-1]
            resid = _residual_on(n, terms, rho, rng)
            scale = 1.0
        elif scale > 0:
            scale = 0.0
        else:
            raise GenerationError(f"cannot reach distance {eps}")
