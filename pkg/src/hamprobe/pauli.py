"""Pauli algebra over the symplectic space F_2^{2n}.

A string x = (a, b) labels sigma_x = i^{a.b} X^a Z^b, so (1,1) is Y and every
sigma_x is Hermitian. The words a and b are packed integers; bit n-1-q is qubit
q, which makes qubit 0 the leftmost tensor factor and the leftmost label
character. The packed index of x is (a << n) | b.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .config import check_dense

_CHAR_TO_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_TO_CHAR = {v: k for k, v in _CHAR_TO_BITS.items()}


def popcount(v: int) -> int:
    return bin(v).count("1")


def sym_index(n: int, x: int, y: int) -> int:
    """Symplectic form on packed indices."""
    mask = (1 << n) - 1
    return popcount(((x >> n) & (y & mask)) ^ ((x & mask) & (y >> n))) & 1


def swap_halves(n: int, x: int) -> int:
    """(a, b) -> (b, a); turns the symplectic form into a plain dot product."""
    mask = (1 << n) - 1
    return ((x & mask) << n) | (x >> n)


@dataclass(frozen=True, order=False)
class PauliString:
    """A point (a, b) of F_2^{2n}."""

    n: int
    a: int
    b: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")
        lim = 1 << self.n
        if not (0 <= self.a < lim and 0 <= self.b < lim):
            raise ValueError(f"words do not fit in {self.n} bits")

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0)

    @classmethod
    def from_index(cls, n: int, index: int) -> "PauliString":
        return cls(n, int(index) >> n, int(index) & ((1 << n) - 1))

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        n = len(label)
        a = b = 0
        for q, ch in enumerate(label.upper()):
            if ch not in _CHAR_TO_BITS:
                raise ValueError(f"bad Pauli character {ch!r} in {label!r}")
            xa, xb = _CHAR_TO_BITS[ch]
            a |= xa << (n - 1 - q)
            b |= xb << (n - 1 - q)
        return cls(n, a, b)

    @classmethod
    def from_hex(cls, text: str) -> "PauliString":
        n, a, b = text.split(":")
        return cls(int(n), int(a, 16), int(b, 16))

    @classmethod
    def single(cls, n: int, qubit: int, char: str) -> "PauliString":
        xa, xb = _CHAR_TO_BITS[char]
        bit = n - 1 - qubit
        return cls(n, xa << bit, xb << bit)

    @property
    def index(self) -> int:
        return (self.a << self.n) | self.b

    @property
    def bits(self) -> tuple[int, ...]:
        """The 2n-bit vector (a_0..a_{n-1}, b_0..b_{n-1})."""
        n = self.n
        return tuple((self.a >> (n - 1 - q)) & 1 for q in range(n)) + tuple(
            (self.b >> (n - 1 - q)) & 1 for q in range(n)
        )

    @property
    def weight(self) -> int:
        return popcount(self.a | self.b)

    @property
    def support(self) -> tuple[int, ...]:
        s = self.a | self.b
        return tuple(q for q in range(self.n) if (s >> (self.n - 1 - q)) & 1)

    @property
    def label(self) -> str:
        n = self.n
        return "".join(
            _BITS_TO_CHAR[((self.a >> (n - 1 - q)) & 1, (self.b >> (n - 1 - q)) & 1)]
            for q in range(n)
        )

    def to_hex(self) -> str:
        return f"{self.n}:{self.a:x}:{self.b:x}"

    def is_identity(self) -> bool:
        return self.a == 0 and self.b == 0

    def __xor__(self, other: "PauliString") -> "PauliString":
        _same_n(self, other)
        return PauliString(self.n, self.a ^ other.a, self.b ^ other.b)

    def __lt__(self, other: "PauliString") -> bool:
        return (self.n, self.label) < (other.n, other.label)

    def __str__(self) -> str:
        return self.label

    def __repr__(self) -> str:
        return f"PauliString({self.label!r})"


def _same_n(x: PauliString, y: PauliString) -> None:
    if x.n != y.n:
        raise ValueError(f"dimension mismatch: {x.n} vs {y.n} qubits")


@dataclass(frozen=True)
class PhasedPauli:
    """i^phase_exp * sigma_string."""

    phase_exp: int
    string: PauliString

    @property
    def phase(self) -> complex:
        return (1, 1j, -1, -1j)[self.phase_exp % 4]

    def matrix(self) -> np.ndarray:
        return self.phase * pauli_matrix(self.string)


def symplectic_inner(x: PauliString, y: PauliString) -> int:
    """[x, y]; 0 iff sigma_x and sigma_y commute."""
    _same_n(x, y)
    return sym_index(x.n, x.index, y.index)


def product_phase(n: int, x: int, y: int) -> int:
    """Exponent e with sigma_x sigma_y = i^e sigma_{x^y}, on packed indices."""
    mask = (1 << n) - 1
    a1, b1, a2, b2 = x >> n, x & mask, y >> n, y & mask
    a3, b3 = a1 ^ a2, b1 ^ b2
    return (popcount(a1 & b1) + popcount(a2 & b2) + 2 * popcount(b1 & a2) - popcount(a3 & b3)) % 4


def pauli_product(x: PauliString, y: PauliString) -> PhasedPauli:
    _same_n(x, y)
    return PhasedPauli(product_phase(x.n, x.index, y.index), x ^ y)


def pauli_matrix(x: PauliString) -> np.ndarray:
    """Dense 2^n x 2^n matrix of sigma_x."""
    check_dense(x.n)
    dim = 1 << x.n
    k = np.arange(dim, dtype=np.uint64)
    signs = 1 - 2 * (np.bitwise_count(k & np.uint64(x.b)) & 1).astype(np.float64)
    phase = (1, 1j, -1, -1j)[popcount(x.a & x.b) % 4]
    out = np.zeros((dim, dim), dtype=np.complex128)
    out[(k ^ np.uint64(x.a)).astype(np.intp), k.astype(np.intp)] = phase * signs
    return out


def all_strings(n: int):
    for idx in range(1 << (2 * n)):
        yield PauliString.from_index(n, idx)


@lru_cache(maxsize=32)
def weights(n: int) -> np.ndarray:
    """Weight of every packed index."""
    idx = np.arange(1 << (2 * n), dtype=np.uint64)
    mask = np.uint64((1 << n) - 1)
    w = np.bitwise_count((idx >> np.uint64(n)) | (idx & mask)).astype(np.int64)
    w.flags.writeable = False
    return w


@lru_cache(maxsize=32)
def label_rank(n: int) -> np.ndarray:
    """Position of every packed index in label order (I < X < Y < Z)."""
    idx = np.arange(1 << (2 * n), dtype=np.int64)
    rank = np.zeros_like(idx)
    digit = np.array([0, 3, 1, 2])  # (a,b) -> I, Z, X, Y as 2a+b
    for q in range(n):
        bit = n - 1 - q
        a = (idx >> (n + bit)) & 1
        b = (idx >> bit) & 1
        rank = rank * 4 + digit[2 * a + b]
    rank.flags.writeable = False
    return rank


def order_desc(values: np.ndarray, n: int, indices: np.ndarray | None = None) -> np.ndarray:
    """Positions sorting ``values`` descending, ties by label order."""
    if indices is None:
        indices = np.arange(len(values))
    return np.lexsort((label_rank(n)[indices], -np.asarray(values)))


# ---- F_2 linear algebra on packed ints ---------------------------------


def f2_rank(vectors) -> int:
    return len(_xor_basis(vectors))


def _xor_basis(vectors) -> dict[int, int]:
    basis: dict[int, int] = {}
    for v in vectors:
        v = int(v)
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
    return basis


def f2_solve(rows: list[int], rhs: list[int], width: int) -> tuple[int, list[int]] | None:
    """Solve parity(x & rows[j]) = rhs[j]; return (smallest solution, kernel basis)."""
    piv: list[tuple[int, int, int]] = []  # reduced echelon rows: (pivot bit, row, rhs)
    for r, c in zip(rows, rhs):
        r, c = int(r), int(c) & 1
        for p, pr, pc in piv:
            if (r >> p) & 1:
                r ^= pr
                c ^= pc
        if r == 0:
            if c:
                return None
            continue
        p = r.bit_length() - 1
        piv = [(q, qr ^ r, qc ^ c) if (qr >> p) & 1 else (q, qr, qc) for q, qr, qc in piv]
        piv.append((p, r, c))
    x0 = sum(1 << p for p, _, c in piv if c)
    pivot_bits = {p for p, _, _ in piv}
    kernel = []
    for f in range(width):
        if f in pivot_bits:
            continue
        v = 1 << f
        for p, r, _ in piv:
            if (r >> f) & 1:
                v |= 1 << p
        kernel.append(v)
    return _minimize(x0, kernel), kernel


def _minimize(x: int, kernel: list[int]) -> int:
    # leading bits are distinct, so clearing them greedily from the top is optimal
    for top, v in sorted(_xor_basis(kernel).items(), reverse=True):
        if (x >> top) & 1:
            x ^= v
    return x


def span(n_bits_gens: list[int]) -> np.ndarray:
    """All 2^t combinations; entry c is the XOR of gens selected by the bits of c."""
    out = np.zeros(1 << len(n_bits_gens), dtype=np.uint64)
    for j, g in enumerate(n_bits_gens):
        size = 1 << j
        out[size : 2 * size] = out[:size] ^ np.uint64(g)
    return out


# ---- subgroups and buckets ----------------------------------------------


@dataclass(frozen=True)
class SymplecticSubgroup:
    """Span of t independent strings; buckets are cosets of its centralizer."""

    n: int
    generators: tuple[PauliString, ...]
    _gen_idx: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        gens = tuple(self.generators)
        for g in gens:
            if g.n != self.n:
                raise ValueError("generator qubit count differs from subgroup n")
        idx = tuple(g.index for g in gens)
        if f2_rank(idx) != len(idx):
            raise ValueError("generators are linearly dependent")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "_gen_idx", idx)

    @property
    def dim(self) -> int:
        return len(self.generators)

    @property
    def generator_indices(self) -> np.ndarray:
        return np.array(self._gen_idx, dtype=np.uint64)

    @property
    def size(self) -> int:
        return 1 << self.dim

    @property
    def centralizer_size(self) -> int:
        return 1 << (2 * self.n - self.dim)

    @property
    def quotient_size(self) -> int:
        return 1 << self.dim

    def elements(self) -> np.ndarray:
        """Packed indices of the span; entry c combines generators by the bits of c."""
        return span(list(self._gen_idx))

    def bucket_indices(self, strings: np.ndarray) -> np.ndarray:
        return kernels.symplectic_syndromes(np.asarray(strings, dtype=np.uint64), self.generator_indices, self.n)

    def coset_representative(self, bucket: int) -> PauliString:
        """Smallest (a,b), read as a 2n-bit word, with [a, g_j] = b_j."""
        rows = [swap_halves(self.n, g) for g in self._gen_idx]
        rhs = [(bucket >> j) & 1 for j in range(self.dim)]
        sol = f2_solve(rows, rhs, 2 * self.n)
        if sol is None:  # cannot happen for independent generators
            raise RuntimeError("inconsistent bucket system")
        return PauliString.from_index(self.n, sol[0])

    def centralizer_basis(self) -> list[PauliString]:
        rows = [swap_halves(self.n, g) for g in self._gen_idx]
        _, kernel = f2_solve(rows, [0] * self.dim, 2 * self.n)
        return [PauliString.from_index(self.n, v) for v in kernel]

    def hex_generators(self) -> list[str]:
        return [g.to_hex() for g in self.generators]


def random_subgroup(n: int, t: int, rng: np.random.Generator) -> SymplecticSubgroup:
    """t uniform strings, redrawn until independent."""
    if t < 0 or t > 2 * n:
        raise ValueError(f"subgroup dimension t={t} must lie in [0, {2 * n}]")
    while True:
        draws = [int(v) for v in rng.integers(0, 1 << (2 * n), size=t)] if t else []
        if f2_rank(draws) == t:
            return SymplecticSubgroup(n, tuple(PauliString.from_index(n, d) for d in draws))


def bucket_index(x: PauliString, V: SymplecticSubgroup) -> int:
    """b with b_j = [x, g_j], packed with b_j at bit j."""
    if x.n != V.n:
        raise ValueError(f"dimension mismatch: {x.n} vs {V.n} qubits")
    out = 0
    for j, g in enumerate(V._gen_idx):
        out |= sym_index(x.n, x.index, g) << j
    return out


# ---- GF(2^n) and the MUB family ------------------------------------------


def _poly_mod(a: int, m: int) -> int:
    dm = m.bit_length()
    while a.bit_length() >= dm:
        a ^= m << (a.bit_length() - dm)
    return a


@lru_cache(maxsize=None)
def irreducible_poly(n: int) -> int:
    """Smallest degree-n irreducible polynomial over F_2, as a bit mask."""
    for p in range(1 << n, 1 << (n + 1)):
        if all(_poly_mod(p, d) for deg in range(1, n // 2 + 1) for d in range(1 << deg, 1 << (deg + 1))):
            return p
    raise RuntimeError("no irreducible polynomial found")


class GF2n:
    """The field F_{2^n} in the polynomial basis."""

    def __init__(self, n: int):
        self.n = n
        self.poly = irreducible_poly(n)

    def mul(self, x: int, y: int) -> int:
        acc = 0
        while y:
            if y & 1:
                acc ^= x
            y >>= 1
            x <<= 1
        return _poly_mod(acc, self.poly)

    def trace(self, x: int) -> int:
        acc, p = 0, x
        for _ in range(self.n):
            acc ^= p
            p = self.mul(p, p)
        return acc & 1

    def form_matrix(self, c: int) -> list[int]:
        """Rows of M_c[i][j] = Tr(c e_i e_j), symmetric over F_2."""
        n = self.n
        rows = []
        for i in range(n):
            ci = self.mul(c, 1 << i)
            rows.append(sum(self.trace(self.mul(ci, 1 << j)) << j for j in range(n)))
        return rows


def _matvec(rows: list[int], v: int) -> int:
    return sum((popcount(r & v) & 1) << i for i, r in enumerate(rows))


class MubFamily:
    """N+1 maximal isotropic subspaces with pairwise trivial intersection.

    Subspace 0 is Z-type; subspace 1 + c is {(v, M_c v)}. Inside each
    subspace the basis states are labelled by their syndrome pattern j against
    the generators: sigma_{g_q} |phi_{i,j}> = (-1)^{j_q} |phi_{i,j}>.
    """

    def __init__(self, n: int):
        check_dense(n)
        self.n = n
        self.N = 1 << n
        field = GF2n(n)
        # bit positions: generator q uses the word bit q
        gens = [[(1 << q) for q in range(n)]]  # Z-type: a=0, b=e_q
        for c in range(self.N):
            rows = field.form_matrix(c)
            gens.append([((1 << q) << n) | _matvec(rows, 1 << q) for q in range(n)])
        self.generators: list[list[int]] = gens
        self._bases: dict[int, np.ndarray] = {}

    def __len__(self) -> int:
        return self.N + 1

    def elements(self, i: int) -> np.ndarray:
        return span(self.generators[i])

    def syndromes(self, strings: np.ndarray) -> np.ndarray:
        """Array (N+1, len(strings)): pattern of each string against each subspace."""
        strings = np.asarray(strings, dtype=np.uint64)
        return np.stack(
            [kernels.symplectic_syndromes(strings, np.array(g, dtype=np.uint64), self.n) for g in self.generators]
        )

    def coset_representative(self, i: int, j: int) -> PauliString:
        """A string r with [r, g_q] = j_q."""
        n = self.n
        if i == 0:
            return PauliString(n, j, 0)
        return PauliString(n, 0, j)

    def sign(self, i: int, c: int) -> int:
        """s with s * sigma_x = prod_q sigma_{g_q}^{c_q}, x the combination c."""
        n = self.n
        acc, exp = 0, 0
        for q, g in enumerate(self.generators[i]):
            if (c >> q) & 1:
                exp += product_phase(n, acc, g)
                acc ^= g
        exp %= 4
        if exp not in (0, 2):  # commuting Hermitian factors
            raise RuntimeError("non-isotropic MUB subspace")
        return 1 if exp == 0 else -1

    def projector(self, i: int, j: int) -> np.ndarray:
        """(1/N) sum_{x in G_i} s_i(x) (-1)^{[r_j, x]} sigma_x, built from the signed sum."""
        elems = self.elements(i)
        r = self.coset_representative(i, j).index
        out = np.zeros((self.N, self.N), dtype=np.complex128)
        for c, x in enumerate(elems):
            x = int(x)
            sgn = self.sign(i, c) * (-1) ** sym_index(self.n, r, x)
            out += sgn * pauli_matrix(PauliString.from_index(self.n, x))
        return out / self.N

    def basis(self, i: int) -> np.ndarray:
        """Unitary whose column j is |phi_{i,j}>."""
        if i not in self._bases:
            n, N = self.n, self.N
            acc = np.zeros((N, N), dtype=np.complex128)
            for q, g in enumerate(self.generators[i]):
                acc += (1 << q) * pauli_matrix(PauliString.from_index(n, g))
            vals, vecs = np.linalg.eigh(acc)
            # eigenvalue sum_q 2^q (-1)^{j_q}
            plus = np.rint((vals + (N - 1)) / 2).astype(np.int64)
            cols = (N - 1) - plus
            if sorted(cols.tolist()) != list(range(N)):
                raise RuntimeError("MUB basis labelling failed")
            out = np.empty_like(vecs)
            for col, j in enumerate(cols):
                v = vecs[:, col]
                k = int(np.argmax(np.abs(v) > 1e-9))
                out[:, j] = v * (abs(v[k]) / v[k])
            out.flags.writeable = False
            self._bases[i] = out
        return self._bases[i]


@lru_cache(maxsize=16)
def mub_family(n: int) -> MubFamily:
    return MubFamily(n)


def mub_shift_index(family: MubFamily, i: int, j: int, x: PauliString) -> int:
    """l with sigma_x |phi_{i,j}><phi_{i,j}| sigma_x = |phi_{i,l}><phi_{i,l}|."""
    if x.n != family.n:
        raise ValueError(f"dimension mismatch: {x.n} vs {family.n} qubits")
    syn = 0
    for q, g in enumerate(family.generators[i]):
        syn |= sym_index(x.n, x.index, g) << q
    return j ^ syn
