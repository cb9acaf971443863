import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import dense_label
from hamprobe.pauli import (
    PauliString,
    SymplecticSubgroup,
    all_strings,
    bucket_index,
    f2_rank,
    label_rank,
    mub_family,
    mub_shift_index,
    order_desc,
    pauli_matrix,
    pauli_product,
    random_subgroup,
    symplectic_inner,
    weights,
)


def strings(n_max=3):
    return st.integers(1, n_max).flatmap(
        lambda n: st.tuples(st.integers(0, (1 << (2 * n)) - 1), st.integers(0, (1 << (2 * n)) - 1)).map(
            lambda ij: (PauliString.from_index(n, ij[0]), PauliString.from_index(n, ij[1]))
        )
    )


def test_label_round_trip_and_bits():
    x = PauliString.from_label("XYZI")
    assert x.label == "XYZI"
    assert len(x.bits) == 8
    assert x.weight == 3
    assert x.support == (0, 1, 2)
    assert PauliString.from_hex(x.to_hex()) == x


def test_bad_labels_rejected():
    with pytest.raises(ValueError):
        PauliString.from_label("XQ")
    with pytest.raises(ValueError):
        PauliString(2, 4, 0)


def test_commutation_examples():
    X, Z = PauliString.from_label("X"), PauliString.from_label("Z")
    assert symplectic_inner(X, Z) == 1
    assert symplectic_inner(PauliString.from_label("XX"), PauliString.from_label("ZZ")) == 0
    for x in all_strings(2):
        assert symplectic_inner(x, PauliString.identity(2)) == 0


def test_dimension_mismatch_raises():
    with pytest.raises(ValueError):
        symplectic_inner(PauliString.from_label("X"), PauliString.from_label("XX"))


def test_product_examples():
    p = pauli_product(PauliString.from_label("X"), PauliString.from_label("Z"))
    assert p.phase_exp == 3 and p.string.label == "Y"
    x = PauliString.from_label("XYZ")
    p = pauli_product(x, x)
    assert p.phase_exp == 0 and p.string.is_identity()


def test_single_qubit_matrices():
    assert np.array_equal(pauli_matrix(PauliString.from_label("I")), np.eye(2))
    assert np.array_equal(pauli_matrix(PauliString.from_label("Z")), np.diag([1, -1]))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_exhaustive_algebra_against_dense(n):
    mats = {x: pauli_matrix(x) for x in all_strings(n)}
    for x, m in mats.items():
        assert np.allclose(m, dense_label(x.label), atol=1e-12)
    for x, y in itertools.product(mats, repeat=2):
        mx, my = mats[x], mats[y]
        comm = np.allclose(mx @ my, my @ mx)
        assert symplectic_inner(x, y) == (0 if comm else 1)
        prod = pauli_product(x, y)
        assert np.allclose(prod.matrix(), mx @ my, atol=1e-12)


def test_orthonormal_two_qubit_basis():
    ms = [pauli_matrix(x) for x in all_strings(2)]
    gram = np.array([[np.trace(a.conj().T @ b) / 4 for b in ms] for a in ms])
    assert np.allclose(gram, np.eye(16))


@given(strings())
def test_inner_product_is_symmetric_and_bilinear(pair):
    x, y = pair
    assert symplectic_inner(x, y) == symplectic_inner(y, x)
    assert symplectic_inner(x, x) == 0
    z = x ^ y
    assert symplectic_inner(z, y) == symplectic_inner(x, y) ^ symplectic_inner(y, y)


@given(strings())
def test_product_phase_consistent_with_commutation(pair):
    x, y = pair
    a, b = pauli_product(x, y), pauli_product(y, x)
    assert a.string == b.string
    assert (a.phase_exp - b.phase_exp) % 4 == 2 * symplectic_inner(x, y)


def test_weights_and_label_order():
    w = weights(2)
    assert [w[PauliString.from_label(lab).index] for lab in ("II", "XI", "YZ")] == [0, 1, 2]
    ranks = label_rank(1)
    order = sorted(range(4), key=lambda i: ranks[i])
    assert [PauliString.from_index(1, i).label for i in order] == ["I", "X", "Y", "Z"]
    vals = np.array([0.5, 0.5, 0.5, 0.1])
    assert list(order_desc(vals, 1)) == [0, 2, 1, 3]  # I, X (index 2), Z (index 1), Y


def test_subgroup_basics(rng):
    V = random_subgroup(3, 0, rng)
    assert list(V.elements()) == [0]
    V = random_subgroup(3, 4, rng)
    assert f2_rank([g.index for g in V.generators]) == 4
    assert V.size == 16 and V.centralizer_size == 4 ** 3 // 16
    with pytest.raises(ValueError):
        SymplecticSubgroup(1, (PauliString.from_label("Z"), PauliString.from_label("Z")))
    with pytest.raises(ValueError):
        random_subgroup(2, 5, rng)


def test_bucket_index_examples(rng):
    V = SymplecticSubgroup(1, (PauliString.from_label("Z"),))
    assert bucket_index(PauliString.from_label("Z"), V) == 0
    assert bucket_index(PauliString.from_label("X"), V) == 1
    W = random_subgroup(3, 3, rng)
    assert bucket_index(PauliString.identity(3), W) == 0


@pytest.mark.parametrize("t", range(7))
def test_buckets_partition_strings(t, rng):
    V = random_subgroup(3, t, rng)
    idx = np.arange(64, dtype=np.uint64)
    b = V.bucket_indices(idx)
    assert [bucket_index(PauliString.from_index(3, int(i)), V) for i in idx] == list(b)
    counts = np.bincount(b, minlength=V.size)
    assert np.all(counts == 64 // V.size)
    cent = {g.index for g in V.centralizer_basis()}
    assert all(b[i] == 0 for i in cent)
    for bucket in range(V.size):
        assert bucket_index(V.coset_representative(bucket), V) == bucket


def test_mub_single_qubit_family():
    fam = mub_family(1)
    assert len(fam) == 3
    subspaces = [{PauliString.from_index(1, int(e)).label for e in fam.elements(i)} for i in range(3)]
    assert sorted(map(sorted, subspaces)) == [["I", "X"], ["I", "Y"], ["I", "Z"]]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_mub_structure(n):
    fam = mub_family(n)
    N = fam.N
    sets = []
    for i in range(N + 1):
        elems = [int(e) for e in fam.elements(i)]
        assert len(set(elems)) == N
        for x, y in itertools.product(elems, repeat=2):
            assert symplectic_inner(PauliString.from_index(n, x), PauliString.from_index(n, y)) == 0
        sets.append(set(elems))
    for a, b in itertools.combinations(sets, 2):
        assert a & b == {0}
    bases = [fam.basis(i) for i in range(N + 1)]
    for B in bases:
        assert np.allclose(B.conj().T @ B, np.eye(N))
    for i, j in itertools.combinations(range(N + 1), 2):
        assert np.allclose(np.abs(bases[i].conj().T @ bases[j]) ** 2, 1.0 / N)


@pytest.mark.parametrize("n", [1, 2])
def test_mub_projectors_and_shift(n):
    fam = mub_family(n)
    N = fam.N
    for i in range(N + 1):
        B = fam.basis(i)
        for j in range(N):
            assert np.allclose(fam.projector(i, j), np.outer(B[:, j], B[:, j].conj()), atol=1e-12)
            assert mub_shift_index(fam, i, j, PauliString.identity(n)) == j
            for x in all_strings(n):
                lj = mub_shift_index(fam, i, j, x)
                assert abs(B[:, lj].conj() @ pauli_matrix(x) @ B[:, j]) == pytest.approx(1.0, abs=1e-12)


def test_mub_shift_bit_flip():
    fam = mub_family(1)
    z_basis = next(i for i in range(3) if {int(e) for e in fam.elements(i)} == {0, PauliString.from_label("Z").index})
    X = PauliString.from_label("X")
    assert {mub_shift_index(fam, z_basis, j, X) for j in range(2)} == {0, 1}
    assert all(mub_shift_index(fam, z_basis, j, X) != j for j in range(2))
