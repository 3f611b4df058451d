import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from urbench import pauli

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2)


def test_identity_label_is_normalized_identity():
    assert np.allclose(pauli.pauli_matrix(1, 0), I2 / np.sqrt(2))


def test_x_label():
    x = pauli.pauli_matrix(1, pauli.label_from_string("X"))
    assert np.allclose(x, X / np.sqrt(2))
    assert np.isclose(np.linalg.norm(x), 1.0)


def test_label_order_is_ixyz():
    for s, m in zip("IXYZ", (I2, X, Y, Z)):
        assert np.allclose(pauli.unnormalized_pauli(1, pauli.label_from_string(s)), m)


def test_qubit_zero_is_leftmost_factor():
    lab = pauli.label_from_string("XZ")
    assert np.allclose(pauli.unnormalized_pauli(2, lab), np.kron(X, Z))
    assert pauli.label_to_string(2, lab) == "XZ"


@pytest.mark.parametrize("q", [1, 2])
def test_orthonormality(q):
    b = pauli.pauli_basis(q)
    gram = np.einsum("aij,bij->ab", b.conj(), b)
    assert np.allclose(gram, np.eye(4**q), atol=1e-12)


def test_hs_inner_examples():
    x = pauli.pauli_matrix(1, 1)
    z = pauli.pauli_matrix(1, 3)
    assert np.isclose(pauli.hs_inner(x, x), 1)
    assert np.isclose(pauli.hs_inner(x, z), 0)
    # B2 against the ideal two-copy difference state B2/sqrt(3)
    b2 = sum(np.kron(pauli.pauli_matrix(1, s), pauli.pauli_matrix(1, s)) for s in (1, 2, 3)) / np.sqrt(3)
    rho_ideal = (np.kron(X, X) + np.kron(Y, Y) + np.kron(Z, Z)) / 6
    assert np.isclose(pauli.hs_inner(b2, rho_ideal), 1 / np.sqrt(3))


def test_hs_inner_shape_mismatch():
    with pytest.raises(ValueError):
        pauli.hs_inner(np.eye(2), np.eye(4))


def test_schatten_examples():
    assert np.isclose(pauli.schatten_norm(np.eye(4), 1), 4)
    assert np.isclose(pauli.schatten_norm(pauli.pauli_matrix(2, 7), 2), 1)
    op = np.kron(X, X) / 6 - np.kron(Y, Y) / 12 - np.kron(Z, Z) / 12
    oracle = np.abs(np.linalg.eig(op)[0]).sum()
    assert np.isclose(pauli.schatten_norm(op, 1), oracle)
    with pytest.raises(ValueError):
        pauli.schatten_norm(op, 3)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_schatten_ordering(seed, n):
    g = np.random.default_rng(seed).standard_normal((n, n))
    a = g + g.T
    n1, n2, ninf = (pauli.schatten_norm(a, p) for p in (1, 2, np.inf))
    assert n1 >= n2 - 1e-12 and n2 >= ninf - 1e-12


def test_normalized_product_examples():
    x = pauli.SignedPauli(1, 1)
    y = pauli.SignedPauli(1, 2)
    assert pauli.normalized_product(x, x).pauli == pauli.SignedPauli(1, 0, 1)
    xy = pauli.normalized_product(x, y)
    assert xy.anticommuting
    with pytest.raises(ValueError):
        xy.pauli
    xi = pauli.SignedPauli(2, pauli.label_from_string("XI"))
    iz = pauli.SignedPauli(2, pauli.label_from_string("IZ"))
    assert pauli.normalized_product(xi, iz).pauli == pauli.SignedPauli(2, pauli.label_from_string("XZ"), 1)


@pytest.mark.parametrize("q", [1, 2])
def test_normalized_product_matches_dense(q):
    d = 2**q
    for a, b in itertools.product(range(4**q), repeat=2):
        for sa, sb in ((1, 1), (-1, 1)):
            res = pauli.normalized_product(pauli.SignedPauli(q, a, sa), pauli.SignedPauli(q, b, sb))
            dense = np.sqrt(d) * (sa * pauli.pauli_matrix(q, a)) @ (sb * pauli.pauli_matrix(q, b))
            assert np.allclose(dense, 1j**res.phase * pauli.pauli_matrix(q, res.label))
            assert res.anticommuting == (not pauli.commutes(q, a, b))


def test_commutant_sets():
    assert pauli.commutant_set(1, 1) == set()
    for tau in range(1, 16):
        assert len(pauli.commutant_set(2, tau)) == 6
    tau = pauli.label_from_string("XI")
    t = pauli.unnormalized_pauli(2, tau)
    brute = set()
    for s in range(1, 16):
        p = pauli.unnormalized_pauli(2, s)
        if s != tau and np.allclose(p @ t, t @ p):
            brute.add(s)
    assert pauli.commutant_set(2, tau) == brute
    with pytest.raises(ValueError):
        pauli.commutant_set(2, 0)


def test_invalid_labels():
    with pytest.raises(ValueError):
        pauli.SignedPauli(1, 4)
    with pytest.raises(ValueError):
        pauli.SignedPauli(1, 1, 2)
    with pytest.raises(ValueError):
        pauli.qubits_from_dim(3)


@pytest.mark.parametrize("copies", [1, 2])
def test_liouville_round_trip(rng, copies):
    n = 2**copies
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    c = pauli.to_liouville(m, 1, copies)
    assert c.shape == (4,) * copies
    assert np.allclose(pauli.from_liouville(c, 1), m)
