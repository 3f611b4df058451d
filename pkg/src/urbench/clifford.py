"""Clifford groups on one and two qubits as signed permutations of Paulis.

An element stores ``perm`` and ``sign`` arrays of length 4**q with
``U sigma_a U^dagger = sign[a] * sigma_perm[a]``.  Label 0 (identity) is always
fixed with sign +1, so the transfer matrix is a signed permutation matrix.
"""

from __future__ import annotations

from collections import deque
from functools import lru_cache

import numpy as np

from . import pauli


class CliffordElement:
    """Signed permutation of the Pauli labels induced by a Clifford unitary."""

    __slots__ = ("q", "perm", "sign", "index")

    def __init__(self, q: int, perm, sign, index: int | None = None):
        self.q = q
        self.perm = np.asarray(perm, dtype=np.int64)
        self.sign = np.asarray(sign, dtype=np.int64)
        self.index = index
        self.perm.setflags(write=False)
        self.sign.setflags(write=False)

    @property
    def key(self) -> tuple:
        return tuple(self.perm.tolist()) + tuple((self.sign < 0).tolist())

    def __eq__(self, other):
        return isinstance(other, CliffordElement) and self.q == other.q and self.key == other.key

    def __hash__(self):
        return hash((self.q, self.key))

    def __matmul__(self, other: "CliffordElement") -> "CliffordElement":
        """Composition ``self o other``: apply ``other`` first."""
        return compose(self, other)

    def __repr__(self):
        return f"CliffordElement(q={self.q}, index={self.index})"


def identity(q: int) -> CliffordElement:
    n = 4**q
    return CliffordElement(q, np.arange(n), np.ones(n, dtype=np.int64))


def compose(c2: CliffordElement, c1: CliffordElement) -> CliffordElement:
    """The element acting as c1 followed by c2."""
    if c1.q != c2.q:
        raise ValueError("qubit counts differ")
    return CliffordElement(c1.q, c2.perm[c1.perm], c1.sign * c2.sign[c1.perm])


def inverse(c: CliffordElement) -> CliffordElement:
    perm = np.empty_like(c.perm)
    perm[c.perm] = np.arange(len(c.perm))
    sign = np.empty_like(c.sign)
    sign[c.perm] = c.sign
    return CliffordElement(c.q, perm, sign)


def from_unitary(u: np.ndarray, tol: float = 1e-9) -> CliffordElement:
    """Read off the signed permutation of a dense Clifford unitary."""
    q = pauli.qubits_from_dim(u.shape[0])
    basis = pauli.pauli_basis(q)
    n = 4**q
    perm = np.zeros(n, dtype=np.int64)
    sign = np.zeros(n, dtype=np.int64)
    for a in range(n):
        img = u @ basis[a] @ u.conj().T
        coeffs = np.einsum("bij,ij->b", basis.conj(), img)
        b = int(np.argmax(np.abs(coeffs)))
        val = coeffs[b]
        if abs(abs(val) - 1) > tol or abs(val.imag) > tol:
            raise ValueError("unitary does not map Paulis to signed Paulis")
        perm[a] = b
        sign[a] = 1 if val.real > 0 else -1
    return CliffordElement(q, perm, sign)


def group_size(q: int) -> int:
    """Order of the q-qubit Clifford group modulo phases."""
    if q < 1:
        raise ValueError("q must be at least 1")
    size = 1
    for j in range(1, q + 1):
        size *= 2 * (4**j - 1) * 4**j
    return size


_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.diag([1, 1j])


def _embed(gate: np.ndarray, q: int, k: int) -> np.ndarray:
    mats = [np.eye(2)] * q
    mats[k] = gate
    out = np.ones((1, 1))
    for m in mats:
        out = np.kron(out, m)
    return out


def _cnot(q: int, control: int, target: int) -> np.ndarray:
    d = 2**q
    u = np.zeros((d, d))
    for i in range(d):
        bits = [(i >> (q - 1 - k)) & 1 for k in range(q)]
        if bits[control]:
            bits[target] ^= 1
        j = sum(b << (q - 1 - k) for k, b in enumerate(bits))
        u[j, i] = 1
    return u


@lru_cache(maxsize=None)
def generators(q: int) -> tuple[CliffordElement, ...]:
    """H and S on every qubit plus CNOT on every ordered qubit pair."""
    gens = []
    for k in range(q):
        gens.append(from_unitary(_embed(_H, q, k)))
        gens.append(from_unitary(_embed(_S, q, k)))
    for c in range(q):
        for t in range(q):
            if c != t:
                gens.append(from_unitary(_cnot(q, c, t)))
    return tuple(gens)


def hadamard(q: int = 1, k: int = 0) -> CliffordElement:
    return from_unitary(_embed(_H, q, k))


def phase_gate(q: int = 1, k: int = 0) -> CliffordElement:
    return from_unitary(_embed(_S, q, k))


@lru_cache(maxsize=None)
def _enumerate_cached(q: int) -> tuple[CliffordElement, ...]:
    gens = generators(q)
    start = identity(q)
    seen = {start.key: start}
    queue = deque([start])
    while queue:
        c = queue.popleft()
        for g in gens:
            nxt = compose(g, c)
            if nxt.key not in seen:
                seen[nxt.key] = nxt
                queue.append(nxt)
    elements = []
    for i, key in enumerate(sorted(seen)):
        c = seen[key]
        elements.append(CliffordElement(q, c.perm, c.sign, index=i))
    if len(elements) != group_size(q):
        raise RuntimeError("generator closure produced the wrong group order")
    return tuple(elements)


def enumerate_group(q: int) -> list[CliffordElement]:
    """All elements of the q-qubit Clifford group in canonical order.

    Ordering sorts the signed-permutation fingerprints, so the identity comes
    first and ``element.index`` is its position.
    """
    if q not in (1, 2):
        raise ValueError("enumeration is supported for q = 1 and q = 2 only")
    return list(_enumerate_cached(q))


@lru_cache(maxsize=None)
def group_arrays(q: int) -> tuple[np.ndarray, np.ndarray]:
    """Stacked ``perm`` and ``sign`` arrays of the whole group."""
    els = enumerate_group(q)
    perms = np.array([c.perm for c in els])
    signs = np.array([c.sign for c in els])
    perms.setflags(write=False)
    signs.setflags(write=False)
    return perms, signs


def sample_uniform(q: int, rng: np.random.Generator) -> CliffordElement:
    """Draw one element uniformly at random."""
    if q not in (1, 2):
        raise ValueError("uniform sampling is supported for q = 1 and q = 2 only")
    els = _enumerate_cached(q)
    return els[int(rng.integers(len(els)))]


def apply_to_pauli(c: CliffordElement, p: pauli.SignedPauli) -> pauli.SignedPauli:
    """Conjugation U p U^dagger of a signed Pauli."""
    if p.q != c.q:
        raise ValueError("qubit counts differ")
    return pauli.SignedPauli(c.q, int(c.perm[p.label]), int(c.sign[p.label]) * p.sign)


def ptm(c: CliffordElement) -> np.ndarray:
    """Pauli transfer matrix, a signed permutation matrix."""
    n = len(c.perm)
    m = np.zeros((n, n))
    m[c.perm, np.arange(n)] = c.sign
    return m


def apply_tensor(c: CliffordElement, t: np.ndarray) -> np.ndarray:
    """Apply G^{(x)k} to a k-fold Liouville tensor of shape (4**q,)*k."""
    out = np.array(t, dtype=float, copy=True)
    for axis in range(out.ndim):
        shape = [1] * out.ndim
        shape[axis] = -1
        out = out * c.sign.reshape(shape)
    result = np.empty_like(out)
    result[np.ix_(*([c.perm] * out.ndim))] = out
    return result
