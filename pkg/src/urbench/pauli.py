"""Normalized Pauli basis, Hilbert-Schmidt geometry and Pauli products.

A q-qubit Pauli is labelled by an integer in ``[0, 4**q)``.  Qubit 0 is the
leftmost tensor factor and occupies the most significant base-4 digit.  Each
digit stores an (x, z) bit pair as ``code = 2*z + (x ^ z)`` which gives the
familiar order I, X, Y, Z per qubit::

    I -> 0 (x=0, z=0)    X -> 1 (x=1, z=0)
    Y -> 2 (x=1, z=1)    Z -> 3 (x=0, z=1)

Label 0 is always the normalized identity sigma_0 = I / sqrt(d).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_LETTERS = "IXYZ"

# (x, z) bits of each single-qubit code and the code of each (x, z) pair
_CODE_X = (0, 1, 1, 0)
_CODE_Z = (0, 0, 1, 1)
_XZ_CODE = {(0, 0): 0, (1, 0): 1, (1, 1): 2, (0, 1): 3}

# P_a P_b = i**_PHASE[a][b] P_{a xor b} for single-qubit codes
_PHASE = (
    (0, 0, 0, 0),
    (0, 0, 1, 3),
    (0, 3, 0, 1),
    (0, 1, 3, 0),
)


@dataclass(frozen=True)
class SignedPauli:
    """A normalized Pauli operator with a sign, ``sign * sigma_label``."""

    q: int
    label: int
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        check_label(self.q, self.label)


@dataclass(frozen=True)
class PauliProduct:
    """Result of a normalized product ``sqrt(d) * sigma_a sigma_b``.

    ``value`` is ``i**phase * sign_a * sign_b * sigma_label``.  When the two
    factors anticommute the phase is odd and ``anticommuting`` is set; the
    ``pauli`` property refuses to turn that case into a SignedPauli.
    """

    q: int
    label: int
    phase: int

    @property
    def anticommuting(self) -> bool:
        return self.phase % 2 == 1

    @property
    def pauli(self) -> SignedPauli:
        if self.anticommuting:
            raise ValueError("product of anticommuting Paulis carries a phase of +-i")
        return SignedPauli(self.q, self.label, 1 if self.phase == 0 else -1)


def dim(q: int) -> int:
    return 2**q


def n_labels(q: int) -> int:
    return 4**q


def qubits_from_dim(d: int) -> int:
    """Return q for d = 2**q, raising for anything else."""
    q = int(d).bit_length() - 1
    if d < 2 or 2**q != d:
        raise ValueError(f"dimension {d} is not a power of two >= 2")
    return q


def qubits_from_ptm_size(n: int) -> int:
    """Return q for a Liouville dimension n = 4**q."""
    q = (int(n).bit_length() - 1) // 2
    if n < 4 or 4**q != n:
        raise ValueError(f"Liouville dimension {n} is not a power of four >= 4")
    return q


def check_label(q: int, label: int) -> None:
    if q < 1:
        raise ValueError("need at least one qubit")
    if not 0 <= label < 4**q:
        raise ValueError(f"label {label} out of range for q={q}")


def codes(q: int, label: int) -> tuple[int, ...]:
    """Per-qubit codes of a label, qubit 0 first."""
    check_label(q, label)
    return tuple((label >> (2 * (q - 1 - k))) & 3 for k in range(q))


def label_from_codes(digits) -> int:
    label = 0
    for c in digits:
        label = 4 * label + int(c)
    return label


def label_from_string(s: str) -> int:
    """``"XZ"`` -> label of X tensor Z."""
    return label_from_codes(_LETTERS.index(ch) for ch in s.upper())


def label_to_string(q: int, label: int) -> str:
    return "".join(_LETTERS[c] for c in codes(q, label))


def xz_bits(q: int, label: int) -> tuple[int, int]:
    """Symplectic (x, z) integers of a label; bit q-1-k belongs to qubit k."""
    x = z = 0
    for c in codes(q, label):
        x = (x << 1) | _CODE_X[c]
        z = (z << 1) | _CODE_Z[c]
    return x, z


def label_from_xz(q: int, x: int, z: int) -> int:
    digits = []
    for k in range(q):
        shift = q - 1 - k
        digits.append(_XZ_CODE[((x >> shift) & 1, (z >> shift) & 1)])
    return label_from_codes(digits)


def unnormalized_pauli(q: int, label: int) -> np.ndarray:
    """Tensor product of the plain I, X, Y, Z factors."""
    out = np.ones((1, 1), dtype=complex)
    for c in codes(q, label):
        out = np.kron(out, _SINGLE[_LETTERS[c]])
    return out


def pauli_matrix(q: int, label: int) -> np.ndarray:
    """Dense matrix of the normalized Pauli sigma_label = P / sqrt(d)."""
    return unnormalized_pauli(q, label) / np.sqrt(2**q)


@lru_cache(maxsize=None)
def _basis_cached(q: int) -> np.ndarray:
    b = np.array([pauli_matrix(q, a) for a in range(4**q)])
    b.setflags(write=False)
    return b


def pauli_basis(q: int) -> np.ndarray:
    """All normalized Paulis stacked into shape (4**q, d, d)."""
    return _basis_cached(q)


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product Tr[A^dagger B]."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def schatten_norm(a: np.ndarray, p) -> float:
    """Schatten p-norm for p in {1, 2, inf}.

    Hermitian input goes through eigvalsh, anything else through an SVD.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("schatten_norm needs a square matrix")
    if np.allclose(a, a.conj().T, atol=1e-12):
        s = np.abs(np.linalg.eigvalsh(a))
    else:
        s = np.linalg.svd(a, compute_uv=False)
    if p == 1:
        return float(s.sum())
    if p == 2:
        return float(np.sqrt((s**2).sum()))
    if p in (np.inf, "inf"):
        return float(s.max())
    raise ValueError("p must be 1, 2 or inf")


def product_phase(q: int, a: int, b: int) -> tuple[int, int]:
    """P_a P_b = i**phase P_c for unnormalized Paulis; returns (c, phase)."""
    ca, cb = codes(q, a), codes(q, b)
    phase = sum(_PHASE[x][y] for x, y in zip(ca, cb)) % 4
    xa, za = xz_bits(q, a)
    xb, zb = xz_bits(q, b)
    return label_from_xz(q, xa ^ xb, za ^ zb), phase


def normalized_product(a: SignedPauli, b: SignedPauli) -> PauliProduct:
    """The norm-preserving product sqrt(d) * sigma_a sigma_b.

    Commuting inputs give a Hermitian result, ``result.pauli``.  The
    anticommuting case is flagged rather than coerced.
    """
    if a.q != b.q:
        raise ValueError("Paulis act on different numbers of qubits")
    c, phase = product_phase(a.q, a.label, b.label)
    if a.sign * b.sign < 0:
        phase = (phase + 2) % 4
    return PauliProduct(a.q, c, phase)


def commutes(q: int, a: int, b: int) -> bool:
    xa, za = xz_bits(q, a)
    xb, zb = xz_bits(q, b)
    return (bin(xa & zb).count("1") + bin(za & xb).count("1")) % 2 == 0


def commutant_set(q: int, tau: int) -> set[int]:
    """Nonidentity Paulis other than tau that commute with tau."""
    check_label(q, tau)
    if tau == 0:
        raise ValueError("commutant set is defined for nonidentity tau only")
    return {s for s in range(1, 4**q) if s != tau and commutes(q, s, tau)}


@lru_cache(maxsize=None)
def product_tables(q: int) -> tuple[np.ndarray, np.ndarray]:
    """Label and phase tables of all pairwise products, shape (4**q, 4**q)."""
    n = 4**q
    lab = np.zeros((n, n), dtype=np.int64)
    ph = np.zeros((n, n), dtype=np.int64)
    for a, b in product(range(n), repeat=2):
        lab[a, b], ph[a, b] = product_phase(q, a, b)
    lab.setflags(write=False)
    ph.setflags(write=False)
    return lab, ph


def to_liouville(op: np.ndarray, q: int, copies: int = 1) -> np.ndarray:
    """Coefficients Tr[(sigma_a1 x ... x sigma_ak)^dagger A].

    Returns an array of shape (4**q,) * copies.  For Hermitian input the
    coefficients are real and the real part is returned.
    """
    d = 2**q
    op = np.asarray(op)
    if op.shape != (d**copies, d**copies):
        raise ValueError(f"operator shape {op.shape} does not match q={q}, copies={copies}")
    basis = pauli_basis(q).conj()
    t = op.reshape((d,) * (2 * copies))
    # contract one (row, column) pair per copy; the new Pauli index is appended last
    for left in range(copies, 0, -1):
        t = np.tensordot(t, basis, axes=([0, left], [1, 2]))
    hermitian = np.allclose(op, op.conj().T, atol=1e-12)
    return t.real.copy() if hermitian else t


def from_liouville(coeffs: np.ndarray, q: int) -> np.ndarray:
    """Dense operator sum_a c_a sigma_a1 x ... x sigma_ak."""
    coeffs = np.asarray(coeffs)
    copies = coeffs.ndim
    d = 2**q
    basis = pauli_basis(q)
    t = coeffs.astype(complex)
    for _ in range(copies):
        t = np.tensordot(t, basis, axes=([0], [0]))
    # axes now alternate (row_k, col_k); regroup rows then columns
    order = [2 * k for k in range(copies)] + [2 * k + 1 for k in range(copies)]
    return t.transpose(order).reshape(d**copies, d**copies)
