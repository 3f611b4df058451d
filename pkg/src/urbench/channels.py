"""Quantum channels as Pauli transfer matrices (PTMs).

A PTM is the real (d^2 x d^2) matrix ``L[a, b] = Tr[sigma_a E(sigma_b)]`` in the
normalized Pauli basis.  For a trace-preserving channel it has the block form
``[[1, 0], [alpha, L_u]]`` with ``alpha`` the nonunitality vector and ``L_u``
the unital block.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy.optimize import bisect

from . import clifford, pauli

TP_TOL = 1e-9


def _check_tp(ptm: np.ndarray, tol: float = TP_TOL) -> None:
    ptm = np.asarray(ptm)
    if ptm.ndim != 2 or ptm.shape[0] != ptm.shape[1]:
        raise ValueError("PTM must be square")
    pauli.qubits_from_ptm_size(ptm.shape[0])
    row = np.zeros(ptm.shape[0])
    row[0] = 1.0
    if not np.allclose(ptm[0], row, atol=tol):
        raise ValueError("channel is not trace preserving (first PTM row is not e_0)")


def dimension(ptm: np.ndarray) -> int:
    return 2 ** pauli.qubits_from_ptm_size(np.asarray(ptm).shape[0])


def unital_block(ptm: np.ndarray) -> np.ndarray:
    _check_tp(ptm)
    return np.asarray(ptm)[1:, 1:]


def nonunitality(ptm: np.ndarray) -> np.ndarray:
    _check_tp(ptm)
    return np.asarray(ptm)[1:, 0]


def unitarity(ptm: np.ndarray) -> float:
    """u = Tr[L_u^T L_u] / (d^2 - 1)."""
    lu = unital_block(ptm)
    return float(np.sum(lu * lu) / lu.shape[0])


def rb_parameter(ptm: np.ndarray) -> float:
    """Depolarizing parameter f = Tr[L_u] / (d^2 - 1)."""
    lu = unital_block(ptm)
    return float(np.trace(lu) / lu.shape[0])


def avg_gate_fidelity(ptm: np.ndarray) -> float:
    """Average gate fidelity F = f + (1 - f)/d with f the depolarizing parameter."""
    d = dimension(ptm)
    f = rb_parameter(ptm)
    return f + (1 - f) / d


def depolarizing(p: float, d: int) -> np.ndarray:
    """PTM diag(1, p, ..., p)."""
    pauli.qubits_from_dim(d)
    if p < -1 / (d * d - 1) - 1e-15 or p > 1 + 1e-15:
        raise ValueError(f"p={p} outside the CPTP range [-1/(d^2-1), 1]")
    out = np.full(d * d, float(p))
    out[0] = 1.0
    return np.diag(out)


def identity_channel(d: int) -> np.ndarray:
    return np.eye(d * d)


def ptm_from_kraus(kraus) -> np.ndarray:
    """PTM of the channel A -> sum_k K A K^dagger."""
    kraus = np.asarray(kraus)
    d = kraus.shape[-1]
    q = pauli.qubits_from_dim(d)
    basis = pauli.pauli_basis(q)
    # images[b] = sum_k K sigma_b K^dagger
    images = np.einsum("kij,bjl,kml->bim", kraus, basis, kraus.conj())
    return np.einsum("aij,bji->ab", basis, images).real


def ptm_from_unitary(u: np.ndarray) -> np.ndarray:
    return ptm_from_kraus(np.asarray(u)[None])


def apply_ptm(ptm: np.ndarray, op: np.ndarray) -> np.ndarray:
    """Apply the channel to a dense operator."""
    q = pauli.qubits_from_ptm_size(np.asarray(ptm).shape[0])
    c = pauli.to_liouville(op, q, 1)
    return pauli.from_liouville(np.asarray(ptm) @ c, q)


def choi(ptm: np.ndarray) -> np.ndarray:
    """Unnormalized Choi matrix sum_ij E(|i><j|) x |i><j| (trace d for TP maps)."""
    ptm = np.asarray(ptm)
    q = pauli.qubits_from_ptm_size(ptm.shape[0])
    d = 2**q
    basis = pauli.pauli_basis(q)
    # coefficients of |i><j| are Tr[sigma_b^dagger |i><j|] = conj(sigma_b[i, j])
    coeff = basis.conj()
    images = np.einsum("ab,bij,amn->ijmn", ptm, coeff, basis)
    # images[i, j] is E(|i><j|) with row/col indices m, n
    return images.transpose(2, 0, 3, 1).reshape(d * d, d * d)


def is_cptp(ptm: np.ndarray, tol: float = TP_TOL) -> bool:
    """True iff the first PTM row is e_0 and the Choi matrix is PSD within tol."""
    try:
        _check_tp(ptm, tol)
    except ValueError:
        return False
    j = choi(ptm)
    j = (j + j.conj().T) / 2
    return bool(np.linalg.eigvalsh(j).min() >= -tol)


def random_isometry(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    qmat, r = np.linalg.qr(g)
    # fix the column phases so the distribution does not depend on QR conventions
    phases = np.diag(r) / np.abs(np.diag(r))
    return qmat * phases


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    return random_isometry(d, d, rng)


def random_cptp(d: int, kraus_rank: int, rng: np.random.Generator) -> np.ndarray:
    """Random channel from a Gaussian Stinespring isometry V: C^d -> C^(d*r).

    Slicing V into r blocks of d rows gives Kraus operators with
    sum K^dagger K = V^dagger V = I.
    """
    pauli.qubits_from_dim(d)
    if not 1 <= kraus_rank <= d * d:
        raise ValueError("kraus_rank must lie in [1, d^2]")
    v = random_isometry(d * kraus_rank, d, rng)
    return ptm_from_kraus(v.reshape(kraus_rank, d, d))


def mix_with_identity(ptm: np.ndarray, w: float) -> np.ndarray:
    """(1 - w) * identity + w * L."""
    if not 0 <= w <= 1:
        raise ValueError("w must lie in [0, 1]")
    ptm = np.asarray(ptm, dtype=float)
    return (1 - w) * np.eye(ptm.shape[0]) + w * ptm


def random_unital(d: int, n_terms: int, rng: np.random.Generator) -> np.ndarray:
    """Convex mixture of Clifford conjugations of one random unitary channel.

    Each term is C V C^dagger with C a uniform Clifford and V a Haar unitary
    drawn once per call.  Weights are Dirichlet(1, ..., 1).
    """
    q = pauli.qubits_from_dim(d)
    if n_terms < 1:
        raise ValueError("n_terms must be at least 1")
    v = ptm_from_unitary(random_unitary(d, rng))
    weights = rng.dirichlet(np.ones(n_terms))
    out = np.zeros_like(v)
    for w in weights:
        c = clifford.ptm(clifford.sample_uniform(q, rng))
        out += w * (c @ v @ c.T)
    # mixtures of unitary channels are unital; remove roundoff in column 0
    out[1:, 0] = 0.0
    return out


def with_unitarity(ptm: np.ndarray, target: float, tol: float = 1e-12) -> tuple[np.ndarray, float]:
    """Bisect the identity-mixing weight so the mixture has the target unitarity.

    Returns ``(mixed_ptm, weight)``.  Unitarity of the mixture is 1 at w = 0
    and decreases to u(L) at w = 1 for any non-unitary L reached this way.
    """
    u_end = unitarity(ptm)
    if not u_end <= target <= 1:
        raise ValueError(f"target unitarity {target} not between {u_end} and 1")
    if target == 1:
        w = 0.0
    elif target == u_end:
        w = 1.0
    else:
        w = bisect(lambda x: unitarity(mix_with_identity(ptm, x)) - target, 0.0, 1.0, xtol=tol)
    return mix_with_identity(ptm, w), w


def compose(*ptms: np.ndarray) -> np.ndarray:
    """Matrix product, leftmost channel applied last."""
    out = np.asarray(ptms[0], dtype=float)
    for p in ptms[1:]:
        out = out @ p
    return out


def save_channel(ptm: np.ndarray, path) -> None:
    ptm = np.asarray(ptm, dtype=float)
    q = pauli.qubits_from_ptm_size(ptm.shape[0])
    Path(path).write_text(json.dumps({"q": q, "ptm": ptm.ravel().tolist()}))


def load_channel(path) -> np.ndarray:
    data = json.loads(Path(path).read_text())
    n = 4 ** int(data["q"])
    return np.asarray(data["ptm"], dtype=float).reshape(n, n)
