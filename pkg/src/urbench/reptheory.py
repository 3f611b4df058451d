"""Clifford averaging projectors and the exact mean/variance of sequence purities.

Vectors in the k-fold Liouville space are numpy arrays of shape (d^2,)*k
holding coefficients over products of normalized Paulis.  Cliffords act on
them as signed permutations, so the averaging projector

    G_avg^(n) = |C|^-1 sum_G G^{(x)n}

is the orthogonal projector onto vectors that are constant, up to a
consistent sign, on every orbit of label tuples.  ``invariant_basis`` finds
those orbits by closure under the group generators; ``gavg_dense`` builds the
same projector for one qubit by literally averaging the 24 elements.
"""

from __future__ import annotations

from collections import deque
from functools import lru_cache

import numpy as np
from scipy import sparse

from . import channels, clifford, pauli


# ---------------------------------------------------------------------------
# basic vectors and tensor actions


def basis_B(d: int) -> tuple[np.ndarray, np.ndarray]:
    """B1 = sigma_0 sigma_0 and B2 = sum_{sigma != 0} sigma sigma / sqrt(d^2 - 1)."""
    pauli.qubits_from_dim(d)
    n = d * d
    b1 = np.zeros((n, n))
    b1[0, 0] = 1.0
    b2 = np.eye(n)
    b2[0, 0] = 0.0
    b2 /= np.sqrt(n - 1)
    return b1, b2


def apply_channel_tensor(ptm: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Apply L^{(x)k} to a k-fold Liouville tensor."""
    out = np.asarray(t, dtype=float)
    for axis in range(out.ndim):
        out = np.moveaxis(np.tensordot(ptm, out, axes=([1], [axis])), 0, axis)
    return out


def inner(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.vdot(x, y).real)


# ---------------------------------------------------------------------------
# averaging projectors


def gavg_dense(n: int, q: int = 1) -> np.ndarray:
    """Dense average of G^{(x)n} over the one-qubit Clifford group.

    Shape ((d^2)^n, (d^2)^n); only q = 1 is allowed (256 x 256 for n = 4).
    """
    if q != 1:
        raise ValueError("dense averaging projectors are only built for q = 1")
    if n not in (1, 2, 3, 4):
        raise ValueError("n must be between 1 and 4")
    return _gavg_dense_cached(n).copy()


@lru_cache(maxsize=None)
def _gavg_dense_cached(n: int) -> np.ndarray:
    els = clifford.enumerate_group(1)
    total = np.zeros((4**n, 4**n))
    for c in els:
        g = clifford.ptm(c)
        k = np.ones((1, 1))
        for _ in range(n):
            k = np.kron(k, g)
        total += k
    return total / len(els)


@lru_cache(maxsize=None)
def _orbit_data(n: int, q: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orbits of n-tuples of labels under the generators.

    Returns ``(members, signs, orbit_id)`` where ``orbit_id[k]`` numbers the
    sign-consistent orbits and is -1 on orbits carrying no invariant vector.
    """
    m = 4**q
    size = m**n
    idx = np.arange(size)
    digits = [(idx // m ** (n - 1 - k)) % m for k in range(n)]
    images = []
    for g in clifford.generators(q):
        img = np.zeros(size, dtype=np.int64)
        sgn = np.ones(size, dtype=np.int64)
        for k in range(n):
            img = img * m + g.perm[digits[k]]
            sgn = sgn * g.sign[digits[k]]
        images.append((img.tolist(), sgn.tolist()))

    phase = [0] * size
    orbit_id = np.full(size, -1, dtype=np.int64)
    n_orbits = 0
    for start in range(size):
        if phase[start]:
            continue
        phase[start] = 1
        members = [start]
        consistent = True
        queue = deque([start])
        while queue:
            t = queue.popleft()
            for img, sgn in images:
                u = img[t]
                s = sgn[t] * phase[t]
                if phase[u] == 0:
                    phase[u] = s
                    members.append(u)
                    queue.append(u)
                elif phase[u] != s:
                    consistent = False
        if consistent:
            orbit_id[members] = n_orbits
            n_orbits += 1
    return np.arange(size), np.array(phase, dtype=np.int64), orbit_id


@lru_cache(maxsize=None)
def invariant_basis(n: int, q: int) -> sparse.csc_matrix:
    """Orthonormal basis (as sparse columns) of the Clifford-invariant subspace.

    Column r is the normalized signed indicator of the r-th sign-consistent
    orbit of n-tuples of Pauli labels.
    """
    if q not in (1, 2):
        raise ValueError("q must be 1 or 2")
    if n not in (1, 2, 3, 4):
        raise ValueError("n must be between 1 and 4")
    idx, phase, orbit_id = _orbit_data(n, q)
    keep = orbit_id >= 0
    counts = np.bincount(orbit_id[keep])
    vals = phase[keep] / np.sqrt(counts[orbit_id[keep]])
    return sparse.csc_matrix((vals, (idx[keep], orbit_id[keep])), shape=(len(idx), len(counts)))


class AveragingProjector:
    """Matrix-free G_avg^(n) acting on tensors of shape (4**q,)*n."""

    def __init__(self, n: int, q: int):
        self.n = n
        self.q = q
        self.basis = invariant_basis(n, q)

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    def coordinates(self, t: np.ndarray) -> np.ndarray:
        return self.basis.T @ np.asarray(t, dtype=float).ravel()

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return (self.basis @ self.coordinates(t)).reshape(t.shape)

    def dense(self) -> np.ndarray:
        if self.basis.shape[0] > 4096:
            raise ValueError("dense projector requested on a space larger than 4096 dimensions")
        b = self.basis.toarray()
        return b @ b.T


def gavg(n: int, q: int):
    """Averaging projector: dense matrix for q = 1, matrix-free applier for q = 2."""
    if q == 1:
        return gavg_dense(n, 1)
    if q == 2:
        return AveragingProjector(n, 2)
    raise ValueError("q must be 1 or 2")


def gavg_apply_enumerated(t: np.ndarray, q: int) -> np.ndarray:
    """Average of G^{(x)n} t over every group element (slow reference route)."""
    t = np.asarray(t, dtype=float)
    total = np.zeros_like(t)
    for c in clifford.enumerate_group(q):
        total += clifford.apply_tensor(c, t)
    return total / clifford.group_size(q)


def projector_rank(p: np.ndarray, tol: float = 1e-8) -> int:
    """Number of eigenvalues of a symmetric projector above tol."""
    return int(np.sum(np.linalg.eigvalsh((p + p.T) / 2) > tol))


# ---------------------------------------------------------------------------
# M, N and the two-dimensional fit model


def m_matrix(ptm: np.ndarray) -> np.ndarray:
    """M = G_avg Lambda^{(x)2} G_avg in the basis {B1, B2} (closed form)."""
    d = channels.dimension(ptm)
    alpha = channels.nonunitality(ptm)
    u = channels.unitarity(ptm)
    return np.array([[1.0, 0.0], [alpha @ alpha / np.sqrt(d * d - 1), u]])


def m_matrix_averaged(ptm: np.ndarray) -> np.ndarray:
    """Entries <B_i| G_avg Lambda^{(x)2} G_avg |B_j> by explicit averaging."""
    q = pauli.qubits_from_ptm_size(ptm.shape[0])
    d = 2**q
    bs = basis_B(d)
    out = np.zeros((2, 2))
    for j, bj in enumerate(bs):
        img = apply_channel_tensor(ptm, _project(2, q, bj))
        img = _project(2, q, img)
        for i, bi in enumerate(bs):
            out[i, j] = inner(bi, img)
    return out


def _project(n: int, q: int, t: np.ndarray) -> np.ndarray:
    if q == 1:
        return (gavg_dense(n, 1) @ np.ravel(t)).reshape(np.shape(t))
    return AveragingProjector(n, q)(t)


def n_operator(ptm: np.ndarray) -> np.ndarray:
    """Dense N = G_avg^(4) Lambda^{(x)4} G_avg^(4) for one qubit (256 x 256)."""
    q = pauli.qubits_from_ptm_size(ptm.shape[0])
    if q != 1:
        raise ValueError("dense N is built for q = 1 only")
    t4 = gavg_dense(4, 1)
    l4 = _kron_power(ptm, 4)
    return t4 @ l4 @ t4


def m_operator(ptm: np.ndarray) -> np.ndarray:
    """Dense M = G_avg^(2) Lambda^{(x)2} G_avg^(2) on the two-copy space."""
    q = pauli.qubits_from_ptm_size(ptm.shape[0])
    if q == 1:
        t2 = gavg_dense(2, 1)
    else:
        t2 = AveragingProjector(2, q).dense()
    return t2 @ np.kron(ptm, ptm) @ t2


def _kron_power(a: np.ndarray, k: int) -> np.ndarray:
    out = np.ones((1, 1))
    for _ in range(k):
        out = np.kron(out, a)
    return out


# ---------------------------------------------------------------------------
# trivial subrepresentation operators A_i


def trivial_basis(d: int) -> dict[str, np.ndarray]:
    """The operators A_0, A_{1,2}, A_S and, for d >= 4, A_adj as 4-fold tensors.

    Keys are ``"0"``, ``"12"``, ``"S"`` and ``"adj"``.  Each has unit
    Hilbert-Schmidt norm.  For d >= 4, A_S also contains the A_adj direction
    since V_S is reducible there.
    """
    if d not in (2, 4):
        raise ValueError("explicit constructions are provided for d = 2 and d = 4")
    q = pauli.qubits_from_dim(d)
    n = d * d
    _, b2 = basis_B(d)
    a0 = np.multiply.outer(b2, b2)

    diag4 = np.zeros((n,) * 4)
    for s in range(1, n):
        diag4[s, s, s, s] = 1.0
    a12 = (diag4 - a0) / np.sqrt(n - 2)

    a_s = np.zeros((n,) * 4)
    c = np.sqrt(1.0 / (2 * (n - 1) * (n - 2)))
    for s in range(1, n):
        for t in range(1, n):
            if s != t:
                a_s[s, t, s, t] += c
                a_s[s, t, t, s] += c

    out = {"0": a0, "12": a12, "S": a_s}
    if d >= 4:
        out["adj"] = _a_adj(q)
    return out


def _adjoint_vector(q: int, tau: int) -> np.ndarray:
    """sum_{sigma in C_tau} (sigma.tau) sigma + sigma (sigma.tau) as a 2-fold tensor."""
    n = 4**q
    x = np.zeros((n, n))
    tp = pauli.SignedPauli(q, tau)
    for s in sorted(pauli.commutant_set(q, tau)):
        prod = pauli.normalized_product(pauli.SignedPauli(q, s), tp).pauli
        x[prod.label, s] += prod.sign
        x[s, prod.label] += prod.sign
    return x


def _a_adj(q: int) -> np.ndarray:
    d = 2**q
    n = d * d
    total = np.zeros((n,) * 4)
    for tau in range(1, n):
        x = _adjoint_vector(q, tau)
        total += np.multiply.outer(x, x)
    return total / (2 * (n - 4) * np.sqrt(n - 1))


def dense_operator(t: np.ndarray, q: int) -> np.ndarray:
    """Dense matrix of a Liouville tensor (copies = t.ndim)."""
    return pauli.from_liouville(t, q)


# ---------------------------------------------------------------------------
# a_i and b_i


def _apply_m_pair(m2: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Apply M (x) M to a 4-fold tensor, M acting on copies (1,2) and (3,4)."""
    n = t.shape[0]
    x = t.reshape(n * n, n * n)
    return (m2 @ x @ m2.T).reshape(t.shape)


def ab_coefficients(ptm: np.ndarray, method: str = "orbit") -> dict[str, tuple[float, float]]:
    """a_i = <A_i|N - M^{(x)2}|B2 B2> and b_i = <B2 B2|N - M^{(x)2}|A_i>.

    ``method`` picks how G_avg^(4) is applied: ``"orbit"`` (invariant-subspace
    projector), ``"dense"`` (24-element dense average, q = 1 only) or
    ``"enumerate"`` (explicit loop over every group element).
    """
    ptm = np.asarray(ptm, dtype=float)
    q = pauli.qubits_from_ptm_size(ptm.shape[0])
    d = 2**q
    if q > 2:
        raise ValueError("a_i and b_i are computed for q <= 2")
    if q >= 2 and np.linalg.norm(channels.nonunitality(ptm)) > 1e-9:
        raise ValueError("for d >= 4 the coefficients are only meaningful for unital channels")

    if method == "dense":
        t4 = gavg_dense(4, q)

        def project(t):
            return (t4 @ t.ravel()).reshape(t.shape)
    elif method == "orbit":
        project = AveragingProjector(4, q)
    elif method == "enumerate":
        def project(t):
            return gavg_apply_enumerated(t, q)
    else:
        raise ValueError(f"unknown method {method!r}")

    def n_apply(t):
        return project(apply_channel_tensor(ptm, project(t)))

    def n_apply_transpose(t):
        return project(apply_channel_tensor(ptm.T, project(t)))

    m2 = m_operator(ptm)
    _, b2 = basis_B(d)
    bb = np.multiply.outer(b2, b2)
    right = n_apply(bb) - _apply_m_pair(m2, bb)
    left = n_apply_transpose(bb) - _apply_m_pair(m2.T, bb)
    return {k: (inner(a, right), inner(a, left)) for k, a in trivial_basis(d).items()}


def ab_closed_form(ptm: np.ndarray, transpose: bool = False) -> dict[str, float]:
    """Closed-form a_i in terms of the unital block (valid for d = 2 or unital input).

    With ``transpose=True`` the same expressions are evaluated on L_u^T,
    which gives b_i because b_i(Lambda) = a_i(Lambda^T).
    """
    d = channels.dimension(ptm)
    q = pauli.qubits_from_dim(d)
    n = d * d
    lu = channels.unital_block(ptm)
    if transpose:
        lu = lu.T
    u = channels.unitarity(ptm)
    g = lu @ lu.T
    diag = np.diag(g)
    out = {
        "0": 0.0,
        "12": (np.sum(diag**2) / (n - 1) - u * u) / np.sqrt(n - 2),
        "S": np.sqrt(2) / ((n - 1) ** 1.5 * np.sqrt(n - 2)) * (np.sum(g * g) - np.sum(diag**2)),
    }
    if d >= 4:
        total = 0.0
        for tau in range(1, n):
            inner_sum = 0.0
            tp = pauli.SignedPauli(q, tau)
            for s in pauli.commutant_set(q, tau):
                prod = pauli.normalized_product(pauli.SignedPauli(q, s), tp).pauli
                inner_sum += prod.sign * g[prod.label - 1, s - 1]
            total += inner_sum**2
        out["adj"] = 2 / ((n - 4) * (n - 1) ** 1.5) * total
    return out


def ab_upper_bounds(u: float, d: int) -> dict[str, float]:
    """Upper bounds on a_i and b_i proportional to (1 - u)^2."""
    n = d * d
    out = {
        "0": 0.0,
        "12": np.sqrt(n - 2) / n * (1 - u) ** 2,
        "S": np.sqrt((n - 2) / (n - 1)) * np.sqrt(2) * (1 - u) ** 2,
    }
    if d >= 4:
        out["adj"] = np.sqrt(n - 1) * (1 - u) ** 2
    return out


# ---------------------------------------------------------------------------
# exact first and second moments of the sequence purity


def two_copy_tensor(op: np.ndarray, q: int) -> np.ndarray:
    """Liouville 2-tensor of a dense operator on H (x) H."""
    return pauli.to_liouville(np.asarray(op, dtype=complex), q, 2).real


class MomentModel:
    """Exact E[q] and E[q^2] of the sequence purity for a fixed channel.

    The state is taken after the first noise channel has been absorbed, so
    for m >= 2

        E[q]   = <E| M^{m-1} |rho_bar>,
        E[q^2] = <E (x) E| N^{m-1} |rho_bar (x) rho_bar>,

    and m = 1 gives the single-Clifford averages <E|G_avg|rho_bar> and
    <E E|G_avg^(4)|rho_bar rho_bar>.  Both cases are handled by working in
    coordinates on the invariant subspaces, where N^0 becomes the identity.
    """

    def __init__(self, ptm: np.ndarray, method: str = "orbit"):
        self.ptm = np.asarray(ptm, dtype=float)
        self.q = pauli.qubits_from_ptm_size(self.ptm.shape[0])
        if self.q > 2:
            raise ValueError("exact moments are computed for q <= 2")
        self.method = method
        n = 4**self.q
        if method == "dense":
            if self.q != 1:
                raise ValueError("the dense route is available for q = 1 only")
            t4 = gavg_dense(4, 1)
            t2 = gavg_dense(2, 1)
            self.p4 = _orthonormal_range(t4)
            self.p2 = _orthonormal_range(t2)
        elif method == "orbit":
            self.p4 = invariant_basis(4, self.q).toarray()
            self.p2 = invariant_basis(2, self.q).toarray()
        else:
            raise ValueError(f"unknown method {method!r}")
        cols4 = [apply_channel_tensor(self.ptm, c.reshape((n,) * 4)).ravel() for c in self.p4.T]
        self.n_red = self.p4.T @ np.array(cols4).T
        cols2 = [apply_channel_tensor(self.ptm, c.reshape(n, n)).ravel() for c in self.p2.T]
        self.m_red = self.p2.T @ np.array(cols2).T

    def mean(self, rho_bar: np.ndarray, e: np.ndarray, m: int) -> float:
        """E[q] for Liouville 2-tensors ``rho_bar`` and ``e``."""
        r = np.ravel(rho_bar)
        x = np.ravel(e)
        vec = np.linalg.matrix_power(self.m_red, m - 1) @ (self.p2.T @ r)
        return float((self.p2.T @ x) @ vec)

    def second_moment(self, rho_bar: np.ndarray, e: np.ndarray, m: int) -> float:
        r = np.ravel(rho_bar)
        x = np.ravel(e)
        r4 = self.p4.T @ np.kron(r, r)
        x4 = self.p4.T @ np.kron(x, x)
        return float(x4 @ np.linalg.matrix_power(self.n_red, m - 1) @ r4)

    def variance(self, rho_bar: np.ndarray, e: np.ndarray, m: int) -> float:
        if m < 1:
            raise ValueError("sequence length must be at least 1")
        return self.second_moment(rho_bar, e, m) - self.mean(rho_bar, e, m) ** 2


def _orthonormal_range(p: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    w, v = np.linalg.eigh((p + p.T) / 2)
    return v[:, w > tol]


def exact_mean(ptm, rho_bar, e, m: int, method: str | None = None) -> float:
    """E[q] = <E|M^{m-1}|rho_bar> for dense two-copy operators."""
    model = MomentModel(ptm, method or _default_method(ptm))
    return model.mean(two_copy_tensor(rho_bar, model.q), two_copy_tensor(e, model.q), m)


def exact_variance(ptm, rho_bar, e, m: int, method: str | None = None) -> float:
    """Between-sequence variance <E E|N^{m-1} - (M (x) M)^{m-1}|rho_bar rho_bar>.

    ``rho_bar`` is the traceless input after the first noise channel has been
    absorbed (use :func:`absorb_first_noise` on a prepared state).  Both
    operators are dense matrices on H (x) H.
    """
    model = MomentModel(ptm, method or _default_method(ptm))
    return model.variance(two_copy_tensor(rho_bar, model.q), two_copy_tensor(e, model.q), m)


def _default_method(ptm) -> str:
    return "dense" if np.asarray(ptm).shape[0] == 4 else "orbit"


def absorb_first_noise(ptm: np.ndarray, rho_bar: np.ndarray) -> np.ndarray:
    """Dense Lambda^{(x)2}(rho_bar)."""
    q = pauli.qubits_from_ptm_size(np.asarray(ptm).shape[0])
    return pauli.from_liouville(apply_channel_tensor(ptm, two_copy_tensor(rho_bar, q)), q)


def verify_telescoping(ptm: np.ndarray, m: int, tol: float = 1e-9) -> tuple[bool, float]:
    """Check N^m - (M M)^m = sum_s N^{m-s} (N - M M) (M M)^{s-1} on the 256-dim space.

    Returns ``(ok, residual)`` with the residual in Frobenius norm.
    """
    n_op = n_operator(ptm)
    m2 = m_operator(ptm)
    mm = np.kron(m2, m2)
    lhs = np.linalg.matrix_power(n_op, m) - np.linalg.matrix_power(mm, m)
    rhs = np.zeros_like(lhs)
    for s in range(1, m + 1):
        rhs += np.linalg.matrix_power(n_op, m - s) @ (n_op - mm) @ np.linalg.matrix_power(mm, s - 1)
    residual = float(np.linalg.norm(lhs - rhs))
    return residual < tol, residual
