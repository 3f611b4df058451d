"""Variance and interval bounds for the sequence purity, and Hoeffding planners.

The variance bound is

    sigma^2 = g(u, m) * (a^2 b^2 c1 + a^2 c2 |E_spam|_inf^2 + b^2 c3 |rho_spam|_1^2)
              + |rho_spam|_1^2 |E_spam|_inf^2

with g(u, m) = (1 - u^(2(m-1))) / (1 - u^2) * (1 - u)^2.  The interval bound L
is the width of the range of a single sample, and both feed the Bernstein-type
Hoeffding inequality used to size experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from . import pauli
from .protocol import ideal_measurement_traceless, ideal_rho_bar

INF = math.inf
U_TOL = 1e-9


@dataclass(frozen=True)
class SpamParams:
    """Overlap of the implemented operators with the ideal ones plus residual norms."""

    alpha: float = 1.0
    beta: float = 1.0
    rho_spam_trace_norm: float = 0.0
    e_spam_inf_norm: float = 0.0

    def __post_init__(self):
        if self.rho_spam_trace_norm < 0 or self.e_spam_inf_norm < 0:
            raise ValueError("SPAM norms must be nonnegative")
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not -1 - 1e-9 <= v <= 1 + 1e-9:
                raise ValueError(f"{name}={v} outside [-1, 1]")

    @classmethod
    def from_squares(cls, rho_sq: float, e_sq: float, alpha: float = 1.0, beta: float = 1.0):
        """Build from squared norms, the form planner inputs are usually quoted in."""
        return cls(alpha, beta, math.sqrt(rho_sq), math.sqrt(e_sq))


@dataclass(frozen=True)
class ConfidenceParams:
    epsilon: float
    delta: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        # delta >= 1 is a vacuous statement; 2 is kept as the boundary where N = 0
        if not 0 < self.delta <= 2:
            raise ValueError("delta must lie in (0, 2]")


@dataclass(frozen=True)
class BoundInputs:
    """Inputs of the variance bound.  ``m`` may be ``math.inf``."""

    u: float
    m: float
    d: int
    spam: SpamParams = field(default_factory=SpamParams)

    def __post_init__(self):
        if not -U_TOL <= self.u <= 1 + U_TOL:
            raise ValueError(f"unitarity {self.u} outside [0, 1]")
        # absorb roundoff from unitarities computed on numerical channels
        object.__setattr__(self, "u", min(max(float(self.u), 0.0), 1.0))
        if self.m != INF and (self.m < 1 or int(self.m) != self.m):
            raise ValueError("m must be a positive integer or math.inf")
        pauli.qubits_from_dim(self.d)


def spam_decompose(rho_bar: np.ndarray, e: np.ndarray, tol: float = 1e-10) -> SpamParams:
    """Split (rho_bar, E) on H (x) H into ideal components and residuals.

    E is replaced by its traceless part first, which does not change any
    sequence purity because rho_bar is traceless.
    """
    rho_bar = np.asarray(rho_bar)
    e = np.asarray(e)
    n = rho_bar.shape[0]
    d = math.isqrt(n)
    if d * d != n or e.shape != rho_bar.shape:
        raise ValueError("operators must live on H (x) H")
    if abs(np.trace(rho_bar)) > tol:
        raise ValueError("rho_bar must be traceless")
    e_bar = e - np.trace(e) / n * np.eye(n)
    rho_ideal = ideal_rho_bar(d)
    e_ideal = ideal_measurement_traceless(d)
    alpha = float(np.real(np.trace(rho_ideal @ rho_bar))) * (d * d - 1)
    beta = float(np.real(np.trace(e_ideal @ e_bar))) / (d * d - 1)
    rho_spam = rho_bar - alpha * rho_ideal
    e_spam = e_bar - beta * e_ideal
    return SpamParams(
        alpha,
        beta,
        pauli.schatten_norm(rho_spam, 1),
        pauli.schatten_norm(e_spam, np.inf),
    )


def subspace_dimensions(d: int) -> dict[str, list[float]]:
    """Dimensions of the invariant subspaces entering the d >= 4 constants.

    Leaves with nonpositive dimension are empty and get dropped.
    """
    d2 = d * d
    parts_s = [
        (d2 - 1) * d * (d + 2) / 8,
        (d2 - 1) * d * (d - 2) / 8,
        (d2 - 1) * (d * (d + 2) / 8 - 1),
        (d2 - 1) * (d * (d - 2) / 8 - 1),
    ]
    return {
        "12": [(d * (d + 1) - 2) / 2, (d * (d - 1) - 2) / 2],
        "S": [v for v in parts_s if v > 0],
        "V12": [d2 - 2],
        "VS": [(d2 - 1) * (d2 - 2) / 2],
        "adj": [d2 - 1],
    }


def c_constants(d: int, convention: str = "table") -> tuple[float, float, float]:
    """Dimension constants (c1, c2, c3) of the variance bound.

    d = 2 uses the exact values 11/12, 13/9, 5/2.  For d >= 4 the closed forms
    are summed over the subspace dimensions.  ``convention="table"`` rescales
    c2 by 4 and c3 by 1/4, which reproduces the published tabulated values;
    ``"printed"`` returns the bare closed forms.
    """
    pauli.qubits_from_dim(d)
    if convention not in ("table", "printed"):
        raise ValueError("convention must be 'table' or 'printed'")
    if d == 2:
        return 11 / 12, 13 / 9, 5 / 2
    dims = subspace_dimensions(d)
    d2 = d * d
    k12 = math.sqrt(d2 - 2) / d2
    ks = math.sqrt(2) * math.sqrt((d2 - 2) / (d2 - 1))
    v12 = dims["V12"][0]
    vs = dims["VS"][0]
    vadj = dims["adj"][0]
    c1 = (
        k12 * sum(math.sqrt(v12) / v for v in dims["12"])
        + ks * sum(math.sqrt(vs) / v for v in dims["S"])
        + math.sqrt(d2 - 1) / math.sqrt(vadj)
    )
    x = (
        k12 * sum(math.sqrt(v12 / v) for v in dims["12"])
        + ks * sum(math.sqrt(vs / v) for v in dims["S"])
        + math.sqrt(d2 - 1)
    )
    c2 = d2 / (d2 - 1) * x
    c3 = (d2 - 1) * math.sqrt(6 / ((d - 2) * (d - 1))) * x
    if convention == "table":
        c2, c3 = 4 * c2, c3 / 4
    return c1, c2, c3


def decay_prefactor(u: float, m: float) -> float:
    """(1 - u^(2(m-1))) / (1 - u^2) * (1 - u)^2, with its limits at u = 1 and m = inf."""
    if not 0 <= u <= 1:
        raise ValueError(f"unitarity {u} outside [0, 1]")
    if u == 1:
        return 0.0
    if m == INF:
        return (1 - u) / (1 + u)
    return (1 - u ** (2 * (m - 1))) / (1 - u * u) * (1 - u) ** 2


def variance_bound(inp: BoundInputs, convention: str = "table") -> float:
    """Upper bound sigma^2 on the between-sequence variance."""
    c1, c2, c3 = c_constants(inp.d, convention)
    s = inp.spam
    a2, b2 = s.alpha**2, s.beta**2
    r2, e2 = s.rho_spam_trace_norm**2, s.e_spam_inf_norm**2
    inner = a2 * b2 * c1 + a2 * c2 * e2 + b2 * c3 * r2
    return decay_prefactor(inp.u, inp.m) * inner + r2 * e2


def interval_bound(spam: SpamParams, use_alpha_beta: bool = False) -> float:
    """Width L of the interval containing every sample.

    The coarse form 1 + r + e + r e assumes nothing about alpha and beta.  The
    refined form a b + b r + a e + r e requires alpha, beta >= 0.
    """
    r, e = spam.rho_spam_trace_norm, spam.e_spam_inf_norm
    if not use_alpha_beta:
        return 1 + r + e + r * e
    a, b = spam.alpha, spam.beta
    if a < 0 or b < 0:
        raise ValueError("refined interval bound needs alpha, beta >= 0")
    return a * b + b * r + a * e + r * e


def _log_base(eps: float, sigma2: float, L: float) -> float:
    """Natural log of the per-sample factor of the Bernstein-type bound."""
    denom = sigma2 + L * L
    ea = (L * L - eps * L) / denom
    eb = (sigma2 + eps * L) / denom
    # ln(L/(L-eps)) = -log1p(-eps/L);  ln(sigma2/(sigma2+eps L)) = -log1p(eps L / sigma2)
    if sigma2 == 0:
        return -math.inf
    return ea * -math.log1p(-eps / L) + eb * -math.log1p(eps * L / sigma2)


def hoeffding_N(cp: ConfidenceParams, sigma2: float, L: float) -> int:
    """Smallest N with 2 * base(eps, sigma2, L)^N <= delta."""
    if sigma2 < 0 or L <= 0:
        raise ValueError("need sigma2 >= 0 and L > 0")
    if cp.epsilon >= L:
        raise ValueError(f"epsilon={cp.epsilon} is not below the interval bound L={L}")
    lb = _log_base(cp.epsilon, sigma2, L)
    if lb == -math.inf:
        return 1
    if lb >= 0:
        raise ValueError("bound is vacuous for these parameters")
    return max(1, math.ceil(math.log(cp.delta / 2) / lb))


def hoeffding_failure(eps: float, n: int, sigma2: float, L: float) -> float:
    """The right-hand side 2 * base^N of the Bernstein-type bound."""
    lb = _log_base(eps, sigma2, L)
    return 2 * math.exp(n * lb) if lb != -math.inf else 0.0


def hoeffding_epsilon(n: int, delta: float, sigma2: float, L: float, xtol: float = 1e-10) -> float:
    """Smallest eps in (0, L) with failure probability at most delta after n samples.

    The result overshoots the exact root by at most ``xtol``, never undershoots.
    """
    if n < 1:
        raise ValueError("N must be at least 1")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if sigma2 <= 0:
        return 0.0
    target = math.log(delta / 2)
    # as eps -> L the log-base tends to n * ln(sigma2/(sigma2+L^2))
    if n * math.log(sigma2 / (sigma2 + L * L)) >= target:
        raise ValueError("no epsilon below L reaches the requested confidence at this N")

    def f(eps):
        return n * _log_base(eps, sigma2, L) - target

    hi = L * (1 - 1e-15)
    if f(hi) > 0:
        raise ValueError("no epsilon below L reaches the requested confidence at this N")
    root = bisect(f, 0.0, hi, xtol=xtol)
    # step to the conservative side of the bracket so the bound holds at the returned value
    return min(root + xtol, hi)


def first_order_N(cp: ConfidenceParams, L: float) -> int:
    """Smallest N with 2 exp(-2 N eps^2 / L^2) <= delta (variance-free Hoeffding)."""
    if cp.delta >= 2:
        return 0
    return math.ceil(L * L * math.log(2 / cp.delta) / (2 * cp.epsilon**2))


def first_order_epsilon(n: int, delta: float, L: float) -> float:
    if n < 1:
        raise ValueError("N must be at least 1")
    return L * math.sqrt(math.log(2 / delta) / (2 * n))


def total_variance(sigma2: float, R: float) -> float:
    """Two-copy budget: between-sequence bound plus the 1/(2R) shot term."""
    if R < 1:
        raise ValueError("R must be at least 1")
    if R == INF:
        return sigma2
    return sigma2 + 1 / (2 * R)
