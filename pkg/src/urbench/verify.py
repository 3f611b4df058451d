"""Numerical verification suite for the representation-theoretic machinery.

Each check returns a :class:`CheckResult` with the worst margin found.  A
positive margin means the check passed with room to spare.  Checks marked
``informational`` are reported without affecting the overall status.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import bounds, channels, clifford, pauli, protocol, reptheory


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst_margin: float
    detail: str = ""
    informational: bool = False
    seconds: float = 0.0

    @property
    def status(self) -> str:
        if self.informational:
            return "info"
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        out = asdict(self)
        out["status"] = self.status
        return out


def _tol_check(name: str, err: float, tol: float, detail: str = "") -> CheckResult:
    return CheckResult(name, bool(err <= tol), float(tol - err), detail)


def _random_channels(d: int, count: int, rng: np.random.Generator) -> list[np.ndarray]:
    out = []
    for k in range(count):
        base = channels.random_cptp(d, int(rng.integers(1, d * d + 1)), rng)
        out.append(channels.mix_with_identity(base, rng.uniform(0.05, 1.0)) if k % 2 else base)
    return out


def _random_unital(count: int, rng: np.random.Generator) -> list[np.ndarray]:
    return [
        channels.mix_with_identity(channels.random_unital(4, int(rng.integers(1, 5)), rng), rng.uniform(0.02, 0.5))
        for _ in range(count)
    ]


def check_projectors(q: int) -> list[CheckResult]:
    res = []
    expected = {1: (2, 15), 2: (2, 29)}[q]
    for n, rank in zip((2, 4), expected):
        if q == 1:
            p = reptheory.gavg_dense(n, 1)
            r = reptheory.projector_rank(p)
            idem = float(np.linalg.norm(p @ p - p))
            res.append(_tol_check(f"projector_idempotent_n{n}_q{q}", idem, 1e-10))
        else:
            r = reptheory.AveragingProjector(n, q).rank
        res.append(CheckResult(f"projector_rank_n{n}_q{q}", r == rank, float(-abs(r - rank)), f"rank {r}"))
    return res


def check_trivial_basis(d: int, rng: np.random.Generator) -> list[CheckResult]:
    q = pauli.qubits_from_dim(d)
    basis = reptheory.trivial_basis(d)
    keys = list(basis)
    norm_err = max(abs(np.linalg.norm(a) - 1) for a in basis.values())
    res = [_tol_check(f"trivial_basis_norms_d{d}", norm_err, 1e-12)]
    overlaps = {
        f"{a}|{b}": abs(reptheory.inner(basis[a], basis[b])) for a, b in itertools.combinations(keys, 2)
    }
    if d == 2:
        res.append(_tol_check("trivial_basis_orthogonal_d2", max(overlaps.values()), 1e-12))
    else:
        worst = max(overlaps.items(), key=lambda kv: kv[1])
        res.append(
            CheckResult(
                f"trivial_basis_overlaps_d{d}", True, 0.0, f"largest overlap {worst[0]} = {worst[1]:.6g}", True
            )
        )
    inv = 0.0
    for _ in range(20 if q == 2 else 50):
        c = clifford.sample_uniform(q, rng)
        for a in basis.values():
            inv = max(inv, float(np.abs(clifford.apply_tensor(c, a) - a).max()))
    res.append(_tol_check(f"trivial_basis_invariant_d{d}", inv, 1e-10))
    if d == 2:
        targets = {
            ("S", 1): 5 / math.sqrt(3),
            ("S", math.inf): 1 / math.sqrt(3),
            ("12", 1): 2 * math.sqrt(2),
            ("12", math.inf): math.sqrt(2) / 3,
        }
        err = max(
            abs(pauli.schatten_norm(reptheory.dense_operator(basis[k], 1), p) - v) for (k, p), v in targets.items()
        )
        res.append(_tol_check("trivial_basis_schatten_norms_d2", err, 1e-12))
    return res


def check_m_matrix(rng: np.random.Generator, count: int) -> CheckResult:
    err = 0.0
    for lam in _random_channels(2, count, rng):
        err = max(err, float(np.abs(reptheory.m_matrix(lam) - reptheory.m_matrix_averaged(lam)).max()))
    return _tol_check("m_matrix_closed_form_vs_average", err, 1e-10)


def check_ab(d: int, rng: np.random.Generator, count: int) -> list[CheckResult]:
    lams = _random_channels(2, count, rng) if d == 2 else _random_unital(count, rng)
    zero = 0.0
    lower = math.inf
    upper = math.inf
    equal = 0.0
    closed = 0.0
    for lam in lams:
        ab = reptheory.ab_coefficients(lam)
        ub = reptheory.ab_upper_bounds(channels.unitarity(lam), d)
        ca = reptheory.ab_closed_form(lam)
        cb = reptheory.ab_closed_form(lam, transpose=True)
        zero = max(zero, abs(ab["0"][0]), abs(ab["0"][1]))
        for k, (a, b) in ab.items():
            if k == "0":
                continue
            lower = min(lower, a, b)
            upper = min(upper, ub[k] - a, ub[k] - b)
            closed = max(closed, abs(a - ca[k]), abs(b - cb[k]))
            if k in ("12", "S"):
                equal = max(equal, abs(a - b))
    return [
        _tol_check(f"a0_b0_zero_d{d}", zero, 1e-12),
        CheckResult(f"ab_nonnegative_d{d}", lower >= -1e-12, lower),
        CheckResult(f"ab_upper_bounds_d{d}", upper >= -1e-12, upper),
        _tol_check(f"ab_closed_forms_d{d}", closed, 1e-10),
        CheckResult(
            f"a_equals_b_d{d}",
            equal <= 1e-10,
            -equal,
            "b_i(L) = a_i(L^T); equality needs a normal unital block",
            informational=True,
        ),
    ]


def check_brute_force(rng: np.random.Generator, count: int, max_m: int) -> CheckResult:
    els = clifford.enumerate_group(1)
    err = 0.0
    for lam in _random_channels(2, count, rng):
        spam = protocol.perturbed_two_copy_spam(2, rng.uniform(0, 0.3), rng)
        rb = reptheory.absorb_first_noise(lam, spam.rho_bar)
        for m in range(1, max_m + 1):
            vals = np.array(
                [protocol.sequence_purity_two_copy(s, lam, spam) for s in itertools.product(els, repeat=m)]
            )
            err = max(
                err,
                abs(vals.mean() - reptheory.exact_mean(lam, rb, spam.e, m)),
                abs(vals.var() - reptheory.exact_variance(lam, rb, spam.e, m)),
            )
    return _tol_check("moments_vs_enumeration", err, 1e-10)


def check_telescoping(rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for m, lam in zip(range(1, 7), _random_channels(2, 6, rng)):
        worst = max(worst, reptheory.verify_telescoping(lam, m)[1])
    return _tol_check("telescoping", worst, 1e-9)


def check_variance_bound(d: int, rng: np.random.Generator, count: int, lengths) -> CheckResult:
    q = pauli.qubits_from_dim(d)
    lams = _random_channels(2, count, rng) if d == 2 else _random_unital(count, rng)
    worst = math.inf
    for lam in lams:
        model = reptheory.MomentModel(lam, "dense" if d == 2 else "orbit")
        u = channels.unitarity(lam)
        spam = protocol.perturbed_two_copy_spam(d, rng.uniform(0, 0.4), rng)
        rb = reptheory.absorb_first_noise(lam, spam.rho_bar)
        params = bounds.spam_decompose(rb, spam.e)
        rt = reptheory.two_copy_tensor(rb, q)
        et = reptheory.two_copy_tensor(spam.e, q)
        for m in lengths:
            v = model.variance(rt, et, m)
            s2 = bounds.variance_bound(bounds.BoundInputs(u, m, d, params))
            worst = min(worst, s2 - v)
    return CheckResult(f"variance_bound_d{d}", worst >= -1e-10, worst)


def run_checks(level: str = "fast", seed: int = 0) -> list[CheckResult]:
    """Run the verification suite.  ``fast`` covers one qubit, ``full`` adds two qubits."""
    if level not in ("fast", "full"):
        raise ValueError("level must be 'fast' or 'full'")
    rng = np.random.default_rng(seed)
    jobs = [
        lambda: check_projectors(1),
        lambda: check_trivial_basis(2, rng),
        lambda: [check_m_matrix(rng, 20)],
        lambda: check_ab(2, rng, 30),
        lambda: [check_brute_force(rng, 3, 2)],
        lambda: [check_telescoping(rng)],
        lambda: [check_variance_bound(2, rng, 30, [2, 5, 10, 50])],
    ]
    if level == "full":
        jobs += [
            lambda: check_projectors(2),
            lambda: check_trivial_basis(4, rng),
            lambda: check_ab(4, rng, 10),
            lambda: [check_variance_bound(4, rng, 5, [2, 10, 50])],
        ]
    results = []
    for job in jobs:
        t0 = time.perf_counter()
        out = job()
        dt = (time.perf_counter() - t0) / len(out)
        for r in out:
            r.seconds = dt
        results.extend(out)
    return results


def all_passed(results: list[CheckResult]) -> bool:
    return all(r.passed for r in results if not r.informational)
