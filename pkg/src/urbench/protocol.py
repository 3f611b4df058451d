"""Simulation of the unitarity randomized benchmarking protocol.

Two implementations are supported.  The two-copy scheme prepares states on
H (x) H and measures an observable E there; the single-copy scheme prepares
Pauli eigenstate mixtures rho^(P) and measures Paulis E^(Q), squaring the
resulting expectations.  Everything is propagated in the normalized Pauli
(Liouville) basis, where Clifford gates are signed permutations.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import channels, clifford, pauli

PROB_TOL = 1e-9


# ---------------------------------------------------------------- operators


def swap(d: int) -> np.ndarray:
    """Swap operator on H (x) H."""
    s = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1.0
    return s


def ideal_two_copy_operators(d: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Maximally mixed states on the symmetric and antisymmetric subspaces and E = swap."""
    pauli.qubits_from_dim(d)
    s = swap(d)
    eye = np.eye(d * d)
    rho = (eye + s) / (d * (d + 1))
    rho_hat = (eye - s) / (d * (d - 1))
    return rho, rho_hat, s


def ideal_rho_bar(d: int) -> np.ndarray:
    rho, rho_hat, _ = ideal_two_copy_operators(d)
    return (rho - rho_hat) / 2


def ideal_measurement_traceless(d: int) -> np.ndarray:
    """Traceless part of the swap, S - I/d."""
    return swap(d) - np.eye(d * d) / d


def ideal_single_copy_operators(q: int, p: int, q_label: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(I + P)/d, (I - P)/d and E = Q for nonidentity Pauli labels P and Q."""
    for lab in (p, q_label):
        pauli.check_label(q, lab)
        if lab == 0:
            raise ValueError("single-copy operators need nonidentity Paulis")
    d = 2**q
    pp = pauli.unnormalized_pauli(q, p)
    eye = np.eye(d)
    return (eye + pp) / d, (eye - pp) / d, pauli.unnormalized_pauli(q, q_label)


def _check_state(rho: np.ndarray, tol: float = 1e-8) -> None:
    if not np.allclose(rho, rho.conj().T, atol=tol):
        raise ValueError("state is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError("state does not have unit trace")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValueError("state is not positive semidefinite")


def _check_observable(e: np.ndarray, tol: float = 1e-8) -> None:
    if not np.allclose(e, e.conj().T, atol=tol):
        raise ValueError("measurement operator is not Hermitian")
    w = np.linalg.eigvalsh(e)
    if w.min() < -1 - tol or w.max() > 1 + tol:
        raise ValueError("measurement operator spectrum leaves [-1, 1]")


@dataclass
class TwoCopySpam:
    """Implemented rho, rho_hat and E on H (x) H."""

    rho: np.ndarray
    rho_hat: np.ndarray
    e: np.ndarray
    implementation = "two_copy"

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=complex)
        self.rho_hat = np.asarray(self.rho_hat, dtype=complex)
        self.e = np.asarray(self.e, dtype=complex)
        n = self.rho.shape[0]
        self.d = math.isqrt(n)
        self.q = pauli.qubits_from_dim(self.d)
        if self.rho_hat.shape != (n, n) or self.e.shape != (n, n) or self.d**2 != n:
            raise ValueError("two-copy operators must all act on H (x) H")
        _check_state(self.rho)
        _check_state(self.rho_hat)
        _check_observable(self.e)

    @property
    def rho_bar(self) -> np.ndarray:
        return (self.rho - self.rho_hat) / 2


@dataclass
class SingleCopySpam:
    """Families rho^(P), rho_hat^(P) and E^(Q) indexed by nonidentity Paulis.

    Arrays have shape (d^2 - 1, d, d); entry k belongs to Pauli label k + 1.
    Measurement operators are unnormalized Paulis (spectrum in [-1, 1]).
    """

    rho: np.ndarray
    rho_hat: np.ndarray
    e: np.ndarray
    implementation = "single_copy"

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=complex)
        self.rho_hat = np.asarray(self.rho_hat, dtype=complex)
        self.e = np.asarray(self.e, dtype=complex)
        self.d = self.rho.shape[-1]
        self.q = pauli.qubits_from_dim(self.d)
        k = self.d**2 - 1
        for arr in (self.rho, self.rho_hat, self.e):
            if arr.shape != (k, self.d, self.d):
                raise ValueError(f"single-copy family must have shape ({k}, {self.d}, {self.d})")
        for r in (*self.rho, *self.rho_hat):
            _check_state(r)
        for e in self.e:
            _check_observable(e)

    @property
    def rho_bar(self) -> np.ndarray:
        return (self.rho - self.rho_hat) / 2


def ideal_two_copy_spam(d: int) -> TwoCopySpam:
    return TwoCopySpam(*ideal_two_copy_operators(d))


def ideal_single_copy_spam(d: int) -> SingleCopySpam:
    q = pauli.qubits_from_dim(d)
    rho, rho_hat, e = [], [], []
    for lab in range(1, d * d):
        r, rh, ee = ideal_single_copy_operators(q, lab, lab)
        rho.append(r)
        rho_hat.append(rh)
        e.append(ee)
    return SingleCopySpam(np.array(rho), np.array(rho_hat), np.array(e))


def random_state(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Normalized Wishart state G G^dagger / Tr[G G^dagger]."""
    rank = n if rank is None else rank
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    w = g @ g.conj().T
    return w / np.trace(w).real


def random_observable(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random Hermitian matrix with its spectrum clipped to [-1, 1]."""
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = (g + g.conj().T) / 2
    w, v = np.linalg.eigh(h)
    return (v * np.clip(w, -1, 1)) @ v.conj().T


def perturbed_two_copy_spam(d: int, eta: float, rng: np.random.Generator) -> TwoCopySpam:
    """(1 - eta) * ideal + eta * random for each of rho, rho_hat and E."""
    if not 0 <= eta <= 1:
        raise ValueError("eta must lie in [0, 1]")
    rho, rho_hat, e = ideal_two_copy_operators(d)
    n = d * d
    return TwoCopySpam(
        (1 - eta) * rho + eta * random_state(n, rng),
        (1 - eta) * rho_hat + eta * random_state(n, rng),
        (1 - eta) * e + eta * random_observable(n, rng),
    )


def perturbed_single_copy_spam(d: int, eta: float, rng: np.random.Generator) -> SingleCopySpam:
    if not 0 <= eta <= 1:
        raise ValueError("eta must lie in [0, 1]")
    ideal = ideal_single_copy_spam(d)
    k = d * d - 1
    rho = np.array([(1 - eta) * ideal.rho[i] + eta * random_state(d, rng) for i in range(k)])
    rho_hat = np.array([(1 - eta) * ideal.rho_hat[i] + eta * random_state(d, rng) for i in range(k)])
    e = np.array([(1 - eta) * ideal.e[i] + eta * random_observable(d, rng) for i in range(k)])
    return SingleCopySpam(rho, rho_hat, e)


def effective_operators(spam: SingleCopySpam) -> tuple[np.ndarray, np.ndarray]:
    """Two-copy operators reproducing the single-copy sequence purity.

    rho_eff = d/(d^2-1) sum_P rho_bar^P (x) rho_bar^P and
    E_eff = (1/d) sum_Q Ebar^Q (x) Ebar^Q with Ebar the traceless part.
    """
    if not isinstance(spam, SingleCopySpam):
        raise TypeError("effective operators need a single-copy SPAM family")
    d = spam.d
    eye = np.eye(d)
    rho_bar = spam.rho_bar
    e_bar = spam.e - np.trace(spam.e, axis1=1, axis2=2)[:, None, None] / d * eye
    rho_eff = sum(np.kron(r, r) for r in rho_bar) * d / (d * d - 1)
    e_eff = sum(np.kron(e, e) for e in e_bar) / d
    return rho_eff, e_eff


# ---------------------------------------------------------------- sequences


def sample_sequence(q: int, m: int, rng: np.random.Generator) -> list[clifford.CliffordElement]:
    if m < 1:
        raise ValueError("sequence length must be at least 1")
    els = clifford.enumerate_group(q)
    return [els[int(i)] for i in rng.integers(len(els), size=m)]


def sequence_map(seq, ptm: np.ndarray) -> np.ndarray:
    """Transfer matrix of G_m Lambda ... G_1 Lambda (first gate applied first)."""
    ptm = np.asarray(ptm, dtype=float)
    out = np.eye(ptm.shape[0])
    for c in seq:
        y = ptm @ out
        out = np.empty_like(y)
        out[c.perm] = c.sign[:, None] * y
    return out


def _tensor2(op: np.ndarray, q: int) -> np.ndarray:
    return pauli.to_liouville(op, q, 2).real


def _vec(op: np.ndarray, q: int) -> np.ndarray:
    return pauli.to_liouville(op, q, 1).real


def _expect2(g: np.ndarray, obs: np.ndarray, state: np.ndarray) -> float:
    """Tr[O G^(x)2(rho)] from Liouville 2-tensors."""
    return float(np.sum(obs * (g @ state @ g.T)))


def sequence_purity_two_copy(seq, ptm: np.ndarray, spam: TwoCopySpam) -> float:
    """Exact q = Tr[E G_seq^(x)2(rho_bar)]."""
    q = spam.q
    g = sequence_map(seq, ptm)
    if g.shape[0] != 4**q:
        raise ValueError("channel and SPAM dimensions differ")
    return _expect2(g, _tensor2(spam.e, q), _tensor2(spam.rho_bar, q))


def _single_copy_values(g: np.ndarray, spam: SingleCopySpam, states: np.ndarray) -> np.ndarray:
    """Matrix V[Q, P] = Tr[E^Q G(state^P)]."""
    q = spam.q
    ev = np.array([_vec(e, q) for e in spam.e])
    sv = np.array([_vec(s, q) for s in states])
    return ev @ g @ sv.T


def sequence_purity_single_copy(seq, ptm: np.ndarray, spam: SingleCopySpam) -> float:
    """Exact q = 1/(d^2-1) sum_{P,Q} Tr[E^Q G_seq(rho_bar^P)]^2."""
    g = sequence_map(seq, ptm)
    if g.shape[0] != spam.d**2:
        raise ValueError("channel and SPAM dimensions differ")
    v = _single_copy_values(g, spam, spam.rho_bar)
    return float(np.sum(v * v) / (spam.d**2 - 1))


def sequence_purity(seq, ptm: np.ndarray, spam) -> float:
    if isinstance(spam, SingleCopySpam):
        return sequence_purity_single_copy(seq, ptm, spam)
    return sequence_purity_two_copy(seq, ptm, spam)


def _clip_prob(p: np.ndarray | float, what: str):
    p = np.asarray(p, dtype=float)
    if np.any(p < -PROB_TOL) or np.any(p > 1 + PROB_TOL):
        raise ValueError(f"{what} probability outside [0, 1]; SPAM or channel is invalid")
    return np.clip(p, 0.0, 1.0)


def two_copy_probabilities(seq, ptm: np.ndarray, spam: TwoCopySpam) -> tuple[float, float]:
    """a = Tr[M G(rho)] and b = Tr[M G(rho_hat)] with M = (I + E)/2."""
    q = spam.q
    g = sequence_map(seq, ptm)
    mt = _tensor2((np.eye(spam.d**2) + spam.e) / 2, q)
    a = _expect2(g, mt, _tensor2(spam.rho, q))
    b = _expect2(g, mt, _tensor2(spam.rho_hat, q))
    return float(_clip_prob(a, "two-copy")), float(_clip_prob(b, "two-copy"))


def sample_shots_two_copy(seq, ptm, spam: TwoCopySpam, R: int, rng: np.random.Generator):
    """Shot estimate of q from R runs on each state.

    Each shot pair gives x = o - o_hat in {-1, 0, 1} with o ~ Bernoulli(a),
    o_hat ~ Bernoulli(b).  Returns (mean of x, tallies {-1, 0, 1}).
    """
    if R < 1:
        raise ValueError("R must be at least 1")
    a, b = two_copy_probabilities(seq, ptm, spam)
    o = rng.random(R) < a
    oh = rng.random(R) < b
    x = o.astype(int) - oh.astype(int)
    tallies = {k: int(np.sum(x == k)) for k in (-1, 0, 1)}
    return float(x.mean()), tallies


def single_copy_estimates(seq, ptm, spam: SingleCopySpam, R: int, rng: np.random.Generator):
    """Corrected and naive shot estimates of the single-copy sequence purity.

    For each setting (P, Q) we draw R outcomes y, y_hat in {-1, 1} for the two
    states and form x = (y - y_hat)/2.  The naive estimator averages the
    squared sample means; the corrected one subtracts s^2/R per setting, with
    s^2 the unbiased sample variance, which removes the positive bias.
    """
    if R < 2:
        raise ValueError("the bias correction needs R >= 2")
    g = sequence_map(seq, ptm)
    p_plus = _clip_prob((1 + _single_copy_values(g, spam, spam.rho)) / 2, "single-copy")
    p_hat = _clip_prob((1 + _single_copy_values(g, spam, spam.rho_hat)) / 2, "single-copy")
    y = np.where(rng.random(p_plus.shape + (R,)) < p_plus[..., None], 1.0, -1.0)
    yh = np.where(rng.random(p_hat.shape + (R,)) < p_hat[..., None], 1.0, -1.0)
    x = (y - yh) / 2
    mean = x.mean(axis=-1)
    s2 = x.var(axis=-1, ddof=1)
    k = spam.d**2 - 1
    naive = float(np.sum(mean * mean) / k)
    corrected = float(np.sum(mean * mean - s2 / R) / k)
    return corrected, naive


def sample_shots_single_copy(seq, ptm, spam: SingleCopySpam, R: int, rng: np.random.Generator) -> float:
    return single_copy_estimates(seq, ptm, spam, R, rng)[0]


# ---------------------------------------------------------------- experiments


@dataclass
class ProtocolConfig:
    """Sequence lengths, samples per length and shot budget of one run.

    ``shots=None`` selects exact mode, where each sample is the exact
    sequence purity.  ``n_sequences`` is one count for every length or a list
    aligned with ``lengths``.
    """

    q: int
    implementation: str = "two_copy"
    lengths: list[int] = field(default_factory=lambda: [1, 2, 4, 8])
    n_sequences: int | list[int] = 100
    shots: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.q not in (1, 2):
            raise ValueError("the simulator supports q = 1 and q = 2")
        if self.implementation not in ("two_copy", "single_copy"):
            raise ValueError("implementation must be 'two_copy' or 'single_copy'")
        self.lengths = [int(m) for m in self.lengths]
        if not self.lengths or min(self.lengths) < 1:
            raise ValueError("sequence lengths must be at least 1")
        counts = self.counts()
        if min(counts) < 1:
            raise ValueError("need at least one sequence per length")
        if self.shots is not None:
            self.shots = int(self.shots)
            minimum = 2 if self.implementation == "single_copy" else 1
            if self.shots < minimum:
                raise ValueError(f"shot mode needs R >= {minimum}")

    def counts(self) -> list[int]:
        if isinstance(self.n_sequences, (list, tuple)):
            if len(self.n_sequences) != len(self.lengths):
                raise ValueError("n_sequences list must match lengths")
            return [int(n) for n in self.n_sequences]
        return [int(self.n_sequences)] * len(self.lengths)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ExperimentDataset:
    """Sequence-purity samples per length plus the config that produced them."""

    config: dict
    samples: dict[int, list[float]]
    tallies: dict[int, list[dict]] | None = None
    n_shots: int | None = None

    def means(self) -> dict[int, float]:
        return {m: float(np.mean(v)) for m, v in sorted(self.samples.items())}

    def variances(self) -> dict[int, float]:
        return {m: float(np.var(v, ddof=1)) if len(v) > 1 else 0.0 for m, v in sorted(self.samples.items())}

    def points(self) -> list[tuple[int, float]]:
        return list(self.means().items())

    def to_json(self) -> str:
        data = {
            "config": self.config,
            "n_shots": self.n_shots,
            "samples": {str(m): v for m, v in sorted(self.samples.items())},
        }
        if self.tallies is not None:
            data["tallies"] = {
                str(m): [{str(k): n for k, n in t.items()} for t in ts] for m, ts in sorted(self.tallies.items())
            }
        return json.dumps(data, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentDataset":
        data = json.loads(text)
        samples = {int(m): [float(x) for x in v] for m, v in data["samples"].items()}
        tallies = None
        if "tallies" in data:
            tallies = {
                int(m): [{int(k): n for k, n in t.items()} for t in ts] for m, ts in data["tallies"].items()
            }
        return cls(data["config"], samples, tallies, data.get("n_shots"))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "sample_index", "q_value", "n_shots"])
        shots = "" if self.n_shots is None else self.n_shots
        for m, vals in sorted(self.samples.items()):
            for i, v in enumerate(vals):
                w.writerow([m, i, repr(float(v)), shots])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, config: dict | None = None) -> "ExperimentDataset":
        samples: dict[int, list[float]] = {}
        n_shots = None
        for row in csv.DictReader(io.StringIO(text)):
            m = int(row["m"])
            idx = int(row["sample_index"])
            vals = samples.setdefault(m, [])
            if idx != len(vals):
                raise ValueError(f"samples for m={m} are not in index order")
            vals.append(float(row["q_value"]))
            if row.get("n_shots"):
                n_shots = int(row["n_shots"])
        return cls(config or {}, samples, None, n_shots)


def sample_rng(seed: int, m: int, index: int) -> np.random.Generator:
    """Independent stream for one sample, fixed by (master seed, m, index)."""
    return np.random.default_rng(np.random.SeedSequence([seed, m, index]))


def simulate_sample(config: ProtocolConfig, ptm: np.ndarray, spam, m: int, index: int):
    """One sequence purity sample; returns (value, tallies or None)."""
    rng = sample_rng(config.seed, m, index)
    seq = sample_sequence(config.q, m, rng)
    if config.shots is None:
        return sequence_purity(seq, ptm, spam), None
    if config.implementation == "two_copy":
        return sample_shots_two_copy(seq, ptm, spam, config.shots, rng)
    return sample_shots_single_copy(seq, ptm, spam, config.shots, rng), None


def run_experiment(config: ProtocolConfig, ptm: np.ndarray, spam) -> ExperimentDataset:
    """Run the protocol for every configured length."""
    if spam.implementation != config.implementation:
        raise ValueError("SPAM model does not match the configured implementation")
    if spam.q != config.q or np.asarray(ptm).shape[0] != 4**config.q:
        raise ValueError("channel, SPAM and config disagree on the qubit count")
    samples: dict[int, list[float]] = {}
    tallies: dict[int, list[dict]] = {}
    for m, count in zip(config.lengths, config.counts()):
        vals, tals = [], []
        for i in range(count):
            v, t = simulate_sample(config, ptm, spam, m, i)
            vals.append(v)
            tals.append(t)
        samples[m] = vals
        if tals and tals[0] is not None:
            tallies[m] = tals
    return ExperimentDataset(config.to_dict(), samples, tallies or None, config.shots)


def channel_from_preset(name: str, q: int, rng: np.random.Generator, **kw) -> np.ndarray:
    """Named noise models used by the command line.

    * ``identity``
    * ``depolarizing`` with ``p``
    * ``identity_mix``: random CPTP map of ``kraus_rank`` mixed with the identity,
      either with weight ``eta`` or tuned to unitarity ``target_u``
    * ``unital_mix``: random unital channel with ``n_terms`` mixed with weight ``eta``
    """
    d = 2**q
    if name == "identity":
        return channels.identity_channel(d)
    if name == "depolarizing":
        return channels.depolarizing(float(kw.get("p", 0.99)), d)
    if name == "identity_mix":
        base = channels.random_cptp(d, int(kw.get("kraus_rank", d * d)), rng)
        if kw.get("target_u") is not None:
            return channels.with_unitarity(base, float(kw["target_u"]))[0]
        return channels.mix_with_identity(base, float(kw.get("eta", 0.05)))
    if name == "unital_mix":
        base = channels.random_unital(d, int(kw.get("n_terms", 3)), rng)
        return channels.mix_with_identity(base, float(kw.get("eta", 0.05)))
    raise ValueError(f"unknown noise preset {name!r}")
