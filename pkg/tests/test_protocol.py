import itertools
import json

import numpy as np
import pytest

from urbench import bounds, channels, clifford, pauli, protocol, reptheory as rt

X = pauli.unnormalized_pauli(1, 1)
Y = pauli.unnormalized_pauli(1, 2)
Z = pauli.unnormalized_pauli(1, 3)
XX = np.kron(X, X)


def psd_unit_trace(rho):
    return np.isclose(np.trace(rho), 1) and np.linalg.eigvalsh(rho).min() > -1e-12


def test_ideal_two_copy_operators():
    rho, rho_hat, e = protocol.ideal_two_copy_operators(2)
    assert psd_unit_trace(rho) and psd_unit_trace(rho_hat)
    assert np.allclose((rho - rho_hat) / 2, (XX + np.kron(Y, Y) + np.kron(Z, Z)) / 6)
    _, b2 = rt.basis_B(2)
    assert np.allclose((rho - rho_hat) / 2, pauli.from_liouville(b2, 1) / np.sqrt(3))
    for d in (2, 4):
        w = np.round(np.linalg.eigvalsh(protocol.ideal_two_copy_operators(d)[2])).astype(int)
        assert np.sum(w == 1) == d * (d + 1) // 2 and np.sum(w == -1) == d * (d - 1) // 2


def test_swap_is_pauli_sum():
    for q in (1, 2):
        d = 2**q
        s = sum(np.kron(pauli.unnormalized_pauli(q, a), pauli.unnormalized_pauli(q, a)) for a in range(d * d)) / d
        assert np.allclose(s, protocol.swap(d))


def test_ideal_single_copy_operators():
    rho, rho_hat, e = protocol.ideal_single_copy_operators(1, 1, 3)
    plus = np.array([[0.5, 0.5], [0.5, 0.5]])
    assert np.allclose(rho, plus) and np.allclose(rho_hat, np.eye(2) - plus)
    assert np.allclose(e, Z)
    for q in (1, 2):
        for p in range(1, 4**q):
            r, rh, _ = protocol.ideal_single_copy_operators(q, p, 1)
            assert psd_unit_trace(r) and psd_unit_trace(rh)
    r, _, _ = protocol.ideal_single_copy_operators(2, pauli.label_from_string("XZ"), 1)
    assert np.allclose(np.linalg.eigvalsh(r), [0, 0, 0.5, 0.5], atol=1e-12)
    with pytest.raises(ValueError):
        protocol.ideal_single_copy_operators(1, 0, 1)


@pytest.mark.parametrize("d", [2, 4])
def test_effective_operators_ideal(d):
    rho_eff, e_eff = protocol.effective_operators(protocol.ideal_single_copy_spam(d))
    assert np.allclose(rho_eff, protocol.ideal_rho_bar(d))
    assert np.allclose(e_eff, protocol.ideal_measurement_traceless(d))
    assert abs(np.trace(rho_eff)) < 1e-12 and abs(np.trace(e_eff)) < 1e-12


def test_effective_operators_reproduce_single_copy(rng):
    lam = channels.random_cptp(2, 2, rng)
    spam = protocol.perturbed_single_copy_spam(2, 0.3, rng)
    rho_eff, e_eff = protocol.effective_operators(spam)
    for _ in range(20):
        seq = protocol.sample_sequence(1, int(rng.integers(1, 6)), rng)
        g = protocol.sequence_map(seq, lam)
        two = float(np.sum(pauli.to_liouville(e_eff, 1, 2) * (g @ pauli.to_liouville(rho_eff, 1, 2) @ g.T)))
        assert abs(protocol.sequence_purity_single_copy(seq, lam, spam) - two) < 1e-10


def test_effective_operators_need_single_copy_family():
    with pytest.raises(TypeError):
        protocol.effective_operators(protocol.ideal_two_copy_spam(2))
    ideal = protocol.ideal_single_copy_spam(2)
    with pytest.raises(ValueError):
        protocol.SingleCopySpam(ideal.rho[:2], ideal.rho_hat[:2], ideal.e[:2])


def test_spam_validation():
    rho, rho_hat, e = protocol.ideal_two_copy_operators(2)
    with pytest.raises(ValueError):
        protocol.TwoCopySpam(2 * rho, rho_hat, e)
    with pytest.raises(ValueError):
        protocol.TwoCopySpam(rho, rho_hat, 2 * e)


def test_sequence_map_order(rng):
    lam = channels.random_cptp(2, 2, rng)
    seq = protocol.sample_sequence(1, 3, rng)
    g = np.eye(4)
    for c in seq:
        g = clifford.ptm(c) @ lam @ g
    assert np.allclose(protocol.sequence_map(seq, lam), g)


@pytest.mark.parametrize("q", [1, 2])
def test_identity_noise_ideal_spam_gives_one(q, rng):
    d = 2**q
    two, single = protocol.ideal_two_copy_spam(d), protocol.ideal_single_copy_spam(d)
    for _ in range(5):
        seq = protocol.sample_sequence(q, 4, rng)
        assert abs(protocol.sequence_purity_two_copy(seq, np.eye(d * d), two) - 1) < 1e-12
        assert abs(protocol.sequence_purity_single_copy(seq, np.eye(d * d), single) - 1) < 1e-12


def example_four_spam():
    # eigenprojector mixtures of XX with (rho - rho_hat)/2 = XX/4
    rho = (np.eye(4) + XX) / 4
    rho_hat = (np.eye(4) - XX) / 4
    return protocol.TwoCopySpam(rho, rho_hat, XX)


def test_example_four_single_cliffords():
    spam = example_four_spam()
    assert np.allclose(spam.rho_bar, XX / 4)
    vals = [protocol.sequence_purity_two_copy([c], np.eye(4), spam) for c in clifford.enumerate_group(1)]
    assert set(np.round(vals, 12)) == {0.0, 1.0}
    assert sum(np.isclose(vals, 1)) == 8


def test_depolarizing_purity():
    p = 0.9
    spam = protocol.ideal_two_copy_spam(2)
    for seq in itertools.islice(itertools.product(clifford.enumerate_group(1), repeat=3), 0, 13824, 997):
        assert abs(protocol.sequence_purity_two_copy(seq, channels.depolarizing(p, 2), spam) - p**6) < 1e-12


def test_single_copy_nonnegative_and_matches_effective(rng):
    lam = channels.random_cptp(2, 3, rng)
    spam = protocol.perturbed_single_copy_spam(2, 0.4, rng)
    rho_eff, e_eff = protocol.effective_operators(spam)
    for _ in range(10):
        seq = protocol.sample_sequence(1, 3, rng)
        v = protocol.sequence_purity_single_copy(seq, lam, spam)
        assert v >= 0
        g = protocol.sequence_map(seq, lam)
        two = float(np.sum(pauli.to_liouville(e_eff, 1, 2) * (g @ pauli.to_liouville(rho_eff, 1, 2) @ g.T)))
        assert abs(v - two) < 1e-10


def test_traceless_part_of_measurement_changes_nothing(rng):
    lam = channels.random_cptp(2, 2, rng)
    spam = protocol.perturbed_two_copy_spam(2, 0.3, rng)
    shifted = protocol.TwoCopySpam(spam.rho, spam.rho_hat, 0.5 * spam.e + 0.3 * np.eye(4))
    scaled = protocol.TwoCopySpam(spam.rho, spam.rho_hat, 0.5 * spam.e)
    seq = protocol.sample_sequence(1, 4, rng)
    assert abs(protocol.sequence_purity(seq, lam, shifted) - protocol.sequence_purity(seq, lam, scaled)) < 1e-12


def test_sample_range(rng):
    for _ in range(20):
        lam = channels.random_cptp(2, int(rng.integers(1, 5)), rng)
        spam = protocol.perturbed_two_copy_spam(2, rng.uniform(0, 0.5), rng)
        params = bounds.spam_decompose(spam.rho_bar, spam.e)
        r, e = params.rho_spam_trace_norm, params.e_spam_inf_norm
        seq = protocol.sample_sequence(1, 3, rng)
        v = protocol.sequence_purity_two_copy(seq, lam, spam)
        assert -(r + e + r * e) - 1e-12 <= v <= 1 + 1e-12


def test_single_copy_sample_range(rng):
    for _ in range(20):
        lam = channels.random_cptp(2, int(rng.integers(1, 5)), rng)
        spam = protocol.perturbed_single_copy_spam(2, rng.uniform(0, 0.3), rng)
        rho_eff, e_eff = protocol.effective_operators(spam)
        p = bounds.spam_decompose(rho_eff, e_eff)
        if p.alpha < 0 or p.beta < 0:
            continue
        seq = protocol.sample_sequence(1, 2, rng)
        v = protocol.sequence_purity_single_copy(seq, lam, spam)
        assert 0 <= v <= bounds.interval_bound(p, use_alpha_beta=True) + 1e-12


def test_mean_matches_fit_model_exhaustive(rng):
    lam = channels.random_cptp(2, 2, rng)
    spam = protocol.perturbed_two_copy_spam(2, 0.2, rng)
    rho_bar = rt.absorb_first_noise(lam, spam.rho_bar)
    els = clifford.enumerate_group(1)
    for m in (1, 2, 3):
        vals = [protocol.sequence_purity_two_copy(s, lam, spam) for s in itertools.product(els, repeat=m)]
        assert abs(np.mean(vals) - rt.exact_mean(lam, rho_bar, spam.e, m)) < 1e-10


def test_two_copy_shots_deterministic():
    up = np.zeros((4, 4))
    up[0, 0] = 1
    singlet = np.zeros(4)
    singlet[1], singlet[2] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    spam = protocol.TwoCopySpam(up, np.outer(singlet, singlet), protocol.swap(2))
    rng = np.random.default_rng(1)
    for R in (1, 7, 100):
        seq = protocol.sample_sequence(1, 3, rng)
        q, tallies = protocol.sample_shots_two_copy(seq, np.eye(4), spam, R, rng)
        assert q == 1.0 and tallies == {-1: 0, 0: 0, 1: R}


def test_two_copy_shots_unbiased_and_within_variance(rng):
    lam = channels.random_cptp(2, 3, rng)
    spam = protocol.perturbed_two_copy_spam(2, 0.2, rng)
    seq = protocol.sample_sequence(1, 3, rng)
    exact = protocol.sequence_purity_two_copy(seq, lam, spam)
    R = 100
    ests = np.array([protocol.sample_shots_two_copy(seq, lam, spam, R, rng)[0] for _ in range(4000)])
    se = ests.std(ddof=1) / np.sqrt(len(ests))
    assert abs(ests.mean() - exact) < 3 * se
    assert ests.var(ddof=1) <= 1 / (2 * R) * 1.1


def test_single_copy_corrected_estimator(rng):
    lam = channels.random_cptp(2, 3, rng)
    spam = protocol.perturbed_single_copy_spam(2, 0.1, rng)
    seq = protocol.sample_sequence(1, 2, rng)
    exact = protocol.sequence_purity_single_copy(seq, lam, spam)
    R = 50
    res = np.array([protocol.single_copy_estimates(seq, lam, spam, R, rng) for _ in range(2000)])
    corr, naive = res[:, 0], res[:, 1]
    assert np.all(naive >= corr)
    se = corr.std(ddof=1) / np.sqrt(len(corr))
    assert abs(corr.mean() - exact) < 3 * se
    with pytest.raises(ValueError):
        protocol.sample_shots_single_copy(seq, lam, spam, 1, rng)


def test_single_copy_deterministic_setting_has_no_correction():
    ideal = protocol.ideal_single_copy_spam(2)
    trivial_e = np.array([np.eye(2)] * 3)
    spam = protocol.SingleCopySpam(ideal.rho, ideal.rho_hat, trivial_e)
    rng = np.random.default_rng(3)
    seq = protocol.sample_sequence(1, 2, rng)
    corr, naive = protocol.single_copy_estimates(seq, np.eye(4), spam, 10, rng)
    assert corr == naive == 0.0


def test_invalid_probabilities_raise():
    rho, rho_hat, e = protocol.ideal_two_copy_operators(2)
    spam = protocol.TwoCopySpam(rho, rho_hat, e)
    bad = np.eye(4)
    bad[1, 0] = 0.5
    seq = [clifford.identity(1)]
    bad[1:, 1:] *= 1.5
    with pytest.raises(ValueError):
        protocol.sample_shots_two_copy(seq, bad, spam, 10, np.random.default_rng(0))


def test_law_of_total_variance(rng):
    lam = channels.mix_with_identity(channels.random_cptp(2, 4, rng), 0.3)
    spam = protocol.perturbed_two_copy_spam(2, 0.3, rng)
    R, n = 20, 3000
    est, within, exact = [], [], []
    for _ in range(n):
        seq = protocol.sample_sequence(1, 2, rng)
        a, b = protocol.two_copy_probabilities(seq, lam, spam)
        est.append(protocol.sample_shots_two_copy(seq, lam, spam, R, rng)[0])
        within.append((a * (1 - a) + b * (1 - b)) / R)
        exact.append(protocol.sequence_purity_two_copy(seq, lam, spam))
    total = np.var(est, ddof=1)
    predicted = np.mean(within) + np.var(exact, ddof=1)
    assert abs(total - predicted) < 0.1 * predicted


def test_run_experiment_identity():
    cfg = protocol.ProtocolConfig(q=1, lengths=[1, 3, 5], n_sequences=10, seed=2)
    ds = protocol.run_experiment(cfg, np.eye(4), protocol.ideal_two_copy_spam(2))
    assert all(len(v) == 10 for v in ds.samples.values())
    assert np.allclose(np.concatenate(list(ds.samples.values())), 1)


def test_run_experiment_deterministic_and_round_trip(rng):
    lam = channels.random_cptp(2, 2, rng)
    spam = protocol.perturbed_two_copy_spam(2, 0.1, rng)
    cfg = protocol.ProtocolConfig(q=1, lengths=[1, 4], n_sequences=[5, 3], shots=20, seed=9)
    a = protocol.run_experiment(cfg, lam, spam)
    b = protocol.run_experiment(cfg, lam, spam)
    assert a.to_json() == b.to_json()
    assert a.tallies is not None and len(a.tallies[4]) == 3
    back = protocol.ExperimentDataset.from_json(a.to_json())
    assert back.samples == a.samples and back.tallies == a.tallies
    csv_back = protocol.ExperimentDataset.from_csv(a.to_csv())
    assert csv_back.samples == a.samples and csv_back.n_shots == 20
    assert json.loads(a.to_json())["config"]["seed"] == 9


def test_samples_independent_of_order():
    lam = channels.depolarizing(0.9, 2)
    spam = protocol.perturbed_two_copy_spam(2, 0.1, np.random.default_rng(0))
    one = protocol.run_experiment(protocol.ProtocolConfig(q=1, lengths=[2, 6], n_sequences=4, seed=1), lam, spam)
    two = protocol.run_experiment(protocol.ProtocolConfig(q=1, lengths=[6], n_sequences=4, seed=1), lam, spam)
    assert one.samples[6] == two.samples[6]


def test_protocol_config_validation():
    with pytest.raises(ValueError):
        protocol.ProtocolConfig(q=1, lengths=[0])
    with pytest.raises(ValueError):
        protocol.ProtocolConfig(q=1, implementation="single_copy", shots=1)
    with pytest.raises(ValueError):
        protocol.ProtocolConfig(q=3)
    with pytest.raises(ValueError):
        protocol.ProtocolConfig(q=1, lengths=[1, 2], n_sequences=[1])
    cfg = protocol.ProtocolConfig(q=1, implementation="single_copy")
    with pytest.raises(ValueError):
        protocol.run_experiment(cfg, np.eye(4), protocol.ideal_two_copy_spam(2))


def test_single_copy_run(rng):
    cfg = protocol.ProtocolConfig(q=1, implementation="single_copy", lengths=[1, 2], n_sequences=3, shots=5, seed=4)
    ds = protocol.run_experiment(cfg, channels.depolarizing(0.95, 2), protocol.ideal_single_copy_spam(2))
    assert sorted(ds.samples) == [1, 2] and ds.tallies is None


def test_noise_presets(rng):
    assert np.array_equal(protocol.channel_from_preset("identity", 1, rng), np.eye(4))
    assert np.isclose(channels.unitarity(protocol.channel_from_preset("depolarizing", 1, rng, p=0.9)), 0.81)
    lam = protocol.channel_from_preset("identity_mix", 1, rng, target_u=0.98)
    assert abs(channels.unitarity(lam) - 0.98) < 1e-9
    lam = protocol.channel_from_preset("unital_mix", 2, rng, n_terms=2, eta=0.1)
    assert channels.is_cptp(lam) and np.allclose(lam[1:, 0], 0)
    with pytest.raises(ValueError):
        protocol.channel_from_preset("nope", 1, rng)
