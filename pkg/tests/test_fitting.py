import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qrepeater.acceptance import FIT_SEED, synthetic_decay_data
from qrepeater.decoherence import REFERENCE_DECAY, RetrievalDecayModel, SingleExpModel
from qrepeater.errors import DegenerateDataError
from qrepeater.fitting import (
    DecaySample,
    double_exp,
    fit_double_exp,
    fit_single_exp,
    format_report,
    jacobian_check,
    read_decay_csv,
)

TRUE_PARAMS = np.array([0.158, 0.13e-3, 0.598, 0.285])


def exact_single(A=1.0, tau=0.51, n=20):
    t = np.linspace(0.01, 1.5, n)
    return [DecaySample(float(x), float(A * np.exp(-x / tau))) for x in t]


def exact_double(params=TRUE_PARAMS, n=30):
    t = np.geomspace(1e-5, 0.5, n)
    return [DecaySample(float(x), float(v)) for x, v in zip(t, double_exp(params, t))]


def test_single_noiseless_recovery():
    res = fit_single_exp(exact_single(), SingleExpModel(0.8, 0.3))
    assert res.converged
    np.testing.assert_allclose(res.params, [1.0, 0.51], rtol=1e-6)


def test_single_seeded_without_init():
    res = fit_single_exp(exact_single())
    np.testing.assert_allclose(res.params, [1.0, 0.51], rtol=1e-6)


def test_single_noisy_within_two_sigma():
    rng = np.random.default_rng(3)
    t = np.linspace(0.01, 1.5, 20)
    y = np.exp(-t / 0.51) * (1 + 0.03 * rng.standard_normal(t.size))
    data = [DecaySample(float(a), float(b), float(0.03 * np.exp(-a / 0.51))) for a, b in zip(t, y)]
    res = fit_single_exp(data)
    assert abs(res.params[1] - 0.51) < 2 * res.stderr[1]


def test_single_point_is_degenerate():
    with pytest.raises(DegenerateDataError):
        fit_single_exp([DecaySample(0.1, 0.5)])
    with pytest.raises(DegenerateDataError):
        fit_single_exp([])


def test_double_noiseless_recovery():
    res = fit_double_exp(exact_double(), RetrievalDecayModel(0.2, 0.2e-3, 0.5, 0.2))
    assert res.converged and not res.unidentifiable
    np.testing.assert_allclose(res.params, TRUE_PARAMS, rtol=1e-6)


def test_double_seeded_recovery():
    res = fit_double_exp(exact_double())
    np.testing.assert_allclose(res.params, TRUE_PARAMS, rtol=1e-6)


def test_double_reorders_components():
    init = RetrievalDecayModel(0.5, 0.2, 0.2, 0.3)
    res = fit_double_exp(exact_double(), init)
    assert res.params[1] <= res.params[3]


def test_double_noisy_pulls():
    data = synthetic_decay_data(seed=FIT_SEED)[1]
    res = fit_double_exp(data)
    pulls = np.abs(res.params - TRUE_PARAMS) / res.stderr
    assert np.all(pulls < 2)


def test_double_noisy_coverage_across_seeds():
    # each parameter should land within 2 sigma in roughly 95% of seeds
    hits = np.zeros(4)
    seeds = range(40)
    for seed in seeds:
        res = fit_double_exp(synthetic_decay_data(seed=seed)[1])
        hits += np.abs(res.params - TRUE_PARAMS) < 2 * res.stderr
    assert np.all(hits / len(seeds) >= 0.8)


def test_double_on_single_exponential():
    t = np.geomspace(1e-5, 0.5, 30)
    data = [DecaySample(float(x), float(0.6 * np.exp(-x / 0.3))) for x in t]
    res = fit_double_exp(data)
    k = 0 if res.params[0] < res.params[2] else 2
    assert res.unidentifiable or res.params[k] < 2 * res.stderr[k]


def test_double_needs_two_decades():
    t = np.linspace(0.1, 0.5, 10)
    with pytest.raises(DegenerateDataError):
        fit_double_exp([DecaySample(float(x), 0.5) for x in t])


def test_jacobian_checks():
    assert jacobian_check("double", TRUE_PARAMS, np.geomspace(1e-5, 0.5, 10)) < 1e-6
    assert jacobian_check("single", [0.7, 0.51], np.linspace(0, 2, 10)) < 1e-6
    assert jacobian_check("double", TRUE_PARAMS, []) == 0.0


@given(st.floats(1e-3, 10), st.floats(1e-4, 10))
def test_jacobian_single_any_params(A, tau):
    assert jacobian_check("single", [A, tau], np.linspace(0, 3 * tau, 12)) < 1e-6


def test_chi_square_history_monotone():
    res = fit_double_exp(synthetic_decay_data(seed=5)[1])
    h = res.chi_square_history
    assert all(b <= a for a, b in zip(h, h[1:]))


def test_refit_converges_fast():
    res = fit_double_exp(synthetic_decay_data(seed=1)[1])
    p = res.params
    again = fit_double_exp(synthetic_decay_data(seed=1)[1], RetrievalDecayModel(*p))
    assert again.iterations <= 2


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.permutations(range(30)))
def test_covariance_invariant_under_reordering(seed, order):
    data = synthetic_decay_data(seed=seed)[1]
    a = fit_double_exp(data, REFERENCE_DECAY)
    b = fit_double_exp([data[i] for i in order], REFERENCE_DECAY)
    np.testing.assert_allclose(np.diag(b.covariance), np.diag(a.covariance), rtol=1e-6)
    assert np.allclose(a.covariance, a.covariance.T)
    assert np.all(np.linalg.eigvalsh(a.covariance) >= -1e-12 * np.abs(a.covariance).max())


def test_decay_csv_round_trip(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("t_s,value,sigma\n0.0,0.75,0.01\n0.1,0.5,\n")
    rows = read_decay_csv(p)
    assert rows[1] == DecaySample(0.1, 0.5, 1.0)


def test_decay_csv_errors(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("t,value,sigma\n")
    with pytest.raises(ValueError):
        read_decay_csv(p)
    p.write_text("t_s,value,sigma\n0.1,0.5,-1\n")
    with pytest.raises(ValueError):
        read_decay_csv(p)


def test_report_format():
    res = fit_double_exp(exact_double())
    text = format_report("double", res)
    keys = [line.split(" = ")[0] for line in text.splitlines()]
    assert keys[:2] == ["model", "chi1"]
    assert "unidentifiable" in keys
    assert text.endswith("\n")
