import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from urbench import fitting


def test_exact_recovery():
    pts = [(m, 0.9 * 0.98 ** (m - 1)) for m in (2, 10, 50)]
    fit = fitting.fit_decay(pts)
    assert abs(fit.u_hat - 0.98) < 1e-12 and abs(fit.B_hat - 0.9) < 1e-12
    assert np.allclose(fit.residuals, 0, atol=1e-12)
    assert np.isclose(fit.r_squared, 1)
    assert np.allclose(fit.predict([2, 10]), [p[1] for p in pts[:2]])


def test_single_point_rejected():
    with pytest.raises(ValueError):
        fitting.fit_decay([(3, 0.5)])
    with pytest.raises(ValueError):
        fitting.fit_decay([(3, 0.5), (3, 0.4)])


def test_nonpositive_points_dropped():
    pts = [(1, 0.9), (5, 0.9 * 0.95**4), (400, -0.01)]
    with pytest.warns(fitting.NonpositiveMeanWarning):
        fit = fitting.fit_decay(pts)
    assert fit.dropped == [400] and np.isclose(fit.u_hat, 0.95)
    with pytest.warns(fitting.NonpositiveMeanWarning), pytest.raises(ValueError):
        fitting.fit_decay([(1, 0.9), (2, 0.0)])


def test_weights():
    pts = [(1, 1.0), (2, 0.9), (3, 0.5)]
    w_fit = fitting.fit_decay(pts, weights=[1, 1, 0])
    assert np.isclose(w_fit.u_hat, 0.9)
    with pytest.raises(ValueError):
        fitting.fit_decay(pts, weights=[1, 1])


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.tuples(st.integers(1, 100), st.floats(0.01, 1.0)), min_size=3, max_size=8, unique_by=lambda t: t[0]),
    st.floats(0.1, 10.0),
    st.randoms(use_true_random=False),
)
def test_scale_and_permutation(points, c, rnd):
    fit = fitting.fit_decay(points)
    scaled = fitting.fit_decay([(m, c * q) for m, q in points])
    assert np.isclose(scaled.u_hat, fit.u_hat, rtol=1e-9)
    assert np.isclose(scaled.B_hat, c * fit.B_hat, rtol=1e-9)
    shuffled = list(points)
    rnd.shuffle(shuffled)
    again = fitting.fit_decay(shuffled)
    assert np.isclose(again.u_hat, fit.u_hat, rtol=1e-12) and np.isclose(again.B_hat, fit.B_hat, rtol=1e-12)
