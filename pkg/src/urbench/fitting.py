"""Log-linear fit of the decay q_m = B u^(m-1)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


class NonpositiveMeanWarning(UserWarning):
    """Some per-length means were not positive and were left out of the fit."""


@dataclass
class DecayFit:
    u_hat: float
    B_hat: float
    residuals: list[float]
    r_squared: float
    lengths: list[int]
    dropped: list[int]

    def predict(self, m) -> np.ndarray:
        return self.B_hat * self.u_hat ** (np.asarray(m, dtype=float) - 1)

    def to_dict(self) -> dict:
        return {
            "u_hat": self.u_hat,
            "B_hat": self.B_hat,
            "residuals": self.residuals,
            "r_squared": self.r_squared,
            "lengths": self.lengths,
            "dropped": self.dropped,
        }


def fit_decay(points, weights=None) -> DecayFit:
    """Least squares on ln q_m = ln B + (m - 1) ln u.

    ``points`` is an iterable of (m, q_m).  Optional ``weights`` multiply the
    squared log residuals (use 1/variance of ln q_m for inverse-variance
    weighting).  Points with q_m <= 0 are dropped with a warning.
    """
    pts = [(int(m), float(q)) for m, q in points]
    w_all = np.ones(len(pts)) if weights is None else np.asarray(weights, dtype=float)
    if len(w_all) != len(pts):
        raise ValueError("weights must match the number of points")
    if np.any(w_all < 0):
        raise ValueError("weights must be nonnegative")
    dropped = [m for m, q in pts if q <= 0]
    if dropped:
        warnings.warn(f"dropping nonpositive means at m = {dropped}", NonpositiveMeanWarning, stacklevel=2)
    keep = [i for i, (_, q) in enumerate(pts) if q > 0]
    ms = np.array([pts[i][0] for i in keep], dtype=float)
    qs = np.array([pts[i][1] for i in keep])
    w = w_all[keep]
    if len(set(ms.tolist())) < 2:
        raise ValueError("need at least two distinct sequence lengths with positive means")
    y = np.log(qs)
    a = np.column_stack([np.ones_like(ms), ms - 1])
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(a * sw[:, None], y * sw, rcond=None)
    resid = y - a @ coef
    ybar = np.average(y, weights=w) if w.sum() > 0 else y.mean()
    ss_tot = float(np.sum(w * (y - ybar) ** 2))
    ss_res = float(np.sum(w * resid**2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(
        u_hat=float(np.exp(coef[1])),
        B_hat=float(np.exp(coef[0])),
        residuals=resid.tolist(),
        r_squared=r2,
        lengths=[int(m) for m in ms],
        dropped=dropped,
    )
