"""Extrapolating a sequence of estimates to zero radius.

The model is ``I(r) = I_inf + c * r**p`` with ``p`` confined to a bracket
(``[1, 4]`` by default). Only convergent sequences get a value: when the fit
is poor, or the smallest radius is still far from the fitted limit, the
report says so through ``converged`` and nothing further is invented.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.optimize import least_squares

from .montecarlo import Estimate


class ExtrapolationError(RuntimeError):
    """A limit was required but the sequence did not converge."""


@dataclass(frozen=True)
class LimitReport:
    radii: tuple[float, ...]
    estimates: tuple[Estimate, ...]
    extrapolated_value: float
    extrapolated_stderr: float
    fit_exponent: float  # nan when the sequence is constant
    fit_coefficient: float
    residual: float
    converged: bool

    def as_dict(self) -> dict:
        return {
            "radii": list(self.radii),
            "estimates": [e.as_dict() for e in self.estimates],
            "extrapolated_value": self.extrapolated_value,
            "extrapolated_stderr": self.extrapolated_stderr,
            "fit_exponent": None if math.isnan(self.fit_exponent) else self.fit_exponent,
            "fit_coefficient": self.fit_coefficient,
            "residual": self.residual,
            "converged": self.converged,
        }


def _as_estimate(x: Union[Estimate, float]) -> Estimate:
    return x if isinstance(x, Estimate) else Estimate.exact(float(x))


def limit_estimate(
    radii: Sequence[float],
    estimates: Sequence[Union[Estimate, float]],
    tolerance: float = 0.01,
    p_bounds: tuple[float, float] = (1.0, 4.0),
) -> LimitReport:
    """Fit ``I_inf + c r^p`` and report the ``r -> 0`` value.

    Points are weighted by their inverse standard errors when all are
    positive. The limit's standard error comes from the fit covariance,
    inflated by ``sqrt(chi2 / dof)`` when the model misfits the data.

    ``converged`` requires the RMS fit residual to be at most ``tolerance`` and
    the distance of each estimate from the fitted limit to shrink along the
    schedule (each gap at most the previous one plus three combined standard
    errors). An oscillating or receding sequence is never given a limit.
    """
    r = np.asarray(radii, dtype=float)
    ests = tuple(_as_estimate(e) for e in estimates)
    if r.ndim != 1 or r.size < 3:
        raise ValueError("need at least three radii")
    if r.size != len(ests):
        raise ValueError("one estimate per radius required")
    if np.any(r <= 0) or np.any(np.diff(r) >= 0):
        raise ValueError("radii must be positive and strictly decreasing")
    p_lo, p_hi = p_bounds
    if not 0 < p_lo < p_hi:
        raise ValueError(f"bad exponent bounds {p_bounds}")

    y = np.array([e.value for e in ests])
    s = np.array([e.stderr for e in ests])
    if np.all(s > 0):
        w = 1.0 / s
    elif np.any(s > 0):
        w = 1.0 / np.where(s > 0, s, s[s > 0].min())
    else:
        w = np.ones_like(y)

    if np.ptp(y) == 0.0:
        limit_err = float(np.sqrt(1.0 / np.sum(w**2))) if np.any(s > 0) else 0.0
        return LimitReport(tuple(map(float, r)), ests, float(y[0]), limit_err, math.nan, 0.0, 0.0, True)

    # coarse scan over p with the linear parameters solved exactly, then refine all three
    best = None
    for p in np.linspace(p_lo, p_hi, 301):
        A = np.column_stack([np.ones_like(r), r**p]) * w[:, None]
        coef, *_ = np.linalg.lstsq(A, y * w, rcond=None)
        cost = float(np.sum((A @ coef - y * w) ** 2))
        if best is None or cost < best[0]:
            best = (cost, p, coef)
    _, p0, coef0 = best

    def resid(theta: np.ndarray) -> np.ndarray:
        return (theta[0] + theta[1] * r ** theta[2] - y) * w

    fit = least_squares(
        resid,
        x0=[coef0[0], coef0[1], p0],
        bounds=([-np.inf, -np.inf, p_lo], [np.inf, np.inf, p_hi]),
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
        max_nfev=2000,
    )
    i_inf, c, p = (float(v) for v in fit.x)
    if float(np.sum(fit.fun**2)) > best[0]:
        i_inf, c, p = float(coef0[0]), float(coef0[1]), float(p0)

    model = i_inf + c * r**p
    residual = float(np.sqrt(np.mean((model - y) ** 2)))

    if np.any(s > 0):
        J = np.column_stack([np.ones_like(r), r**p, c * r**p * np.log(r)]) * w[:, None]
        cov = np.linalg.pinv(J.T @ J)
        dof = r.size - 3
        chi2 = float(np.sum(((model - y) * w) ** 2))
        scale = max(1.0, chi2 / dof) if dof > 0 else 1.0
        limit_err = float(np.sqrt(max(cov[0, 0], 0.0) * scale))
    else:
        limit_err = 0.0

    gaps = np.abs(y - i_inf)
    slack = 3.0 * np.hypot(s[:-1], s[1:]) + 1e-12 * np.maximum(1.0, np.abs(y[1:]))
    approaching = bool(np.all(gaps[1:] <= gaps[:-1] + slack))
    converged = bool(residual <= tolerance and approaching)
    return LimitReport(tuple(map(float, r)), ests, i_inf, limit_err, p, c, residual, converged)
