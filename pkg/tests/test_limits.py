import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alrestrict.limits import limit_estimate
from alrestrict.montecarlo import Estimate

RADII = (0.8, 0.4, 0.2, 0.1)


def test_synthetic_power_law_recovered():
    rep = limit_estimate(RADII, [2 + 3 * r**2 for r in RADII])
    assert rep.extrapolated_value == pytest.approx(2.0, abs=1e-9)
    assert rep.fit_exponent == pytest.approx(2.0, abs=1e-6)
    assert rep.residual < 1e-9
    assert rep.converged


@given(
    i_inf=st.floats(-5, 5),
    c=st.floats(0.1, 5).flatmap(lambda v: st.sampled_from([v, -v])),
    p=st.floats(1.0, 4.0),
)
@settings(max_examples=50, deadline=None)
def test_exact_on_power_laws(i_inf, c, p):
    radii = (0.8, 0.6, 0.4, 0.3, 0.2, 0.1)
    rep = limit_estimate(radii, [i_inf + c * r**p for r in radii])
    assert rep.residual < 1e-9
    assert rep.extrapolated_value == pytest.approx(i_inf, abs=1e-6)


def test_constant_sequence():
    rep = limit_estimate(RADII, [0.37] * 4)
    assert rep.extrapolated_value == 0.37
    assert math.isnan(rep.fit_exponent)
    assert rep.converged
    assert rep.as_dict()["fit_exponent"] is None


def test_oscillating_sequence_not_converged():
    rep = limit_estimate(RADII, [1.0, 2.0, 1.0, 2.0])
    assert not rep.converged


def test_receding_sequence_not_converged():
    # moves away from its fitted value as r shrinks: the fit is forced into a poor compromise
    ests = [Estimate(v, 0.001, 1000) for v in (1.0, 1.0, 1.0, 1.5)]
    assert not limit_estimate(RADII, ests).converged


def test_noisy_quadratic_with_stderr():
    rng = np.random.default_rng(0)
    s = 0.002
    ests = [Estimate(1 - 0.625 * r * r + rng.normal(0, s), s, 10**5) for r in RADII]
    rep = limit_estimate(RADII, ests)
    assert rep.converged
    assert abs(rep.extrapolated_value - 1.0) <= 3 * rep.extrapolated_stderr + 1e-3
    assert rep.extrapolated_stderr > 0


def test_plain_floats_accepted():
    rep = limit_estimate([3.0, 2.0, 1.0], [5.0, 3.0, 2.0])
    assert all(e.stderr == 0 for e in rep.estimates)
    assert isinstance(rep.converged, bool)
    assert all(type(r) is float for r in rep.radii)


@pytest.mark.parametrize(
    "radii, values",
    [
        ((0.8, 0.4), (1, 1)),
        ((0.4, 0.8, 0.2), (1, 1, 1)),
        ((0.8, 0.4, 0.4), (1, 1, 1)),
        ((0.8, 0.4, -0.1), (1, 1, 1)),
        ((0.8, 0.4, 0.2), (1, 1)),
    ],
)
def test_invalid_inputs(radii, values):
    with pytest.raises(ValueError):
        limit_estimate(radii, values)
