import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tivem.errors import VanishingAverageWarning
from tivem.fibre import FibreField, Strategy, element_direction, weight


def _weight_oracle(d, dc):
    with mpmath.workdps(30):
        return float((mpmath.pi / 2 + mpmath.atan(dc - d)) / (2 * mpmath.pi))


def test_weight_values():
    assert weight(10.0, 10.0) == 0.25
    assert weight(0.0, 10.0) == pytest.approx(0.48413724128472, abs=1e-13)
    assert weight(50.0, 10.0) == pytest.approx(0.003978, abs=1e-6)
    for d in (0.0, 3.5, 30.0, 50.0):
        assert weight(d, 10.0) == pytest.approx(_weight_oracle(d, 10.0), rel=1e-14)


def test_weight_strictly_decreasing():
    w = [weight(d) for d in range(61)]
    assert all(a > b for a, b in zip(w, w[1:]))


@given(d=st.floats(0.0, 200.0), dc=st.floats(0.5, 100.0))
def test_weight_bounded(d, dc):
    assert 0.0 < weight(d, dc) < 0.5


def test_field_values():
    s = math.sqrt(0.5)
    np.testing.assert_allclose(FibreField.constant(math.pi / 4).vectors([[3.0, 7.0]]), [[s, s]], atol=1e-15)
    np.testing.assert_allclose(FibreField("sinusoidal").vectors([[math.pi / 2, 0.0]]), [[1.0, 0.0]], atol=1e-15)
    np.testing.assert_allclose(FibreField("quartic-cook").vectors([[24.0, 5.0]]), [[1.0, 0.0]], atol=1e-15)
    np.testing.assert_allclose(FibreField("quartic-beam").vectors([[5.0, 0.0]]), [[1.0, 0.0]], atol=1e-15)


@settings(max_examples=50)
@given(x=st.floats(-50, 50), y=st.floats(-50, 50), kind=st.sampled_from(["quartic-cook", "quartic-beam", "sinusoidal"]))
def test_field_vectors_are_unit(x, y, kind):
    v = FibreField(kind).vectors([[x, y]])[0]
    assert math.hypot(*v) == pytest.approx(1.0, abs=1e-14)


def test_unknown_field_kind():
    with pytest.raises(ValueError):
        FibreField("spiral")


SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


@pytest.mark.parametrize("strategy", list(Strategy))
def test_constant_field_is_strategy_independent(strategy):
    a = element_direction(FibreField.constant(0.4), strategy, SQUARE.mean(0), SQUARE, 7)
    assert a.angle == pytest.approx(0.4, abs=1e-15)


def test_symmetric_element_nodal_average():
    # element symmetric about x = pi/2: tangents (1, +-2 cos delta) average to e1
    h = 0.3
    verts = np.array([[math.pi / 2 - h, 0], [math.pi / 2 + h, 0], [math.pi / 2 + h, 1], [math.pi / 2 - h, 1]])
    a = element_direction(FibreField("sinusoidal"), "nodal", verts.mean(0), verts, 5)
    assert a.ax == pytest.approx(1.0, abs=1e-14) and a.ay == pytest.approx(0.0, abs=1e-14)


def test_strategies_interpolate():
    verts = SQUARE * 0.8 + [0.2, 0.0]
    f = FibreField("sinusoidal")
    c = verts.mean(0)
    cen = element_direction(f, "centroid", c, verts, 5).angle
    nod = element_direction(f, "nodal", c, verts, 5).angle
    eq = element_direction(f, "equal", c, verts, 5).angle
    lo, hi = sorted((cen, nod))
    assert lo < eq < hi
    # VaryingWeight slides from near-centroid-ish (w -> 1/2) to nodal as d grows
    angs = [element_direction(f, "varying", c, verts, d).angle for d in range(1, 51)]
    assert all(lo - 1e-15 <= t <= hi + 1e-15 for t in angs)
    assert abs(angs[-1] - nod) < abs(angs[0] - nod)
    assert np.all(np.diff(np.abs(np.array(angs) - nod)) <= 1e-15)


def test_sign_alignment_of_nodal_vectors():
    # vectors near vertical: an unaligned sum of (e, 1) and (e, -1)-like flips would cancel
    f = FibreField("sinusoidal")
    verts = np.array([[-0.05, 0.0], [0.05, 0.0], [0.05, 1.0], [-0.05, 1.0]])
    a = element_direction(f, "nodal", verts.mean(0), verts, 5)
    assert abs(math.hypot(a.ax, a.ay) - 1.0) < 1e-14
    assert a.vector @ f.vectors([[0.0, 0.5]])[0] > 0.99


def test_vanishing_average_falls_back_to_centroid():
    class Crossed(FibreField):
        # centroid along e1, nodal vectors cancel in pairs
        def vectors(self, points):
            if len(np.atleast_2d(points)) == 1:
                return np.array([[1.0, 0.0]])
            return np.array([[0.0, 1.0], [0.0, -1.0], [0.0, 1.0], [0.0, -1.0]])

    f = Crossed("sinusoidal")
    with pytest.warns(VanishingAverageWarning):
        a = element_direction(f, "nodal", SQUARE.mean(0), SQUARE, 5)
    assert (a.ax, a.ay) == (1.0, 0.0)
