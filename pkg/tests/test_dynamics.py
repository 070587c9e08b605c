import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcmullen import (
    INF, CycleKind, Exponents, MapParams, critical_points, critical_values, derivative, escape_radius,
    evaluate, find_cycle, iterate, real_levels,
)

PAIRS = [(2, 3), (3, 3), (2, 4), (4, 5), (3, 2)]


@pytest.mark.parametrize("l,m", [(1, 2), (2, 2), (1, 5), (0, 3)])
def test_exponent_constraint(l, m):
    with pytest.raises(ValueError):
        Exponents(l, m)


def test_lambda_must_be_nonzero():
    with pytest.raises(ValueError):
        MapParams.of(0)


def test_degree_and_radii():
    f = MapParams.of(0.02, 3, 3)
    assert f.degree == 6
    assert f.crit_radius == pytest.approx(0.02 ** (1 / 6))
    assert escape_radius(f) == pytest.approx(math.sqrt(2.02))
    # for m >= 2 the radius never drops below 1
    assert MapParams.of(1e-9, 2, 5).escape_radius >= 1.0


def test_poles_go_to_infinity():
    f = MapParams.of(0.1)
    assert evaluate(f, 0) == INF
    assert evaluate(f, INF) == INF
    assert evaluate(f, complex(math.nan, 0)) == INF
    out = evaluate(f, np.array([0, 1, INF]))
    assert out[0] == INF and out[2] == INF and out[1] == pytest.approx(1.1)
    with pytest.raises(ValueError, match="pole"):
        derivative(f, 0)


@pytest.mark.parametrize("l,m", PAIRS)
def test_critical_points_are_critical(l, m):
    f = MapParams(0.3 - 0.2j, Exponents(l, m))
    pts = critical_points(f)
    assert len(pts) == l + m
    for w in pts:
        assert abs(derivative(f, w)) < 1e-12 * max(1, abs(w) ** (m - 1))
        assert abs(w) == pytest.approx(f.crit_radius, rel=1e-12)
    # all critical values have the same modulus
    mods = np.abs(critical_values(f))
    assert np.ptp(mods) < 1e-12 * mods.max()


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(PAIRS), st.floats(-3, 3), st.floats(-3, 3),
       st.floats(0, 2 * math.pi), st.floats(1.0, 50.0))
def test_escape_radius_doubles(lm, a, b, t, scale):
    lam = complex(a, b)
    if lam == 0:
        return
    f = MapParams(lam, Exponents(*lm))
    z = f.escape_radius * scale * cmath.exp(1j * t)
    assert abs(evaluate(f, z)) >= 2 * abs(z) * (1 - 1e-12)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(PAIRS), st.floats(-1, 1), st.floats(-1, 1), st.floats(-2, 2), st.floats(-2, 2))
def test_rotation_equivariance(lm, a, b, x, y):
    lam, z = complex(a, b), complex(x, y)
    if lam == 0 or z == 0:
        return
    l, m = lm
    f = MapParams(lam, Exponents(l, m))
    w = cmath.exp(2j * math.pi / (l + m))
    lhs, rhs = evaluate(f, w * z), w ** m * evaluate(f, z)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_iterate_escape_and_pole():
    f = MapParams.of(100)
    tr = iterate(f, 20, 50)
    assert tr.escape_index == 0 and not tr.bounded
    tr = iterate(MapParams.of(0.01), 0, 5)
    assert tr.hit_pole and not tr.bounded
    with pytest.raises(ValueError):
        iterate(f, 1, 0)


def test_superattracting_cycle():
    f = MapParams.of(0.02749275)
    v = critical_values(f)[0]
    rep = find_cycle(f, iterate(f, v, 5000))
    assert rep is not None
    assert rep.period == 3
    assert rep.kind is CycleKind.SUPERATTRACTING
    # the polished point is periodic
    z = rep.representative
    for _ in range(3):
        z = evaluate(f, z)
    assert abs(z - rep.representative) < 1e-10


def test_find_cycle_rejects_escaping_seed():
    f = MapParams.of(100)
    with pytest.raises(ValueError):
        find_cycle(f, iterate(f, 10, 10))


def test_cycle_kind_thresholds():
    assert CycleKind.from_multiplier(0) is CycleKind.SUPERATTRACTING
    assert CycleKind.from_multiplier(0.5) is CycleKind.ATTRACTING
    assert CycleKind.from_multiplier(1.0) is CycleKind.INDIFFERENT
    assert CycleKind.from_multiplier(2.0) is CycleKind.REPELLING


@pytest.mark.parametrize("lam", [0.02, 0.02749275, 0.05])
def test_real_levels(lam):
    f = MapParams.of(lam)
    lv = real_levels(f)
    g = lambda x: x ** 3 + lam / x ** 3
    assert 0 < lv.p < f.crit_radius < lv.q
    assert g(lv.q) == pytest.approx(lv.q, abs=1e-13)
    assert g(lv.p) == pytest.approx(lv.q, abs=1e-13)


def test_real_levels_preconditions():
    with pytest.raises(ValueError, match="absent"):
        real_levels(MapParams.of(100))
    with pytest.raises(ValueError):
        real_levels(MapParams.of(0.02j))
    with pytest.raises(ValueError):
        real_levels(MapParams.of(0.02, 2, 3))
