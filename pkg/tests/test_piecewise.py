import numpy as np
from hypothesis import given, strategies as st

from normadd import piecewise as pw
from normadd.operators import PLHomeo

XS = np.linspace(-8, 8, 1601)


def ev(p, xs=XS):
    return np.asarray(pw.sample(p, xs), dtype=float)


@st.composite
def pl_points(draw, lo=0.5, hi=4.0):
    k = draw(st.integers(2, 5))
    start = draw(st.floats(-4, 0))
    steps = draw(st.lists(st.floats(0.2, 2.0), min_size=k - 1, max_size=k - 1))
    xs = [start]
    for s in steps:
        xs.append(xs[-1] + s)
    vs = draw(st.lists(st.floats(lo, hi), min_size=k, max_size=k))
    return xs, vs


def tails(xs, vs):
    return pw.from_points(xs, vs, vs[0], vs[-1])


def ref(xs, vs, at=XS):
    return np.interp(at, xs, vs)


def test_constant_and_evaluate():
    c = pw.constant(2.5)
    assert pw.evaluate(c, -100.0) == 2.5
    assert pw.evaluate(c, 100.0) == 2.5
    p = pw.from_points([0, 1, 2], [0, 1, 0], 0.0, 0.0)
    assert pw.evaluate(p, 0.5) == 0.5
    assert pw.evaluate(p, 5.0) == 0.0


@given(pl_points(), pl_points())
def test_add_multiply_match_sampling(a, b):
    p, q = tails(*a), tails(*b)
    assert np.allclose(ev(pw.add(p, q)), ref(*a) + ref(*b), rtol=1e-12, atol=1e-12)
    assert np.allclose(ev(pw.multiply(p, q)), ref(*a) * ref(*b), rtol=1e-12, atol=1e-12)
    assert np.allclose(ev(pw.subtract(p, q)), ref(*a) - ref(*b), rtol=1e-12, atol=1e-11)


@given(pl_points())
def test_reciprocal_is_rational(a):
    r = pw.reciprocal(tails(*a))
    assert np.allclose(ev(r), 1.0 / ref(*a), rtol=1e-12)
    assert np.allclose(ev(pw.multiply(r, tails(*a))), 1.0, rtol=1e-11)


@given(pl_points(), pl_points())
def test_min_max_match_sampling(a, b):
    p, q = tails(*a), tails(*b)
    assert np.allclose(ev(pw.minimum(p, q)), np.minimum(ref(*a), ref(*b)), atol=1e-12)
    assert np.allclose(ev(pw.maximum(p, q)), np.maximum(ref(*a), ref(*b)), atol=1e-12)


@given(pl_points())
def test_value_range_and_sup(a):
    p = tails(*a)
    lo, hi = pw.value_range(p)
    assert abs(lo - min(a[1])) < 1e-12
    assert abs(hi - max(a[1])) < 1e-12
    assert abs(pw.sup_abs(p) - max(a[1])) < 1e-12


def test_rational_range_found_inside_pieces():
    # 1/(1 + x^2)-like bump from a reciprocal of a PL tent offset
    p = pw.reciprocal(pw.from_points([-1, 0, 1], [2, 1, 2], 2.0, 2.0))
    lo, hi = pw.value_range(p)
    assert abs(hi - 1.0) < 1e-12
    assert abs(lo - 0.5) < 1e-12


@given(pl_points())
def test_pullback_composes(a):
    tau = PLHomeo([-2.0, 0.0, 3.0], [-1.0, 0.5, 1.0], 2.0, 0.5)
    p = tails(*a)
    got = ev(pw.pullback(p, tau))
    want = np.array([pw.evaluate(p, tau(y)) for y in XS])
    assert np.allclose(got, want, atol=1e-12)


def test_positive_intervals():
    p = pw.from_points([0, 1, 2, 3, 4], [0, 1, 0, 2, 0], 0.0, 0.0)
    assert pw.positive_intervals(p) == [(0.0, 2.0), (2.0, 4.0)]
