import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from normadd import cone
from normadd.cone import DiscreteFunction, FiniteDiscrete, PLFunction, PLLine, rational
from normadd.errors import BadRange, InvalidInput, OracleFailure
from normadd.operators import (DiscreteWeights, MapOracle, PLHomeo, PLWeight, Permutation,
                               WeightedCompositionOp, apply, as_oracle, compose, identity_op,
                               invert, random_op, validate_op)
from normadd.verification import Sampler

LINE = PLLine()


def test_swap_example(ab, swap_op):
    f = DiscreteFunction(ab, (1, 3))
    Tf = apply(swap_op, f)
    assert Tf == DiscreteFunction(ab, (6, "1/2"))
    S = invert(swap_op)
    assert S.tau.targets == ("b", "a")
    assert S.h.values == (rational(2), rational("1/2"))
    assert apply(S, Tf) == f


def test_swap_composed_with_itself(ab, swap_op):
    c = compose(swap_op, swap_op)
    assert c.tau.is_identity()
    assert c.h.values == (1, 1)


def test_identity_laws(ab, swap_op):
    I = identity_op(ab)
    f = DiscreteFunction(ab, ("2/7", 5))
    assert apply(I, f) == f
    assert apply(swap_op, cone.zero(ab)) == cone.zero(ab)
    assert invert(I) == I
    assert compose(I, swap_op) == swap_op
    assert compose(swap_op, invert(swap_op)) == I
    assert invert(swap_op).h_min == 1 / swap_op.h_max


def test_line_identity_and_inverse_extremes():
    I = identity_op(LINE)
    f = cone.tent(0, 1, 2, 3.0)
    assert apply(I, f) == f
    op = random_op(3, LINE, LINE, (0.5, 4.0))
    assert abs(invert(op).h_min - 1 / op.h_max) < 1e-12
    assert abs(invert(op).h_max - 1 / op.h_min) < 1e-12


def test_line_apply_matches_formula():
    op = random_op(11, LINE, LINE, (0.5, 4.0))
    f = PLFunction((-2, -1, 0.5, 2), (0, 3, 1, 0))
    Tf = apply(op, f)
    for y in np.linspace(-6, 6, 301):
        assert abs(Tf(y) - op.h(y) * f(op.tau(y))) < 1e-12


def test_invalid_representations(ab):
    with pytest.raises(InvalidInput):
        Permutation(ab, ab, ("a", "a"))
    with pytest.raises(InvalidInput):
        DiscreteWeights(ab, (1, 0))
    with pytest.raises(InvalidInput):
        PLHomeo([0, 1, 2], [0, 2, 1], 1.0, 1.0)
    with pytest.raises(InvalidInput):
        PLHomeo([0, 1], [0, 1], 1.0, -1.0)
    with pytest.raises(BadRange):
        random_op(0, ab, ab, (2, 1))


def test_oracle_counts_and_determinism(ab, swap_op):
    o = as_oracle(swap_op)
    f = DiscreteFunction(ab, (1, 3))
    for _ in range(5):
        assert o(f) == apply(swap_op, f)
    assert o.query_count == 5
    assert o(f).values == o(f).values


def test_oracle_failure_is_wrapped(ab):
    o = MapOracle(lambda f: 1 / 0, ab, ab)
    with pytest.raises(OracleFailure):
        o(cone.zero(ab))


def test_random_op_deterministic_and_valid():
    for seed in range(1000):
        X = FiniteDiscrete.of_size(random.Random(seed).randint(1, 12))
        op = random_op(seed, X, X)
        assert validate_op(op)
        assert rational("1/10") <= op.h_min and op.h_max <= 10
    X = FiniteDiscrete.of_size(5)
    assert random_op(4, X, X) == random_op(4, X, X)
    assert set(random_op(4, X, X, (1, 1)).h.values) == {1}
    assert validate_op(random_op(4, LINE, LINE, reversing=True))


@given(st.integers(0, 10**6), st.integers(1, 20))
def test_discrete_inverse_exact(seed, n):
    X = FiniteDiscrete.of_size(n)
    op = random_op(seed, X, X)
    S = invert(op)
    s = Sampler(X, seed)
    rng = s.rng("t")
    for _ in range(5):
        f = s.function(rng)
        assert apply(S, apply(op, f)) == f
        assert apply(op, apply(S, f)) == f
    assert compose(S, op) == identity_op(X)


@given(st.integers(0, 10**6), st.booleans())
def test_line_inverse_both_directions(seed, reversing):
    op = random_op(seed, LINE, LINE, (0.5, 4.0), reversing=reversing)
    S = invert(op)
    s = Sampler(LINE, seed)
    rng = s.rng("t")
    for _ in range(3):
        f = s.function(rng)
        assert cone.sup_distance(apply(S, apply(op, f)), f) <= 1e-9
        assert cone.sup_distance(apply(op, apply(S, f)), f) <= 1e-9


def test_homeo_inverse_and_samples():
    tau = PLHomeo([-1.0, 0.0, 2.0], [0.0, 1.0, 2.0], 2.0, 0.5)
    inv = tau.inverse()
    for y in np.linspace(-10, 10, 101):
        assert abs(inv(tau(y)) - y) < 1e-12
    assert PLHomeo.from_samples([0.0, 1.0, 2.0], [1.0, 3.0, 4.0])(1.5) == 3.5


def test_line_weight_constant_tails():
    h = PLWeight([0.0, 1.0], [1.0, 3.0])
    assert h(-50) == 1.0 and h(50) == 3.0
    assert h.h_min == 1.0 and h.h_max == 3.0
    with pytest.raises(InvalidInput):
        WeightedCompositionOp(LINE, LINE, PLHomeo.identity(), PLWeight([0.0, 1.0], [0.0, 1.0]))
