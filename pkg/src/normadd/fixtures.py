"""Named in-tree oracles: negative controls that break the hypotheses, and a
few canonical positive controls.

Negative controls live on discrete spaces, where they are exact.
"""

from __future__ import annotations

from . import cone
from .cone import FiniteDiscrete, Q0, rational
from .errors import InvalidInput
from .operators import (DiscreteWeights, MapOracle, PLWeight, WeightedCompositionOp,
                        apply, as_oracle, identity_op)


def _require_discrete(space, name):
    if not isinstance(space, FiniteDiscrete):
        raise InvalidInput(f"fixture {name!r} is defined on discrete spaces only")


def square_oracle(space):
    """``f -> f^2`` pointwise; on one point ``T(1+1) = 4`` while ``||T1 + T1|| = 2``."""
    _require_discrete(space, "square")
    return MapOracle(lambda f: cone.DiscreteFunction(space, [v * v for v in f.values]),
                     space, space, thread_safe=True, name="square")


def shift_oracle(space, c=1):
    """``f -> f + c`` (a constant bump); moves the zero function."""
    _require_discrete(space, "shift")
    c = rational(c)
    return MapOracle(lambda f: cone.DiscreteFunction(space, [v + c for v in f.values]),
                     space, space, thread_safe=True, name="shift")


def order_swap_oracle(space):
    """Exchange the constants 1 and 2 and fix every other cone element.

    A bijection of the cone that is not order preserving.
    """
    _require_discrete(space, "order-swap")
    f0 = cone.constant_function(space, 1)
    g0 = cone.constant_function(space, 2)

    def swap(f):
        if f == f0:
            return g0
        if f == g0:
            return f0
        return f

    return MapOracle(swap, space, space, thread_safe=True, name="order-swap")


def averaging_oracle(space):
    """``f -> mean(f) * 1``; additive and positive but merges disjoint supports."""
    _require_discrete(space, "averaging")
    n = space.size

    def average(f):
        m = sum(f.values, Q0) / n
        return cone.DiscreteFunction(space, [m] * n)

    return MapOracle(average, space, space, thread_safe=True, name="averaging")


def zero_oracle(space):
    """Everything to 0: no probe ever has a positive image."""
    return MapOracle(lambda f: cone.zero(space), space, space, thread_safe=True, name="zero-map")


def locality_violator(space):
    """``Tf(y) = f(y) + f(next(y)) / 2``: each value depends on two points."""
    _require_discrete(space, "locality-violator")
    n = space.size
    half = rational("1/2")

    def spread(f):
        v = f.values
        return cone.DiscreteFunction(space, [v[i] + half * v[(i + 1) % n] for i in range(n)])

    return MapOracle(spread, space, space, thread_safe=True, name="locality-violator")


def perturbed_oracle(op, eps):
    """``h (f o tau) + eps (f o tau)^2`` on a discrete operator."""
    if not op.discrete:
        raise InvalidInput("perturbed oracle is defined for discrete operators only")
    eps = rational(eps)
    idx = op.tau.index_map

    def bent(f):
        base = apply(op, f).values
        return cone.DiscreteFunction(op.codomain, [b + eps * f.values[j] * f.values[j]
                                                   for b, j in zip(base, idx)])

    return MapOracle(bent, op.domain, op.codomain, thread_safe=True, name="perturbed")


def scale_op(space, c):
    if isinstance(space, FiniteDiscrete):
        ident = identity_op(space)
        return WeightedCompositionOp(space, space, ident.tau,
                                     DiscreteWeights(space, (rational(c),) * space.size))
    return WeightedCompositionOp(space, space, identity_op(space).tau, PLWeight.constant(c))


NEGATIVE_CONTROLS = ("square", "shift", "order-swap", "averaging")


def make_fixture(name, space):
    """Return ``(oracle, inverse_oracle_or_None)`` for a named fixture."""
    if name == "identity":
        op = identity_op(space)
        return as_oracle(op, "identity"), as_oracle(op, "identity")
    if name == "scale3":
        from .operators import invert
        op = scale_op(space, 3)
        return as_oracle(op, "scale3"), as_oracle(invert(op), "scale3-inverse")
    if name == "square":
        return square_oracle(space), None
    if name == "shift":
        return shift_oracle(space), None
    if name == "order-swap":
        return order_swap_oracle(space), order_swap_oracle(space)
    if name == "averaging":
        return averaging_oracle(space), None
    if name == "zero-map":
        return zero_oracle(space), None
    if name == "locality-violator":
        return locality_violator(space), None
    raise InvalidInput(f"unknown fixture {name!r}; choose from {', '.join(FIXTURE_NAMES)}")


FIXTURE_NAMES = ("identity", "scale3", "square", "shift", "order-swap", "averaging",
                 "zero-map", "locality-violator")
