"""Weighted composition operators ``Tf(y) = h(y) f(tau(y))`` and map oracles."""

from __future__ import annotations

import bisect
import random
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable

from . import cone
from . import piecewise as pw
from .cone import FiniteDiscrete, PLLine, Q0, Q1, rational
from .errors import (BadRange, IncompatibleSpaces, InvalidInput, NormAddError,
                     OracleFailure, SpaceMismatch)

_COLLINEAR_RTOL = 1e-12


# -- point maps -------------------------------------------------------------

@dataclass(frozen=True)
class Permutation:
    """Bijection ``tau: Y -> X`` between finite discrete spaces.

    ``targets[i]`` is the image of ``domain.points[i]``.
    """

    domain: FiniteDiscrete
    codomain: FiniteDiscrete
    targets: tuple

    def __post_init__(self):
        targets = tuple(self.targets)
        object.__setattr__(self, "targets", targets)
        if self.domain.size != self.codomain.size:
            raise InvalidInput("a bijection needs equally sized spaces")
        if len(targets) != self.domain.size:
            raise InvalidInput("one target per domain point required")
        if sorted(self.codomain.index(t) for t in targets) != list(range(self.codomain.size)):
            raise InvalidInput("targets do not form a bijection")

    @cached_property
    def index_map(self):
        return tuple(self.codomain.index(t) for t in self.targets)

    def __call__(self, y):
        return self.targets[self.domain.index(y)]

    def inverse(self):
        inv = [None] * self.codomain.size
        for i, j in enumerate(self.index_map):
            inv[j] = self.domain.points[i]
        return Permutation(self.codomain, self.domain, tuple(inv))

    def is_identity(self):
        return self.domain == self.codomain and self.targets == self.domain.points


def _drop_collinear(xs, vs):
    top = max(abs(v) for v in vs) or 1.0
    kx, kv = [xs[0]], [vs[0]]
    for x, v in zip(xs[1:], vs[1:]):
        while len(kx) >= 2:
            interp = kv[-2] + (v - kv[-2]) * (kx[-1] - kx[-2]) / (x - kx[-2])
            if abs(kv[-1] - interp) <= _COLLINEAR_RTOL * top:
                kx.pop()
                kv.pop()
            else:
                break
        kx.append(x)
        kv.append(v)
    return kx, kv


@dataclass(frozen=True)
class PLHomeo:
    """Piecewise-linear homeomorphism of the real line, affine beyond its breakpoints."""

    breakpoints: tuple
    values: tuple
    left_slope: float
    right_slope: float

    def __post_init__(self):
        xs = [float(x) for x in self.breakpoints]
        vs = [float(v) for v in self.values]
        sl, sr = float(self.left_slope), float(self.right_slope)
        if not xs or len(xs) != len(vs):
            raise InvalidInput("need matching, nonempty breakpoints and values")
        if any(not b > a for a, b in zip(xs[:-1], xs[1:])):
            raise InvalidInput("breakpoints must be strictly increasing")
        if sl == 0 or sr == 0 or (sl > 0) != (sr > 0):
            raise InvalidInput("tail slopes must be nonzero with matching sign")
        inc = sl > 0
        for a, b in zip(vs[:-1], vs[1:]):
            if (b > a) != inc or a == b:
                raise InvalidInput("values must be strictly monotone in the tail direction")
        xs, vs = _drop_collinear(xs, vs)
        # end breakpoints that merely continue the tail slope carry no information
        tol = _COLLINEAR_RTOL * max(1.0, abs(sl), abs(sr))
        while len(xs) >= 2 and abs((vs[1] - vs[0]) / (xs[1] - xs[0]) - sl) <= tol:
            xs.pop(0)
            vs.pop(0)
        while len(xs) >= 2 and abs((vs[-1] - vs[-2]) / (xs[-1] - xs[-2]) - sr) <= tol:
            xs.pop()
            vs.pop()
        object.__setattr__(self, "breakpoints", tuple(xs))
        object.__setattr__(self, "values", tuple(vs))
        object.__setattr__(self, "left_slope", sl)
        object.__setattr__(self, "right_slope", sr)

    @classmethod
    def identity(cls):
        return cls((0.0,), (0.0,), 1.0, 1.0)

    @property
    def increasing(self):
        return self.left_slope > 0

    def __call__(self, y):
        xs, vs = self.breakpoints, self.values
        if y <= xs[0]:
            return vs[0] + self.left_slope * (y - xs[0])
        if y >= xs[-1]:
            return vs[-1] + self.right_slope * (y - xs[-1])
        i = bisect.bisect_right(xs, y) - 1
        t = (y - xs[i]) / (xs[i + 1] - xs[i])
        return vs[i] + t * (vs[i + 1] - vs[i])

    def slope_at(self, y):
        xs, vs = self.breakpoints, self.values
        if y < xs[0]:
            return self.left_slope
        if y > xs[-1]:
            return self.right_slope
        i = min(bisect.bisect_right(xs, y) - 1, len(xs) - 2)
        return (vs[i + 1] - vs[i]) / (xs[i + 1] - xs[i])

    def inverse(self):
        if self.increasing:
            return PLHomeo(self.values, self.breakpoints,
                           1.0 / self.left_slope, 1.0 / self.right_slope)
        return PLHomeo(self.values[::-1], self.breakpoints[::-1],
                       1.0 / self.right_slope, 1.0 / self.left_slope)

    def inverse_point(self, x):
        vs, xs = self.values, self.breakpoints
        if not self.increasing:
            vs, xs = vs[::-1], xs[::-1]
            lo_slope, hi_slope = self.right_slope, self.left_slope
        else:
            lo_slope, hi_slope = self.left_slope, self.right_slope
        if x <= vs[0]:
            return xs[0] + (x - vs[0]) / lo_slope
        if x >= vs[-1]:
            return xs[-1] + (x - vs[-1]) / hi_slope
        i = bisect.bisect_right(vs, x) - 1
        t = (x - vs[i]) / (vs[i + 1] - vs[i])
        return xs[i] + t * (xs[i + 1] - xs[i])

    def then(self, outer):
        """``y -> outer(self(y))``."""
        pre = [self.inverse_point(x) for x in outer.breakpoints]
        grid = pw.merge_grid(self.breakpoints, pre)
        if self.increasing:
            sl = self.left_slope * outer.left_slope
            sr = self.right_slope * outer.right_slope
        else:
            sl = self.left_slope * outer.right_slope
            sr = self.right_slope * outer.left_slope
        return PLHomeo(grid, [outer(self(y)) for y in grid], sl, sr)

    @classmethod
    def from_samples(cls, ys, xs):
        """Interpolate monotone samples, extending the end segments affinely."""
        if len(ys) < 2:
            raise InvalidInput("need at least two samples")
        sl = (xs[1] - xs[0]) / (ys[1] - ys[0])
        sr = (xs[-1] - xs[-2]) / (ys[-1] - ys[-2])
        return cls(tuple(ys), tuple(xs), sl, sr)


# -- weights ----------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteWeights:
    space: FiniteDiscrete
    values: tuple

    def __post_init__(self):
        vals = tuple(rational(v) for v in self.values)
        if len(vals) != self.space.size:
            raise InvalidInput("one weight per point required")
        if any(v <= 0 for v in vals):
            raise InvalidInput("weights must be strictly positive")
        object.__setattr__(self, "values", vals)

    def __call__(self, y):
        return self.values[self.space.index(y)]

    @property
    def h_min(self):
        return min(self.values)

    @property
    def h_max(self):
        return max(self.values)


@dataclass(frozen=True)
class PLWeight:
    """Positive piecewise-linear weight, constant beyond the end breakpoints."""

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        xs = [float(x) for x in self.breakpoints]
        vs = [float(v) for v in self.values]
        if not xs or len(xs) != len(vs):
            raise InvalidInput("need matching, nonempty breakpoints and values")
        if any(not b > a for a, b in zip(xs[:-1], xs[1:])):
            raise InvalidInput("breakpoints must be strictly increasing")
        if any(not v > 0 for v in vs):
            raise InvalidInput("weights must be strictly positive")
        xs, vs = _drop_collinear(xs, vs)
        # flat end segments merge into the constant tails
        tol = _COLLINEAR_RTOL * max(vs)
        while len(xs) >= 2 and abs(vs[0] - vs[1]) <= tol:
            xs.pop(0)
            vs.pop(0)
        while len(xs) >= 2 and abs(vs[-1] - vs[-2]) <= tol:
            xs.pop()
            vs.pop()
        object.__setattr__(self, "breakpoints", tuple(xs))
        object.__setattr__(self, "values", tuple(vs))

    @classmethod
    def constant(cls, c):
        return cls((0.0,), (float(c),))

    @cached_property
    def piecewise(self):
        if len(self.breakpoints) == 1:
            return pw.constant(self.values[0])
        return pw.from_points(self.breakpoints, self.values)

    def __call__(self, y):
        return pw.evaluate(self.piecewise, y)

    @property
    def h_min(self):
        return min(self.values)

    @property
    def h_max(self):
        return max(self.values)


@dataclass(frozen=True, eq=False)
class RationalWeight:
    """Positive weight with piecewise-rational pieces and constant tails.

    Arises from inverting or composing line operators; only evaluation and
    extrema are exposed.
    """

    piecewise: pw.Piecewise

    def __call__(self, y):
        return pw.evaluate(self.piecewise, y)

    @cached_property
    def _range(self):
        return pw.value_range(self.piecewise)

    @property
    def h_min(self):
        return self._range[0]

    @property
    def h_max(self):
        return self._range[1]


def line_weight(p):
    """Simplest weight object for an engine result with constant tails."""
    p = pw.reduce_all(p)
    if not p.xs:
        return PLWeight.constant(p.left)
    if pw.is_linear(p):
        return PLWeight(p.xs, pw.breakpoint_values(p))
    return RationalWeight(p)


WeightFunction = (DiscreteWeights, PLWeight, RationalWeight)


# -- operators --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WeightedCompositionOp:
    """``Tf(y) = h(y) f(tau(y))`` from the cone over ``domain`` to the cone over ``codomain``."""

    domain: object
    codomain: object
    tau: object
    h: object

    def __post_init__(self):
        X, Y = self.domain, self.codomain
        if isinstance(X, FiniteDiscrete) and isinstance(Y, FiniteDiscrete):
            if not isinstance(self.tau, Permutation) or not isinstance(self.h, DiscreteWeights):
                raise InvalidInput("discrete operators need a Permutation and DiscreteWeights")
            if self.tau.domain != Y or self.tau.codomain != X:
                raise InvalidInput("tau must map the codomain points onto the domain points")
            if self.h.space != Y:
                raise InvalidInput("weights must live on the codomain")
        elif isinstance(X, PLLine) and isinstance(Y, PLLine):
            if not isinstance(self.tau, PLHomeo):
                raise InvalidInput("line operators need a PLHomeo")
            if not isinstance(self.h, (PLWeight, RationalWeight)):
                raise InvalidInput("line operators need a line weight")
        else:
            raise IncompatibleSpaces("domain and codomain must be of the same kind")
        if not self.h.h_min > 0:
            raise InvalidInput("weight must be bounded away from zero")

    @property
    def discrete(self):
        return isinstance(self.domain, FiniteDiscrete)

    @property
    def h_min(self):
        return self.h.h_min

    @property
    def h_max(self):
        return self.h.h_max

    def __eq__(self, other):
        if not isinstance(other, WeightedCompositionOp):
            return NotImplemented
        return (self.domain == other.domain and self.codomain == other.codomain
                and self.tau == other.tau and self.h == other.h)

    def __hash__(self):
        return hash((self.domain, self.codomain, self.tau))


def identity_op(space):
    if isinstance(space, FiniteDiscrete):
        return WeightedCompositionOp(space, space, Permutation(space, space, space.points),
                                     DiscreteWeights(space, (Q1,) * space.size))
    return WeightedCompositionOp(space, space, PLHomeo.identity(), PLWeight.constant(1.0))


def apply(op, f):
    if op.discrete:
        if not isinstance(f, cone.DiscreteFunction) or f.space != op.domain:
            raise SpaceMismatch("function is not over the operator's domain")
        fv = f.values
        out = []
        for hy, j in zip(op.h.values, op.tau.index_map):
            v = fv[j]
            out.append(hy * v if v else Q0)
        return cone.DiscreteFunction(op.codomain, out)
    if not cone.is_line(f):
        raise SpaceMismatch("function is not over the operator's domain")
    if cone.is_zero(f):
        return cone.PLFunction()
    pulled = pw.pullback(f.piecewise, op.tau)
    return cone.from_piecewise(pw.multiply(op.h.piecewise, pulled))


def invert(op):
    """The inverse ``Sv(x) = v(tau^-1(x)) / h(tau^-1(x))``."""
    sigma = op.tau.inverse()
    if op.discrete:
        w = [None] * op.domain.size
        for i, j in enumerate(op.tau.index_map):
            w[j] = 1 / op.h.values[i]
        return WeightedCompositionOp(op.codomain, op.domain, sigma, DiscreteWeights(op.domain, w))
    w = pw.reciprocal(pw.pullback(op.h.piecewise, sigma))
    return WeightedCompositionOp(op.codomain, op.domain, sigma, line_weight(w))


def compose(op2, op1):
    """``op2 o op1``: first ``op1`` (X -> Y), then ``op2`` (Y -> Z)."""
    if op1.codomain != op2.domain and not (isinstance(op1.codomain, PLLine) and isinstance(op2.domain, PLLine)):
        raise SpaceMismatch("op1's codomain must be op2's domain")
    if op1.discrete != op2.discrete:
        raise SpaceMismatch("cannot compose discrete and line operators")
    if op1.discrete:
        t1, t2 = op1.tau.index_map, op2.tau.index_map
        X = op1.domain
        targets = tuple(X.points[t1[t2[k]]] for k in range(op2.codomain.size))
        h = [op2.h.values[k] * op1.h.values[t2[k]] for k in range(op2.codomain.size)]
        return WeightedCompositionOp(X, op2.codomain, Permutation(op2.codomain, X, targets),
                                     DiscreteWeights(op2.codomain, h))
    tau = op2.tau.then(op1.tau)
    h = pw.multiply(op2.h.piecewise, pw.pullback(op1.h.piecewise, op2.tau))
    return WeightedCompositionOp(op1.domain, op2.codomain, tau, line_weight(h))


def validate_op(op):
    """Re-check the representation invariants; raises ``InvalidInput``."""
    if op.discrete:
        if sorted(op.tau.index_map) != list(range(op.domain.size)):
            raise InvalidInput("tau is not bijective")
    else:
        xs = [op.tau(y) for y in op.tau.breakpoints]
        diffs = [b - a for a, b in zip(xs[:-1], xs[1:])]
        if not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
            raise InvalidInput("tau is not strictly monotone")
    if not (op.h_min > 0 and op.h_max < float("inf")):
        raise InvalidInput("weight not bounded and bounded away from zero")
    return True


# -- oracles ----------------------------------------------------------------

class MapOracle:
    """Black-box map between cones, with an atomic query counter."""

    def __init__(self, func: Callable, domain, codomain, thread_safe=False, name="oracle"):
        self._func = func
        self.domain = domain
        self.codomain = codomain
        self.thread_safe = thread_safe
        self.name = name
        self._lock = threading.Lock()
        self._count = 0

    @property
    def query_count(self):
        return self._count

    def evaluate(self, f):
        with self._lock:
            self._count += 1
        try:
            return self._func(f)
        except NormAddError:
            raise
        except Exception as exc:
            raise OracleFailure(f"{self.name} failed: {exc}") from exc

    __call__ = evaluate

    def __repr__(self):
        return f"MapOracle({self.name!r}, queries={self._count})"


def as_oracle(op, name="operator"):
    return MapOracle(lambda f: apply(op, f), op.domain, op.codomain, thread_safe=True, name=name)


# -- random generation ------------------------------------------------------

def _round_weight(v, lo, hi):
    r = rational(Fraction(int(v.numerator), int(v.denominator)).limit_denominator(1000))
    return min(max(r, lo), hi)


def random_op(seed, X, Y, h_range=(Fraction(1, 10), 10), reversing=False,
              max_breakpoints=6, span=4.0):
    """Deterministic random operator from ``seed``.

    Discrete: uniform permutation, weights uniform in ``h_range`` rounded to
    denominators <= 1000.  Line: random monotone PL homeomorphism (increasing
    unless ``reversing``) and a PL weight with constant tails.
    """
    lo, hi = h_range
    if isinstance(X, FiniteDiscrete) and isinstance(Y, FiniteDiscrete):
        lo, hi = rational(lo), rational(hi)
    else:
        lo, hi = float(lo), float(hi)
    if not 0 < lo <= hi:
        raise BadRange(f"need 0 < h_min <= h_max, got {h_range}")
    rng = random.Random(seed)
    if isinstance(X, FiniteDiscrete) and isinstance(Y, FiniteDiscrete):
        if X.size != Y.size:
            raise IncompatibleSpaces("discrete spaces must have equal size")
        n = Y.size
        perm = rng.sample(range(n), n)
        tau = Permutation(Y, X, tuple(X.points[j] for j in perm))
        h = []
        for _ in range(n):
            u = rational(Fraction(rng.randint(0, 10**6), 10**6))
            h.append(_round_weight(lo + (hi - lo) * u, lo, hi))
        return WeightedCompositionOp(X, Y, tau, DiscreteWeights(Y, h))
    if not (isinstance(X, PLLine) and isinstance(Y, PLLine)):
        raise IncompatibleSpaces("domain and codomain must be of the same kind")
    k = rng.randint(2, max_breakpoints)
    ys = sorted(rng.uniform(-span, span) for _ in range(k))
    x = rng.uniform(-1.0, 1.0)
    xs = [x]
    for a, b in zip(ys[:-1], ys[1:]):
        x += rng.uniform(0.5, 2.0) * (b - a)
        xs.append(x)
    sl, sr = rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)
    if reversing:
        xs = [-v for v in xs]
        sl, sr = -sl, -sr
    tau = PLHomeo(ys, xs, sl, sr)
    kh = rng.randint(2, max_breakpoints)
    hb = sorted(rng.uniform(-span, span) for _ in range(kh))
    hv = [rng.uniform(lo, hi) for _ in range(kh)]
    return WeightedCompositionOp(X, Y, tau, PLWeight(hb, hv))
