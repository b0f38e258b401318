"""Space models and the positive-cone function algebra.

Two models of a locally compact Hausdorff space are supported:

* ``FiniteDiscrete`` -- a finite set with the discrete topology.  Functions
  carry one exact rational per point (``gmpy2.mpq``) so every equality of
  norms is decided without tolerance.
* ``PLLine`` -- the real line.  Cone functions are continuous, compactly
  supported and piecewise linear (``PLFunction``); images of weighted
  composition operators are piecewise rational (``RationalFunction``) and
  are kept exact rather than re-interpolated.

All values are immutable and every operation is pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Sequence, Union

from gmpy2 import mpq

from . import piecewise as pw
from .errors import (BadWidths, EmptyList, InvalidInput, NegativeScalar,
                     NotInCone, SpaceMismatch)

# relative tolerance for order/norm comparisons on the line
RTOL = 1e-9
# relative tolerance used when merging collinear breakpoints
CANON_RTOL = 1e-12
# cancellation floor for differences, relative to the operands
NOISE_RTOL = 1e-13

Q0 = mpq(0)
Q1 = mpq(1)
_MPQ = type(Q0)


def rational(x):
    """Coerce ints, Fractions, ``"p/q"`` strings and mpq values to ``mpq``."""
    if isinstance(x, bool):
        raise InvalidInput("booleans are not numbers")
    if isinstance(x, type(Q0)):
        return x
    if isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            raise InvalidInput(f"non-finite value {x}")
        return mpq(x)
    if isinstance(x, str):
        try:
            return mpq(x.strip())
        except ValueError as exc:
            raise InvalidInput(f"not a rational: {x!r}") from exc
    try:
        return mpq(x)
    except TypeError as exc:
        raise InvalidInput(f"not a rational: {x!r}") from exc


# -- spaces -----------------------------------------------------------------

@dataclass(frozen=True)
class FiniteDiscrete:
    points: tuple

    def __post_init__(self):
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 1:
            raise InvalidInput("a discrete space needs at least one point")
        if len(set(pts)) != len(pts):
            raise InvalidInput("point identifiers must be distinct")

    @classmethod
    def of_size(cls, n):
        return cls(tuple(range(n)))

    @property
    def size(self):
        return len(self.points)

    @cached_property
    def _index(self):
        return {p: i for i, p in enumerate(self.points)}

    def index(self, point):
        try:
            return self._index[point]
        except KeyError:
            raise InvalidInput(f"{point!r} is not a point of the space") from None

    kind = "discrete"


@dataclass(frozen=True)
class PLLine:
    """The real line; ``resolution`` is the default probe granularity."""

    resolution: float = 1e-10

    def __post_init__(self):
        if not self.resolution > 0:
            raise InvalidInput("resolution must be positive")

    kind = "pl_line"


SpaceDescriptor = Union[FiniteDiscrete, PLLine]


# -- cone functions ---------------------------------------------------------

@dataclass(frozen=True)
class DiscreteFunction:
    space: FiniteDiscrete
    values: tuple

    def __post_init__(self):
        vals = tuple(self.values)
        if not all(type(v) is _MPQ for v in vals):
            vals = tuple(rational(v) for v in vals)
        if len(vals) != self.space.size:
            raise InvalidInput(f"expected {self.space.size} values, got {len(vals)}")
        if vals and min(vals) < 0:
            raise NotInCone("cone functions are nonnegative")
        object.__setattr__(self, "values", vals)

    def __call__(self, point):
        return self.values[self.space.index(point)]


def _canonical_pl(xs, vs):
    if len(xs) != len(vs):
        raise InvalidInput("breakpoints and values differ in length")
    xs = [float(x) for x in xs]
    vs = [float(v) for v in vs]
    for a, b in zip(xs[:-1], xs[1:]):
        if not b > a:
            raise InvalidInput("breakpoints must be strictly increasing")
    if not xs:
        return (), ()
    top = max(abs(v) for v in vs)
    if top == 0.0:
        return (), ()
    if vs[0] != 0.0 or vs[-1] != 0.0:
        raise NotInCone("first and last values must be 0 (compact support)")
    neg_tol = RTOL * top
    if min(vs) < -neg_tol:
        raise NotInCone("cone functions are nonnegative")
    vs = [v if v > 0.0 else 0.0 for v in vs]
    col_tol = CANON_RTOL * top
    kx, kv = [xs[0]], [vs[0]]
    for x, v in zip(xs[1:], vs[1:]):
        while len(kx) >= 2:
            x0, v0, x1, v1 = kx[-2], kv[-2], kx[-1], kv[-1]
            interp = v0 + (v - v0) * (x1 - x0) / (x - x0)
            if abs(v1 - interp) <= col_tol:
                kx.pop()
                kv.pop()
            else:
                break
        kx.append(x)
        kv.append(v)
    while len(kv) >= 2 and kv[0] == 0.0 and kv[1] == 0.0:
        kx.pop(0)
        kv.pop(0)
    while len(kv) >= 2 and kv[-1] == 0.0 and kv[-2] == 0.0:
        kx.pop()
        kv.pop()
    if len(kx) < 2:
        return (), ()
    return tuple(kx), tuple(kv)


@dataclass(frozen=True)
class PLFunction:
    """Compactly supported piecewise-linear cone function, canonical form.

    Linear between breakpoints and identically 0 outside them.  The zero
    function has no breakpoints.
    """

    breakpoints: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        xs, vs = _canonical_pl(self.breakpoints, self.values)
        object.__setattr__(self, "breakpoints", xs)
        object.__setattr__(self, "values", vs)

    @cached_property
    def piecewise(self):
        return pw.from_points(self.breakpoints, self.values, 0.0, 0.0)

    def __call__(self, x):
        return pw.evaluate(self.piecewise, x)


@dataclass(frozen=True, eq=False)
class RationalFunction:
    """Cone function on the line with piecewise-rational pieces.

    Produced by weighted composition; never built by hand.
    """

    piecewise: pw.Piecewise

    def __call__(self, x):
        return pw.evaluate(self.piecewise, x)

    @property
    def breakpoints(self):
        return self.piecewise.xs


ConeFunction = Union[DiscreteFunction, PLFunction, RationalFunction]
LineFunction = (PLFunction, RationalFunction)


def is_line(f):
    return isinstance(f, LineFunction)


def from_piecewise(p, atol=0.0):
    """Wrap an engine result as the simplest matching cone function.

    ``atol`` is the cancellation noise floor of the operation that produced
    ``p``; anything below it counts as zero.
    """
    p = pw.reduce_all(p)
    top = max((pw._contribution(n, p.xs[i + 1] - p.xs[i]) for i, n in enumerate(p.nums)),
              default=0.0)
    if top <= atol:
        return PLFunction()
    p = pw.strip_zero_ends(p, max(1e-14 * top, atol))
    if not p.xs:
        return PLFunction()
    if pw.is_linear(p):
        vals = pw.breakpoint_values(p)
        # continuity pins the end values to the tails; evaluating the last
        # piece at its right end loses precision on steep ramps
        vals[0], vals[-1] = p.left, p.right
        return PLFunction(p.xs, vals)
    return RationalFunction(p)


def _zero_atol(f):
    if isinstance(f, RationalFunction):
        return 1e-14 * pw.sup_abs(f.piecewise)
    return 0.0


# -- constructors -----------------------------------------------------------

def zero(space):
    if isinstance(space, FiniteDiscrete):
        return DiscreteFunction(space, (Q0,) * space.size)
    return PLFunction()


def indicator(space, point, value=1):
    vals = [Q0] * space.size
    vals[space.index(point)] = rational(value)
    return DiscreteFunction(space, vals)


def constant_function(space, value):
    """The constant function on a discrete space (all points in C0)."""
    return DiscreteFunction(space, (rational(value),) * space.size)


def tent(a, peak_at, b, peak=1.0):
    return PLFunction((a, peak_at, b), (0.0, peak, 0.0))


def plateau(space, center, inner=None, outer=None):
    """1 on ``[center-inner, center+inner]``, 0 outside the open outer interval.

    On a discrete space this is the indicator of ``{center}``, which is 1 on
    the open neighbourhood ``{center}``.
    """
    if isinstance(space, FiniteDiscrete):
        return indicator(space, center)
    if inner is None:
        inner = space.resolution
    if outer is None:
        outer = 2.0 * inner
    if not 0 < inner < outer:
        raise BadWidths(f"need 0 < inner < outer, got inner={inner}, outer={outer}")
    c = float(center)
    return PLFunction((c - outer, c - inner, c + inner, c + outer), (0.0, 1.0, 1.0, 0.0))


def plateau_on(a, b, ramp):
    """Plateau whose open cozero set is ``(a, b)`` with ramps of width ``ramp``."""
    half = 0.5 * (b - a)
    return plateau(PLLine(), 0.5 * (a + b), half - ramp, half)


# -- algebra ----------------------------------------------------------------

def _same_space(*fs):
    first = fs[0]
    if isinstance(first, DiscreteFunction):
        for g in fs[1:]:
            if not isinstance(g, DiscreteFunction) or g.space != first.space:
                raise SpaceMismatch("functions live on different spaces")
    else:
        for g in fs[1:]:
            if not is_line(g):
                raise SpaceMismatch("functions live on different spaces")


def add(f, g):
    _same_space(f, g)
    if isinstance(f, DiscreteFunction):
        return DiscreteFunction(f.space, [a + b for a, b in zip(f.values, g.values)])
    return from_piecewise(pw.add(f.piecewise, g.piecewise))


def scale(r, f):
    if r < 0:
        raise NegativeScalar(f"scalar must be nonnegative, got {r}")
    if isinstance(f, DiscreteFunction):
        r = rational(r)
        return DiscreteFunction(f.space, [r * v for v in f.values])
    if r == 0:
        return PLFunction()
    if isinstance(f, PLFunction):
        return PLFunction(f.breakpoints, [float(r) * v for v in f.values])
    return RationalFunction(pw.scale(f.piecewise, float(r)))


def sup_norm(f):
    if isinstance(f, DiscreteFunction):
        return max(f.values)
    if isinstance(f, PLFunction):
        return max(f.values, default=0.0)
    return pw.sup_abs(f.piecewise)


def sup_distance(f, g):
    """``||f - g||`` (the difference need not lie in the cone)."""
    _same_space(f, g)
    if isinstance(f, DiscreteFunction):
        return max(abs(a - b) for a, b in zip(f.values, g.values))
    return pw.sup_abs(pw.subtract(f.piecewise, g.piecewise))


def pointwise_min(fs: Sequence):
    fs = list(fs)
    if not fs:
        raise EmptyList("pointwise_min needs at least one function")
    _same_space(*fs)
    if isinstance(fs[0], DiscreteFunction):
        return DiscreteFunction(fs[0].space, [min(vs) for vs in zip(*(f.values for f in fs))])
    if len(fs) == 1:
        return fs[0]
    return from_piecewise(reduce(pw.minimum, (f.piecewise for f in fs)))


def pointwise_max(f, g):
    _same_space(f, g)
    if isinstance(f, DiscreteFunction):
        return DiscreteFunction(f.space, [max(a, b) for a, b in zip(f.values, g.values)])
    return from_piecewise(pw.maximum(f.piecewise, g.piecewise))


def clamped_difference(f, g):
    """``max{0, f - g}``."""
    _same_space(f, g)
    if isinstance(f, DiscreteFunction):
        return DiscreteFunction(f.space, [a - b if a > b else Q0 for a, b in zip(f.values, g.values)])
    noise = NOISE_RTOL * max(sup_norm(f), sup_norm(g))
    return from_piecewise(pw.subtract(pw.maximum(f.piecewise, g.piecewise), g.piecewise), noise)


def truncate(f, eps):
    """``max{0, f - eps}``; its support sits inside ``{f >= eps}``."""
    if not eps > 0:
        raise InvalidInput("eps must be positive")
    if isinstance(f, DiscreteFunction):
        e = rational(eps)
        return DiscreteFunction(f.space, [v - e if v > e else Q0 for v in f.values])
    c = pw.constant(float(eps))
    return from_piecewise(pw.subtract(pw.maximum(f.piecewise, c), c), NOISE_RTOL * sup_norm(f))


def leq(f, g, rtol=RTOL):
    _same_space(f, g)
    if isinstance(f, DiscreteFunction):
        return all(a <= b for a, b in zip(f.values, g.values))
    lo, _ = pw.value_range(pw.subtract(g.piecewise, f.piecewise))
    return lo >= -rtol * max(sup_norm(f), sup_norm(g))


def equal(f, g, rtol=RTOL):
    """Mathematical equality: exact on discrete spaces, relative on the line."""
    _same_space(f, g)
    if isinstance(f, DiscreteFunction):
        return f.values == g.values
    return sup_distance(f, g) <= rtol * max(sup_norm(f), sup_norm(g), 1e-300)


def is_zero(f):
    if isinstance(f, DiscreteFunction):
        return not any(f.values)
    if isinstance(f, PLFunction):
        return not f.breakpoints
    return sup_norm(f) <= 0.0


def evaluate(f, x):
    return f(x)


def coz(f):
    """Cozero set: a frozenset of points, or a tuple of open intervals."""
    if isinstance(f, DiscreteFunction):
        return frozenset(p for p, v in zip(f.space.points, f.values) if v > 0)
    return tuple(pw.positive_intervals(f.piecewise, _zero_atol(f)))


def supp(f):
    """Support: equal to ``coz`` on discrete spaces, closed intervals on the line."""
    if isinstance(f, DiscreteFunction):
        return coz(f)
    out = []
    for a, b in coz(f):
        if out and out[-1][1] >= a:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return tuple(out)


def in_support(f, x):
    if isinstance(f, DiscreteFunction):
        return x in supp(f)
    return any(a <= x <= b for a, b in supp(f))


def _intervals_meet(sets):
    cur = list(sets[0])
    for nxt in sets[1:]:
        out = []
        for a, b in cur:
            for c, d in nxt:
                lo, hi = max(a, c), min(b, d)
                if lo < hi:
                    out.append((lo, hi))
        cur = out
        if not cur:
            break
    return cur


def disjoint(fs: Sequence):
    """True iff the pointwise minimum vanishes.

    The cozero-intersection criterion is computed as well; the two must agree.
    """
    fs = list(fs)
    if not fs:
        raise EmptyList("disjoint needs at least one function")
    _same_space(*fs)
    by_min = is_zero(pointwise_min(fs))
    if isinstance(fs[0], DiscreteFunction):
        by_coz = not frozenset.intersection(*(coz(f) for f in fs))
    else:
        by_coz = not _intervals_meet([coz(f) for f in fs])
    if by_min != by_coz:
        raise AssertionError("min and cozero disjointness criteria disagree")
    return by_min


def space_of(f):
    if isinstance(f, DiscreteFunction):
        return f.space
    return PLLine()


__all__ = [
    "FiniteDiscrete", "PLLine", "DiscreteFunction", "PLFunction", "RationalFunction",
    "rational", "zero", "indicator", "constant_function", "tent", "plateau", "plateau_on",
    "add", "scale", "sup_norm", "sup_distance", "pointwise_min", "pointwise_max",
    "clamped_difference", "truncate", "leq", "equal", "is_zero", "evaluate", "coz", "supp",
    "in_support", "disjoint", "from_piecewise", "space_of",
]
