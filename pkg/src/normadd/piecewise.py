"""Continuous piecewise-rational functions on the real line.

This is the numeric engine behind the line model.  A ``Piecewise`` holds
breakpoints ``xs`` and, for every segment ``[xs[i], xs[i+1]]``, a numerator
and denominator polynomial in the local coordinate ``s = x - xs[i]``
(coefficients lowest degree first).  Outside ``[xs[0], xs[-1]]`` the function
is the constant ``left`` / ``right``.  Cone functions have zero tails,
weights have positive constant tails.

Piecewise-linear inputs stay linear under addition, min and max, but
weighted composition multiplies two linear pieces and inversion takes a
reciprocal, so the class is closed under exactly the operations the
operators need.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

ONE = np.array([1.0])
ZERO = np.array([0.0])

# relative size below which a polynomial coefficient contribution is dropped
TRIM_RTOL = 1e-14
# relative remainder size accepted when cancelling a denominator
REDUCE_RTOL = 1e-11


@dataclass(frozen=True, eq=False)
class Piecewise:
    xs: tuple
    nums: tuple
    dens: tuple
    left: float = 0.0
    right: float = 0.0

    def __post_init__(self):
        if len(self.xs) == 1:
            raise ValueError("a piecewise function needs zero or at least two breakpoints")
        if len(self.xs) and len(self.nums) != len(self.xs) - 1:
            raise ValueError("one piece per segment required")
        if not self.xs and self.left != self.right:
            raise ValueError("breakpoint-free function must be constant")

    @property
    def n_segments(self):
        return max(len(self.xs) - 1, 0)

    def __call__(self, x):
        return evaluate(self, x)


# -- polynomial helpers -----------------------------------------------------

def _pval(c, s):
    # Horner; arrays here are tiny so this beats P.polyval's overhead
    acc = 0.0
    for ck in c[::-1]:
        acc = acc * s + ck
    return acc


# the helpers below run on arrays of length <= 5, where plain Python loops
# are several times faster than numpy's vectorized calls

def _terms(c, length):
    out, w = [], 1.0
    for ck in c:
        out.append(abs(float(ck)) * w)
        w *= length
    return out


def _contribution(c, length):
    return sum(_terms(c, length))


def _trim(c, length):
    c = np.asarray(c, dtype=float)
    if len(c) <= 1:
        return c
    terms = _terms(c, length)
    cutoff = TRIM_RTOL * max(terms)
    n = len(c)
    while n > 1 and terms[n - 1] <= cutoff:
        n -= 1
    return c[:n]


def _padd(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = np.array(a, dtype=float)
    out[:len(b)] += b
    return out


def _pmul(a, b):
    return np.convolve(a, b)


def _shift(c, d):
    """Coefficients of ``s -> c(s + d)``."""
    if d == 0.0 or len(c) == 1:
        return c
    if len(c) == 2:
        return np.array([c[0] + c[1] * d, c[1]])
    out = np.array([c[-1]])
    for ck in c[-2::-1]:
        out = np.append(out * d, 0.0) + np.append(0.0, out)
        out[0] += ck
    return out


def _compose_affine(c, c0, k):
    """Coefficients of ``t -> c(c0 + k t)``."""
    if len(c) == 1:
        return c
    if len(c) == 2:
        return np.array([c[0] + c[1] * c0, c[1] * k])
    out = np.array([c[-1]])
    for ck in c[-2::-1]:
        out = np.append(out * c0, 0.0) + np.append(0.0, out * k)
        out[0] += ck
    return out


def _is_one(c):
    return len(c) == 1 and c[0] == 1.0


def _roots_in(c, length):
    """Real roots of ``c`` strictly inside ``(0, length)``, sorted."""
    c = _trim(c, length)
    if len(c) <= 1:
        return []
    if len(c) == 2:
        r = -c[0] / c[1]
        cand = [r]
    else:
        rts = P.polyroots(c)
        cand = [z.real for z in rts if abs(z.imag) <= 1e-9 * (1.0 + abs(z.real))]
    margin = 1e-12 * length
    return sorted(r for r in cand if margin < r < length - margin)


def _reduce(num, den, length):
    """Cancel the denominator when it divides the numerator up to rounding."""
    num = _trim(num, length)
    if _is_one(den):
        return num, ONE
    den = _trim(den, length)
    if len(den) == 1:
        return _trim(num / den[0], length), ONE
    if len(num) >= len(den):
        q, r = P.polydiv(num, den)
        den_floor = min(abs(_pval(den, 0.0)), abs(_pval(den, length)))
        scale = _contribution(q, length) + 1e-300
        if den_floor > 0 and _contribution(r, length) / den_floor <= REDUCE_RTOL * scale:
            return _trim(q, length), ONE
    # normalise so the constant of the denominator is 1 where possible
    d0 = den[0] if den[0] != 0 else den[np.argmax(np.abs(den))]
    return num / d0, den / d0


# -- construction -----------------------------------------------------------

def constant(c):
    c = float(c)
    return Piecewise((), (), (), c, c)


def from_points(xs, vs, left=None, right=None):
    """Linear interpolant through ``(xs, vs)``; tails default to the end values."""
    xs = tuple(float(x) for x in xs)
    vs = [float(v) for v in vs]
    if len(xs) != len(vs):
        raise ValueError("breakpoints and values differ in length")
    if len(xs) == 0:
        c = 0.0 if left is None else float(left)
        return constant(c)
    left = vs[0] if left is None else float(left)
    right = vs[-1] if right is None else float(right)
    if len(xs) == 1:
        if left != vs[0] or right != vs[0]:
            raise ValueError("single breakpoint must match both tails")
        return constant(vs[0])
    nums = []
    for i in range(len(xs) - 1):
        length = xs[i + 1] - xs[i]
        if not length > 0:
            raise ValueError("breakpoints must be strictly increasing")
        nums.append(np.array([vs[i], (vs[i + 1] - vs[i]) / length]))
    return Piecewise(xs, tuple(nums), (ONE,) * len(nums), left, right)


# -- evaluation -------------------------------------------------------------

def _segment_index(p, x):
    i = bisect.bisect_right(p.xs, x) - 1
    return min(max(i, 0), len(p.xs) - 2)


def evaluate(p, x):
    x = float(x)
    xs = p.xs
    if not xs or x < xs[0]:
        return p.left
    if x > xs[-1]:
        return p.right
    i = _segment_index(p, x)
    s = x - xs[i]
    den = p.dens[i]
    if _is_one(den):
        return _pval(p.nums[i], s)
    return _pval(p.nums[i], s) / _pval(den, s)


def breakpoint_values(p):
    """Values at each breakpoint (left limit of every segment plus the end)."""
    if not p.xs:
        return []
    out = [_pval(n, 0.0) / _pval(d, 0.0) for n, d in zip(p.nums, p.dens)]
    length = p.xs[-1] - p.xs[-2]
    out.append(_pval(p.nums[-1], length) / _pval(p.dens[-1], length))
    return out


def _piece_on(p, a, b):
    """(num, den) of ``p`` on ``[a, b]`` in the coordinate ``s = x - a``.

    ``[a, b]`` must lie in a single segment or tail of ``p``.
    """
    xs = p.xs
    mid = 0.5 * (a + b)
    if not xs or mid < xs[0]:
        return np.array([p.left]), ONE
    if mid > xs[-1]:
        return np.array([p.right]), ONE
    i = _segment_index(p, mid)
    d = a - xs[i]
    return _shift(p.nums[i], d), _shift(p.dens[i], d)


def merge_grid(*grids):
    pts = sorted(set(float(x) for g in grids for x in g))
    if not pts:
        return []
    out = [pts[0]]
    for x in pts[1:]:
        if x - out[-1] > 1e-15 * max(1.0, abs(x)):
            out.append(x)
    return out


def _build(grid, pieces, left, right):
    if len(grid) < 2:
        return constant(left) if left == right else from_points([], [], left)
    nums = tuple(pc[0] for pc in pieces)
    dens = tuple(pc[1] for pc in pieces)
    return Piecewise(tuple(grid), nums, dens, float(left), float(right))


# -- pointwise arithmetic ---------------------------------------------------

def _add_pieces(a, b, sign=1.0):
    (n1, d1), (n2, d2) = a, b
    if _is_one(d1) and _is_one(d2):
        return _padd(n1, sign * n2), ONE
    return _padd(_pmul(n1, d2), sign * _pmul(n2, d1)), _pmul(d1, d2)


def _mul_pieces(a, b):
    (n1, d1), (n2, d2) = a, b
    den = ONE if _is_one(d1) and _is_one(d2) else _pmul(d1, d2)
    return _pmul(n1, n2), den


def _binary(p, q, piece_op: Callable, tail_op: Callable, reduce=False, span=None):
    grid = merge_grid(p.xs, q.xs)
    if span is not None:
        lo, hi = span
        grid = [lo] + [x for x in grid if lo < x < hi] + [hi]
    pieces = []
    for a, b in zip(grid[:-1], grid[1:]):
        num, den = piece_op(_piece_on(p, a, b), _piece_on(q, a, b))
        length = b - a
        if reduce:
            num, den = _reduce(num, den, length)
        else:
            num = _trim(num, length)
        pieces.append((num, den))
    return _build(grid, pieces, tail_op(p.left, q.left), tail_op(p.right, q.right))


def add(p, q):
    return _binary(p, q, _add_pieces, lambda u, v: u + v)


def subtract(p, q):
    return _binary(p, q, lambda a, b: _add_pieces(a, b, -1.0), lambda u, v: u - v)


def _zero_tail_span(p):
    if p.left == 0.0 and p.right == 0.0 and p.xs:
        return p.xs[0], p.xs[-1]
    return None


def multiply(p, q):
    # outside the span of a factor with zero tails the product is 0
    spans = [s for s in (_zero_tail_span(p), _zero_tail_span(q)) if s is not None]
    span = None
    if spans:
        lo, hi = max(s[0] for s in spans), min(s[1] for s in spans)
        if not lo < hi:
            return constant(0.0)
        span = (lo, hi)
    return _binary(p, q, _mul_pieces, lambda u, v: u * v, reduce=True, span=span)


def scale(p, c):
    c = float(c)
    return Piecewise(p.xs, tuple(n * c for n in p.nums), p.dens, p.left * c, p.right * c)


def reciprocal(p):
    """``1/p`` for a function with no zeros (a positive weight)."""
    if p.left == 0.0 or p.right == 0.0:
        raise ZeroDivisionError("reciprocal of a function vanishing at infinity")
    pieces = []
    for i, (n, d) in enumerate(zip(p.nums, p.dens)):
        length = p.xs[i + 1] - p.xs[i]
        pieces.append(_reduce(d, n, length))
    return _build(list(p.xs), pieces, 1.0 / p.left, 1.0 / p.right)


def pullback(p, homeo):
    """``y -> p(homeo(y))`` for a piecewise-linear homeomorphism of the line.

    ``homeo`` needs ``breakpoints``, ``increasing``, ``__call__``,
    ``inverse_point`` and ``slope_at``.
    """
    if not p.xs:
        return constant(p.left)
    exact = {homeo.inverse_point(x): x for x in p.xs}
    pre = sorted(exact)
    lo, hi = pre[0], pre[-1]
    inner = [b for b in homeo.breakpoints if lo < b < hi]
    grid = merge_grid(pre, inner)
    pieces = []
    for a, b in zip(grid[:-1], grid[1:]):
        k = homeo.slope_at(0.5 * (a + b))
        # preimages of breakpoints map back to the breakpoint itself, exactly
        xa = exact.get(a)
        if xa is None:
            xa = homeo(a)
        xm = homeo(0.5 * (a + b))
        if xm < p.xs[0] or xm > p.xs[-1]:
            pieces.append((np.array([p.left if xm < p.xs[0] else p.right]), ONE))
            continue
        i = _segment_index(p, xm)
        c0 = xa - p.xs[i]
        num = _compose_affine(p.nums[i], c0, k)
        den = _compose_affine(p.dens[i], c0, k)
        pieces.append((_trim(num, b - a), den))
    if homeo.increasing:
        left, right = p.left, p.right
    else:
        left, right = p.right, p.left
    return _build(grid, pieces, left, right)


def _extreme_pieces(p, q, take_min):
    grid = merge_grid(p.xs, q.xs)
    out_x = []
    pieces = []
    for a, b in zip(grid[:-1], grid[1:]):
        length = b - a
        pa = _piece_on(p, a, b)
        qa = _piece_on(q, a, b)
        diff = _add_pieces(pa, qa, -1.0)[0]
        cuts = [0.0] + _roots_in(diff, length) + [length]
        for t0, t1 in zip(cuts[:-1], cuts[1:]):
            tm = 0.5 * (t0 + t1)
            vp = _pval(pa[0], tm) / _pval(pa[1], tm)
            vq = _pval(qa[0], tm) / _pval(qa[1], tm)
            chosen = pa if (vp <= vq) == take_min else qa
            out_x.append(a + t0)
            pieces.append((_trim(_shift(chosen[0], t0), t1 - t0), _shift(chosen[1], t0)))
    if grid:
        out_x.append(grid[-1])
    pick = min if take_min else max
    # crossing points can land within rounding of an existing breakpoint
    xs, kept = [], []
    for i, x in enumerate(out_x[:-1]):
        if xs and x - xs[-1] <= 1e-15 * max(1.0, abs(x)):
            continue
        xs.append(x)
        kept.append(pieces[i])
    if xs:
        xs.append(out_x[-1])
    return _build(xs, kept, pick(p.left, q.left), pick(p.right, q.right))


def minimum(p, q):
    return _extreme_pieces(p, q, True)


def maximum(p, q):
    return _extreme_pieces(p, q, False)


# -- extrema and zero structure ----------------------------------------------

def _piece_range(num, den, length):
    cands = [0.0, length]
    if len(num) > 1 or len(den) > 1:
        crit = P.polysub(P.polymul(P.polyder(num), den), P.polymul(num, P.polyder(den))) \
            if len(den) > 1 else P.polyder(num)
        cands += _roots_in(crit, length)
    vals = [_pval(num, s) / _pval(den, s) for s in cands]
    return min(vals), max(vals)


def value_range(p):
    lo = min(p.left, p.right)
    hi = max(p.left, p.right)
    for i in range(p.n_segments):
        a, b = _piece_range(p.nums[i], p.dens[i], p.xs[i + 1] - p.xs[i])
        lo = min(lo, a)
        hi = max(hi, b)
    return lo, hi


def sup_abs(p):
    lo, hi = value_range(p)
    return max(abs(lo), abs(hi))


def scale_of(p):
    """A magnitude used to turn relative tolerances into absolute ones."""
    return sup_abs(p)


def positive_intervals(p, atol=0.0):
    """Maximal open intervals where ``p > atol`` for a nonnegative ``p``."""
    if not p.xs:
        return []
    spans = []
    for i in range(p.n_segments):
        a, b = p.xs[i], p.xs[i + 1]
        length = b - a
        num = p.nums[i]
        if _contribution(num, length) <= atol:
            continue
        # interior touching zeros split the segment
        touches = [r for r in _roots_in(num, length)
                   if abs(_pval(num, r) / _pval(p.dens[i], r)) <= max(atol, 1e-300)]
        cuts = [0.0] + touches + [length]
        for t0, t1 in zip(cuts[:-1], cuts[1:]):
            spans.append((a + t0, a + t1))
    if not spans:
        return []
    merged = [list(spans[0])]
    for a, b in spans[1:]:
        if a == merged[-1][1] and evaluate(p, a) > atol:
            merged[-1][1] = b
        else:
            merged.append([a, b])
    return [tuple(m) for m in merged]


def strip_zero_ends(p, atol=0.0):
    """Drop identically-zero end segments of a function with zero tails."""
    if not p.xs:
        return p
    lo, hi = 0, p.n_segments
    while lo < hi and _contribution(p.nums[lo], p.xs[lo + 1] - p.xs[lo]) <= atol:
        lo += 1
    while hi > lo and _contribution(p.nums[hi - 1], p.xs[hi] - p.xs[hi - 1]) <= atol:
        hi -= 1
    if lo == hi:
        return constant(0.0)
    return Piecewise(p.xs[lo:hi + 1], p.nums[lo:hi], p.dens[lo:hi], p.left, p.right)


def reduce_all(p):
    pieces = [_reduce(n, d, p.xs[i + 1] - p.xs[i])
              for i, (n, d) in enumerate(zip(p.nums, p.dens))]
    return _build(list(p.xs), pieces, p.left, p.right) if p.xs else p


def is_linear(p):
    return all(_is_one(d) for d in p.dens) and all(len(n) <= 2 for n in p.nums)


def sample(p, xs: Sequence[float]):
    return np.array([evaluate(p, x) for x in xs])
