"""Exhaustive search over tiny grid cones.

A grid cone holds every function on ``n_points`` points with integer values
in ``0..max_value``.  We list the bijections of that finite set which satisfy
``||T(f+g)|| = ||Tf + Tg||`` for every pair whose sum stays on the grid, then
ask which of them are monomial, i.e. of the form ``h(y) f(tau(y))``.

Sums that leave the grid are never checked, so this is a weaker condition
than the one on a full cone and non-monomial passers can exist.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import InvalidInput, TooLarge

DEFAULT_ELEMENT_CAP = 16
DEFAULT_PERMUTATION_CAP = 400_000
DEFAULT_NODE_CAP = 20_000_000


@dataclass(frozen=True)
class GridCone:
    n_points: int
    max_value: int
    elements: tuple

    def index(self, f):
        return self._index[tuple(f)]

    @property
    def _index(self):
        cached = self.__dict__.get("_index_cache")
        if cached is None:
            cached = {e: i for i, e in enumerate(self.elements)}
            object.__setattr__(self, "_index_cache", cached)
        return cached

    @property
    def zero_index(self):
        return 0

    def indicator(self, x):
        return tuple(1 if p == x else 0 for p in range(self.n_points))


@dataclass(frozen=True)
class GridMap:
    """A bijection of grid elements, stored as ``perm[i] = index of T(e_i)``."""

    perm: tuple

    def __post_init__(self):
        if sorted(self.perm) != list(range(len(self.perm))):
            raise InvalidInput("a grid map must be a permutation of element indices")

    def image(self, cone, f):
        return cone.elements[self.perm[cone.index(f)]]

    def then(self, other):
        """``other o self``."""
        return GridMap(tuple(other.perm[j] for j in self.perm))

    def inverse(self):
        inv = [0] * len(self.perm)
        for i, j in enumerate(self.perm):
            inv[j] = i
        return GridMap(tuple(inv))


def enumerate_grid_cone(n_points, max_value, cap=DEFAULT_ELEMENT_CAP):
    if n_points < 1 or max_value < 1:
        raise InvalidInput("n_points and max_value must be >= 1")
    size = (max_value + 1) ** n_points
    if size > cap:
        raise TooLarge(f"{size} grid elements exceed the cap of {cap}")
    elements = tuple(itertools.product(range(max_value + 1), repeat=n_points))
    return GridCone(n_points, max_value, elements)


def _sum(f, g):
    return tuple(a + b for a, b in zip(f, g))


def admissible_pairs(cone):
    """Ordered pairs ``(f, g)`` with ``f + g`` still on the grid."""
    m = cone.max_value
    return [(f, g) for f in cone.elements for g in cone.elements
            if all(a + b <= m for a, b in zip(f, g))]


def _pairs_by_sum(cone):
    """For each element index k, the index pairs (i, j) with e_i + e_j = e_k.

    In lexicographic order a sum never precedes its summands, so every pair
    is complete once its sum is assigned.
    """
    by_sum = [[] for _ in cone.elements]
    for f, g in admissible_pairs(cone):
        by_sum[cone.index(_sum(f, g))].append((cone.index(f), cone.index(g)))
    return by_sum


def _norm(v):
    return max(v)


def _pair_ok(imgs, i, j, k):
    a, b = imgs[i], imgs[j]
    return _norm(imgs[k]) == max(x + y for x, y in zip(a, b))


@dataclass(frozen=True)
class SearchResult:
    maps: tuple
    pairs_checked: int
    nodes: int
    is_group: bool


def find_norm_additive_bijections(cone, mode="backtrack", permutation_cap=DEFAULT_PERMUTATION_CAP,
                                  node_cap=DEFAULT_NODE_CAP):
    """All grid bijections meeting the norm condition on admissible pairs.

    ``mode="exhaustive"`` tests every permutation and is capped at
    ``permutation_cap`` of them.  ``mode="backtrack"`` assigns images in
    element order and prunes as soon as a completed pair fails; it gives the
    same list in the same (lexicographic) order.
    """
    N = len(cone.elements)
    by_sum = _pairs_by_sum(cone)
    pairs_total = sum(len(p) for p in by_sum)
    els = cone.elements
    if mode == "exhaustive":
        if math.factorial(N) > permutation_cap:
            raise TooLarge(f"{N}! permutations exceed the cap of {permutation_cap}")
        found = []
        for perm in itertools.permutations(range(N)):
            imgs = [els[j] for j in perm]
            if all(_pair_ok(imgs, i, j, k) for k in range(N) for i, j in by_sum[k]):
                found.append(GridMap(perm))
        nodes = math.factorial(N)
    elif mode == "backtrack":
        found, nodes = _backtrack(els, by_sum, node_cap)
    else:
        raise InvalidInput(f"unknown mode {mode!r}")
    return SearchResult(tuple(found), pairs_total, nodes, _is_group(found))


def _backtrack(els, by_sum, node_cap):
    N = len(els)
    # every check compares ||T(f+g)|| with ||Tf + Tg||, so precompute both over image indices
    norm = [max(e) for e in els]
    sum_norm = [[max(a + b for a, b in zip(u, v)) for v in els] for u in els]
    perm = [0] * N
    used = [False] * N
    found = []
    nodes = 0

    def extend(k):
        nonlocal nodes
        if k == N:
            found.append(GridMap(tuple(perm)))
            return
        pairs = by_sum[k]
        for j in range(N):
            if used[j]:
                continue
            nodes += 1
            if nodes > node_cap:
                raise TooLarge(f"search exceeded {node_cap} nodes")
            perm[k] = j
            nj = norm[j]
            if all(nj == sum_norm[perm[a]][perm[b]] for a, b in pairs):
                used[j] = True
                extend(k + 1)
                used[j] = False

    extend(0)
    return found, nodes


def _is_group(maps):
    if not maps:
        return False
    table = {m.perm for m in maps}
    identity = tuple(range(len(maps[0].perm)))
    if identity not in table:
        return False
    return all(a.then(b).perm in table for a in maps for b in maps) and \
        all(m.inverse().perm in table for m in maps)


# -- monomial classification ------------------------------------------------

@dataclass(frozen=True)
class MonomialVerdict:
    """``monomial`` with ``(tau, h)``, or a witness where every candidate fails.

    ``tau[y]`` is a point index and ``h[y]`` a Fraction.  ``witness`` is
    ``None`` for monomial maps.
    """

    monomial: bool
    tau: Optional[tuple] = None
    h: Optional[tuple] = None
    witness: Optional[dict] = None


def _candidate(cone, m, tau):
    h = []
    for y, x in enumerate(tau):
        v = Fraction(m.image(cone, cone.indicator(x))[y])
        if v <= 0:
            return None
        h.append(v)
    return tuple(h)


def _matches_at(cone, m, tau, h, f):
    img = m.image(cone, f)
    return all(img[y] == h[y] * f[tau[y]] for y in range(cone.n_points))


def classify_monomial(cone, m):
    """Search every point permutation ``tau``; ``h`` comes from indicator images."""
    cands = []
    for tau in itertools.permutations(range(cone.n_points)):
        h = _candidate(cone, m, tau)
        if h is not None and all(_matches_at(cone, m, tau, h, f) for f in cone.elements):
            return MonomialVerdict(True, tau, h)
        cands.append((tau, h))
    # h is None: some indicator image vanishes where tau points, so it fails everywhere
    for f in cone.elements:
        if all(h is None or not _matches_at(cone, m, tau, h, f) for tau, h in cands):
            return MonomialVerdict(False, witness={
                "element": list(f), "image": list(m.image(cone, f)),
                "candidates": [{"tau": list(t), "h": None if h is None else [str(v) for v in h]}
                               for t, h in cands]})
    # every element is reproduced by some candidate, but no single candidate fits all
    failures = []
    for tau, h in cands:
        bad = next(f for f in cone.elements if h is None or not _matches_at(cone, m, tau, h, f))
        failures.append({"tau": list(tau), "h": None if h is None else [str(v) for v in h],
                         "element": list(bad)})
    return MonomialVerdict(False, witness={"element": None, "per_candidate": failures})


# -- report -----------------------------------------------------------------

def map_table(cone, m):
    return [[list(f), list(cone.elements[j])] for f, j in zip(cone.elements, m.perm)]


def enumerate_report(n_points, max_value, cap=DEFAULT_ELEMENT_CAP, mode="backtrack",
                     max_examples=5):
    """Run the search and the classifier; the JSON-ready summary."""
    start = time.perf_counter()
    cone = enumerate_grid_cone(n_points, max_value, cap)
    search = find_norm_additive_bijections(cone, mode)
    verdicts = [classify_monomial(cone, m) for m in search.maps]
    monomial = [(m, v) for m, v in zip(search.maps, verdicts) if v.monomial]
    others = [(m, v) for m, v in zip(search.maps, verdicts) if not v.monomial]
    return {
        "cone": {"n": n_points, "max": max_value, "elements": len(cone.elements)},
        "pairs_checked": search.pairs_checked,
        "nodes": search.nodes,
        "passing_count": len(search.maps),
        "monomial_count": len(monomial),
        "non_monomial_count": len(others),
        "is_group": search.is_group,
        "all_fix_zero": all(m.perm[cone.zero_index] == cone.zero_index for m in search.maps),
        "monomial_maps": [{"tau": list(v.tau), "h": [str(x) for x in v.h]} for _, v in monomial],
        "non_monomial_examples": [{"map": map_table(cone, m), "witness": v.witness}
                                  for m, v in others[:max_examples]],
        "elapsed": time.perf_counter() - start,
    }


__all__ = [
    "GridCone", "GridMap", "SearchResult", "MonomialVerdict", "enumerate_grid_cone",
    "admissible_pairs", "find_norm_additive_bijections", "classify_monomial",
    "enumerate_report", "map_table",
]
