"""Black-box recovery of ``(tau, h)`` and certification of the representation
``Tf(y) = h(y) f(tau(y))``.

``tau(y)`` is found by support localization: among probe functions, exactly
the ones whose cozero set contains ``tau(y)`` have a positive image at ``y``.
On a discrete space the probes are the point indicators.  On the line they are
nested plateaus that bisect a bracketing interval down to the space
resolution.  ``h(y)`` is then the image at ``y`` of a probe equal to 1 around
``tau(y)``.

Recovery never certifies by itself; :func:`certify` compares the oracle with
the recovered representation on sampled functions.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional

import numpy as np

from . import cone
from .cone import FiniteDiscrete, Q0
from .errors import (BudgetExhausted, InvalidInput, NotLocalizable, SpaceMismatch,
                     TauNotBijective, WeightUnstable, WeightZero)
from .operators import (DiscreteWeights, PLHomeo, PLWeight, Permutation,
                        WeightedCompositionOp, apply, invert)
from .verification import EVALUATORS, Sampler, Witness, _Outcome

DEFAULT_PL_GRID = tuple(float(v) for v in np.linspace(-4.0, 4.0, 32))


@dataclass(frozen=True)
class RecoveryConfig:
    """Budgets and tolerances for :func:`recover`.

    ``budget`` caps the oracle queries spent localizing one point (``None``
    picks a default large enough for the space).  ``tol=None`` means exact on
    discrete spaces and ``1e-7`` on the line.
    """

    budget: Optional[int] = None
    trials: int = 200
    tol: Optional[float] = None
    grid: tuple = DEFAULT_PL_GRID
    bracket: float = 64.0
    max_depth: int = 60
    margin: float = 1.0 / 32.0
    weight_rtol: float = 1e-9
    seed: int = 0
    parallel: bool = False

    def tolerance(self, space):
        if self.tol is not None:
            return self.tol
        return 0 if isinstance(space, FiniteDiscrete) else 1e-7


@dataclass(frozen=True)
class ProbeFamily:
    """Probes seen while localizing ``tau(y)``, all with positive image at ``y``."""

    y: object
    members: tuple = ()


@dataclass(frozen=True)
class Localization:
    point: object
    radius: float
    family: ProbeFamily
    queries: int
    ambiguities: tuple = ()


@dataclass(frozen=True)
class SamplePoint:
    y: float
    x: float
    radius: float
    h: float


@dataclass(frozen=True)
class RecoveryResult:
    """Recovered ``(tau, h)`` with certification evidence.

    On the line ``tau`` and ``h`` interpolate the grid samples in
    ``samples``; certification only looks at those samples.
    """

    domain: object
    codomain: object
    tau: object
    h: object
    residual_max: object = 0
    residual_mean: object = 0
    query_count: int = 0
    localization_queries: int = 0
    verdict: str = "inconclusive"
    witness: Optional[Witness] = None
    ambiguities: tuple = ()
    samples: tuple = ()
    trials: int = 0
    inverse_residual_max: object = 0

    @property
    def op(self):
        return WeightedCompositionOp(self.domain, self.codomain, self.tau, self.h)


class _Counter:
    def __init__(self, oracle, budget, y):
        self.oracle, self.budget, self.y, self.used = oracle, budget, y, 0

    def value(self, f):
        if self.used >= self.budget:
            raise BudgetExhausted(f"budget of {self.budget} queries exhausted at y={self.y!r}")
        self.used += 1
        return self.oracle(f)(self.y)


# -- localization -----------------------------------------------------------

def _default_budget(X, config):
    if isinstance(X, FiniteDiscrete):
        return X.size
    # top probe with a few bracket doublings, 5 probes on an ambiguous level
    return 16 + 5 * config.max_depth


def localize_tau(oracle, y, budget=None, config=RecoveryConfig()):
    """Locate ``tau(y)``; the radius is 0 on discrete spaces."""
    X = oracle.domain
    if budget is None:
        budget = _default_budget(X, config)
    if budget < 1:
        raise InvalidInput("budget must be positive")
    q = _Counter(oracle, budget, y)
    if isinstance(X, FiniteDiscrete):
        return _localize_discrete(q, X)
    return _localize_line(q, X, config)


@lru_cache(maxsize=8)
def _indicators(X):
    return tuple(cone.indicator(X, x) for x in X.points)


def _localize_discrete(q, X):
    if q.budget < X.size:
        raise BudgetExhausted(f"need {X.size} indicator probes, budget is {q.budget}")
    hits = []
    for x, f in zip(X.points, _indicators(X)):
        v = q.value(f)
        if v > 0:
            hits.append((x, f, v))
    if not hits:
        raise NotLocalizable("zero", q.y)
    if len(hits) > 1:
        raise NotLocalizable("multiple", q.y,
                             f"disjoint indicators at {hits[0][0]!r} and {hits[1][0]!r}")
    x = hits[0][0]
    return Localization(x, 0.0, ProbeFamily(q.y, tuple((f, v) for _, f, v in hits)), q.used)


def _localize_line(q, X, config):
    c, R = 0.0, float(config.bracket)
    members = []
    # grow the bracket until the top-level probe sees tau(y)
    while True:
        f = cone.plateau(X, c, R, R * (1 + config.margin))
        v = q.value(f)
        if v > 0:
            members.append((f, v))
            break
        if R > 2.0 ** 40:
            raise NotLocalizable("zero", q.y, "no plateau has a positive image")
        R *= 2.0
    ambiguities = []
    depth = 0
    while R > X.resolution and depth < config.max_depth:
        m = R * config.margin
        half = R / 2
        left = cone.plateau(X, c - half, half, half + m)
        right = cone.plateau(X, c + half, half, half + m)
        vl, vr = q.value(left), q.value(right)
        if vl > 0 and vr > 0:
            # open supports (c-R-m, c+m) and (c-m, c+R+m) overlap; split them apart
            lo_probe = _interval_probe(X, c - R - m, c - m / 2, m)
            hi_probe = _interval_probe(X, c + m / 2, c + R + m, m)
            sl, sh = q.value(lo_probe), q.value(hi_probe)
            if sl > 0 and sh > 0:
                raise NotLocalizable("multiple", q.y,
                                     f"disjoint probes around {c:.17g} both positive")
            middle = cone.plateau(X, c, half, half + m)
            vm = q.value(middle)
            if vm > 0:
                members.append((middle, vm))
            else:
                ambiguities.append({"y": q.y, "center": c, "radius": R,
                                    "left": float(vl), "right": float(vr)})
                if vl >= vr:
                    members.append((left, vl))
                    c -= half
                else:
                    members.append((right, vr))
                    c += half
        elif vl > 0:
            members.append((left, vl))
            c -= half
        elif vr > 0:
            members.append((right, vr))
            c += half
        else:
            raise NotLocalizable("zero", q.y, f"both halves of [{c - R:.17g}, {c + R:.17g}] vanish")
        R = half + m
        depth += 1
    return Localization(c, R, ProbeFamily(q.y, tuple(members)), q.used, tuple(ambiguities))


def _interval_probe(X, a, b, m):
    """A plateau whose cozero set is exactly ``(a, b)``."""
    center, outer = (a + b) / 2, (b - a) / 2
    return cone.plateau(X, center, outer - m / 4, outer)


# -- weights ----------------------------------------------------------------

def extract_weight(oracle, y, tau_y, radius=0.0, rtol=1e-9):
    """``h(y)``: the image at ``y`` of a probe equal to 1 around ``tau_y``."""
    X = oracle.domain
    if isinstance(X, FiniteDiscrete):
        v = oracle(cone.indicator(X, tau_y))(y)
        if not v > 0:
            raise WeightZero(f"indicator at {tau_y!r} has image 0 at y={y!r}")
        return v
    r = max(float(radius), X.resolution)
    wide = oracle(cone.plateau(X, tau_y, 2 * r, 4 * r))(y)
    if not wide > 0:
        raise WeightZero(f"plateau at {tau_y!r} has image 0 at y={y!r}")
    narrow = oracle(cone.plateau(X, tau_y, r, 2 * r))(y)
    if abs(wide - narrow) > rtol * max(abs(wide), abs(narrow)):
        raise WeightUnstable(f"plateau probes at y={y!r} give {wide!r} and {narrow!r}")
    return float(wide)


# -- recovery ---------------------------------------------------------------

def _map_points(fn, points, parallel):
    if parallel and len(points) > 1:
        with ThreadPoolExecutor() as pool:
            return list(pool.map(fn, points))
    return [fn(p) for p in points]


def recover(oracle, Y=None, config=RecoveryConfig()):
    """Recover ``(tau, h)`` for the oracle and certify it."""
    Y = oracle.codomain if Y is None else Y
    if Y != oracle.codomain:
        raise SpaceMismatch("Y is not the oracle's codomain")
    X = oracle.domain
    if isinstance(X, FiniteDiscrete) != isinstance(Y, FiniteDiscrete):
        raise SpaceMismatch("domain and codomain must be of the same kind")
    start_queries = oracle.query_count
    budget = config.budget if config.budget is not None else _default_budget(X, config)
    parallel = config.parallel and oracle.thread_safe
    if isinstance(Y, FiniteDiscrete):
        locs = _map_points(lambda y: localize_tau(oracle, y, budget, config), Y.points, parallel)
        targets = tuple(loc.point for loc in locs)
        seen = {}
        for y, x in zip(Y.points, targets):
            if x in seen:
                raise TauNotBijective(f"tau({seen[x]!r}) = tau({y!r}) = {x!r}")
            seen[x] = y
        if len(seen) != X.size:
            raise TauNotBijective("tau does not reach every point of X")
        # the localizing indicator is 1 on the open set {tau(y)}, so its image is h(y)
        weights = tuple(loc.family.members[0][1] for loc in locs)
        tau = Permutation(Y, X, targets)
        h = DiscreteWeights(Y, weights)
        samples = ()
    else:
        ys = tuple(float(y) for y in config.grid)
        if len(ys) < 2 or any(b <= a for a, b in zip(ys[:-1], ys[1:])):
            raise InvalidInput("the PL sample grid needs >= 2 increasing points")

        def one(y):
            loc = localize_tau(oracle, y, budget, config)
            hy = extract_weight(oracle, y, loc.point, loc.radius, config.weight_rtol)
            return loc, SamplePoint(y, float(loc.point), float(loc.radius), hy)

        pairs = _map_points(one, ys, parallel)
        locs = [p[0] for p in pairs]
        samples = tuple(p[1] for p in pairs)
        xs = [s.x for s in samples]
        steps = np.diff(xs)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise TauNotBijective("recovered tau samples are not strictly monotone")
        tau = PLHomeo.from_samples(ys, xs)
        h = PLWeight(ys, [s.h for s in samples])
    loc_queries = sum(loc.queries for loc in locs)
    ambiguities = tuple(a for loc in locs for a in loc.ambiguities)
    result = RecoveryResult(X, Y, tau, h, localization_queries=loc_queries,
                            query_count=oracle.query_count - start_queries,
                            ambiguities=ambiguities, samples=samples)
    sampler = _certify_sampler(result, config.seed)
    return certify(oracle, result, sampler, config.trials, config.tolerance(Y), config.parallel)


def recover_inverse(oracle_inverse, X=None, config=RecoveryConfig()):
    """Recovery for ``T^-1``: yields ``sigma: X -> Y`` and the weight ``w`` on ``X``."""
    return recover(oracle_inverse, X, config)


def _certify_sampler(result, seed):
    X = result.domain
    if isinstance(X, FiniteDiscrete):
        return Sampler(X, seed=seed)
    xs = [s.x for s in result.samples]
    # cover the recovered range of tau plus a margin, where residuals are measured
    return Sampler(X, seed=seed, support=(min(xs) - 1.0, max(xs) + 1.0))


# -- certification ----------------------------------------------------------

def _ev_representation(T, inputs, tol, params):
    f = inputs[0]
    lhs = T(f)(params["y"])
    rhs = params["h_y"] * f(params["tau_y"])
    disc = abs(lhs - rhs)
    return _Outcome(lhs, rhs, disc, disc <= tol)


def _ev_inverse(T, inputs, tol, params):
    """``S(Tf)(tau(y)) = Tf(y) / h(y)`` must give back ``f(tau(y))``."""
    f = inputs[0]
    lhs = T(f)(params["y"]) / params["h_y"]
    rhs = f(params["tau_y"])
    disc = abs(lhs - rhs)
    return _Outcome(lhs, rhs, disc, disc <= tol)


EVALUATORS["representation"] = _ev_representation
EVALUATORS["inverse"] = _ev_inverse


def _certify_inputs(sampler, trials):
    rng = sampler.rng("certify")
    fs = sampler.corner_functions()[:trials]
    fs += [sampler.function(rng) for _ in range(trials - len(fs))]
    return fs


def certify(oracle, result, sampler, trials, tol=None, parallel=False):
    """Compare the oracle with ``h(y) f(tau(y))`` on ``trials`` sampled ``f``.

    Every point of a discrete ``Y`` is checked, or every grid sample on the
    line.  The inverse built from ``(tau, h)`` must also return ``f`` at the
    recovered points.  Zero trials give an inconclusive verdict.
    """
    Y = result.codomain
    discrete = isinstance(Y, FiniteDiscrete)
    if tol is None:
        tol = 0 if discrete else 1e-7
    start_queries = oracle.query_count
    if trials <= 0:
        return replace(result, verdict="inconclusive", trials=0, witness=None)
    fs = _certify_inputs(sampler, trials)
    if discrete:
        points = [(y, result.tau(y), result.h(y)) for y in Y.points]
    else:
        points = [(s.y, s.x, s.h) for s in result.samples]
    op_hat = result.op
    S = invert(op_hat)

    def one(f):
        Tf = oracle(f)
        back = apply(S, Tf)
        return [(abs(Tf(y) - hy * f(x)), abs(back(x) - f(x))) for (y, x, hy) in points]

    table = _map_points(one, fs, parallel and oracle.thread_safe)
    worst, total, count, worst_inv = (Q0 if discrete else 0.0), (Q0 if discrete else 0.0), 0, 0
    witness = None
    for f, rows in zip(fs, table):
        for (y, x, hy), (res, inv) in zip(points, rows):
            total += res
            count += 1
            worst = max(worst, res)
            worst_inv = max(worst_inv, inv)
            if witness is None and (res > tol or inv > tol):
                name = "representation" if res > tol else "inverse"
                params = {"y": y, "tau_y": x, "h_y": hy}
                out = EVALUATORS[name](oracle, [f], tol, params)
                witness = Witness(name, [f], out.lhs, out.rhs, out.discrepancy,
                                  result.domain, params)
    mean = total / count if count else total
    if not discrete:
        worst, mean, worst_inv = float(worst), float(mean), float(worst_inv)
    verdict = "refuted" if witness is not None else "certified"
    if verdict == "certified" and result.h.h_min <= 0:
        verdict = "refuted"
    return replace(result, residual_max=worst, residual_mean=mean, verdict=verdict,
                   witness=witness, trials=len(fs), inverse_residual_max=worst_inv,
                   query_count=result.query_count + oracle.query_count - start_queries)


# -- duality ----------------------------------------------------------------

@dataclass(frozen=True)
class DualityReport:
    """Consistency of ``(tau, h)`` with the recovered inverse ``(sigma, w)``."""

    ok: bool
    max_weight_error: object
    max_point_error: object
    failures: list = field(default_factory=list)


def check_duality(forward, backward, tol=None):
    """``sigma = tau^-1`` and ``h(y) w(tau(y)) = 1``.

    Exact on discrete spaces.  On the line both are compared at the forward
    grid samples by interpolating the inverse recovery.
    """
    Y = forward.codomain
    if isinstance(Y, FiniteDiscrete):
        tol = 0 if tol is None else tol
        failures = []
        w_err, p_err = Q0, 0
        for y in Y.points:
            x = forward.tau(y)
            err = abs(forward.h(y) * backward.h(x) - 1)
            w_err = max(w_err, err)
            back = backward.tau(x)
            if back != y:
                p_err = 1
                failures.append({"y": y, "tau_y": x, "sigma_tau_y": back})
            elif err > tol:
                failures.append({"y": y, "tau_y": x, "product": forward.h(y) * backward.h(x)})
        return DualityReport(not failures, w_err, p_err, failures)
    tol = 1e-6 if tol is None else tol
    failures = []
    w_err = p_err = 0.0
    for s in forward.samples:
        prod = s.h * backward.h(s.x)
        back = backward.tau(s.x)
        w_err = max(w_err, abs(prod - 1.0))
        p_err = max(p_err, abs(back - s.y))
        if abs(prod - 1.0) > tol or abs(back - s.y) > tol:
            failures.append({"y": s.y, "tau_y": s.x, "product": prod, "sigma_tau_y": back})
    return DualityReport(not failures, w_err, p_err, failures)


__all__ = [
    "RecoveryConfig", "ProbeFamily", "Localization", "SamplePoint", "RecoveryResult",
    "DualityReport", "localize_tau", "extract_weight", "recover", "recover_inverse",
    "certify", "check_duality", "DEFAULT_PL_GRID",
]
