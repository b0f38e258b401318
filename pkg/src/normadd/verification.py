"""Property checks on black-box oracles, with replayable witnesses.

Every check draws its inputs from a seeded :class:`Sampler`, evaluates one
property per trial and stops at nothing: all trials run, and the first
failing trial in index order becomes the witness.  Discrete spaces compare
exact rationals with tolerance 0; on the line the tolerance is relative.
"""

from __future__ import annotations

import dataclasses
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from . import cone
from .cone import FiniteDiscrete, Q0, Q1, rational
from .errors import CannotSampleDisjoint, InvalidInput

LINE_RTOL = 1e-9


# -- sampling ---------------------------------------------------------------

@dataclass(frozen=True)
class Sampler:
    """Seeded generator of cone functions over ``space``.

    Discrete values are uniform rationals in ``value_range`` with an exact
    zero per point with probability ``sparsity``.  Line functions are PL with
    a breakpoint count in ``breakpoint_range`` on a random window inside
    ``support``.  With ``corner_cases`` each check starts from a fixed set of
    structured inputs (zero, indicators, constants) before random ones.
    """

    space: object
    seed: int = 0
    value_range: tuple = (0, 10)
    sparsity: float = 0.3
    breakpoint_range: tuple = (3, 8)
    support: tuple = (-6.0, 6.0)
    corner_cases: bool = True

    def rng(self, salt):
        return random.Random(f"{self.seed}/{salt}")

    def for_space(self, space):
        return dataclasses.replace(self, space=space)

    @property
    def discrete(self):
        return isinstance(self.space, FiniteDiscrete)

    def _value(self, rng):
        lo, hi = self.value_range
        if self.discrete:
            lo, hi = rational(lo), rational(hi)
            return lo + (hi - lo) * rational(f"{rng.randint(0, 1000)}/1000")
        return rng.uniform(float(lo), float(hi))

    def function(self, rng):
        if self.discrete:
            vals = [Q0 if rng.random() < self.sparsity else self._value(rng)
                    for _ in range(self.space.size)]
            return cone.DiscreteFunction(self.space, vals)
        k = rng.randint(*self.breakpoint_range)
        lo, hi = self.support
        width = rng.uniform(0.25, 1.0) * (hi - lo)
        a = rng.uniform(lo, hi - width)
        b = a + width
        cell = width / (k + 1)
        xs = [a] + [a + cell * (j + 1 + rng.uniform(-0.25, 0.25)) for j in range(k)] + [b]
        vs = [0.0] + [0.0 if rng.random() < self.sparsity else self._value(rng) for _ in range(k)] + [0.0]
        return cone.PLFunction(xs, vs)

    def nonzero_function(self, rng):
        for _ in range(100):
            f = self.function(rng)
            if not cone.is_zero(f):
                return f
        raise InvalidInput("sampler keeps producing the zero function")

    def unit(self, rng):
        f = self.nonzero_function(rng)
        n = cone.sup_norm(f)
        return cone.scale(1 / n if self.discrete else 1.0 / n, f)

    # structured inputs ----------------------------------------------------

    def corner_functions(self):
        if not self.corner_cases:
            return []
        S = self.space
        if self.discrete:
            ones = cone.constant_function(S, 1)
            out = [cone.zero(S), ones, cone.scale(2, ones)]
            out += [cone.indicator(S, p) for p in S.points[:8]]
            return out
        return [cone.zero(S), cone.plateau(S, 0.0, 1.0, 2.0), cone.tent(-1.0, 0.0, 1.0, 2.0)]

    def corner_pairs(self):
        fs = self.corner_functions()
        if not fs:
            return []
        pairs = [(fs[0], fs[0]), (fs[1], fs[1]), (fs[1], fs[0])]
        pairs += [(a, b) for a in fs[3:5] for b in fs[3:5]]
        return pairs

    def unit_probes(self):
        """Deterministic unit-norm probes: every point indicator, or plateaus."""
        if not self.corner_cases:
            return []
        S = self.space
        if self.discrete:
            return [cone.indicator(S, p) for p in S.points]
        lo, hi = self.support
        centers = [lo + (hi - lo) * (j + 0.5) / 16 for j in range(16)]
        return [cone.plateau(S, c, 0.25, 0.5) for c in centers]

    def disjoint_tuple(self, rng, n):
        S = self.space
        if self.discrete:
            if S.size < n:
                raise CannotSampleDisjoint(f"{S.size} points cannot carry {n} disjoint functions")
            owners = list(range(n)) + [rng.randrange(-1, n) for _ in range(S.size - n)]
            rng.shuffle(owners)
            fs = []
            for i in range(n):
                vals = [(self._value(rng) or Q1) if owners[p] == i else Q0 for p in range(S.size)]
                fs.append(cone.DiscreteFunction(S, vals))
            return fs
        lo, hi = self.support
        cuts = sorted(rng.uniform(lo, hi) for _ in range(n - 1))
        edges = [lo] + cuts + [hi]
        fs = []
        for a, b in zip(edges[:-1], edges[1:]):
            gap = 0.05 * (b - a)
            a2, b2 = a + gap, b - gap
            if not b2 > a2:
                raise CannotSampleDisjoint("support window too small")
            ramp = 0.25 * (b2 - a2)
            fs.append(cone.scale(rng.uniform(0.5, 10.0), cone.plateau_on(a2, b2, ramp)))
        return fs


# -- reports ----------------------------------------------------------------

@dataclass
class Witness:
    """A failing trial: the inputs and both sides of the violated relation.

    ``discrepancy`` is ``|lhs - rhs|`` for equalities and the amount by which
    an inequality is exceeded otherwise.
    """

    property_name: str
    inputs: list
    lhs: object
    rhs: object
    discrepancy: object
    space: object = None
    params: dict = field(default_factory=dict)


@dataclass
class CheckReport:
    property_name: str
    trials: int
    passed: bool
    witness: Optional[Witness] = None
    constants: dict = field(default_factory=dict)
    seed: Optional[int] = None
    elapsed: float = 0.0
    max_discrepancy: object = 0

    @property
    def verdict(self):
        return "pass" if self.passed else "fail"


@dataclass
class _Outcome:
    lhs: object
    rhs: object
    discrepancy: object
    ok: bool


def _default_tol(space, tol):
    if tol is not None:
        return tol
    return 0 if isinstance(space, FiniteDiscrete) else LINE_RTOL


def _within(disc, tol, scale, discrete):
    if discrete:
        return disc <= tol
    return disc <= tol * max(scale, 1e-300)


# -- property evaluators (shared by checks and replay) ----------------------

def _ev_norm_additive(T, inputs, tol, params):
    f, g = inputs
    lhs = cone.sup_norm(T(cone.add(f, g)))
    rhs = cone.sup_norm(cone.add(T(f), T(g)))
    disc = abs(lhs - rhs)
    return _Outcome(lhs, rhs, disc, _within(disc, tol, max(lhs, rhs), params["discrete"]))


def _ev_zero(T, inputs, tol, params):
    lhs = cone.sup_norm(T(inputs[0]))
    # T0 = 0 is an exact identity, so the tolerance is absolute here
    return _Outcome(lhs, 0, lhs, lhs <= tol)


def _ev_order(T, inputs, tol, params):
    f, g = inputs
    Tf, Tg = T(f), T(g)
    excess = cone.sup_norm(cone.clamped_difference(Tf, Tg))
    scale = max(cone.sup_norm(Tf), cone.sup_norm(Tg))
    return _Outcome(excess, 0, excess, _within(excess, tol, scale, params["discrete"]))


def _ev_biseparating(T, inputs, tol, params):
    images = [T(f) for f in inputs]
    overlap = cone.sup_norm(cone.pointwise_min(images))
    ok = cone.disjoint(images)
    return _Outcome(overlap, 0, overlap, ok)


def _ev_bound(T, inputs, tol, params):
    lhs = cone.sup_norm(T(inputs[0]))
    bound = params.get("known_bound")
    if bound is None:
        return _Outcome(lhs, None, 0, True)
    excess = max(lhs - bound, 0)
    return _Outcome(lhs, bound, excess, _within(excess, tol, bound, params["discrete"]))


def _ev_lipschitz(T, inputs, tol, params):
    f, g = inputs
    lhs = cone.sup_distance(T(f), T(g))
    M = params["M"]
    if not params["discrete"]:
        M = float(M)
    rhs = M * cone.sup_distance(f, g)
    excess = max(lhs - rhs, 0)
    return _Outcome(lhs, rhs, excess, _within(excess, tol, max(lhs, rhs), params["discrete"]))


EVALUATORS = {
    "norm_additive": _ev_norm_additive,
    "zero": _ev_zero,
    "order_iso": _ev_order,
    "order_iso_inverse": _ev_order,
    "biseparating": _ev_biseparating,
    "bound": _ev_bound,
    "lipschitz": _ev_lipschitz,
}


def _run(name, T, input_list, tol, params, space, parallel=False, seed=None, thread_safe=False):
    start = time.perf_counter()
    evaluator = EVALUATORS[name]

    def one(inputs):
        return evaluator(T, inputs, tol, params)

    if parallel and thread_safe and len(input_list) > 1:
        with ThreadPoolExecutor() as pool:
            outcomes = list(pool.map(one, input_list))
    else:
        outcomes = [one(inp) for inp in input_list]
    witness = None
    worst = 0
    for inputs, out in zip(input_list, outcomes):
        if out.discrepancy > worst:
            worst = out.discrepancy
        if not out.ok and witness is None:
            witness = Witness(name, list(inputs), out.lhs, out.rhs, out.discrepancy, space,
                              {k: v for k, v in params.items() if k != "discrete"})
    return CheckReport(name, len(input_list), witness is None, witness, {}, seed,
                       time.perf_counter() - start, worst), outcomes


def _params(space, **kw):
    kw["discrete"] = isinstance(space, FiniteDiscrete)
    return kw


def check_norm_additive(oracle, sampler, trials, tol=None, parallel=False):
    """``||T(f+g)|| = ||Tf + Tg||`` on random pairs."""
    if trials < 1:
        raise InvalidInput("trials must be >= 1")
    rng = sampler.rng("norm_additive")
    pairs = sampler.corner_pairs()[:trials]
    pairs += [(sampler.function(rng), sampler.function(rng)) for _ in range(trials - len(pairs))]
    space = sampler.space
    report, _ = _run("norm_additive", oracle, pairs, _default_tol(space, tol), _params(space),
                     space, parallel, sampler.seed, oracle.thread_safe)
    return report


def check_zero(oracle, tol=None):
    space = oracle.domain
    report, _ = _run("zero", oracle, [[cone.zero(space)]], _default_tol(space, tol),
                     _params(space), space)
    return report


def check_order_iso(oracle, inverse_oracle, sampler, trials, tol=None, parallel=False):
    """``f <= g  =>  Tf <= Tg``, and the same for the inverse when given.

    Comparable pairs are built as ``g = f + d`` with ``d >= 0``.
    """
    if trials < 1:
        raise InvalidInput("trials must be >= 1")

    def pairs_for(s, salt):
        rng = s.rng(salt)
        base = [(f, cone.add(f, d)) for f, d in s.corner_pairs()][:trials]
        while len(base) < trials:
            f, d = s.function(rng), s.function(rng)
            base.append((f, cone.add(f, d)))
        return base

    space = sampler.space
    tol_ = _default_tol(space, tol)
    report, _ = _run("order_iso", oracle, pairs_for(sampler, "order"), tol_, _params(space),
                     space, parallel, sampler.seed, oracle.thread_safe)
    report.constants["directions"] = 1
    if inverse_oracle is not None and report.passed:
        inv_s = sampler.for_space(inverse_oracle.domain)
        back, _ = _run("order_iso_inverse", inverse_oracle, pairs_for(inv_s, "order_inverse"),
                       tol_, _params(inv_s.space), inv_s.space, parallel, sampler.seed,
                       inverse_oracle.thread_safe)
        back.property_name = "order_iso"
        back.constants["directions"] = 2
        back.trials += report.trials
        back.elapsed += report.elapsed
        back.max_discrepancy = max(back.max_discrepancy, report.max_discrepancy)
        return back
    return report


def check_biseparating(oracle, sampler, trials, tuple_size=2, tol=None, parallel=False):
    """Disjoint inputs must have disjoint images."""
    if trials < 1:
        raise InvalidInput("trials must be >= 1")
    if tuple_size < 2:
        raise InvalidInput("tuple_size must be >= 2")
    rng = sampler.rng(f"biseparating/{tuple_size}")
    tuples = [sampler.disjoint_tuple(rng, tuple_size) for _ in range(trials)]
    if sampler.corner_cases:
        tuples[0] = [cone.zero(sampler.space)] + tuples[0][1:]
    space = sampler.space
    report, _ = _run("biseparating", oracle, tuples, _default_tol(space, tol), _params(space),
                     space, parallel, sampler.seed, oracle.thread_safe)
    report.constants["tuple_size"] = tuple_size
    return report


def estimate_bound(oracle, sampler, trials, known_bound=None, tol=None, parallel=False):
    """Largest ``||Tu||`` over unit-norm probes.

    The structured probes (every point indicator on a discrete space) run in
    addition to ``trials`` random unit vectors.  With ``known_bound`` the
    check fails if any probe exceeds it.
    """
    if trials < 1:
        raise InvalidInput("trials must be >= 1")
    rng = sampler.rng("bound")
    probes = [[u] for u in sampler.unit_probes()]
    probes += [[sampler.unit(rng)] for _ in range(trials)]
    space = sampler.space
    report, outcomes = _run("bound", oracle, probes, _default_tol(space, tol),
                            _params(space, known_bound=known_bound), space, parallel,
                            sampler.seed, oracle.thread_safe)
    m_hat = max(o.lhs for o in outcomes)
    report.constants["M_hat"] = m_hat
    report.constants["known_bound"] = known_bound
    report.constants["attained_by_probe"] = next(
        i for i, o in enumerate(outcomes) if o.lhs == m_hat)
    return report


def check_lipschitz(oracle, M, sampler, trials, tol=None, parallel=False):
    """``||Tf - Tg|| <= M ||f - g||`` on random pairs."""
    if not M > 0:
        raise InvalidInput("M must be positive")
    if trials < 1:
        raise InvalidInput("trials must be >= 1")
    rng = sampler.rng("lipschitz")
    pairs = sampler.corner_pairs()[:trials]
    pairs += [(sampler.function(rng), sampler.function(rng)) for _ in range(trials - len(pairs))]
    space = sampler.space
    report, _ = _run("lipschitz", oracle, pairs, _default_tol(space, tol), _params(space, M=M),
                     space, parallel, sampler.seed, oracle.thread_safe)
    report.constants["M"] = M
    return report


def run_all_checks(oracle, sampler, trials, inverse_oracle=None, known_bound=None,
                   tol=None, parallel=False, tuple_sizes=(2,)):
    """The six checks in a fixed order; Lipschitz uses ``known_bound`` or the estimate."""
    reports = [
        check_norm_additive(oracle, sampler, trials, tol, parallel),
        check_zero(oracle, tol),
        check_order_iso(oracle, inverse_oracle, sampler, trials, tol, parallel),
    ]
    for n in tuple_sizes:
        try:
            reports.append(check_biseparating(oracle, sampler, trials, n, tol, parallel))
        except CannotSampleDisjoint as exc:
            skipped = CheckReport("biseparating", 0, True, None,
                                  {"tuple_size": n, "skipped": str(exc)}, sampler.seed)
            reports.append(skipped)
    bound = estimate_bound(oracle, sampler, trials, known_bound, tol, parallel)
    reports.append(bound)
    M = known_bound if known_bound is not None else bound.constants["M_hat"]
    if not M > 0:
        M = 1
    reports.append(check_lipschitz(oracle, M, sampler, trials, tol, parallel))
    return reports


def replay(witness, oracle, tol=None):
    """Re-evaluate a witness's inputs; returns a fresh :class:`Witness`."""
    space = witness.space if witness.space is not None else oracle.domain
    params = _params(space, **witness.params)
    out = EVALUATORS[witness.property_name](oracle, witness.inputs, _default_tol(space, tol), params)
    return Witness(witness.property_name, list(witness.inputs), out.lhs, out.rhs,
                   out.discrepancy, space, dict(witness.params)), out.ok
