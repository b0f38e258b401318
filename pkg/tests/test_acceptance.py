"""Acceptance criteria, each at its stated size and tolerance.

Every test records one PASS/FAIL line; the lines are printed together in the
pytest terminal summary (and directly when this file is run as a script).
"""

import json
import random
import time

import numpy as np
import pytest

from normadd import cone, jsonio
from normadd.bruteforce import GridMap, enumerate_grid_cone, enumerate_report
from normadd.cone import FiniteDiscrete, PLLine
from normadd.fixtures import NEGATIVE_CONTROLS, make_fixture
from normadd.operators import apply, as_oracle, invert, random_op
from normadd.recovery import RecoveryConfig, check_duality, recover, recover_inverse
from normadd.verification import (Sampler, check_norm_additive, replay, run_all_checks)

RESULTS = {}


def record(number, ok, detail):
    RESULTS[number] = f"acceptance {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(RESULTS[number])
    assert ok, RESULTS[number]


def discrete_space(seed):
    return FiniteDiscrete.of_size(random.Random(seed).randint(1, 64))


def test_criterion_1_canonical_ops_are_norm_additive():
    start = time.perf_counter()
    worst, failures = 0, 0
    for seed in range(1000):
        X = discrete_space(seed)
        r = check_norm_additive(as_oracle(random_op(seed, X, X)), Sampler(X, seed), 50)
        worst = max(worst, r.max_discrepancy)
        failures += not r.passed
    elapsed = time.perf_counter() - start
    record(1, failures == 0 and worst == 0 and elapsed < 30,
           f"1000 ops x 50 pairs, max discrepancy {worst}, {elapsed:.1f}s (< 30s)")


def test_criterion_2_discrete_round_trip():
    start = time.perf_counter()
    bad = []
    for seed in range(200):
        X = discrete_space(seed)
        op = random_op(seed, X, X)
        r = recover(as_oracle(op))
        if not (r.tau == op.tau and r.h == op.h and r.verdict == "certified"
                and r.residual_max == 0 and r.localization_queries == X.size ** 2):
            bad.append(seed)
    elapsed = time.perf_counter() - start
    record(2, not bad and elapsed < 30,
           f"200 ops recovered exactly with n*|Y| localization queries, "
           f"failures {bad[:5]}, {elapsed:.1f}s (< 30s)")


def test_criterion_3_inverse_formula():
    start = time.perf_counter()
    exact_fail, line_worst = 0, 0.0
    for seed in range(100):
        X = discrete_space(seed)
        op = random_op(seed, X, X)
        S = invert(op)
        s = Sampler(X, seed)
        rng = s.rng("inverse")
        for _ in range(20):
            f = s.function(rng)
            exact_fail += apply(S, apply(op, f)) != f
    L = PLLine()
    for seed in range(100):
        op = random_op(seed, L, L, (0.5, 4.0))
        S = invert(op)
        s = Sampler(L, seed)
        rng = s.rng("inverse")
        for _ in range(20):
            f = s.function(rng)
            line_worst = max(line_worst, cone.sup_distance(apply(S, apply(op, f)), f))
    elapsed = time.perf_counter() - start
    record(3, exact_fail == 0 and line_worst <= 1e-9 and elapsed < 10,
           f"discrete mismatches {exact_fail}, line sup error {line_worst:.2e} (<= 1e-9), "
           f"{elapsed:.1f}s (< 10s)")


def test_criterion_4_weight_duality():
    bad = []
    for seed in range(100):
        X = discrete_space(seed)
        op = random_op(seed, X, X)
        fwd = recover(as_oracle(op))
        back = recover_inverse(as_oracle(invert(op)))
        d = check_duality(fwd, back, tol=0)
        exact = all(fwd.h(y) * back.h(fwd.tau(y)) == 1 for y in X.points)
        if not (d.ok and exact):
            bad.append(seed)
    record(4, not bad, f"h(y) w(tau(y)) = 1 exactly on 100 ops, failures {bad[:5]}")


def test_criterion_5_structural_checks():
    bad = []
    for seed in range(200):
        X = discrete_space(seed)
        op = random_op(seed, X, X)
        reports = run_all_checks(as_oracle(op), Sampler(X, seed), 20,
                                 inverse_oracle=as_oracle(invert(op)), known_bound=op.h_max,
                                 tuple_sizes=(2, 3))
        by_name = {}
        for r in reports:
            by_name.setdefault(r.property_name, []).append(r)
        bound = by_name["bound"][0]
        # unit probes come first and are the point indicators
        attained = bound.constants["attained_by_probe"] < X.size
        lip = by_name["lipschitz"][0]
        ok = (all(r.passed and r.max_discrepancy == 0 for r in reports
                  if r.property_name != "bound")
              and bound.passed and bound.constants["M_hat"] == op.h_max and attained
              and lip.constants["M"] == op.h_max
              and {r.constants["tuple_size"] for r in by_name["biseparating"]} == {2, 3})
        if not ok:
            bad.append(seed)
    record(5, not bad, f"order-iso, biseparating(2,3), bound, Lipschitz on 200 ops, "
                       f"failures {bad[:5]}")


def test_criterion_6_negative_controls():
    X = FiniteDiscrete.of_size(3)
    lines, ok = [], True
    for name in NEGATIVE_CONTROLS:
        oracle, inverse = make_fixture(name, X)
        reports = run_all_checks(oracle, Sampler(X, 0), 50, inverse_oracle=inverse)
        failed = [r for r in reports if not r.passed]
        if not failed:
            ok = False
            lines.append(f"{name}: not rejected")
            continue
        text = jsonio.dumps(jsonio.witness_to_json(failed[0].witness))
        w = jsonio.witness_from_json(json.loads(text))
        again, passed = replay(w, make_fixture(name, X)[0])
        same = jsonio.number(again.discrepancy) == json.loads(text)["discrepancy"]
        ok &= (not passed) and same
        lines.append(f"{name}: {failed[0].property_name} d={json.loads(text)['discrepancy']}")
    record(6, ok, "; ".join(lines))


def test_criterion_7_brute_force():
    one = enumerate_report(1, 1)
    c1 = enumerate_grid_cone(1, 1)
    start = time.perf_counter()
    two = enumerate_report(2, 2)
    elapsed = time.perf_counter() - start
    c2 = enumerate_grid_cone(2, 2)
    swap = GridMap(tuple(c2.index((f[1], f[0])) for f in c2.elements))
    maps = [tuple(c2.index(tuple(pair[1])) for pair in ex["map"])
            for ex in two["non_monomial_examples"]]
    taus = {tuple(m["tau"]) for m in two["monomial_maps"]}
    ok = (one["passing_count"] == 1 and one["monomial_maps"][0]["tau"] == [0]
          and len(c1.elements) == 2
          and {(0, 1), (1, 0)} <= taus and swap.perm not in maps
          and two["all_fix_zero"] and elapsed < 60)
    record(7, ok, f"(1,1): {one['passing_count']} passer; (2,2): {two['passing_count']} passers, "
                  f"{two['monomial_count']} monomial, {two['non_monomial_count']} non-monomial, "
                  f"{elapsed:.2f}s (< 60s)")


def test_criterion_8_line_model():
    L = PLLine()
    start = time.perf_counter()
    worst_res, worst_h, bad = 0.0, 0.0, []
    config = RecoveryConfig()
    assert len(config.grid) == 32
    for seed in range(50):
        op = random_op(seed, L, L, (0.5, 4.0))
        r = recover(as_oracle(op), config=config)
        h_err = max(abs(s.h - op.h(s.y)) for s in r.samples)
        monotone = bool(np.all(np.diff([s.x for s in r.samples]) > 0))
        worst_res, worst_h = max(worst_res, r.residual_max), max(worst_h, h_err)
        if not (r.verdict == "certified" and r.residual_max <= 1e-7 and h_err <= 1e-6
                and monotone):
            bad.append(seed)
    elapsed = time.perf_counter() - start
    record(8, not bad and elapsed < 120,
           f"50 ops, residual {worst_res:.2e} (<= 1e-7), h error {worst_h:.2e} (<= 1e-6), "
           f"failures {bad[:5]}, {elapsed:.1f}s (< 120s)")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
