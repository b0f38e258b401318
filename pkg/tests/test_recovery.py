import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from normadd import cone
from normadd.cone import FiniteDiscrete, PLLine, rational
from normadd.errors import BudgetExhausted, InvalidInput, NotLocalizable, TauNotBijective
from normadd.fixtures import (averaging_oracle, make_fixture, perturbed_oracle, scale_op,
                              zero_oracle)
from normadd.operators import as_oracle, identity_op, invert, random_op
from normadd.recovery import (RecoveryConfig, _certify_inputs, _certify_sampler, certify,
                              check_duality, extract_weight, localize_tau, recover,
                              recover_inverse)
from normadd.verification import replay

THREE = FiniteDiscrete.of_size(3)
LINE = PLLine()


def test_localize_swap_example(swap_op):
    o = as_oracle(swap_op)
    loc = localize_tau(o, "b")
    assert loc.point == "a" and loc.radius == 0.0 and loc.queries == 2
    (f, v), = loc.family.members
    assert f == cone.indicator(swap_op.domain, "a") and v == rational("1/2")
    assert extract_weight(o, "b", "a") == rational("1/2")


def test_identity_and_scale():
    r = recover(as_oracle(identity_op(THREE)))
    assert r.tau.is_identity() and set(r.h.values) == {1} and r.residual_max == 0
    o = as_oracle(scale_op(THREE, 3))
    assert all(extract_weight(o, y, y) == 3 for y in THREE.points)


def test_zero_oracle_not_localizable():
    with pytest.raises(NotLocalizable) as e:
        localize_tau(zero_oracle(THREE), 0)
    assert e.value.reason == "zero" and not e.value.refutes


def test_budget():
    o = as_oracle(identity_op(THREE))
    with pytest.raises(BudgetExhausted):
        localize_tau(o, 0, budget=2)
    with pytest.raises(InvalidInput):
        localize_tau(o, 0, budget=0)


@settings(max_examples=40)
@given(st.integers(0, 10**6), st.integers(1, 24))
def test_round_trip_exact(seed, n):
    X = FiniteDiscrete.of_size(n)
    op = random_op(seed, X, X)
    r = recover(as_oracle(op))
    assert r.verdict == "certified" and r.residual_max == 0
    assert r.tau == op.tau and r.h == op.h
    assert r.localization_queries == n * n
    assert r.op == op


def test_order_swap_is_refuted():
    oracle, _ = make_fixture("order-swap", THREE)
    try:
        r = recover(oracle)
    except TauNotBijective:
        return
    assert r.verdict == "refuted"
    again, ok = replay(r.witness, make_fixture("order-swap", THREE)[0], tol=0)
    assert not ok and again.discrepancy == r.witness.discrepancy


def test_averaging_not_localizable():
    with pytest.raises(NotLocalizable) as e:
        recover(averaging_oracle(THREE))
    assert e.value.reason == "multiple" and e.value.refutes


def test_perturbed_oracle_residual():
    X = FiniteDiscrete.of_size(4)
    op = random_op(1, X, X)
    eps = rational("1/100")
    r = recover(perturbed_oracle(op, eps))
    assert r.verdict == "refuted"
    # indicators see h + eps, so the residual at f is eps |f^2 - f| at tau(y)
    fs = _certify_inputs(_certify_sampler(r, 0), r.trials)
    expected = max(eps * abs(v * v - v) for f in fs for v in f.values)
    assert r.residual_max == expected
    assert r.witness.property_name == "representation"


def test_zero_trials_inconclusive():
    op = random_op(2, THREE, THREE)
    r = recover(as_oracle(op), config=RecoveryConfig(trials=0))
    assert r.verdict == "inconclusive"
    r2 = certify(as_oracle(op), r, _certify_sampler(r, 0), 0)
    assert r2.verdict == "inconclusive"


def test_inverse_recovery_swap(swap_op):
    back = recover_inverse(as_oracle(invert(swap_op)))
    assert back.tau.targets == ("b", "a")
    assert back.h.values == (2, rational("1/2"))
    fwd = recover(as_oracle(swap_op))
    assert check_duality(fwd, back).ok


def test_duality_random():
    for seed in range(20):
        X = FiniteDiscrete.of_size(1 + seed % 7)
        op = random_op(seed, X, X)
        d = check_duality(recover(as_oracle(op)), recover_inverse(as_oracle(invert(op))))
        assert d.ok and d.max_weight_error == 0


def test_line_recovery_small():
    op = random_op(7, LINE, LINE, (0.5, 4.0))
    cfg = RecoveryConfig(grid=tuple(np.linspace(-3, 3, 8)), trials=30)
    r = recover(as_oracle(op), config=cfg)
    assert r.verdict == "certified" and r.residual_max <= 1e-7
    for s in r.samples:
        assert abs(s.h - op.h(s.y)) <= 1e-6
        assert abs(s.x - op.tau(s.y)) <= 1e-8
    assert np.all(np.diff([s.x for s in r.samples]) > 0)


def test_line_recovery_reversing():
    op = random_op(9, LINE, LINE, (0.5, 4.0), reversing=True)
    cfg = RecoveryConfig(grid=tuple(np.linspace(-2, 2, 5)), trials=10)
    r = recover(as_oracle(op), config=cfg)
    assert r.verdict == "certified"
    assert np.all(np.diff([s.x for s in r.samples]) < 0)
