import json

import pytest
from hypothesis import given, strategies as st

from normadd import jsonio
from normadd.cone import FiniteDiscrete, PLLine, rational
from normadd.errors import InvalidInput
from normadd.fixtures import make_fixture
from normadd.operators import as_oracle, invert, random_op
from normadd.recovery import recover
from normadd.verification import Sampler, replay, run_all_checks


def test_number_encoding():
    assert jsonio.number(rational("3/4")) == "3/4"
    assert jsonio.number(rational(5)) == "5"
    assert jsonio.number(0.1) == 0.1


@given(st.integers(0, 10**6), st.integers(1, 10))
def test_discrete_op_round_trip(seed, n):
    X = FiniteDiscrete.of_size(n)
    op = random_op(seed, X, X)
    back = jsonio.op_from_json(json.loads(jsonio.dumps(jsonio.op_to_json(op))))
    assert back == op


@given(st.integers(0, 10**6))
def test_line_op_round_trip(seed):
    L = PLLine()
    op = random_op(seed, L, L, (0.5, 4.0))
    back = jsonio.op_from_json(json.loads(jsonio.dumps(jsonio.op_to_json(op))))
    assert back.tau == op.tau and back.h == op.h
    inv = invert(op)
    back = jsonio.op_from_json(json.loads(jsonio.dumps(jsonio.op_to_json(inv))))
    assert all(back.h(y) == inv.h(y) for y in (-3.0, 0.1, 2.5))


def test_witness_round_trip_replays_identically():
    X = FiniteDiscrete.of_size(3)
    oracle, inverse = make_fixture("order-swap", X)
    reports = run_all_checks(oracle, Sampler(X, 0), 30, inverse_oracle=inverse)
    w = next(r.witness for r in reports if r.witness is not None)
    text = jsonio.dumps(jsonio.witness_to_json(w))
    again = jsonio.witness_from_json(json.loads(text))
    assert again.inputs == w.inputs
    fresh, ok = replay(again, oracle)
    assert not ok and fresh.discrepancy == w.discrepancy


def test_recovery_round_trip():
    L = PLLine()
    op = random_op(1, L, L, (0.5, 4.0))
    from normadd.recovery import RecoveryConfig
    r = recover(as_oracle(op), config=RecoveryConfig(grid=(-1.0, 0.0, 1.0), trials=5))
    d = json.loads(jsonio.dumps(jsonio.recovery_to_json(r)))
    back = jsonio.recovery_from_json(d)
    assert back.samples == r.samples
    del d["samples"]
    with pytest.raises(InvalidInput):
        jsonio.recovery_from_json(d)


def test_find_witness_nested():
    assert jsonio.find_witness({"a": [{"b": {"property": "zero", "inputs": []}}]})["property"] == "zero"
    assert jsonio.find_witness({"a": 1}) is None


def test_malformed_input():
    with pytest.raises(InvalidInput):
        jsonio.op_from_json({"tau": {"kind": "nope"}, "h": {}, "domain": {"kind": "pl_line"}})
    with pytest.raises(InvalidInput):
        jsonio.space_from_json({"kind": "discrete", "points": []})
