import os

from normadd.bruteforce import enumerate_report
from normadd.cone import FiniteDiscrete
from normadd.operators import as_oracle, random_op
from normadd.plotting import check_figure, enumerate_figure, recovery_figure
from normadd.recovery import recover


def test_figures_written(tmp_path):
    X = FiniteDiscrete.of_size(5)
    op = random_op(0, X, X)
    paths = [
        recovery_figure(recover(as_oracle(op)), tmp_path, truth=op),
        check_figure([{"property": "zero", "verdict": "pass", "max_discrepancy": "0",
                       "constants": {}},
                      {"property": "biseparating", "verdict": "fail", "max_discrepancy": "3/2",
                       "constants": {"tuple_size": 2}}], tmp_path),
        enumerate_figure(enumerate_report(1, 2), tmp_path),
    ]
    for p in paths:
        assert os.path.getsize(p) > 1000
        with open(p, "rb") as fh:
            assert fh.read(8) == b"\x89PNG\r\n\x1a\n"
