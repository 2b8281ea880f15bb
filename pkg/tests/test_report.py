import csv
import json
import math

import jsonschema
import numpy as np
import pytest

from smoothreg.report import (
    HISTORY_FIELDS, REPORT_SCHEMA, IterationRecord, RunReport, StopReason, StoppingRule, fmt,
    growth_ratio,
)


def sample_report():
    init = IterationRecord(0, 4.0, 2.0, 1.0, 0.0)
    hist = [IterationRecord(1, 1.0, 1.0, 0.5, 0.25), IterationRecord(2, 0.25, 0.5, 0.4, 0.1)]
    return RunReport("ours:l2", StopReason.DISCREPANCY, init, hist, {"seed": 1}, 3, {"x": 1})


class TestStoppingRule:
    def test_threshold(self):
        rule = StoppingRule(0.5, 1.2, 10)
        assert rule.threshold == pytest.approx(0.6)
        assert rule.satisfied(0.6) and not rule.satisfied(0.61)

    @pytest.mark.parametrize("args", [(-1.0,), (1.0, 0.5), (1.0, 1.0, 0), (1.0, 1.0, 2.5)])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            StoppingRule(*args)


def test_fmt_roundtrip():
    for x in [0.1, 1 / 3, 1e-300, -2.5e17, math.pi]:
        assert float(fmt(x)) == x
    assert fmt(None) == ""


def test_summary_properties():
    r = sample_report()
    assert r.iterations == 2 and r.final.iter == 2
    assert r.rel_errors == [1.0, 0.5, 0.4]
    assert r.final_rel_error == 0.4 and r.min_rel_error == 0.4


def test_json_matches_schema(tmp_path):
    r = sample_report()
    r.write_json(tmp_path / "r.json")
    data = json.loads((tmp_path / "r.json").read_text())
    jsonschema.validate(data, REPORT_SCHEMA)
    assert data["stopping"] == "Discrepancy" and len(data["history"]) == 2


def test_history_csv(tmp_path):
    r = sample_report()
    r.write_history_csv(tmp_path / "h.csv")
    rows = list(csv.reader(open(tmp_path / "h.csv")))
    assert tuple(rows[0]) == HISTORY_FIELDS
    assert len(rows) == 4 and rows[1][0] == "0"
    assert float(rows[3][3]) == 0.4


def test_report_without_truth():
    r = RunReport("baseline:cgls", StopReason.MAX_ITER, IterationRecord(0, 1.0, 1.0, None, 0.0))
    assert r.rel_errors == [] and r.min_rel_error is None
    jsonschema.validate(r.to_dict(), REPORT_SCHEMA)


def test_growth_ratio():
    errs = [1.0, 0.5, 0.2, 0.3, 0.4, 0.6, 0.8, 0.9]
    assert growth_ratio(errs) == pytest.approx(0.8 / 0.2)
    assert growth_ratio([1.0, 0.5, 0.2, 0.3]) == pytest.approx(0.3 / 0.2)
    assert growth_ratio([1.0, 0.5]) == pytest.approx(1.0)
    assert math.isnan(growth_ratio([]))
    assert np.isfinite(growth_ratio([2.0, 1.0]))
