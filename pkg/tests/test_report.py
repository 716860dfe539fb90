import json

import numpy as np
import pytest

from polyddr.report import FAIL, PASS, UNCERTIFIED, CheckRecord, VerificationReport


@pytest.fixture
def report():
    report = VerificationReport(mesh={"name": "unit_square", "cells": 1}, k=0)
    report.add(CheckRecord.upper_bound("residual", 1e-14, 1e-12))
    report.add(CheckRecord.equals("nullity", np.int64(1), 1))
    report.tables["dofs"] = [{"k": 0, "total": 12}]
    return report


def test_upper_bound_status():
    assert CheckRecord.upper_bound("r", 1e-13, 1e-12).status == PASS
    assert CheckRecord.upper_bound("r", 1e-11, 1e-12).status == FAIL
    assert CheckRecord.upper_bound("r", float("nan"), 1e-12).status == FAIL


def test_within_and_at_least():
    assert CheckRecord.within("slope", 1.9, 2.0, 0.3).status == PASS
    assert CheckRecord.within("slope", 2.5, 2.0, 0.3).status == FAIL
    assert CheckRecord.at_least("slope", 3.0, 2.0, 0.4).status == PASS
    assert CheckRecord.at_least("slope", 1.5, 2.0, 0.4).status == FAIL


def test_equals_uncertified():
    record = CheckRecord.equals("rank", 3, 3, certified=False, note="gap 10")

    assert record.status == UNCERTIFIED
    assert record.to_dict()["note"] == "gap 10"


def test_report_status_precedence(report):
    assert report.passed

    report.add(CheckRecord.equals("rank", 2, 2, certified=False))
    assert report.status == UNCERTIFIED

    report.add(CheckRecord.holds("flag", False))
    assert report.status == FAIL
    assert not report.passed


def test_json_is_reproducible_without_timing(report):
    report.elapsed_s = 1.2345
    first = report.to_json()
    report.elapsed_s = 9.8

    assert first == report.to_json()
    assert json.loads(first)["elapsed_s"] is None
    assert json.loads(report.to_json(timing=True))["elapsed_s"] == 9.8


def test_numpy_values_become_plain(report):
    data = json.loads(report.to_json())

    assert data["checks"][1]["measured"] == 1
    assert data["tables"]["dofs"] == [{"k": 0, "total": 12}]


def test_non_finite_values_stay_valid_json():
    report = VerificationReport()
    report.add(CheckRecord.equals("gap", np.inf, np.inf, certified=False))

    data = json.loads(report.to_json())

    assert data["checks"][0]["measured"] == "inf"


def test_csv_and_markdown(report):
    csv_text = report.to_csv()
    markdown = report.to_markdown()

    assert csv_text.splitlines()[0] == "name,measured,expected,tol,status"
    assert "residual,1e-14,0.0,1e-12,pass" in csv_text
    assert "status: **pass**" in markdown
    assert "## dofs" in markdown


def test_unknown_format(report):
    with pytest.raises(ValueError):
        report.render("xml")


def test_write(report, tmp_path):
    path = report.write(str(tmp_path / "out"), fmt="md")

    assert path.endswith("report.md")
    with open(path) as report_file:
        assert report_file.read() == report.to_markdown()


def test_merge(report):
    other = VerificationReport()
    other.add(CheckRecord.holds("extra", True))
    other.tables["poincare"] = []

    report.merge(other)

    assert [check.name for check in report.checks][-1] == "extra"
    assert set(report.tables) == {"dofs", "poincare"}
