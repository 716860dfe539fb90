import pytest

import polyddr.constants as C
import polyddr.errors as E
from polyddr.color import color
from polyddr.config import Config


@pytest.fixture(autouse=True)
def disable_color(monkeypatch):
    monkeypatch.setattr(color, "enabled", False)


def test_defaults_without_options():
    config = Config()

    assert config.rank_tol == C.DEFAULT_RANK_TOL
    assert config.gap_ratio == C.DEFAULT_GAP_RATIO
    assert config.k_max == C.DEFAULT_K_MAX
    assert config.local_exactness_cells == C.DEFAULT_LOCAL_EXACTNESS_CELLS == 5
    assert config.families == C.DEFAULT_FAMILIES
    assert config.path is None


def test_from_yaml_filepath(polyddr_yaml_path):
    config = Config.from_yaml_filepath(polyddr_yaml_path)

    assert config.path == polyddr_yaml_path
    assert config.rank_tol == 1e-10
    assert config.seed == 7
    assert config.probes == 5
    assert config.families["consistency"] == [2, 4, 8]
    assert config.families["poincare"] == [1, 2, 3]
    assert config.color_style == {"header": 4}


def test_display_options_logs_every_property(caplog, polyddr_yaml_path):
    Config.from_yaml_filepath(polyddr_yaml_path).display_options()

    assert "seed: 7" in caplog.text
    assert "rank_tol: 1e-10" in caplog.text


@pytest.mark.parametrize(
    "options",
    [
        {"rank_tol": -1.0},
        {"rank_tol": "small"},
        {"probes": 0},
        {"local_exactness_cells": 0},
        {"probes": 2.5},
        {"k_max": 5},
        {"quadrature_margin": 2},
        {"families": [4, 8]},
        {"color_style": "red"},
        {"no_such_option": 1},
    ],
)
def test_invalid_options_rejected(options):
    with pytest.raises(E.InvalidConfigError):
        Config({"options": options})


def test_options_section_must_be_mapping():
    with pytest.raises(E.InvalidConfigError):
        Config({"options": ["rank_tol"]})


def test_seed_may_be_zero():
    assert Config({"options": {"seed": 0}}).seed == 0
