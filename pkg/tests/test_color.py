import pytest

from polyddr.color import color


@pytest.fixture(autouse=True)
def enable_color(monkeypatch):
    monkeypatch.setattr(color, "enabled", True)


@pytest.fixture
def header_color_red(monkeypatch):
    monkeypatch.setitem(color.style, "header", 1)


@pytest.fixture
def header_color_none(monkeypatch):
    monkeypatch.setitem(color.style, "header", None)


def test_header_no_color(header_color_none):
    result = color.header("polyddr v:latest")

    assert result == "polyddr v:latest"


def test_header_red_color(header_color_red):
    result = color.header("polyddr v:latest")

    assert result == "\x1b[38;5;1mpolyddr v:latest\x1b[0m"


def test_disabled_color_is_plain(monkeypatch):
    monkeypatch.setattr(color, "enabled", False)

    assert color.error("boom") == "boom"


@pytest.mark.parametrize(
    "status,code",
    [("pass", 2), ("fail", 1), ("uncertified", 208)],
)
def test_status_uses_outcome_style(status, code):
    assert color.status(status) == f"\x1b[38;5;{code}m{status}\x1b[0m"


def test_unknown_style_is_an_attribute_error():
    with pytest.raises(AttributeError):
        color.sparkle("text")


def test_style_override_from_config(monkeypatch):
    monkeypatch.setitem(color.style, "mesh", 5)

    assert color.mesh("ring4") == "\x1b[38;5;5mring4\x1b[0m"
