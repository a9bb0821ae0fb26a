import numpy as np
import pytest

from utils import ConfigError, EmptySeries, ParseError, StageError, stage
from utils.arrays import as_dates, readonly, strictly_increasing
from utils.consts import WORKERS_ENV_VAR
from utils.workers import resolve_workers


def test_resolve_workers(monkeypatch):
    monkeypatch.delenv(WORKERS_ENV_VAR, raising=False)
    assert resolve_workers() == 1
    assert resolve_workers(3) == 3
    assert resolve_workers("2") == 2
    assert resolve_workers("auto") >= 1
    monkeypatch.setenv(WORKERS_ENV_VAR, "4")
    assert resolve_workers() == 4
    assert resolve_workers(2) == 2


@pytest.mark.parametrize("value", [0, -1, "many"])
def test_resolve_workers_rejects(value):
    with pytest.raises(ConfigError):
        resolve_workers(value)


def test_stage_wraps_once():
    with pytest.raises(StageError) as e:
        with stage("outer"):
            with stage("inner"):
                raise EmptySeries("nothing here")
    assert e.value.stage == "inner"
    assert isinstance(e.value.cause, EmptySeries)
    assert str(e.value) == "inner: nothing here"


def test_stage_ignores_foreign_errors():
    with pytest.raises(KeyError):
        with stage("load"):
            raise KeyError("x")


def test_parse_error_location():
    assert str(ParseError("bad value", row=3, column="close")) == "bad value (row 3, column 'close')"
    assert str(ParseError("bad value")) == "bad value"


def test_array_helpers():
    frozen = readonly([1.0, 2.0])
    with pytest.raises(ValueError):
        frozen[0] = 3.0
    dates = as_dates(["2020-01-02", "2020-01-03"])
    assert dates.dtype == np.dtype("datetime64[D]")
    assert strictly_increasing(dates)
    assert not strictly_increasing(dates[::-1])
