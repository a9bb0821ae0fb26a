from typing import Optional

import numpy as np
import pandas as pd
import pytest

from dataio import write_flows, write_prices
from model import PriceSeries, RegimeKind, RegimeSchedule, RegimeSegment
from synthflow import RegimeFlowSpec, crash_schedule, gen_flow


def tone(period: float, n: int, amplitude: float = 1.0) -> np.ndarray:
    return amplitude * np.sin(2 * np.pi * np.arange(n) / period)


def mean_flow_schedule(shock_days: int, negative_days: int, lambda_recovery: float = 0.6):
    """Crash schedule whose flow is (almost exactly) the regime means."""
    schedule, specs = crash_schedule(shock_days, negative_days, lambda_recovery)
    quiet = [RegimeFlowSpec(kind=s.kind, mu=s.mu, sigma=1e-9, length=s.length) for s in specs]
    return schedule, gen_flow(quiet, 0)


@pytest.fixture
def small_schedule() -> RegimeSchedule:
    return RegimeSchedule(
        (
            RegimeSegment(RegimeKind.NORMAL, 5, 0.3),
            RegimeSegment(RegimeKind.SHOCK, 10, 0.4),
            RegimeSegment(RegimeKind.NEGATIVE_SENTIMENT, 5, 0.2),
            RegimeSegment(RegimeKind.RECOVERY, 20, 0.6),
        )
    )


# Exchange holidays falling on weekdays, July 2019 to May 2021
NSE_HOLIDAYS = [
    "2019-08-12", "2019-08-15", "2019-09-02", "2019-09-10", "2019-10-02", "2019-10-08", "2019-10-21",
    "2019-10-28", "2019-11-12", "2019-12-25", "2020-02-21", "2020-03-10", "2020-04-02", "2020-04-06",
    "2020-04-10", "2020-04-14", "2020-05-01", "2020-05-25", "2020-10-02", "2020-11-16", "2020-11-30",
    "2020-12-25", "2021-01-26", "2021-03-11", "2021-03-29", "2021-04-02", "2021-04-14", "2021-04-21",
    "2021-05-13",
]  # fmt: skip
INDEX_FILES = ("nifty_bank.csv", "nifty_financial.csv", "nifty_realty.csv", "nifty_it.csv")


def trading_days() -> pd.DatetimeIndex:
    return pd.bdate_range("2019-07-01", "2021-05-31").difference(pd.DatetimeIndex(NSE_HOLIDAYS))


def write_market(
    directory,
    seed: int = 0,
    dates: Optional[pd.DatetimeIndex] = None,
    prices: str = "prices.csv",
    flows: Optional[str] = "flows.csv",
) -> dict:
    """Write a synthetic price and flow pair with a March 2020 crash; returns a matching config mapping."""
    dates = pd.bdate_range("2019-07-01", "2021-05-31") if dates is None else dates
    n = len(dates)
    rng = np.random.default_rng(seed)
    crash = int(np.searchsorted(dates, pd.Timestamp("2020-03-02")))
    knots = [0, crash, crash + 21, crash + 140, n - 1]
    log_price = np.interp(np.arange(n), knots, [0.0, 0.02, -0.45, -0.38, 0.12])
    close = 20000 * np.exp(log_price + 0.01 * rng.standard_normal(n).cumsum() * 0.3)
    fii = rng.normal(0, 1000, n)
    fii[crash : crash + 21] -= 2500
    dii = rng.normal(200, 800, n)
    days = dates.to_numpy().astype("datetime64[D]")
    write_prices(PriceSeries(values=close, dates=days), str(directory / prices))
    if flows is not None:
        write_flows(days, fii, dii, str(directory / flows))
    return {
        "name": "market",
        "seed": 0,
        "phi": 0.9,
        "flow": {"source": "file", "prices": str(directory / prices), "flows": str(directory / (flows or "flows.csv"))},
        "segments": [
            {"kind": "normal", "start": "2019-07-01", "lambda": 0.4},
            {"kind": "shock", "start": "2020-03-02", "lambda": 0.9},
            {"kind": "negative_sentiment", "start": "2020-03-31", "lambda": 0.05},
            {"kind": "recovery", "start": "2020-09-21", "lambda": 0.4},
            {"kind": "post_recovery", "start": "2021-02-26", "lambda": 0.3},
        ],
    }


def synthetic_config(**overrides) -> dict:
    mapping = {
        "name": "synthetic",
        "seed": 3,
        "phi": 1.0,
        "flow": {"source": "synthetic"},
        "segments": [
            {"kind": "normal", "length": 50, "lambda": 0.3},
            {"kind": "shock", "length": 25, "lambda": 0.4},
            {"kind": "negative_sentiment", "length": 60, "lambda": 0.2},
            {"kind": "recovery", "length": 100, "lambda": 0.6},
            {"kind": "post_recovery", "length": 100, "lambda": 0.3},
        ],
    }
    mapping.update(overrides)
    return mapping


def write_index_market(directory) -> pd.DatetimeIndex:
    """Stand-in index closes and institutional flows under the file names the market scenarios read."""
    directory.mkdir(parents=True, exist_ok=True)
    days = trading_days()
    for seed, name in enumerate(INDEX_FILES):
        write_market(directory, seed=seed, dates=days, prices=name, flows="fii_dii_flows.csv" if seed == 0 else None)
    return days
