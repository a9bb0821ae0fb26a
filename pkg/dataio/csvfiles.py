import logging
import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from model import CompanyFinancials, FlowSeries, PriceSeries, normalize_flow
from utils.arrays import as_dates, readonly
from utils.errors import (
    EmptySeries,
    MissingFixture,
    NonMonotoneDates,
    NonPositivePrice,
    ParseError,
)

logger = logging.getLogger(__name__)

PRICE_COLUMNS = ["date", "close"]
FLOW_COLUMNS = ["date", "fii_net", "dii_net"]
FINANCIALS_COLUMNS = ["company", "current_assets", "current_liabilities", "operating_expenses"]
CADENCES = ("monthly", "fortnightly")

# First data row is line 2 of the file
_ROW_OFFSET = 2


def _read(path: str, columns: Sequence[str]) -> pd.DataFrame:
    if not os.path.exists(path):
        raise MissingFixture(f"data file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ParseError(f"cannot parse '{path}': {e}") from e
    frame.columns = [c.strip() for c in frame.columns]
    for column in columns:
        if column not in frame.columns:
            raise ParseError(f"missing column in '{path}'", column=column)
    return frame


def _dates(frame: pd.DataFrame, column: str = "date") -> np.ndarray:
    parsed = pd.to_datetime(frame[column].str.strip(), format="%Y-%m-%d", errors="coerce")
    bad = np.flatnonzero(parsed.isna().to_numpy())
    if bad.size:
        row = int(bad[0])
        raise ParseError(f"invalid date '{frame[column].iloc[row]}'", row=row + _ROW_OFFSET, column=column)
    dates = parsed.to_numpy().astype("datetime64[D]")
    steps = np.flatnonzero(dates[1:] <= dates[:-1])
    if steps.size:
        row = int(steps[0]) + 1
        raise NonMonotoneDates(f"date {dates[row]} at row {row + _ROW_OFFSET} does not follow {dates[row - 1]}")
    return dates


def _numbers(frame: pd.DataFrame, column: str) -> np.ndarray:
    parsed = pd.to_numeric(frame[column].str.strip(), errors="coerce")
    bad = np.flatnonzero(parsed.isna().to_numpy())
    if bad.size:
        row = int(bad[0])
        raise ParseError(f"invalid number '{frame[column].iloc[row]}'", row=row + _ROW_OFFSET, column=column)
    return parsed.to_numpy(dtype=float)


def load_prices(path: str) -> PriceSeries:
    """Read a ``date,close`` file. Missing trading days stay missing."""
    frame = _read(path, PRICE_COLUMNS)
    if frame.empty:
        raise EmptySeries(f"no price rows in '{path}'")
    dates = _dates(frame)
    close = _numbers(frame, "close")
    bad = np.flatnonzero(~(close > 0))
    if bad.size:
        row = int(bad[0])
        raise NonPositivePrice(f"close {close[row]} at row {row + _ROW_OFFSET} of '{path}' is not positive")
    logger.info("Loaded %d prices from '%s'", close.size, path)
    return PriceSeries(values=close, dates=dates)


def load_flows(path: str) -> FlowSeries:
    """Read a ``date,fii_net,dii_net`` file; the net flow is the sum of both columns."""
    frame = _read(path, FLOW_COLUMNS)
    if frame.empty:
        raise EmptySeries(f"no flow rows in '{path}'")
    dates = _dates(frame)
    raw = _numbers(frame, "fii_net") + _numbers(frame, "dii_net")
    logger.info("Loaded %d flow rows from '%s'", raw.size, path)
    return FlowSeries.from_raw(dates, raw)


def align(prices: PriceSeries, flows: FlowSeries) -> tuple[PriceSeries, FlowSeries]:
    """Inner join of the price and flow calendars."""
    common = np.intersect1d(prices.dates, flows.dates)
    if common.size == 0:
        raise EmptySeries("price and flow files share no trading day")
    price_mask = np.isin(prices.dates, common)
    flow_mask = np.isin(flows.dates, common)
    dropped_prices = len(prices) - common.size
    dropped_flows = len(flows) - common.size
    if dropped_prices or dropped_flows:
        logger.info(
            "Aligned on %d common dates, dropped %d price and %d flow rows",
            common.size,
            dropped_prices,
            dropped_flows,
        )
    return (
        PriceSeries(values=prices.values[price_mask], dates=prices.dates[price_mask]),
        flows.select(flow_mask),
    )


def load_financials(path: str) -> list[CompanyFinancials]:
    frame = _read(path, FINANCIALS_COLUMNS)
    if frame.empty:
        raise EmptySeries(f"no company rows in '{path}'")
    assets = _numbers(frame, "current_assets")
    liabilities = _numbers(frame, "current_liabilities")
    expenses = _numbers(frame, "operating_expenses")
    return [
        CompanyFinancials(
            current_assets=float(a),
            current_liabilities=float(li),
            operating_expenses=float(e),
            company=str(name).strip(),
        )
        for name, a, li, e in zip(frame["company"], assets, liabilities, expenses)
    ]


@dataclass(frozen=True)
class SectorFlows:
    dates: np.ndarray
    cadence: str
    raw: dict
    psi: dict

    @property
    def sectors(self) -> list[str]:
        return list(self.raw)


def load_sector_flows(path: str) -> SectorFlows:
    """Read mutual-fund flows per sector; each sector is normalized on its own."""
    frame = _read(path, ["date", "cadence"])
    if frame.empty:
        raise EmptySeries(f"no sector flow rows in '{path}'")
    cadences = set(frame["cadence"].str.strip())
    if len(cadences) != 1 or not cadences <= set(CADENCES):
        raise ParseError(f"'{path}' mixes or misnames cadences: {', '.join(sorted(cadences))}", column="cadence")
    dates = _dates(frame)
    sectors = [c for c in frame.columns if c not in ("date", "cadence")]
    if not sectors:
        raise ParseError(f"'{path}' has no sector column")
    raw = {sector: readonly(_numbers(frame, sector)) for sector in sectors}
    psi = {sector: readonly(normalize_flow(values)) for sector, values in raw.items()}
    return SectorFlows(dates=as_dates(dates), cadence=cadences.pop(), raw=raw, psi=psi)


def summarize_sector_flows(flows: SectorFlows, windows: Sequence[tuple[str, np.datetime64, Optional[np.datetime64]]]):
    """Mean normalized flow per sector inside each ``(label, start, end)`` window, ``end`` exclusive."""
    rows = []
    for label, start, end in windows:
        mask = flows.dates >= start
        if end is not None:
            mask &= flows.dates < end
        for sector in flows.sectors:
            values = flows.psi[sector][mask]
            rows.append(
                {
                    "regime": label,
                    "sector": sector,
                    "periods": int(values.size),
                    "mean_psi": float(values.mean()) if values.size else float("nan"),
                }
            )
    return pd.DataFrame(rows, columns=["regime", "sector", "periods", "mean_psi"])


def date_strings(dates: np.ndarray) -> list[str]:
    return list(np.datetime_as_string(dates, unit="D"))


def write_table(frame: pd.DataFrame, path: str) -> str:
    frame.to_csv(path, index=False, float_format="%.10g", lineterminator="\n", encoding="utf-8")
    logger.info("Wrote '%s'", path)
    return path


def write_prices(series: PriceSeries, path: str) -> str:
    return write_table(pd.DataFrame({"date": date_strings(series.dates), "close": series.values}), path)


def write_flows(dates: np.ndarray, fii_net: np.ndarray, dii_net: np.ndarray, path: str) -> str:
    frame = pd.DataFrame({"date": date_strings(dates), "fii_net": fii_net, "dii_net": dii_net})
    return write_table(frame, path)
