"""Module contains price ingestion and return files."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO
from typing import Any

import numpy as np
import pandas as pd

from ._typing import FloatArray
from .enumcls import DataFormat
from .exceptions import DataError
from .exceptions import PriceParseError
from .exceptions import PriceValidationError
from .exceptions import SampleSizeError
from .volatility import ReturnSeries


__all__ = (
    "PriceSeries",
    "load_prices",
    "to_returns",
    "write_returns",
    "load_returns",
)


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Daily closing prices with strictly increasing ISO dates."""

    dates: tuple[str, ...]
    closes: FloatArray

    def __post_init__(self) -> None:
        """Check lengths, positivity and ordering."""
        dates = tuple(str(date) for date in self.dates)
        closes = np.array(self.closes, dtype=float).ravel()
        if len(dates) != closes.size:
            msg = "Dates and closes must have equal length."
            raise PriceValidationError(msg)
        bad = np.flatnonzero(~(np.isfinite(closes) & (closes > 0)))
        if bad.size:
            msg = f"Non-positive price {closes[bad[0]]} on {dates[bad[0]]}."
            raise PriceValidationError(msg)
        for previous, current in zip(dates, dates[1:]):
            if current <= previous:
                kind = "Duplicate" if current == previous else "Out-of-order"
                msg = f"{kind} date {current} after {previous}."
                raise PriceValidationError(msg)
        closes.setflags(write=False)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "closes", closes)

    def __len__(self) -> int:
        """Number of returns."""
        return len(self.dates)


def _canonical(header: list[str], columns: tuple[str, str]) -> list[str]:
    lookup = {name.casefold(): name for name in columns}
    return [lookup.get(cell.casefold(), cell) for cell in header]


def _read_frame(
    path: Path,
    fmt: DataFormat,
    columns: tuple[str, str],
) -> tuple[pd.DataFrame, int]:
    """Raw string frame and the file line of its first row.

    A CSV without header is accepted when it has exactly two columns.
    """
    if fmt is DataFormat.json:
        try:
            raw: Any = json.loads(path.read_text(encoding="utf-8"))
        except OSError as error:
            msg = f"Can not read {path}: {error.strerror}."
            raise DataError(msg) from error
        except json.JSONDecodeError as error:
            raise PriceParseError(error.msg, error.lineno) from error
        try:
            frame = pd.DataFrame(raw, dtype=str)
        except ValueError as error:
            msg = f"Unsupported JSON layout: {error}"
            raise PriceParseError(msg) from error
        frame.columns = _canonical([str(name) for name in frame.columns], columns)
        return frame, 1
    try:
        frame = pd.read_csv(
            path,
            header=None,
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
            encoding="utf-8",
        )
    except OSError as error:
        msg = f"Can not read {path}: {error.strerror}."
        raise DataError(msg) from error
    except pd.errors.EmptyDataError as error:
        msg = "Price file is empty."
        raise PriceParseError(msg) from error
    except pd.errors.ParserError as error:
        raise PriceParseError(str(error)) from error
    header = _canonical([str(cell).strip() for cell in frame.iloc[0]], columns)
    if set(columns) <= set(header):
        frame.columns = header
        return frame.iloc[1:].reset_index(drop=True), 2
    if frame.shape[1] == len(columns):
        frame.columns = list(columns)
        return frame, 1
    return frame, 2


def load_prices(
    path: str | Path,
    fmt: DataFormat | str = DataFormat.csv,
    *,
    date_column: str = "date",
    close_column: str = "close",
) -> PriceSeries:
    """Read ``date,close`` rows and validate them.

    Args:
        path (str | Path): price file.
        fmt (DataFormat | str): csv or json (list of records or column mapping).
        date_column (str): header of the date column.
        close_column (str): header of the close column.

    Returns:
        PriceSeries

    """
    columns = (date_column, close_column)
    frame, first_line = _read_frame(Path(path), DataFormat(fmt), columns)
    missing = set(columns) - set(frame.columns)
    if missing:
        msg = f"Missing columns: {', '.join(sorted(missing))}."
        raise PriceParseError(msg, 1)
    if frame.empty:
        msg = "Price file has no rows."
        raise PriceParseError(msg)
    closes = pd.to_numeric(frame[close_column].str.strip(), errors="coerce")
    dates = frame[date_column].str.strip()
    for position in range(len(frame)):
        date = dates.iloc[position]
        if pd.isna(closes.iloc[position]) or pd.isna(date) or not date:
            value = frame[close_column].iloc[position]
            msg = f"Malformed row (date '{dates.iloc[position]}', close '{value}')."
            raise PriceParseError(msg, position + first_line)
    return PriceSeries(tuple(dates), closes.to_numpy(dtype=float))


def to_returns(prices: PriceSeries) -> ReturnSeries:
    """Percentage log-returns 100 * log(p_t / p_{t-1})."""
    if len(prices) < 2:
        msg = "Need at least two prices."
        raise SampleSizeError(msg)
    values = 100.0 * np.diff(np.log(prices.closes))
    return ReturnSeries(values, prices.dates[1:])


def write_returns(series: ReturnSeries, path: str | Path | IO[str]) -> None:
    """Write ``date,return`` rows; undated series get 1-based labels."""
    dates = series.dates if series.dates is not None else range(1, series.n + 1)
    frame = pd.DataFrame({"date": list(dates), "return": series.values})
    frame.to_csv(path, index=False)


def load_returns(path: str | Path) -> ReturnSeries:
    """Read a ``date,return`` file written by ``write_returns``."""
    try:
        frame = pd.read_csv(
            path,
            dtype={"date": str},
            float_precision="round_trip",
        )
    except OSError as error:
        msg = f"Can not read {path}: {error.strerror}."
        raise DataError(msg) from error
    except pd.errors.EmptyDataError as error:
        msg = "Return file is empty."
        raise PriceParseError(msg) from error
    except pd.errors.ParserError as error:
        raise PriceParseError(str(error)) from error
    if "return" not in frame.columns:
        msg = "Missing column: return."
        raise PriceParseError(msg, 1)
    values = pd.to_numeric(frame["return"], errors="coerce")
    bad = np.flatnonzero(values.isna().to_numpy())
    if bad.size:
        msg = "Malformed return value."
        raise PriceParseError(msg, int(bad[0]) + 2)
    dates = tuple(frame["date"]) if "date" in frame.columns else None
    return ReturnSeries(values.to_numpy(dtype=float), dates)
