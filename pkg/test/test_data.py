"""Module contain tests for price and return files."""
from __future__ import annotations

import io
import json
from pathlib import Path

import numpy as np
import pytest

from varboot import DataError
from varboot import PriceParseError
from varboot import PriceSeries
from varboot import PriceValidationError
from varboot import ReturnSeries
from varboot import SampleSizeError
from varboot import load_prices
from varboot import load_returns
from varboot import to_returns
from varboot import write_returns


def write(tmp_path: Path, text: str, name: str = "prices.csv") -> Path:
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadPrices:
    """Test price ingestion."""

    def test_headerless(self, tmp_path: Path) -> None:
        prices = load_prices(write(tmp_path, "2018-01-02,100.0\n2018-01-03,101.0"))
        assert len(prices) == 2
        assert prices.dates == ("2018-01-02", "2018-01-03")
        assert prices.closes.tolist() == [100.0, 101.0]

    def test_header(self, tmp_path: Path) -> None:
        text = "close,date\n100.0,2018-01-02\n101.5,2018-01-03\n"
        prices = load_prices(write(tmp_path, text))
        assert prices.closes.tolist() == [100.0, 101.5]

    def test_capitalized_header(self, tmp_path: Path) -> None:
        text = "Date,Close\n2018-01-02,100.0\n2018-01-03,102.0\n"
        prices = load_prices(write(tmp_path, text))
        assert prices.dates == ("2018-01-02", "2018-01-03")
        assert prices.closes.tolist() == [100.0, 102.0]

    def test_custom_columns(self, tmp_path: Path) -> None:
        text = "Day,Adj Close,Volume\n2018-01-02,100,5\n2018-01-03,99,7\n"
        prices = load_prices(write(tmp_path, text), date_column="Day", close_column="Adj Close")
        assert prices.closes.tolist() == [100.0, 99.0]

    def test_json(self, tmp_path: Path) -> None:
        rows = [{"date": "2018-01-02", "close": 100}, {"date": "2018-01-03", "close": 101}]
        prices = load_prices(write(tmp_path, json.dumps(rows), "prices.json"), "json")
        assert len(prices) == 2

    def test_empty(self, tmp_path: Path) -> None:
        with pytest.raises(PriceParseError):
            load_prices(write(tmp_path, ""))

    def test_malformed_line(self, tmp_path: Path) -> None:
        text = "date,close\n2018-01-02,100\n2018-01-03,abc\n"
        with pytest.raises(PriceParseError) as error:
            load_prices(write(tmp_path, text))
        assert error.value.line == 3
        assert "line 3" in str(error.value)

    def test_malformed_headerless(self, tmp_path: Path) -> None:
        with pytest.raises(PriceParseError) as error:
            load_prices(write(tmp_path, "2018-01-02,100\n2018-01-03,\n"))
        assert error.value.line == 2

    def test_duplicate_date(self, tmp_path: Path) -> None:
        with pytest.raises(PriceValidationError, match="Duplicate"):
            load_prices(write(tmp_path, "2018-01-02,100\n2018-01-02,101\n"))

    def test_out_of_order(self) -> None:
        with pytest.raises(PriceValidationError, match="Out-of-order"):
            PriceSeries(("2018-01-03", "2018-01-02"), np.array([1.0, 2.0]))

    def test_non_positive(self, tmp_path: Path) -> None:
        with pytest.raises(PriceValidationError):
            load_prices(write(tmp_path, "2018-01-02,100\n2018-01-03,0\n"))

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(DataError):
            load_prices(tmp_path / "absent.csv")


class TestReturns:
    """Test return transform and files."""

    @pytest.mark.parametrize(
        ("closes", "expected"),
        [
            ([100.0, 101.0], 0.995033),
            ([100.0, 100.0], 0.0),
            ([100.0, 50.0], -69.3147),
        ],
    )
    def test_log_returns(self, closes: list[float], expected: float) -> None:
        series = to_returns(PriceSeries(("2018-01-02", "2018-01-03"), np.array(closes)))
        assert series.values[0] == pytest.approx(expected, abs=1e-4)
        assert series.dates == ("2018-01-03",)

    def test_single_price(self) -> None:
        with pytest.raises(SampleSizeError):
            to_returns(PriceSeries(("2018-01-02",), np.array([100.0])))

    def test_file_round_trip(self, tmp_path: Path) -> None:
        values = np.random.default_rng(3).standard_normal(50) * 1.3
        series = ReturnSeries(values, tuple(f"2019-01-{i:02d}" for i in range(1, 51)))
        path = tmp_path / "returns.csv"
        write_returns(series, path)
        loaded = load_returns(path)
        assert np.array_equal(loaded.values, series.values)
        assert loaded.dates == series.dates

    def test_undated(self) -> None:
        buffer = io.StringIO()
        write_returns(ReturnSeries([0.5, -0.25]), buffer)
        assert buffer.getvalue().splitlines() == ["date,return", "1,0.5", "2,-0.25"]

    def test_bad_return(self, tmp_path: Path) -> None:
        with pytest.raises(PriceParseError) as error:
            load_returns(write(tmp_path, "date,return\n1,0.5\n2,x\n", "returns.csv"))
        assert error.value.line == 3
