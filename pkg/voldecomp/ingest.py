from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from voldecomp import DataError
from voldecomp.series import PriceSeries

logger = logging.getLogger(__name__)

_MISSING_TOKENS = {"", "-", "na", "n/a", "nan", "null", "none"}
HEADER_LINES = 1


@dataclass(frozen=True)
class MarketCsvSchema:
    date_column: str = "date"
    price_column: str = "open"
    delimiter: str = ","
    date_format: str | None = None  # strptime pattern; None = ISO-8601

    def as_dict(self) -> dict:
        return {
            "date_column": self.date_column,
            "price_column": self.price_column,
            "delimiter": self.delimiter,
            "date_format": self.date_format,
        }


def _line(row: int) -> int:
    return row + HEADER_LINES + 1


def load_csv(path: str | Path, schema: MarketCsvSchema = MarketCsvSchema()) -> PriceSeries:
    """
    Read one price column of a dated CSV into a PriceSeries sorted by date.

    Rows with a blank or non-positive price are skipped and counted; a date
    or price that cannot be parsed, or a repeated date, is an error.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"market CSV not found: {path}")

    try:
        frame = pd.read_csv(
            path,
            sep=schema.delimiter,
            dtype=str,
            keep_default_na=False,
            encoding="utf-8",
            skip_blank_lines=False,
        )
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot parse {path}: {exc}") from exc
    frame = frame.fillna("")

    missing = [c for c in (schema.date_column, schema.price_column) if c not in frame.columns]
    if missing:
        raise DataError(f"{path}: missing column(s) {missing}; header is {list(frame.columns)}", line=1)

    raw_dates = frame[schema.date_column].str.strip()
    raw_prices = frame[schema.price_column].str.strip()

    # entirely blank lines
    blank = (raw_dates == "") & (raw_prices == "")
    raw_dates, raw_prices = raw_dates[~blank], raw_prices[~blank]

    dates = pd.to_datetime(raw_dates, format=schema.date_format, errors="coerce")
    bad_dates = dates.isna()
    if bad_dates.any():
        row = int(np.flatnonzero(bad_dates.to_numpy())[0])
        pos = raw_dates.index[row]
        raise DataError(
            f"{path}:{_line(pos)}: cannot parse date {raw_dates.iloc[row]!r}",
            line=_line(pos),
        )

    no_price = raw_prices.str.lower().isin(_MISSING_TOKENS)
    prices = pd.to_numeric(raw_prices.where(~no_price), errors="coerce")
    unparsed = prices.isna() & ~no_price
    if unparsed.any():
        row = int(np.flatnonzero(unparsed.to_numpy())[0])
        pos = raw_prices.index[row]
        raise DataError(
            f"{path}:{_line(pos)}: cannot parse price {raw_prices.iloc[row]!r}",
            line=_line(pos),
        )

    duplicated = dates.duplicated(keep="first")
    if duplicated.any():
        row = int(np.flatnonzero(duplicated.to_numpy())[0])
        pos = dates.index[row]
        raise DataError(
            f"{path}:{_line(pos)}: duplicate date {dates.iloc[row].date().isoformat()}",
            line=_line(pos),
        )

    usable = prices.notna() & (prices > 0)
    skipped = int((~usable).sum())
    if skipped:
        logger.warning("skipped %d row(s) of %s with a missing or non-positive %s", skipped, path.name, schema.price_column)

    table = pd.DataFrame({"date": dates[usable], "price": prices[usable]}).sort_values("date", kind="stable")
    if len(table) < 2:
        raise DataError(f"{path}: only {len(table)} usable row(s); need at least 2")

    logger.info("loaded %d prices from %s (%s)", len(table), path.name, schema.price_column)
    return PriceSeries(
        prices=table["price"].to_numpy(dtype=float),
        timestamps=table["date"].to_numpy(),
        price_column=schema.price_column,
        skipped_rows=skipped,
    )


__all__ = ["MarketCsvSchema", "load_csv"]
