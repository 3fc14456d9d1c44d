"""Price loading, log returns, sector metadata and synthetic block fixtures."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class InputError(ValueError):
    """Malformed or inconsistent input data."""


# Sector codes and their display colors, in the order the sectors are listed.
SECTOR_PALETTE = {
    "FI": "red",
    "ETGW": "brown",
    "TWP": "white",
    "MA": "purple",
    "MINI": "gray",
    "RE": "black",
    "IT": "blue",
    "CO": "orange",
    "WR": "pink",
    "CSE": "mauve",
    "AFAH": "plum",
    "CI": "turquoise",
    "LBS": "yellow",
}


@dataclass
class PriceMatrix:
    tickers: list[str]
    dates: list[str]
    prices: np.ndarray

    def __post_init__(self):
        self.prices = np.asarray(self.prices, dtype=float)
        if self.prices.ndim != 2:
            raise InputError("prices must be a 2-d table")
        n, T = self.prices.shape
        if n != len(self.tickers) or T != len(self.dates):
            raise InputError(f"shape {self.prices.shape} does not match "
                             f"{len(self.tickers)} tickers x {len(self.dates)} dates")
        if T < 2:
            raise InputError("need at least 2 dates")
        if len(set(self.tickers)) != n:
            raise InputError("duplicate tickers")
        bad = np.argwhere(~(self.prices > 0))
        if len(bad):
            i, t = bad[0]
            raise InputError(f"non-positive price {self.prices[i, t]!r} at "
                             f"ticker {self.tickers[i]!r}, date {self.dates[t]!r}")


@dataclass
class ReturnMatrix:
    tickers: list[str]
    returns: np.ndarray

    def __post_init__(self):
        self.returns = np.asarray(self.returns, dtype=float)
        if self.returns.ndim != 2 or self.returns.shape[0] != len(self.tickers):
            raise InputError("returns must be n x (T-1), one row per ticker")
        if not np.all(np.isfinite(self.returns)):
            raise InputError("returns contain non-finite values")

    @property
    def n(self) -> int:
        return len(self.tickers)


@dataclass
class SectorMap:
    assignments: dict[str, tuple[str, str]] = field(default_factory=dict)

    def sector(self, ticker: str) -> str:
        return self.assignments[ticker][0]

    def color(self, ticker: str) -> str:
        return self.assignments[ticker][1]

    def __len__(self):
        return len(self.assignments)


def _parse_price(raw: str, where: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise InputError(f"unparseable price {raw!r} at {where}") from None
    if not value > 0 or not math.isfinite(value):
        raise InputError(f"non-positive price {raw!r} at {where}")
    return value


def _read_wide(rows: list[list[str]]):
    header = rows[0]
    if len(header) < 2 or header[0].strip().lower() != "ticker":
        raise InputError("wide layout needs header 'ticker,d1,...,dT'")
    dates = [h.strip() for h in header[1:]]
    table: dict[str, dict[str, float]] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise InputError(f"ragged row at line {lineno}: {len(row)} fields, "
                             f"expected {len(header)}")
        ticker = row[0].strip()
        if ticker in table:
            raise InputError(f"duplicate ticker {ticker!r} at line {lineno}")
        cells = {}
        for d, raw in zip(dates, row[1:]):
            if raw.strip() == "":
                continue
            cells[d] = _parse_price(raw, f"line {lineno}, ticker {ticker!r}, date {d!r}")
        table[ticker] = cells
    return list(table), dates, table


def _read_long(rows: list[list[str]]):
    header = [h.strip().lower() for h in rows[0]]
    if header[:3] != ["date", "ticker", "close"]:
        raise InputError("long layout needs header 'date,ticker,close'")
    tickers: list[str] = []
    dates: list[str] = []
    seen_dates: set[str] = set()
    table: dict[str, dict[str, float]] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise InputError(f"ragged row at line {lineno}: {len(row)} fields, expected 3")
        d, ticker, raw = (c.strip() for c in row)
        if ticker not in table:
            table[ticker] = {}
            tickers.append(ticker)
        if d not in seen_dates:
            seen_dates.add(d)
            dates.append(d)
        if d in table[ticker]:
            raise InputError(f"duplicate (ticker, date) ({ticker!r}, {d!r}) at line {lineno}")
        table[ticker][d] = _parse_price(raw, f"line {lineno}, ticker {ticker!r}, date {d!r}")
    return tickers, dates, table


def load_prices(path, layout: str = "wide", drop_incomplete: bool = False) -> PriceMatrix:
    """Read closing prices from a wide or long CSV.

    Rows keep the order in which tickers first appear. Missing cells are an
    error unless ``drop_incomplete`` is set, in which case the offending
    tickers are removed.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InputError(f"{path}: empty file")
    if layout == "wide":
        tickers, dates, table = _read_wide(rows)
    elif layout == "long":
        tickers, dates, table = _read_long(rows)
    else:
        raise ValueError(f"unknown layout {layout!r}")

    gaps = {t: [d for d in dates if d not in table[t]] for t in tickers}
    gaps = {t: g for t, g in gaps.items() if g}
    if gaps:
        if not drop_incomplete:
            t, g = next(iter(gaps.items()))
            raise InputError(f"missing price for ticker {t!r} on date {g[0]!r} "
                             f"({sum(map(len, gaps.values()))} gaps in {len(gaps)} tickers)")
        tickers = [t for t in tickers if t not in gaps]
    if not tickers:
        raise InputError(f"{path}: no complete tickers")
    prices = np.array([[table[t][d] for d in dates] for t in tickers])
    return PriceMatrix(tickers, dates, prices)


def log_returns(p: PriceMatrix) -> ReturnMatrix:
    return ReturnMatrix(list(p.tickers), np.diff(np.log(p.prices), axis=1))


def load_sectors(path, roster: Sequence[str]) -> SectorMap:
    """Read a ``ticker,sector[,color]`` CSV and resolve colors for ``roster``."""
    entries: dict[str, tuple[str, str | None]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip().lower() for h in next(reader, [])]
        if header[:2] != ["ticker", "sector"]:
            raise InputError("sector file needs header 'ticker,sector[,color]'")
        has_color = len(header) > 2 and header[2] == "color"
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            ticker, code = row[0].strip(), row[1].strip()
            color = row[2].strip() if has_color and len(row) > 2 and row[2].strip() else None
            entries[ticker] = (code, color)

    missing = [t for t in roster if t not in entries]
    if missing:
        raise InputError(f"tickers missing from sector file: {', '.join(missing)}")
    assignments = {}
    for t in roster:
        code, color = entries[t]
        if color is None:
            if code not in SECTOR_PALETTE:
                raise InputError(f"unknown sector code {code!r} for {t!r} and no color given")
            color = SECTOR_PALETTE[code]
        assignments[t] = (code, color)
    return SectorMap(assignments)


def block_correlation(block_sizes: Sequence[int], intra_r, inter_r: float) -> np.ndarray:
    """Correlation matrix implied by a block structure."""
    sizes = [int(b) for b in block_sizes]
    if not sizes or min(sizes) < 1:
        raise ValueError("block sizes must be positive")
    intra = np.broadcast_to(np.asarray(intra_r, dtype=float), (len(sizes),))
    labels = np.repeat(np.arange(len(sizes)), sizes)
    C = np.where(labels[:, None] == labels[None, :], intra[labels][:, None], inter_r)
    np.fill_diagonal(C, 1.0)
    return C


def gen_block_returns(block_sizes: Sequence[int], intra_r, inter_r: float, T: int,
                      seed: int, vol: float = 0.02,
                      tickers: Sequence[str] | None = None) -> ReturnMatrix:
    """Gaussian returns with block-constant correlation.

    Each series loads on a market factor (weight sqrt(inter_r)), its block
    factor (weight sqrt(intra_r - inter_r)) and idiosyncratic noise, so the
    population correlation is ``intra_r`` within a block and ``inter_r``
    across blocks. ``intra_r`` may be a scalar or one value per block.
    """
    sizes = [int(b) for b in block_sizes]
    intra = np.broadcast_to(np.asarray(intra_r, dtype=float), (len(sizes),)).copy()
    if np.any(intra < 0) or np.any(intra >= 1) or not 0 <= inter_r < 1:
        raise ValueError("correlations must lie in [0, 1)")
    if len(sizes) > 1 and inter_r > intra.min():
        raise ValueError(f"inter_r={inter_r} exceeds the smallest intra_r={intra.min()}")
    if T < 2:
        raise ValueError("T must be at least 2")
    C = block_correlation(sizes, intra, inter_r)
    if np.linalg.eigvalsh(C).min() <= 0:
        raise ValueError("implied correlation matrix is not positive definite")

    n = sum(sizes)
    labels = np.repeat(np.arange(len(sizes)), sizes)
    market = inter_r if len(sizes) > 1 else 0.0
    rng = np.random.default_rng(seed)
    common = rng.standard_normal(T)
    block = rng.standard_normal((len(sizes), T))
    noise = rng.standard_normal((n, T))
    z = (math.sqrt(market) * common[None, :]
         + np.sqrt(intra[labels] - market)[:, None] * block[labels]
         + np.sqrt(1.0 - intra[labels])[:, None] * noise)
    if tickers is None:
        tickers = [f"S{i:03d}" for i in range(n)]
    return ReturnMatrix(list(tickers), vol * z)


def returns_to_prices(r: ReturnMatrix, start: float = 100.0) -> PriceMatrix:
    """Inverse of :func:`log_returns` given a common starting price."""
    T = r.returns.shape[1] + 1
    logp = np.concatenate([np.zeros((r.n, 1)), np.cumsum(r.returns, axis=1)], axis=1)
    dates = [f"t{t:04d}" for t in range(T)]
    return PriceMatrix(list(r.tickers), dates, start * np.exp(logp))


def write_prices(p: PriceMatrix, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ticker", *p.dates])
        for t, row in zip(p.tickers, p.prices):
            w.writerow([t, *(f"{v:.10g}" for v in row)])


def write_sectors(s: SectorMap, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ticker", "sector", "color"])
        for t, (code, color) in s.assignments.items():
            w.writerow([t, code, color])
