"""Discretization, entropies and the normalized mutual information matrix.

Entropies are plug-in estimates from empirical symbol frequencies. Normalized
MI is the ratio ``I(X;Y) / H(X,Y)`` and does not depend on the log base.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .ingest import InputError, ReturnMatrix

NEG_CLAMP = 1e-12


@dataclass
class DiscreteSeries:
    symbols: np.ndarray
    bin_count: int
    bin_edges: np.ndarray
    degenerate: bool = False

    def __len__(self):
        return len(self.symbols)


def discretize(x, B: int = 8, scheme: str = "equal-frequency") -> DiscreteSeries:
    """Map a real series onto ``B`` bins.

    Bins are left-closed with the last bin right-closed. Under equal-frequency
    binning the edges are empirical quantiles; quantiles that coincide because
    of tied values are merged, so ``bin_count`` can come out below ``B``.
    A constant series collapses to one symbol and is flagged degenerate.
    """
    x = np.asarray(x, dtype=float)
    if B < 2:
        raise ValueError("need at least 2 bins")
    if len(x) < B:
        raise ValueError(f"series of length {len(x)} is shorter than B={B}")
    lo, hi = x.min(), x.max()
    if lo == hi:
        return DiscreteSeries(np.zeros(len(x), dtype=np.intp), 1,
                              np.array([lo, hi + 1.0]), degenerate=True)
    if scheme == "equal-frequency":
        edges = np.unique(np.quantile(x, np.linspace(0.0, 1.0, B + 1)))
    elif scheme == "equal-width":
        edges = np.linspace(lo, hi, B + 1)
    else:
        raise ValueError(f"unknown binning scheme {scheme!r}")
    symbols = np.searchsorted(edges[1:-1], x, side="right")
    return DiscreteSeries(symbols.astype(np.intp), len(edges) - 1, edges)


def _symbols(x) -> np.ndarray:
    if isinstance(x, DiscreteSeries):
        return x.symbols
    return np.asarray(x)


def _entropy_from_counts(counts: np.ndarray, base: float) -> float:
    # Grouped by distinct count c with multiplicity m: sum of (m c / N) log2(N / c).
    # Equal count multisets give bit-identical results; uniform counts give log2(B) exactly.
    counts = counts[counts > 0]
    total = float(counts.sum())
    c, m = np.unique(counts, return_counts=True)
    h = np.sum((m * c / total) * np.log2(total / c))
    if base != 2:
        h = h / math.log2(base)
    return float(h) + 0.0


def entropy(x, base: float = 2) -> float:
    s = _symbols(x)
    if len(s) == 0:
        raise ValueError("entropy of an empty series")
    _, counts = np.unique(s, return_counts=True)
    return _entropy_from_counts(counts, base)


def _joint_codes(x, y) -> np.ndarray:
    sx, sy = _symbols(x), _symbols(y)
    if len(sx) != len(sy):
        raise ValueError(f"length mismatch: {len(sx)} vs {len(sy)}")
    _, ix = np.unique(sx, return_inverse=True)
    _, iy = np.unique(sy, return_inverse=True)
    return ix * (iy.max() + 1 if len(iy) else 1) + iy


def joint_entropy(x, y, base: float = 2) -> float:
    codes = _joint_codes(x, y)
    if len(codes) == 0:
        raise ValueError("entropy of an empty series")
    return _entropy_from_counts(np.bincount(codes), base)


def _clamp(i: float) -> float:
    return 0.0 if -NEG_CLAMP < i < 0 else i


def mutual_information(x, y, base: float = 2) -> float:
    hxy = joint_entropy(x, y, base)
    return _clamp(entropy(x, base) + entropy(y, base) - hxy)


def normalized_mi(x, y, base: float = 2) -> float:
    """``I(X;Y) / H(X,Y)``; 0 when both series are constant."""
    hxy = joint_entropy(x, y, base)
    if hxy == 0:
        return 0.0
    i = _clamp(entropy(x, base) + entropy(y, base) - hxy)
    return min(i / hxy, 1.0)


def distance(x, y, base: float = 2) -> float:
    return 1.0 - normalized_mi(x, y, base)


@dataclass
class MIMatrix:
    tickers: list[str]
    values: np.ndarray
    degenerate: np.ndarray = field(default=None)
    pairs_evaluated: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        n = len(self.tickers)
        if self.values.shape != (n, n):
            raise InputError(f"MI matrix shape {self.values.shape} does not match {n} tickers")
        if self.degenerate is None:
            self.degenerate = np.zeros(n, dtype=bool)

    @property
    def n(self) -> int:
        return len(self.tickers)

    def distances(self) -> np.ndarray:
        return 1.0 - self.values

    def row(self, i: int) -> np.ndarray:
        """MI values of node ``i`` against every other node (diagonal dropped)."""
        return np.delete(self.values[i], i)


def mi_matrix(r: ReturnMatrix, B: int = 8, scheme: str = "equal-frequency") -> MIMatrix:
    """Pairwise normalized MI of all return series.

    Each unordered pair is evaluated once and mirrored, so the result is
    exactly symmetric. Constant series get NMI 0 off the diagonal and are
    flagged in ``degenerate``.
    """
    n = r.n
    if n < 2:
        raise ValueError("need at least 2 series")
    series = [discretize(row, B, scheme) for row in r.returns]
    sym = np.array([s.symbols for s in series])
    nbins = max(s.bin_count for s in series)
    h = np.array([entropy(s) for s in series])

    values = np.eye(n)
    pairs = 0
    for i in range(n - 1):
        base_codes = sym[i] * nbins
        for j in range(i + 1, n):
            hxy = _entropy_from_counts(np.bincount(base_codes + sym[j]), 2)
            if hxy == 0:
                v = 0.0
            else:
                v = min(_clamp(h[i] + h[j] - hxy) / hxy, 1.0)
            values[i, j] = values[j, i] = v
            pairs += 1
    return MIMatrix(list(r.tickers), values,
                    np.array([s.degenerate for s in series]), pairs)


def write_mi_csv(m: MIMatrix, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ticker", *m.tickers])
        for t, row in zip(m.tickers, m.values):
            w.writerow([t, *(f"{v:.12g}" for v in row)])


def read_mi_csv(path) -> MIMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise InputError(f"{path}: empty MI file")
    cols = [c.strip() for c in rows[0][1:]]
    tickers = []
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(cols) + 1:
            raise InputError(f"{path}: ragged row at line {lineno}")
        tickers.append(row[0].strip())
        try:
            values.append([float(c) for c in row[1:]])
        except ValueError:
            raise InputError(f"{path}: non-numeric value at line {lineno}") from None
    if tickers != cols:
        raise InputError(f"{path}: row and column tickers differ")
    v = np.array(values)
    if not np.array_equal(v, v.T):
        raise InputError(f"{path}: matrix is not symmetric")
    return MIMatrix(tickers, v)
