"""Degree statistics, power-law fits, clustering, cliques and sweeps."""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import zeta

from .distfit import FamilyConfig
from .filtration import EdgeSet, assemble, choose, global_threshold, scan_matrix
from .infotheory import MIMatrix
from .ingest import SectorMap

SWEEP_COLUMNS = ("param", "avg_degree", "excluded", "gamma_mle", "gamma_ls",
                 "clustering", "edge_count")


class PowerLawFitError(ValueError):
    """Degree sample cannot support a power-law fit."""


def degree_stats(e: EdgeSet):
    """``(avg_degree, histogram, excluded)``; the histogram is indexed by degree."""
    deg = e.degrees()
    if e.n == 0:
        return 0.0, np.zeros(1, dtype=int), 0
    return float(deg.mean()), np.bincount(deg), int(np.sum(deg == 0))


@dataclass
class PowerLawFit:
    gamma_mle: float
    gamma_ls: float
    gamma_approx: float
    k_min: int
    n_tail: int
    stderr: float
    method: str = "discrete-mle"

    @property
    def scale_free(self) -> bool:
        return is_scale_free(self.gamma_mle)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["scale_free"] = self.scale_free
        return d


def is_scale_free(gamma: float) -> bool:
    return 2.0 < gamma < 3.0


GAMMA_MAX = 20.0


def _discrete_mle(k: np.ndarray, k_min: int) -> float:
    n = len(k)
    slog = float(np.sum(np.log(k)))

    def nll(g):
        return n * math.log(zeta(g, k_min)) + g * slog

    res = minimize_scalar(nll, bounds=(1.0 + 1e-6, GAMMA_MAX), method="bounded",
                          options={"xatol": 1e-10})
    if res.x > GAMMA_MAX - 1e-3:
        raise PowerLawFitError(f"exponent exceeds {GAMMA_MAX}; degrees too concentrated")
    return float(res.x)


def _ks_distance(k: np.ndarray, k_min: int, gamma: float) -> float:
    ks = np.sort(k)
    support = np.arange(k_min, ks[-1] + 1)
    model_cdf = 1.0 - zeta(gamma, support + 1) / zeta(gamma, k_min)
    emp_cdf = np.searchsorted(ks, support, side="right") / len(ks)
    return float(np.max(np.abs(emp_cdf - model_cdf)))


def powerlaw_gamma(degrees, k_min: int | None = None, min_tail: int = 10) -> PowerLawFit:
    """Fit ``p(k) ~ k^-gamma`` to the positive degrees.

    ``gamma_mle`` maximizes the exact discrete likelihood (Hurwitz zeta
    normalization) over degrees ``>= k_min``; ``gamma_approx`` is the usual
    closed form ``1 + n / sum(log(k / (k_min - 0.5)))``; ``gamma_ls`` is minus
    the slope of log p(k) against log k over the distinct degrees. When
    ``k_min`` is None it is chosen to minimize the KS distance of the tail.
    """
    k = np.asarray(degrees, dtype=float)
    k = k[k > 0]
    if k_min is None:
        candidates = [int(c) for c in np.unique(k) if np.sum(k >= c) >= min_tail]
        if not candidates:
            raise PowerLawFitError(f"fewer than {min_tail} positive degrees")
        scored = []
        for c in candidates:
            tail = k[k >= c]
            if len(np.unique(tail)) < 2:
                continue
            try:
                scored.append((_ks_distance(tail, c, _discrete_mle(tail, c)), c))
            except PowerLawFitError:
                continue
        if not scored:
            if len(np.unique(k)) < 2:
                raise PowerLawFitError("all degrees are equal; log-log slope undefined")
            raise PowerLawFitError("no tail admits a finite exponent")
        k_min = min(scored)[1]
    if k_min < 1:
        raise ValueError("k_min must be a positive integer")
    tail = k[k >= k_min]
    n = len(tail)
    if n < min_tail:
        raise PowerLawFitError(f"only {n} degrees >= k_min={k_min}, need {min_tail}")

    vals, counts = np.unique(tail, return_counts=True)
    if len(vals) < 2:
        raise PowerLawFitError("all degrees are equal; log-log slope undefined")
    slope = np.polyfit(np.log(vals), np.log(counts / n), 1)[0]

    g = _discrete_mle(tail, k_min)
    approx = 1.0 + n / float(np.sum(np.log(tail / (k_min - 0.5))))
    return PowerLawFit(g, float(-slope), approx, int(k_min), n, (g - 1.0) / math.sqrt(n))


def powerlaw_sample(gamma: float, k_min: int, size: int, seed=None,
                    k_max: int = 2_000_000) -> np.ndarray:
    """Draw integer degrees from ``p(k) ~ k^-gamma`` for ``k_min <= k <= k_max``."""
    support = np.arange(k_min, k_max + 1, dtype=float)
    cdf = np.cumsum(support ** -gamma)
    cdf /= cdf[-1]
    rng = np.random.default_rng(seed)
    idx = np.minimum(np.searchsorted(cdf, rng.random(size)), len(support) - 1)
    return support[idx].astype(np.int64)


def clustering_coefficient(e: EdgeSet, average: bool = False) -> float:
    """Global transitivity, or the mean local coefficient when ``average``."""
    adj = e.adjacency()
    tri2 = np.zeros(e.n)  # twice the triangles through each node
    for v, nb in enumerate(adj):
        for w in nb:
            tri2[v] += len(nb & adj[w])
    deg = np.array([len(nb) for nb in adj], dtype=float)
    triples = deg * (deg - 1)
    if average:
        if e.n == 0:
            return 0.0
        local = np.divide(tri2, triples, out=np.zeros(e.n), where=triples > 0)
        return float(local.mean())
    total = triples.sum()
    return float(tri2.sum() / total) if total > 0 else 0.0


def maximal_cliques(e: EdgeSet, min_size: int = 3) -> list[tuple[int, ...]]:
    """All maximal cliques with at least ``min_size`` members.

    Bron-Kerbosch with Tomita pivoting; output sorted lexicographically by
    sorted members.
    """
    adj = e.adjacency()
    found = []
    stack = [(set(), set(range(e.n)), set())]
    while stack:
        r, p, x = stack.pop()
        if not p and not x:
            if len(r) >= min_size:
                found.append(tuple(sorted(r)))
            continue
        if len(r) + len(p) < min_size:
            continue
        pivot = max(p | x, key=lambda v: len(p & adj[v]))
        for v in sorted(p - adj[pivot]):
            stack.append((r | {v}, p & adj[v], x & adj[v]))
            p = p - {v}
            x = x | {v}
    return sorted(found)


def disparity(i: int, clique: Sequence[int], m: MIMatrix) -> float:
    """Weight concentration of node ``i`` inside ``clique``: sum of squared shares."""
    if i not in clique:
        raise ValueError(f"node {i} is not in the clique")
    others = [j for j in clique if j != i]
    if not others:
        raise ValueError("clique needs at least 2 members")
    w = m.values[i, others]
    s = w.sum()
    if s == 0:
        raise ValueError(f"node {i} has zero total weight inside the clique")
    return float(np.sum((w / s) ** 2))


@dataclass
class CliqueReport:
    members: tuple
    avg_mi: float
    disparity: float
    sectors: dict = field(default_factory=dict)

    def to_dict(self, tickers=None) -> dict:
        names = [tickers[k] for k in self.members] if tickers is not None else list(self.members)
        return {"size": len(self.members), "members": names, "avg_mi": self.avg_mi,
                "disparity": self.disparity, "sectors": self.sectors}


def clique_report(clique: Sequence[int], m: MIMatrix, s: SectorMap | None = None) -> CliqueReport:
    members = tuple(sorted(clique))
    iu = np.triu_indices(len(members), k=1)
    internal = m.values[np.ix_(members, members)][iu]
    disp = float(np.mean([disparity(i, members, m) for i in members]))
    sectors = {}
    if s is not None:
        tally = Counter(s.sector(m.tickers[k]) for k in members)
        sectors = dict(sorted(tally.items(), key=lambda kv: (-kv[1], kv[0])))
    return CliqueReport(members, float(internal.mean()), disp, sectors)


def topology_report(e: EdgeSet, k_min: int | None = None) -> dict:
    avg, hist, excluded = degree_stats(e)
    report = {"n_nodes": e.n, "edge_count": len(e), "avg_degree": avg,
              "degree_histogram": hist.tolist(), "excluded": excluded,
              "clustering": clustering_coefficient(e),
              "avg_clustering": clustering_coefficient(e, average=True)}
    try:
        report["gamma"] = powerlaw_gamma(e.degrees(), k_min).to_dict()
    except PowerLawFitError as exc:
        report["gamma"] = None
        report["gamma_error"] = str(exc)
    return report


def _row(param: float, e: EdgeSet, k_min) -> dict:
    avg, _, excluded = degree_stats(e)
    try:
        fit = powerlaw_gamma(e.degrees(), k_min)
        g_mle, g_ls = fit.gamma_mle, fit.gamma_ls
    except PowerLawFitError:
        g_mle = g_ls = math.nan
    return {"param": float(param), "avg_degree": avg, "excluded": excluded,
            "gamma_mle": g_mle, "gamma_ls": g_ls,
            "clustering": clustering_coefficient(e), "edge_count": len(e)}


def sweep(m: MIMatrix, method: str, grid: Sequence[float], cfg: FamilyConfig = FamilyConfig(),
          q: float = 2.0, rule: str = "union", k_min: int | None = None) -> list[dict]:
    """One topology row per parameter value.

    ``method`` is ``threshold`` (grid over eta) or ``cmlm`` (grid over alpha).
    Power-law fits that fail leave NaN in their cells.
    """
    grid = [float(g) for g in grid]
    if not grid:
        raise ValueError("empty grid")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be ascending")
    rows = []
    if method == "threshold":
        for eta in grid:
            rows.append(_row(eta, global_threshold(m, eta), k_min))
    elif method == "cmlm":
        scans = scan_matrix(m, cfg)
        for alpha in grid:
            thresholds = [choose(sc, alpha, q, node=i).threshold for i, sc in enumerate(scans)]
            rows.append(_row(alpha, assemble(m, thresholds, rule), k_min))
    else:
        raise ValueError(f"unknown sweep method {method!r}")
    return rows


def write_sweep_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow(["" if isinstance(r[c], float) and math.isnan(r[c]) else
                        (f"{r[c]:.12g}" if isinstance(r[c], float) else r[c])
                        for c in SWEEP_COLUMNS])
