"""Edge selection: a global threshold and per-node likelihood breakpoints.

For the per-node methods, node ``i``'s MI values against the other ``n - 1``
nodes are sorted ascending and split at ``u`` into a weak part (the first
``u`` values) and a strong part. The node's threshold is the ``u``-th order
statistic, and an edge is kept when its MI is strictly above the threshold.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .distfit import FamilyConfig, segment_fits
from .infotheory import MIMatrix

EDGE_RULES = ("union", "paper-literal")


class BreakpointError(RuntimeError):
    """No admissible split exists for a node."""


@dataclass
class EdgeSet:
    n: int
    edges: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (i, j), w in self.edges.items():
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            if not 0 <= i < self.n or not 0 <= j < self.n:
                raise ValueError(f"edge ({i}, {j}) outside 0..{self.n - 1}")
            key = (min(i, j), max(i, j))
            if key in clean:
                raise ValueError(f"duplicate edge {key}")
            clean[key] = float(w)
        self.edges = dict(sorted(clean.items()))

    def __len__(self):
        return len(self.edges)

    def __contains__(self, pair):
        i, j = pair
        return (min(i, j), max(i, j)) in self.edges

    def pairs(self) -> set[tuple[int, int]]:
        return set(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def adjacency(self) -> list[set[int]]:
        adj = [set() for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return adj

    def relabel(self, perm) -> "EdgeSet":
        """Edge set with node ``k`` renamed to ``perm[k]``."""
        return EdgeSet(self.n, {(int(perm[i]), int(perm[j])): w
                                for (i, j), w in self.edges.items()})


def _from_mask(values: np.ndarray, mask: np.ndarray) -> EdgeSet:
    iu, ju = np.nonzero(np.triu(mask, k=1))
    return EdgeSet(len(values), {(int(i), int(j)): values[i, j] for i, j in zip(iu, ju)})


def global_threshold(m: MIMatrix, eta: float) -> EdgeSet:
    if not 0 <= eta <= 1:
        raise ValueError("eta must lie in [0, 1]")
    return _from_mask(m.values, m.values > eta)


@dataclass
class BreakpointResult:
    node: int
    u: int
    threshold: float
    objective_curve: np.ndarray
    weak_family: str
    strong_family: str
    alpha: float = 0.0
    q: float = 2.0

    def to_dict(self, curve: bool = False) -> dict:
        d = {"node": self.node, "u": self.u, "threshold": self.threshold,
             "alpha": self.alpha, "q": self.q,
             "weak_family": self.weak_family, "strong_family": self.strong_family}
        if curve:
            d["objective_curve"] = [None if not math.isfinite(v) else v
                                    for v in self.objective_curve.tolist()]
        return d


@dataclass
class RowScan:
    """Penalty-free objective over every feasible split of one sorted row."""
    xs: np.ndarray
    us: np.ndarray
    curve: np.ndarray
    admissible: np.ndarray
    weak_families: list
    strong_families: list


def scan_row(row, cfg: FamilyConfig = FamilyConfig()) -> RowScan:
    xs = np.sort(np.asarray(row, dtype=float), kind="stable")
    n = len(xs)
    if n < 2 * cfg.m_min:
        raise ValueError(f"row of length {n} is too short for m_min={cfg.m_min}")
    us = np.arange(cfg.m_min, n - cfg.m_min + 1)
    curve = np.empty(len(us))
    weak_f, strong_f = [], []
    for k, u in enumerate(us):
        weak, strong = segment_fits(xs, int(u), cfg)
        weak_f.append(weak.family.value if weak else None)
        strong_f.append(strong.family.value if strong else None)
        curve[k] = -math.inf if weak is None or strong is None else weak.loglik + strong.loglik
    # a split inside a run of equal values would classify equal weights differently
    admissible = xs[us - 1] < xs[us]
    return RowScan(xs, us, curve, admissible, weak_f, strong_f)


def penalty(row, u: int, alpha: float, q: float = 2.0) -> float:
    """``alpha * sum(1 - x over the strong part) / mean(row) ** q``."""
    xs = np.sort(np.asarray(row, dtype=float))
    _check_penalty_args(alpha, q)
    mean = xs.mean()
    if mean == 0:
        raise ValueError("zero row mean")
    if alpha == 0:
        return 0.0
    return alpha * float(np.sum(1.0 - xs[u:])) / mean ** q


def _check_penalty_args(alpha, q):
    if not 0 <= alpha < 1:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    if not q >= 1:
        raise ValueError(f"q must be at least 1, got {q}")


def _penalty_curve(scan: RowScan, alpha: float, q: float) -> np.ndarray:
    _check_penalty_args(alpha, q)
    mean = scan.xs.mean()
    if mean == 0:
        raise ValueError("zero row mean")
    # tail[u] = sum of (1 - x) over xs[u:]
    tail = np.concatenate([np.cumsum((1.0 - scan.xs)[::-1])[::-1], [0.0]])
    return alpha * tail[scan.us] / mean ** q


def choose(scan: RowScan, alpha: float = 0.0, q: float = 2.0, node: int = -1) -> BreakpointResult:
    """Argmax of the (penalized) objective; ties go to the smallest split."""
    objective = scan.curve if alpha == 0 else scan.curve - _penalty_curve(scan, alpha, q)
    masked = np.where(scan.admissible, objective, -math.inf)
    k = int(np.argmax(masked))
    if masked[k] == -math.inf:
        raise BreakpointError(f"node {node}: every split is degenerate")
    u = int(scan.us[k])
    return BreakpointResult(node, u, float(scan.xs[u - 1]), objective,
                            scan.weak_families[k], scan.strong_families[k], alpha, q)


def mlm_breakpoint(row, cfg: FamilyConfig = FamilyConfig(), node: int = -1) -> BreakpointResult:
    return choose(scan_row(row, cfg), node=node)


def cmlm_breakpoint(row, alpha: float, q: float = 2.0, cfg: FamilyConfig = FamilyConfig(),
                    node: int = -1) -> BreakpointResult:
    return choose(scan_row(row, cfg), alpha, q, node=node)


def scan_matrix(m: MIMatrix, cfg: FamilyConfig = FamilyConfig()) -> list[RowScan]:
    if m.n < 2 * cfg.m_min + 1:
        raise ValueError(f"need at least {2 * cfg.m_min + 1} nodes for m_min={cfg.m_min}")
    scans = []
    for i in range(m.n):
        try:
            scans.append(scan_row(m.row(i), cfg))
        except ValueError as exc:
            raise BreakpointError(f"node {i}: {exc}") from exc
    return scans


def assemble(m: MIMatrix, thresholds, rule: str = "union") -> EdgeSet:
    """Edges from per-node thresholds.

    ``union`` keeps (i, j) when its MI exceeds either endpoint's threshold.
    ``paper-literal`` keeps (i, j), i < j, when it exceeds node i's threshold.
    """
    t = np.asarray(thresholds, dtype=float)
    v = m.values
    if rule == "union":
        mask = v > np.minimum(t[:, None], t[None, :])
    elif rule == "paper-literal":
        mask = v > t[:, None]
    else:
        raise ValueError(f"unknown edge rule {rule!r}")
    return _from_mask(v, mask)


def network_from_scans(m: MIMatrix, scans: list[RowScan], alpha: float = 0.0, q: float = 2.0,
                       rule: str = "union"):
    results = []
    for i, scan in enumerate(scans):
        try:
            results.append(choose(scan, alpha, q, node=i))
        except ValueError as exc:
            raise BreakpointError(f"node {i}: {exc}") from exc
    return assemble(m, [r.threshold for r in results], rule), results


def mlm_network(m: MIMatrix, cfg: FamilyConfig = FamilyConfig(), rule: str = "union"):
    """Per-node maximum-likelihood thresholds; returns ``(EdgeSet, [BreakpointResult])``."""
    return network_from_scans(m, scan_matrix(m, cfg), rule=rule)


def cmlm_network(m: MIMatrix, alpha: float, q: float = 2.0,
                 cfg: FamilyConfig = FamilyConfig(), rule: str = "union"):
    """As :func:`mlm_network` with the strong-part weight penalty subtracted."""
    return network_from_scans(m, scan_matrix(m, cfg), alpha, q, rule)


def write_edges_csv(e: EdgeSet, tickers, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["src", "dst", "weight"])
        for (i, j), wt in e.edges.items():
            w.writerow([tickers[i], tickers[j], f"{wt:.12g}"])


def read_edges_csv(path, tickers) -> EdgeSet:
    from .ingest import InputError

    index = {t: k for k, t in enumerate(tickers)}
    edges = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header != ["src", "dst", "weight"]:
            raise InputError(f"{path}: expected header 'src,dst,weight'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                a, b, wt = row
                edges[(index[a], index[b])] = float(wt)
            except (ValueError, KeyError) as exc:
                raise InputError(f"{path}: bad edge at line {lineno}: {exc}") from None
    try:
        return EdgeSet(len(tickers), edges)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
