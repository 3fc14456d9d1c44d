"""Command-line pipeline: gen -> mi -> build -> analyze / sweep.

Exit codes: 0 success, 2 rejected input, 3 computation failure.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .distfit import FamilyConfig
from .filtration import (BreakpointError, EdgeSet, cmlm_network, global_threshold,
                         mlm_network, read_edges_csv, write_edges_csv)
from .infotheory import MIMatrix, mi_matrix, read_mi_csv, write_mi_csv
from .ingest import (SECTOR_PALETTE, InputError, SectorMap, gen_block_returns,
                     load_prices, load_sectors, log_returns, returns_to_prices,
                     write_prices, write_sectors)
from .topology import (PowerLawFitError, clique_report, maximal_cliques, sweep,
                       topology_report, write_sweep_csv)

EXIT_INPUT = 2
EXIT_COMPUTE = 3

# graphviz has no X11 name for this one
_DOT_COLORS = {"mauve": "#E0B0FF"}


@dataclass
class RunConfig:
    input: str | None = None
    layout: str = "wide"
    drop_incomplete: bool = False
    mi: str | None = None
    edges: str | None = None
    sectors: str | None = None
    bins: int = 8
    scheme: str = "equal-frequency"
    method: str = "cmlm"
    eta: float = 0.2
    alpha: float = 0.3
    q: float = 2.0
    edge_rule: str = "union"
    families: str = "normal,exponential"
    m_min: int = 5
    grid: str | None = None
    curves: bool = False
    blocks: str = "30,30,40"
    intra: str = "0.8"
    inter: float = 0.1
    length: int = 1158
    seed: int = 0
    out: str = "."

    def validate(self):
        if self.bins < 2:
            raise InputError("--bins must be at least 2")
        if self.scheme not in ("equal-frequency", "equal-width"):
            raise InputError(f"unknown --scheme {self.scheme!r}")
        if self.method not in ("threshold", "mlm", "cmlm"):
            raise InputError(f"unknown --method {self.method!r}")
        if not 0 <= self.eta <= 1:
            raise InputError("--eta must lie in [0, 1]")
        if not 0 <= self.alpha < 1:
            raise InputError("--alpha must lie in [0, 1)")
        if self.q < 1:
            raise InputError("--q must be at least 1")
        if self.edge_rule not in ("union", "paper-literal"):
            raise InputError(f"unknown --edge-rule {self.edge_rule!r}")
        self.family_config()
        return self

    def family_config(self) -> FamilyConfig:
        parts = [p.strip() for p in self.families.split(",")]
        if len(parts) != 2:
            raise InputError("--families takes 'weak,strong', e.g. 'normal,exponential' or 'auto,auto'")
        try:
            return FamilyConfig(weak=parts[0], strong=parts[1], m_min=self.m_min)
        except ValueError as exc:
            raise InputError(f"--families: {exc}") from None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        data = json.loads(text)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InputError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**data)


@contextlib.contextmanager
def _atomic(path: Path):
    """Yield a temp path that replaces ``path`` only if the block succeeds."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    os.close(fd)
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _write_text(path: Path, text: str):
    with _atomic(path) as tmp:
        Path(tmp).write_text(text, encoding="utf-8")


def _dump_json(obj) -> str:
    def fix(o):
        if isinstance(o, float) and not math.isfinite(o):
            return None
        if isinstance(o, dict):
            return {k: fix(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [fix(v) for v in o]
        if isinstance(o, np.generic):
            return fix(o.item())
        return o
    return json.dumps(fix(obj), indent=2) + "\n"


def parse_grid(text: str) -> list[float]:
    """``start:step:stop`` (inclusive) or a comma-separated list."""
    text = text.strip()
    try:
        if ":" in text:
            start, step, stop = (float(p) for p in text.split(":"))
            if step <= 0:
                raise InputError("grid step must be positive")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + k * step, 12) for k in range(count)]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise InputError(f"cannot parse grid {text!r}") from None


def _load_mi(cfg: RunConfig) -> MIMatrix:
    if cfg.mi:
        return read_mi_csv(cfg.mi)
    if cfg.input:
        return _compute_mi(cfg)
    raise InputError("need --mi or --input")


def _compute_mi(cfg: RunConfig) -> MIMatrix:
    if not cfg.input:
        raise InputError("need --input")
    prices = load_prices(cfg.input, cfg.layout, cfg.drop_incomplete)
    returns = log_returns(prices)
    if returns.n < 2:
        raise InputError("need at least 2 tickers")
    if returns.returns.shape[1] < cfg.bins:
        raise InputError(f"only {returns.returns.shape[1]} returns per ticker, fewer than --bins")
    m = mi_matrix(returns, cfg.bins, cfg.scheme)
    for t, flag in zip(m.tickers, m.degenerate):
        if flag:
            print(f"warning: {t}: constant return series, NMI set to 0", file=sys.stderr)
    return m


def _sectors(cfg: RunConfig, roster) -> SectorMap | None:
    return load_sectors(cfg.sectors, roster) if cfg.sectors else None


def dot_text(e: EdgeSet, tickers, sectors: SectorMap | None = None) -> str:
    lines = ["graph stocknet {", "  node [style=filled];"]
    for t in tickers:
        attrs = ""
        if sectors is not None:
            color = _DOT_COLORS.get(sectors.color(t), sectors.color(t))
            attrs = f' [color="{color}", fillcolor="{color}", sector="{sectors.sector(t)}"]'
        lines.append(f'  "{t}"{attrs};')
    for (i, j), w in e.edges.items():
        lines.append(f'  "{tickers[i]}" -- "{tickers[j]}" [weight={w:.12g}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_gen(cfg: RunConfig) -> None:
    try:
        blocks = [int(b) for b in cfg.blocks.split(",")]
        intra = [float(v) for v in cfg.intra.split(",")]
    except ValueError:
        raise InputError("--blocks and --intra take comma-separated numbers") from None
    if len(intra) == 1:
        intra = intra * len(blocks)
    if len(intra) != len(blocks):
        raise InputError("--intra needs one value or one per block")
    try:
        r = gen_block_returns(blocks, intra, cfg.inter, cfg.length - 1, cfg.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    codes = list(SECTOR_PALETTE)
    labels = np.repeat(np.arange(len(blocks)), blocks)
    sectors = SectorMap({t: (codes[b % len(codes)], SECTOR_PALETTE[codes[b % len(codes)]])
                         for t, b in zip(r.tickers, labels)})
    out = Path(cfg.out)
    with _atomic(out / "prices.csv") as tmp:
        write_prices(returns_to_prices(r), tmp)
    with _atomic(out / "sectors.csv") as tmp:
        write_sectors(sectors, tmp)


def cmd_mi(cfg: RunConfig) -> None:
    m = _compute_mi(cfg)
    with _atomic(Path(cfg.out) / "mi.csv") as tmp:
        write_mi_csv(m, tmp)


def cmd_build(cfg: RunConfig) -> None:
    m = _load_mi(cfg)
    sectors = _sectors(cfg, m.tickers)
    fam = cfg.family_config()
    try:
        if cfg.method == "threshold":
            e, results = global_threshold(m, cfg.eta), []
        elif cfg.method == "mlm":
            e, results = mlm_network(m, fam, cfg.edge_rule)
        else:
            e, results = cmlm_network(m, cfg.alpha, cfg.q, fam, cfg.edge_rule)
    except (BreakpointError, ValueError) as exc:
        raise _ComputeError(str(exc)) from exc

    out = Path(cfg.out)
    with _atomic(out / "edges.csv") as tmp:
        write_edges_csv(e, m.tickers, tmp)
    diag = {"method": cfg.method, "edge_rule": cfg.edge_rule, "edge_count": len(e)}
    if cfg.method == "threshold":
        diag["eta"] = cfg.eta
    else:
        diag["breakpoints"] = [dict(r.to_dict(cfg.curves), ticker=m.tickers[r.node])
                               for r in results]
    _write_text(out / "breakpoints.json", _dump_json(diag))
    _write_text(out / "network.dot", dot_text(e, m.tickers, sectors))


def cmd_analyze(cfg: RunConfig) -> None:
    if not cfg.mi or not cfg.edges:
        raise InputError("analyze needs --mi and --edges")
    m = read_mi_csv(cfg.mi)
    e = read_edges_csv(cfg.edges, m.tickers)
    sectors = _sectors(cfg, m.tickers)
    report = topology_report(e)
    reports = [clique_report(c, m, sectors) for c in maximal_cliques(e)]
    reports.sort(key=lambda r: (-len(r.members), r.members))
    out = Path(cfg.out)
    _write_text(out / "topology.json", _dump_json(report))
    _write_text(out / "cliques.json", _dump_json([r.to_dict(m.tickers) for r in reports]))


def cmd_sweep(cfg: RunConfig) -> None:
    if cfg.method not in ("threshold", "cmlm"):
        raise InputError("sweep supports --method threshold or cmlm")
    grid = parse_grid(cfg.grid or ("0:0.01:0.4" if cfg.method == "cmlm" else "0:0.01:0.6"))
    m = _load_mi(cfg)
    try:
        rows = sweep(m, cfg.method, grid, cfg.family_config(), cfg.q, cfg.edge_rule)
    except (BreakpointError, PowerLawFitError) as exc:
        raise _ComputeError(str(exc)) from exc
    except ValueError as exc:
        raise InputError(str(exc)) from None
    with _atomic(Path(cfg.out) / "sweep.csv") as tmp:
        write_sweep_csv(rows, tmp)


class _ComputeError(RuntimeError):
    pass


COMMANDS = {"gen": cmd_gen, "mi": cmd_mi, "build": cmd_build,
            "analyze": cmd_analyze, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    # every flag defaults to SUPPRESS so only explicitly given ones override the config file
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON config file; flags override its values")
    common.add_argument("--input", help="price CSV")
    common.add_argument("--layout", choices=["wide", "long"])
    common.add_argument("--drop-incomplete", action="store_true",
                        help="drop tickers with missing prices instead of failing")
    common.add_argument("--mi", help="MI matrix CSV written by 'mi'")
    common.add_argument("--edges", help="edge list CSV written by 'build'")
    common.add_argument("--sectors", help="sector CSV: ticker,sector[,color]")
    common.add_argument("--bins", type=int)
    common.add_argument("--scheme", choices=["equal-frequency", "equal-width"])
    common.add_argument("--method", choices=["threshold", "mlm", "cmlm"])
    common.add_argument("--eta", type=float)
    common.add_argument("--alpha", type=float)
    common.add_argument("--q", type=float)
    common.add_argument("--edge-rule", choices=["union", "paper-literal"])
    common.add_argument("--families", help="weak,strong families, e.g. normal,exponential")
    common.add_argument("--m-min", type=int)
    common.add_argument("--grid", help="start:step:stop or comma list")
    common.add_argument("--curves", action="store_true",
                        help="include objective curves in breakpoints.json")
    common.add_argument("--blocks", help="block sizes for gen, e.g. 30,30,40")
    common.add_argument("--intra", help="within-block correlation(s) for gen")
    common.add_argument("--inter", type=float, help="cross-block correlation for gen")
    common.add_argument("--length", type=int, help="number of price dates for gen")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")

    parser = argparse.ArgumentParser(prog="stocknet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = vars(args).copy()
    values.pop("command", None)
    path = values.pop("config", None)
    cfg = RunConfig.from_json(Path(path).read_text(encoding="utf-8")) if path else RunConfig()
    for key, val in values.items():
        setattr(cfg, key, val)
    return cfg.validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        COMMANDS[args.command](cfg)
    except (InputError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except _ComputeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    return 0


if __name__ == "__main__":
    sys.exit(main())
