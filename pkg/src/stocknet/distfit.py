"""Closed-form maximum-likelihood fits and the two-segment objective.

All log-likelihoods are in nats. The density families (normal, exponential,
rayleigh) are mutually comparable; the quantized Poisson family models counts
``round(K * x)`` and is only comparable with itself.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Iterable

import numpy as np
from scipy.special import gammaln

QUANT_SCALE = 100
EPS = np.finfo(float).eps


class Family(str, Enum):
    NORMAL = "normal"
    EXPONENTIAL = "exponential"
    RAYLEIGH = "rayleigh"
    POISSON = "poisson-quantized"

    @property
    def quantized(self) -> bool:
        return self is Family.POISSON


DENSITY_FAMILIES = (Family.NORMAL, Family.EXPONENTIAL, Family.RAYLEIGH)
_TIE_ORDER = {Family.NORMAL: 0, Family.EXPONENTIAL: 1, Family.RAYLEIGH: 2, Family.POISSON: 3}


class DegenerateFitError(ValueError):
    """Sample admits no proper MLE (too short or zero spread)."""


@dataclass(frozen=True)
class FitResult:
    family: Family
    params: dict
    loglik: float
    n: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["family"] = self.family.value
        return d


def fit_mle(xs, family: Family | str, quant_scale: int = QUANT_SCALE) -> FitResult:
    """Fit ``family`` to ``xs`` by maximum likelihood.

    Raises DegenerateFitError for fewer than two points or a sample whose
    values are all equal. Zeros are nudged to machine epsilon for the
    exponential and rayleigh families, whose support excludes 0.
    """
    family = Family(family)
    xs = np.asarray(xs, dtype=float)
    n = len(xs)
    if n < 2:
        raise DegenerateFitError(f"{family.value} fit needs at least 2 points, got {n}")
    if xs.max() == xs.min():
        raise DegenerateFitError(f"{family.value} fit on a constant sample")

    if family is Family.NORMAL:
        mean = xs.mean()
        var = np.mean((xs - mean) ** 2)
        if not var > 0:
            raise DegenerateFitError("zero variance")
        ll = -0.5 * n * (math.log(2 * math.pi * var) + 1.0)
        params = {"mean": float(mean), "variance": float(var)}
    elif family is Family.EXPONENTIAL:
        if xs.min() < 0:
            raise ValueError("exponential fit needs non-negative values")
        xs = np.maximum(xs, EPS)
        rate = 1.0 / xs.mean()
        ll = n * math.log(rate) - n
        params = {"rate": float(rate)}
    elif family is Family.RAYLEIGH:
        if xs.min() < 0:
            raise ValueError("rayleigh fit needs non-negative values")
        xs = np.maximum(xs, EPS)
        s2 = np.mean(xs ** 2) / 2.0
        ll = np.sum(np.log(xs)) - n * math.log(s2) - n
        params = {"scale": float(math.sqrt(s2))}
    else:
        k = np.rint(quant_scale * xs)
        lam = k.mean()
        if not lam > 0:
            raise DegenerateFitError("all quantized counts are zero")
        ll = np.sum(k) * math.log(lam) - n * lam - np.sum(gammaln(k + 1))
        params = {"mean_count": float(lam), "scale": quant_scale}
    return FitResult(family, params, float(ll), n)


def _check_candidates(candidates: Iterable) -> list[Family]:
    fams = sorted({Family(c) for c in candidates}, key=_TIE_ORDER.get)
    if not fams:
        raise ValueError("no candidate families")
    if len({f.quantized for f in fams}) > 1:
        raise ValueError("cannot compare quantized and density likelihoods")
    return fams


def best_fit(xs, candidates: Iterable = DENSITY_FAMILIES,
             quant_scale: int = QUANT_SCALE) -> FitResult:
    """Highest-likelihood fit among ``candidates``; ties keep the earlier family."""
    best = None
    for fam in _check_candidates(candidates):
        fit = fit_mle(xs, fam, quant_scale)
        if best is None or fit.loglik > best.loglik:
            best = fit
    return best


def select_family(xs, candidates: Iterable = DENSITY_FAMILIES,
                  quant_scale: int = QUANT_SCALE) -> Family:
    return best_fit(xs, candidates, quant_scale).family


@dataclass(frozen=True)
class FamilyConfig:
    """Which families model the weak and strong segments of a sorted row.

    ``weak`` and ``strong`` take a family name or ``"auto"``, which picks the
    best of ``candidates`` per segment.
    """
    weak: str = "normal"
    strong: str = "exponential"
    candidates: tuple = tuple(f.value for f in DENSITY_FAMILIES)
    m_min: int = 5
    quant_scale: int = QUANT_SCALE

    def __post_init__(self):
        for side in (self.weak, self.strong):
            if side != "auto":
                Family(side)
        _check_candidates(self.candidates)
        if self.m_min < 2:
            raise ValueError("m_min must be at least 2")

    def fit(self, xs, side: str) -> FitResult:
        spec = self.weak if side == "weak" else self.strong
        if spec == "auto":
            return best_fit(xs, self.candidates, self.quant_scale)
        return fit_mle(xs, spec, self.quant_scale)


def segment_fits(sorted_xs, u: int, cfg: FamilyConfig = FamilyConfig()):
    """Fits of the weak part ``xs[:u]`` and the strong part ``xs[u:]``.

    Returns ``(weak_fit, strong_fit)``, with None in place of a fit whose
    segment is degenerate.
    """
    xs = np.asarray(sorted_xs, dtype=float)
    n = len(xs)
    if not cfg.m_min <= u <= n - cfg.m_min:
        raise ValueError(f"split {u} leaves a segment shorter than {cfg.m_min} "
                         f"(sample size {n})")
    out = []
    for part, side in ((xs[:u], "weak"), (xs[u:], "strong")):
        try:
            out.append(cfg.fit(part, side))
        except DegenerateFitError:
            out.append(None)
    return tuple(out)


def segment_objective(sorted_xs, u: int, cfg: FamilyConfig = FamilyConfig()) -> float:
    """Sum of the weak- and strong-segment maximized log-likelihoods at split ``u``.

    The weak segment is the first ``u`` values. A degenerate segment gives
    ``-inf``, which disqualifies the split.
    """
    weak, strong = segment_fits(sorted_xs, u, cfg)
    if weak is None or strong is None:
        return -math.inf
    return weak.loglik + strong.loglik
