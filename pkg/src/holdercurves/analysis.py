"""Empirical exponent estimators for sampled curves and point sets.

All estimators are deterministic and, where they sample, sample on fixed
strided grids so repeated runs agree exactly.  The s-variation estimator
only ever *under*-estimates the true variation (it tests finitely many
partitions and lower-bounds set diameters), which is the useful direction:
a growing lower bound certifies divergence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import SampledCurve
from .errors import (InsufficientDepths, ScalesBelowResolution,
                     ValidationError)

_EXACT_DIAM_LIMIT = 512


def _set_diam_lower(points, metric) -> float:
    """Diameter of a point set; exact when small, otherwise the best
    per-coordinate extent (a valid lower bound in both metrics)."""
    n = len(points)
    if n < 2:
        return 0.0
    if n <= _EXACT_DIAM_LIMIT:
        return metric.diam(points)
    ext = np.ptp(points, axis=0)
    if metric.is_euclidean:
        return float(np.max(ext))
    return float(np.max(ext ** metric.exponents))


def s_variation_estimate(curve: SampledCurve, s: float, depth: int = 8) -> float:
    """Lower bound for the s-variation norm of the curve:

        sup over partitions of (sum_I diam(f(I))^s) ^ (1/s)

    tested over the dyadic partitions of the domain at levels 1..depth and
    over the curve's own breakpoint partition.  Monotone nondecreasing in
    depth (deeper runs only test more partitions).
    """
    if s <= 0:
        raise ValidationError("s must be positive")
    if depth < 1:
        raise ValidationError("depth must be >= 1")
    t0, t1 = curve.domain
    pts = curve.points
    params = curve.params
    metric = curve.metric

    # breakpoint partition: the curve is linear between breakpoints
    seg = metric.dist(pts[:-1], pts[1:])
    best = float(np.sum(seg ** s))

    for level in range(1, depth + 1):
        edges = np.linspace(t0, t1, 2 ** level + 1)
        vals = curve.evaluate(edges)
        idx = np.searchsorted(params, edges)
        total = 0.0
        for c in range(2 ** level):
            inner = pts[idx[c]:idx[c + 1]]
            cell = np.vstack([vals[c:c + 1], inner, vals[c + 1:c + 2]])
            total += _set_diam_lower(cell, metric) ** s
        best = max(best, total)
    return best ** (1.0 / s)


def holder_constant_estimate(curve: SampledCurve, exponent: float,
                             budget: int = 200_000) -> float:
    """Empirical Holder constant sup d(f(x), f(y)) / |x-y|^exponent over
    breakpoint pairs: all pairs when they fit in the budget, otherwise a
    stratified sample over dyadic index gaps (deterministic strides)."""
    if not (0 < exponent <= 1):
        raise ValidationError("exponent must lie in (0, 1]")
    params = curve.params
    pts = curve.points
    metric = curve.metric
    n = len(params)

    def ratios(i, j):
        dt = params[j] - params[i]
        ok = dt > 0
        if not np.any(ok):
            return 0.0
        d = metric.dist(pts[i[ok]], pts[j[ok]])
        return float(np.max(d / dt[ok] ** exponent))

    best = 0.0
    if n * (n - 1) // 2 <= budget:
        for i in range(n - 1):
            jj = np.arange(i + 1, n)
            ii = np.full(n - 1 - i, i)
            best = max(best, ratios(ii, jj))
        return best

    gaps = []
    g = 1
    while g < n:
        gaps.append(g)
        g *= 2
    per_gap = max(1, budget // len(gaps))
    for g in gaps:
        count = n - g
        stride = max(1, count // per_gap)
        i = np.arange(0, count, stride)
        best = max(best, ratios(i, i + g))
    return best


@dataclass
class ScanResult:
    exponents: list[float]
    estimates: dict[float, list[float]]   # exponent -> value per depth
    verdicts: dict[float, str]            # "bounded" | "diverging" | "inconclusive"
    crossover: float | None               # least tested exponent judged bounded


def exponent_scan(curves: list[SampledCurve], exponents,
                  growth_threshold: float = 1.5,
                  bounded_threshold: float = 2.0,
                  budget: int = 200_000) -> ScanResult:
    """Estimate Holder constants at several exponents across a family of
    curves of increasing construction depth, and classify each exponent.

    diverging: every consecutive ratio grows by at least growth_threshold.
    bounded:   max/min of the estimates stays within bounded_threshold.
    """
    if len(curves) < 3:
        raise InsufficientDepths("an exponent scan needs at least 3 depths")
    exponents = [float(a) for a in exponents]
    estimates = {}
    verdicts = {}
    for a in exponents:
        vals = [holder_constant_estimate(c, 1.0 / a, budget=budget)
                for c in curves]
        estimates[a] = vals
        pos = [v for v in vals if v > 0]
        if len(pos) < len(vals):
            verdicts[a] = "inconclusive"
            continue
        growth = [v2 / v1 for v1, v2 in zip(vals, vals[1:])]
        if all(g >= growth_threshold for g in growth):
            verdicts[a] = "diverging"
        elif max(vals) / min(vals) <= bounded_threshold:
            verdicts[a] = "bounded"
        else:
            verdicts[a] = "inconclusive"
    bounded = [a for a in exponents if verdicts[a] == "bounded"]
    return ScanResult(exponents, estimates, verdicts,
                      min(bounded) if bounded else None)


def box_counting_dimension(points, scales, cover_eps: float = 0.0):
    """Box-counting dimension estimate of a point set: least-squares slope
    of log(box count) against log(1/scale).

    Refuses scales finer than 10x the certified resolution of the input
    cover, where counts would measure the cover rather than the set.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    scales = sorted(float(s) for s in scales)
    if len(scales) < 2:
        raise ValidationError("need at least two scales")
    if scales[0] <= 0:
        raise ValidationError("scales must be positive")
    if cover_eps > 0 and scales[0] < 10.0 * cover_eps:
        raise ScalesBelowResolution(
            f"smallest scale {scales[0]} is below 10x the cover resolution "
            f"{cover_eps}")
    counts = []
    for sc in scales:
        cells = np.floor(points / sc)
        counts.append(len(np.unique(cells, axis=0)))
    slope = np.polyfit(np.log(1.0 / np.asarray(scales)),
                       np.log(np.asarray(counts, dtype=float)), 1)[0]
    return float(slope), dict(zip(scales, counts))
