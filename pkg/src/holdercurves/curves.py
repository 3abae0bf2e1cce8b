"""Piecewise-linear sampled curves with CSV and SVG export."""

from __future__ import annotations

import io

import numpy as np

from .errors import ValidationError
from .metrics import Metric


class SampledCurve:
    """A curve known at finitely many parameters, interpolated linearly.

    params: increasing 1-d array; points: (m, n) array of values; metric:
    the metric of the ambient space (used by the estimators downstream).
    """

    def __init__(self, params, points, metric: Metric):
        params = np.asarray(params, dtype=float)
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if params.ndim != 1 or len(params) != len(points):
            raise ValidationError("params and points must have equal length")
        if len(params) < 2:
            raise ValidationError("a curve needs at least two samples")
        if np.any(np.diff(params) < 0):
            raise ValidationError("params must be nondecreasing")
        self.params = params
        self.points = points
        self.metric = metric

    @property
    def domain(self):
        return float(self.params[0]), float(self.params[-1])

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return len(self.params)

    def evaluate(self, t):
        """Linear interpolation at t (scalar or array)."""
        t = np.asarray(t, dtype=float)
        out = np.empty(t.shape + (self.dim,))
        for c in range(self.dim):
            out[..., c] = np.interp(t, self.params, self.points[:, c])
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ";".join(f"x{c + 1}" for c in range(self.dim))
        buf.write(f"t;{cols}\n")
        for t, p in zip(self.params, self.points):
            coords = ";".join(repr(float(v)) for v in p)
            buf.write(f"{float(t)!r};{coords}\n")
        return buf.getvalue()

    def to_svg(self, size: int = 1024) -> str:
        """Polyline rendering of the first two coordinates, 5% margin."""
        xy = self.points[:, :2] if self.dim >= 2 else np.column_stack(
            [self.params, self.points[:, 0]])
        lo = xy.min(axis=0)
        hi = xy.max(axis=0)
        span = float(max((hi - lo).max(), 1e-12))
        margin = 0.05 * size
        scale = (size - 2 * margin) / span
        pts = (xy - lo) * scale
        pts[:, 1] = (hi[1] - lo[1]) * scale - pts[:, 1]  # y up
        pts += margin
        coords = " ".join(f"{x:.3f},{y:.3f}" for x, y in pts)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" '
            f'viewBox="0 0 {size} {size}">\n'
            f'<polyline fill="none" stroke="black" stroke-width="1" '
            f'points="{coords}"/>\n</svg>\n')


def cover_points_csv(words, points) -> str:
    """CSV of an attractor cover: word;x1;...;xn rows."""
    buf = io.StringIO()
    dim = points.shape[1]
    cols = ";".join(f"x{c + 1}" for c in range(dim))
    buf.write(f"word;{cols}\n")
    for w, p in zip(words, points):
        addr = "".join(str(i) for i in w.letters)
        coords = ";".join(repr(float(v)) for v in p)
        buf.write(f"{addr};{coords}\n")
    return buf.getvalue()
