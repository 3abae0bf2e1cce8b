"""Metrics on R^n: the Euclidean metric and coordinate snowflake metrics.

A coordinate snowflake metric raises each coordinate difference to its own
exponent in (0, 1] before combining them in the usual l2 way:

    d(x, y) = (sum_i |x_i - y_i|^(2 e_i))^(1/2)

With all exponents equal to 1 this is the Euclidean metric.  Each term
|t|^e with e <= 1 is subadditive, so the triangle inequality follows from
Minkowski's inequality and this really is a metric.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError


class Metric:
    """Euclidean or coordinate-snowflake metric on R^n.

    exponents: None for Euclidean, else a sequence of per-coordinate
    exponents in (0, 1].
    """

    def __init__(self, dim: int, exponents=None):
        if dim < 1:
            raise ValidationError("metric dimension must be >= 1")
        self.dim = int(dim)
        if exponents is None:
            self.exponents = None
        else:
            e = np.asarray(exponents, dtype=float)
            if e.shape != (dim,):
                raise ValidationError("need one exponent per coordinate")
            if np.any(e <= 0) or np.any(e > 1):
                raise ValidationError("snowflake exponents must lie in (0, 1]")
            if np.allclose(e, 1.0):
                self.exponents = None
            else:
                self.exponents = e

    @property
    def is_euclidean(self) -> bool:
        return self.exponents is None

    def dist(self, x, y):
        """Distance between points (or arrays of points, broadcast on the
        leading axes; the last axis is the coordinate axis)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        d = np.abs(x - y)
        if self.exponents is None:
            return np.sqrt(np.sum(d * d, axis=-1))
        return np.sqrt(np.sum(d ** (2.0 * self.exponents), axis=-1))

    def dist_inf(self, x, y):
        """Sup-norm companion of the metric: max_i |x_i - y_i|^e_i.

        Comparable to dist() within a factor sqrt(dim); convenient when a
        bound is naturally stated per coordinate (e.g. on the unit cube this
        version gives the cube diameter exactly 1)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        d = np.abs(x - y)
        if self.exponents is None:
            return np.max(d, axis=-1)
        return np.max(d ** self.exponents, axis=-1)

    def pairwise_min(self, pts) -> float:
        """Smallest pairwise distance within a point set (brute force)."""
        pts = np.asarray(pts, dtype=float)
        n = len(pts)
        if n < 2:
            return np.inf
        best = np.inf
        for i in range(n - 1):
            best = min(best, float(np.min(self.dist(pts[i], pts[i + 1:]))))
        return best

    def diam(self, pts) -> float:
        """Diameter of a point set (exact, O(n^2) in chunks)."""
        pts = np.asarray(pts, dtype=float)
        n = len(pts)
        if n < 2:
            return 0.0
        best = 0.0
        for i in range(n - 1):
            best = max(best, float(np.max(self.dist(pts[i], pts[i + 1:]))))
        return best

    def __repr__(self):
        if self.is_euclidean:
            return f"Metric(euclidean, dim={self.dim})"
        return f"Metric(snowflake, dim={self.dim}, exponents={self.exponents.tolist()})"


def euclidean(dim: int) -> Metric:
    return Metric(dim)
