"""Iterated function systems of affine contractions, words, and word cuts.

An IFS is a finite list of affine contractions phi_i(x) = A_i x + b_i on R^n,
measured in a chosen metric (Euclidean or coordinate snowflake).  Maps are
kept sorted by Lipschitz constant, ascending, so lips[0] is the smallest
contraction ratio and lips[-1] the largest.

Words are tuples of 1-based letters.  phi_w denotes the composition of the
maps named by the word, applied left letter outermost, and L_w the product
of the Lipschitz constants.  The empty word is the identity with L = 1.

A word cut at scale delta collects the words whose weight first drops below
delta:

    cut(delta) = { w : L_w < delta <= L_(w minus last letter) }

with cut(1) = {empty word} by convention.  Cuts partition the attractor into
cylinders of comparable size and are the basic discretization device used by
every curve construction in this package.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (CutTooFine, EmptyAfterNormalize, NoAncestor,
                     ValidationError)
from .metrics import Metric

Letters = tuple  # tuple of 1-based ints

_LIP_SAMPLES = 64


def _lipschitz_constant(A: np.ndarray, metric: Metric, declared=None) -> float:
    """Lipschitz constant of x -> A x under the metric.

    Euclidean: the largest singular value (exact).  Snowflake with diagonal
    A: max_i |a_i|^(e_i) (exact).  Snowflake with non-diagonal A: fall back
    on the declared value, checked against a sampled lower bound.
    """
    if metric.is_euclidean:
        return float(np.linalg.svd(A, compute_uv=False)[0])
    diag = np.diag(np.diag(A))
    if np.allclose(A, diag, atol=0.0):
        return float(np.max(np.abs(np.diag(A)) ** metric.exponents))
    if declared is None:
        raise ValidationError(
            "non-diagonal linear part under a snowflake metric needs a "
            "declared Lipschitz constant")
    rng = np.random.default_rng(12345)
    x = rng.uniform(-1, 1, size=(_LIP_SAMPLES, metric.dim))
    y = rng.uniform(-1, 1, size=(_LIP_SAMPLES, metric.dim))
    num = metric.dist(x @ A.T, y @ A.T)
    den = metric.dist(x, y)
    ok = den > 0
    lower = float(np.max(num[ok] / den[ok]))
    if lower > declared * (1 + 1e-10):
        raise ValidationError(
            f"declared Lipschitz constant {declared} below sampled lower "
            f"bound {lower}")
    return float(declared)


@dataclass(frozen=True)
class Word:
    """A word over the alphabet {1..k} with its cached weight L_w."""
    letters: Letters
    weight: float

    def __len__(self):
        return len(self.letters)


class IFSSystem:
    """A normalized iterated function system.

    matrices: (k, n, n) array; offsets: (k, n) array; maps sorted by
    Lipschitz constant ascending (stable).
    """

    def __init__(self, matrices, offsets, metric: Metric | None = None,
                 declared_lips=None):
        matrices = np.asarray(matrices, dtype=float)
        offsets = np.asarray(offsets, dtype=float)
        if matrices.ndim != 3 or matrices.shape[1] != matrices.shape[2]:
            raise ValidationError("matrices must have shape (k, n, n)")
        if offsets.shape != matrices.shape[:2]:
            raise ValidationError("offsets must have shape (k, n)")
        k, n = offsets.shape
        if metric is None:
            metric = Metric(n)
        if metric.dim != n:
            raise ValidationError("metric dimension does not match maps")

        lips = []
        keep = []
        for i in range(k):
            declared = None if declared_lips is None else declared_lips[i]
            lip = _lipschitz_constant(matrices[i], metric, declared)
            if lip <= 0.0 or lip >= 1.0:
                warnings.warn(
                    f"dropping map {i}: Lipschitz constant {lip} is not in (0,1)")
                continue
            keep.append(i)
            lips.append(lip)
        if not keep:
            raise EmptyAfterNormalize("no contractions left after validation")

        # stable sort; quantize the key so maps with equal contraction
        # ratios (up to float noise from the SVD) keep their input order
        order = sorted(range(len(keep)), key=lambda j: round(lips[j], 12))
        idx = [keep[j] for j in order]
        self.matrices = matrices[idx]
        self.offsets = offsets[idx]
        self.lips = np.array([lips[j] for j in order])
        self.metric = metric
        self.k = len(idx)
        self.dim = n

    # --- basic map algebra -------------------------------------------------

    def fixed_point(self, i: int) -> np.ndarray:
        """Fixed point of map i (1-based)."""
        A = self.matrices[i - 1]
        b = self.offsets[i - 1]
        return np.linalg.solve(np.eye(self.dim) - A, b)

    @property
    def fixed_points(self) -> np.ndarray:
        return np.array([self.fixed_point(i) for i in range(1, self.k + 1)])

    @property
    def base_point(self) -> np.ndarray:
        """Fixed point of the first (most contractive) map; lies on the
        attractor and serves as the representative point for covers."""
        return self.fixed_point(1)

    @property
    def diam_bound(self) -> float:
        """Upper bound for the attractor diameter: the diameter of the fixed
        point set divided by (1 - max Lipschitz constant)."""
        if self.k == 1:
            return 0.0
        d = self.metric.diam(self.fixed_points)
        return d / (1.0 - float(self.lips[-1]))

    def apply(self, i: int, pts):
        """phi_i applied to a point or an (m, n) array of points."""
        pts = np.asarray(pts, dtype=float)
        return pts @ self.matrices[i - 1].T + self.offsets[i - 1]

    def word_affine(self, letters: Letters):
        """The affine map (A, b) of phi_w, letters composed left-outermost."""
        A = np.eye(self.dim)
        b = np.zeros(self.dim)
        for i in letters:
            b = A @ self.offsets[i - 1] + b
            A = A @ self.matrices[i - 1]
        return A, b

    def apply_word(self, letters: Letters, pts):
        A, b = self.word_affine(letters)
        pts = np.asarray(pts, dtype=float)
        return pts @ A.T + b

    def word_weight(self, letters: Letters) -> float:
        w = 1.0
        for i in letters:
            w *= self.lips[i - 1]
        return w

    def word(self, letters) -> Word:
        letters = tuple(int(i) for i in letters)
        return Word(letters, self.word_weight(letters))

    @property
    def uniform(self) -> bool:
        """True when all maps share the same Lipschitz constant."""
        return bool(np.all(self.lips == self.lips[0]))

    def __repr__(self):
        return (f"IFSSystem(k={self.k}, dim={self.dim}, "
                f"lips={np.round(self.lips, 6).tolist()}, {self.metric})")


def similarity_dimension(system: IFSSystem, tol: float = 1e-14) -> float:
    """The unique s >= 0 with sum_i L_i^s = 1, by bracketed bisection.

    A single-map system has no positive solution; returns 0.0 with a warning.
    """
    if system.k == 1:
        warnings.warn("single-map system: similarity dimension reported as 0")
        return 0.0
    lips = system.lips
    lo = 0.0
    hi = np.log(system.k) / np.log(1.0 / lips[-1]) + 1.0
    # f(s) = sum L_i^s - 1 is strictly decreasing, f(lo) = k-1 > 0, f(hi) < 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.sum(lips ** mid) - 1.0 > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


DEFAULT_CUT_BUDGET = 5_000_000


def word_cut(system: IFSSystem, delta: float, root: Letters = (),
             budget: int = DEFAULT_CUT_BUDGET) -> list[Word]:
    """All words extending `root` whose weight first drops below delta,
    in lexicographic order.

    Returns [root] itself when L_root < delta already (in particular
    cut(1.0) from the empty root is [empty word]).
    """
    if not (0.0 < delta <= 1.0):
        raise ValidationError("delta must lie in (0, 1]")
    root = tuple(int(i) for i in root)
    w_root = system.word_weight(root)
    if w_root < delta:
        return [Word(root, w_root)]

    s = similarity_dimension(system)
    # Cardinality upper bound L_1^-s (L_root/delta)^s, used as a budget guard.
    predicted = (system.lips[0] ** (-s)) * (w_root / delta) ** s
    if predicted > budget:
        raise CutTooFine(
            f"cut at delta={delta} predicted to hold ~{predicted:.3g} words, "
            f"over the budget of {budget}")

    lips = system.lips
    out: list[Word] = []
    stack = [(root, w_root)]
    while stack:
        letters, weight = stack.pop()
        # push children in reverse so the traversal is lexicographic
        for i in range(system.k, 0, -1):
            cw = weight * lips[i - 1]
            child = letters + (i,)
            if cw < delta:
                out.append(Word(child, cw))
            else:
                stack.append((child, cw))
    # stack-based DFS emits children of a node in order, but interleaves
    # across nodes; sort lexicographically for a deterministic contract
    out.sort(key=lambda w: w.letters)
    return out


def ancestor_in_cut(system: IFSSystem, letters: Letters, delta: float) -> Word:
    """The unique prefix of `letters` that belongs to the cut at delta."""
    if not (0.0 < delta <= 1.0):
        raise ValidationError("delta must lie in (0, 1]")
    if delta == 1.0:
        return Word((), 1.0)
    weight = 1.0
    for j, i in enumerate(letters):
        weight *= system.lips[i - 1]
        if weight < delta:
            return Word(tuple(letters[:j + 1]), weight)
    raise NoAncestor(
        f"word {letters} has weight {weight} >= delta={delta}; no prefix "
        "lies in the cut")


def cut_mass(system: IFSSystem, cut: list[Word], s: float) -> float:
    """sum over the cut of L_w^s; equals L_root^s when s is the similarity
    dimension."""
    return float(sum(w.weight ** s for w in cut))
