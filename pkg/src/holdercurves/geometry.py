"""Attractor covers, cylinder adjacency oracles, connectedness, Hausdorff
distance.

The attractor K of an IFS satisfies K = union_i phi_i(K).  A cover at scale
delta places one representative point phi_w(base) in each cylinder of the
word cut at delta; every point of K is then within delta * diam_bound of a
representative, which is the cover's certified error.

Cylinder adjacency ("do K_w and K_u intersect?") is answered either

* approximately: compare the point clouds phi_w(C_q) and phi_u(C_q) for a
  fixed depth-q cover C_q of K.  A "not adjacent" answer is certified (the
  clouds are farther apart than the combined cover errors), while an
  "adjacent" answer may be a false positive at very small gaps; or

* exactly, for gallery systems whose cylinder geometry is rational: the
  Sierpinski gasket (cells meet iff they share a triangle vertex), arcs
  whose cylinders are consecutive in arc order (cells meet iff their address
  intervals touch), and grid carpets (see carpets.CarpetOracle).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import ValidationError
from .ifs import IFSSystem, Word, word_cut
from .metrics import Metric

# ---------------------------------------------------------------------------
# covers


@dataclass
class AttractorCover:
    delta: float
    words: list[Word]
    points: np.ndarray  # (m, n)
    eps: float          # certified: every attractor point is within eps of a row


def attractor_cover(system: IFSSystem, delta: float,
                    budget: int = 5_000_000) -> AttractorCover:
    """One representative point per cylinder of the cut at delta."""
    words = word_cut(system, delta, budget=budget)
    base = system.base_point
    pts = np.array([system.apply_word(w.letters, base) for w in words])
    return AttractorCover(delta, words, pts, delta * system.diam_bound)


# ---------------------------------------------------------------------------
# Hausdorff distance between finite point sets


def _directed_hausdorff_euclid(P, Q) -> float:
    tree = cKDTree(Q)
    d, _ = tree.query(P, k=1)
    return float(np.max(d))


def _directed_hausdorff_snow(P, Q, metric: Metric) -> float:
    # On点 sets with coordinate spreads <= 1, each snowflake term
    # |t|^(2e) >= t^2, so snowflake distance >= Euclidean distance.  That
    # turns a Euclidean KD-tree into a pruning device for exact snowflake
    # nearest neighbours.
    spread = max(np.ptp(P, axis=0).max(initial=0.0),
                 np.ptp(Q, axis=0).max(initial=0.0))
    if spread > 1.0 + 1e-12:
        # brute force in chunks
        best = 0.0
        for i in range(0, len(P), 256):
            chunk = P[i:i + 256]
            d = metric.dist(chunk[:, None, :], Q[None, :, :])
            best = max(best, float(np.max(np.min(d, axis=1))))
        return best
    tree = cKDTree(Q)
    k = min(8, len(Q))
    _, idx = tree.query(P, k=k)
    idx = np.atleast_2d(idx.T).T
    cand = np.min(metric.dist(P[:, None, :], Q[idx]), axis=1)  # upper bounds
    order = np.argsort(-cand)
    best = 0.0
    for j in order:
        if cand[j] <= best:
            break  # remaining upper bounds can't beat the verified sup
        ball = tree.query_ball_point(P[j], r=float(cand[j]) + 1e-15)
        exact = float(np.min(metric.dist(P[j], Q[ball]))) if ball else float(cand[j])
        best = max(best, exact)
    return best


def directed_hausdorff(P, Q, metric: Metric) -> float:
    """sup over p in P of the distance from p to the point set Q (exact)."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if len(P) == 0 or len(Q) == 0:
        raise ValidationError("directed Hausdorff needs nonempty point sets")
    if metric.is_euclidean:
        return _directed_hausdorff_euclid(P, Q)
    return _directed_hausdorff_snow(P, Q, metric)


def hausdorff_distance(P, Q, metric: Metric) -> float:
    """Exact Hausdorff distance between two finite point sets."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if len(P) == 0 or len(Q) == 0:
        raise ValidationError("Hausdorff distance needs nonempty point sets")
    if metric.is_euclidean:
        return max(_directed_hausdorff_euclid(P, Q),
                   _directed_hausdorff_euclid(Q, P))
    return max(_directed_hausdorff_snow(P, Q, metric),
               _directed_hausdorff_snow(Q, P, metric))


def _min_cross_distance(metric: Metric, P, Q) -> float:
    """Exact minimum metric distance between two finite point sets, using
    KD-trees to avoid the quadratic scan.

    For a snowflake metric the Euclidean tree still finds all candidates: a
    pair at snowflake distance below `best` has every coordinate gap below
    best^(1/e_i), hence Euclidean distance below the enlarged radius.
    """
    tp, tq = cKDTree(P), cKDTree(Q)
    d_euc, idx = tq.query(P, k=1)
    if metric.is_euclidean:
        return float(np.min(d_euc))
    best = float(np.min(metric.dist(P, Q[idx])))
    radius = float(np.sqrt(np.sum(
        np.maximum(best, 1e-300) ** (2.0 / np.asarray(metric.exponents)))))
    for i, js in enumerate(tp.query_ball_tree(tq, r=radius)):
        if js:
            best = min(best, float(np.min(metric.dist(P[i], Q[js]))))
    return best


# ---------------------------------------------------------------------------
# exact oracles for gallery systems


class GasketOracle:
    """Exact cylinder adjacency for the standard Sierpinski gasket with
    vertices (0,0), (1,0), (1/2, sqrt(3)/2).

    In the lattice basis u1=(1,0), u2=(1/2, sqrt3/2) every level-n cell is
    the simplex { a >= 0, b >= 0, a+b <= 1 } scaled by 2^-n and translated
    by an integer offset, so everything is decided in integer arithmetic.
    Two distinct cells intersect in at most one common lattice point, which
    always lies on the attractor.
    """

    _steps = {1: (0, 0), 2: (1, 0), 3: (0, 1)}

    def _cell(self, letters):
        """Integer offset of the cell at scale 2^len(letters)."""
        n = len(letters)
        a = b = 0
        for j, i in enumerate(letters):
            sa, sb = self._steps[i]
            a += sa << (n - j - 1)
            b += sb << (n - j - 1)
        return a, b, n

    def _shared_vertex(self, wl, ul):
        """Common lattice point at the joint scale, or None."""
        aw, bw, nw = self._cell(wl)
        au, bu, nu = self._cell(ul)
        N = max(nw, nu)
        aw <<= N - nw
        bw <<= N - nw
        au <<= N - nu
        bu <<= N - nu
        sw = 1 << (N - nw)
        su = 1 << (N - nu)
        # candidate points: vertices of the deeper (smaller) cell
        if sw <= su:
            cands = [(aw, bw), (aw + sw, bw), (aw, bw + sw)]
            oa, ob, side = au, bu, su
        else:
            cands = [(au, bu), (au + su, bu), (au, bu + su)]
            oa, ob, side = aw, bw, sw
        for a, b in cands:
            if a >= oa and b >= ob and (a - oa) + (b - ob) <= side:
                return a, b, N
        return None

    def adjacent(self, system, wl, ul) -> bool:
        return self._shared_vertex(tuple(wl), tuple(ul)) is not None

    def witness(self, system, wl, ul):
        v = self._shared_vertex(tuple(wl), tuple(ul))
        if v is None:
            return None
        a, b, N = v
        scale = 1.0 / (1 << N)
        return np.array([(a + 0.5 * b) * scale,
                         b * (np.sqrt(3.0) / 2.0) * scale])


class ArcOrderOracle:
    """Exact adjacency for self-similar arcs whose level-1 cylinders are
    consecutive along the arc (von Koch curve, polygonal snowflakes, the
    unit segment).  A word of length n addresses the parameter interval
    [idx, idx+1] / k^n; two cylinders meet iff the closed intervals meet.

    e0, e1 are the arc endpoints.  arc_positions optionally maps each letter
    (minus 1) to its position along the arc, for systems whose maps are not
    stored in arc order (normalization sorts by contraction ratio).
    """

    def __init__(self, k: int, e0, e1, arc_positions=None):
        self.k = int(k)
        self.e0 = np.asarray(e0, dtype=float)
        self.e1 = np.asarray(e1, dtype=float)
        self.arc_positions = (None if arc_positions is None
                              else [int(p) for p in arc_positions])

    def _digit(self, letter):
        if self.arc_positions is None:
            return letter - 1
        return self.arc_positions[letter - 1]

    def _interval(self, letters, N):
        idx = 0
        for i in letters:
            idx = idx * self.k + self._digit(i)
        idx *= self.k ** (N - len(letters))
        return idx, idx + self.k ** (N - len(letters))

    def adjacent(self, system, wl, ul) -> bool:
        wl, ul = tuple(wl), tuple(ul)
        N = max(len(wl), len(ul))
        a1, b1 = self._interval(wl, N)
        a2, b2 = self._interval(ul, N)
        return a1 <= b2 and a2 <= b1

    def witness(self, system, wl, ul):
        wl, ul = tuple(wl), tuple(ul)
        N = max(len(wl), len(ul))
        a1, b1 = self._interval(wl, N)
        a2, b2 = self._interval(ul, N)
        if a1 > b2 or a2 > b1:
            return None
        if b1 == a2:   # w immediately left of u
            return system.apply_word(wl, self.e1)
        if b2 == a1:   # u immediately left of w
            return system.apply_word(ul, self.e1)
        # nested/overlapping: return the deeper cylinder's left endpoint
        deeper = wl if len(wl) >= len(ul) else ul
        return system.apply_word(deeper, self.e0)


# ---------------------------------------------------------------------------
# the oracle front end


@dataclass
class AdjacencyOracle:
    """Dispatcher for cylinder adjacency queries.

    mode 'approximate' compares depth-q cover clouds; a negative answer is
    certified, a positive one is reliable down to gaps of the order of the
    cloud resolution.  mode 'exact' delegates to a per-system exact oracle.
    """
    mode: str | None = None
    refinement_depth: int = 4
    exact: object | None = None
    _cover_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if isinstance(self.exact, AdjacencyOracle):
            self.exact = self.exact.exact
        if self.mode is None:
            self.mode = "exact" if self.exact is not None else "approximate"
        if self.mode not in ("approximate", "exact"):
            raise ValidationError(f"unknown oracle mode {self.mode!r}")
        if self.mode == "exact" and self.exact is None:
            raise ValidationError("exact mode needs an exact oracle object")

    def _cover(self, system: IFSSystem) -> AttractorCover:
        key = id(system)
        if key not in self._cover_cache:
            delta = float(system.lips[-1]) ** self.refinement_depth
            self._cover_cache[key] = attractor_cover(system, delta)
        return self._cover_cache[key]

    def _cloud_gap(self, system, wl, ul):
        cov = self._cover(system)
        pw = system.apply_word(wl, cov.points)
        pu = system.apply_word(ul, cov.points)
        d = system.metric.dist(pw[:, None, :], pu[None, :, :])
        i, j = np.unravel_index(np.argmin(d), d.shape)
        return float(d[i, j]), pw[i], pu[j], cov.eps

    def adjacent(self, system: IFSSystem, w, u) -> bool:
        wl = w.letters if isinstance(w, Word) else tuple(w)
        ul = u.letters if isinstance(u, Word) else tuple(u)
        if self.mode == "exact":
            return bool(self.exact.adjacent(system, wl, ul))
        gap, _, _, eps = self._cloud_gap(system, wl, ul)
        lw = system.word_weight(wl)
        lu = system.word_weight(ul)
        return gap <= (lw + lu) * eps

    def witness(self, system: IFSSystem, w, u):
        """A point (numerically) in K_w intersect K_u, or None."""
        wl = w.letters if isinstance(w, Word) else tuple(w)
        ul = u.letters if isinstance(u, Word) else tuple(u)
        if self.mode == "exact":
            return self.exact.witness(system, wl, ul)
        gap, pw, pu, eps = self._cloud_gap(system, wl, ul)
        lw = system.word_weight(wl)
        lu = system.word_weight(ul)
        if gap > (lw + lu) * eps:
            return None
        return 0.5 * (pw + pu)


def cylinders_adjacent(system: IFSSystem, w, u,
                       oracle: AdjacencyOracle | None = None) -> bool:
    if oracle is None:
        oracle = AdjacencyOracle()
    return oracle.adjacent(system, w, u)


def intersection_witness(system: IFSSystem, w, u,
                         oracle: AdjacencyOracle | None = None):
    if oracle is None:
        oracle = AdjacencyOracle()
    return oracle.witness(system, w, u)


# ---------------------------------------------------------------------------
# connectedness


@dataclass
class ConnectednessResult:
    verdict: str            # "connected" | "connected-likely" | "disconnected"
    components: list[list[int]]  # first-level letters grouped by component
    gap: float | None = None     # certified lower bound on the distance
                                 # between components (disconnected only)

    @property
    def connected(self) -> bool:
        return self.verdict in ("connected", "connected-likely")


def connectedness_check(system: IFSSystem,
                        oracle: AdjacencyOracle | None = None) -> ConnectednessResult:
    """Connectivity of the first-level cylinder graph.

    The attractor is connected iff this graph is connected, so with an exact
    oracle the verdict is definitive.  With the approximate oracle a
    connected graph yields "connected-likely" (edges may be false positives)
    while a disconnected graph is certified "disconnected", because every
    negative adjacency answer is certified.
    """
    if oracle is None:
        oracle = AdjacencyOracle()
    k = system.k
    adj = {i: set() for i in range(1, k + 1)}
    for i in range(1, k + 1):
        for j in range(i + 1, k + 1):
            if oracle.adjacent(system, (i,), (j,)):
                adj[i].add(j)
                adj[j].add(i)
    seen: set[int] = set()
    comps = []
    for i in range(1, k + 1):
        if i in seen:
            continue
        comp = []
        stack = [i]
        seen.add(i)
        while stack:
            v = stack.pop()
            comp.append(v)
            for nb in adj[v]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        comps.append(sorted(comp))
    if len(comps) > 1:
        # Certified gap: cover points approximate each first-level cylinder
        # to within L_i * eps, so the cross-component cloud distance minus
        # both resolutions is a true lower bound on the cylinder gap.
        cov = attractor_cover(system, float(system.lips[-1]) ** 4)
        clouds = []
        reso = []
        for comp in comps:
            clouds.append(np.concatenate(
                [system.apply(i, cov.points) for i in comp]))
            reso.append(max(float(system.lips[i - 1]) for i in comp)
                        * cov.eps)
        gap = np.inf
        for a in range(len(comps)):
            for b in range(a + 1, len(comps)):
                d = _min_cross_distance(system.metric, clouds[a], clouds[b])
                gap = min(gap, d - reso[a] - reso[b])
        return ConnectednessResult("disconnected", comps,
                                   gap=max(float(gap), 0.0))
    verdict = "connected" if oracle.mode == "exact" else "connected-likely"
    return ConnectednessResult(verdict, comps)
