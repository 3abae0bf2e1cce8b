"""Self-similar arcs: branching detection, arc parameterization, polygonal
diamond snowflakes, and bounded turning estimates.

A connected self-similar set is an arc when every cylinder graph G_n (nodes:
level-n words, edges: intersecting cylinders) is a combinatorial path.  Then
exactly two letters have valence 1 in G_1, the arc endpoints are the nested
limits of the terminal cylinder addresses, and a Holder path between them
parameterizes the whole set injectively.

Diamond snowflakes are the polygonal source of such arcs: a chain of k
segments from (0,0) to (1,0), each carried by an affine similarity of the
base segment, with per-segment "diamond" neighbourhoods

    D_a(l) = { x : dist(x, l) <= a * min(|x - p|, |x - q|) }

(a rhombus around l with apex half-angle arcsin a) that are pairwise
disjoint except at shared segment endpoints.  Disjointness keeps cylinder
intersections to single points at every level, so the attractor is an arc
regardless of how large the similarity dimension is — it can exceed 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .curves import SampledCurve
from .errors import (ApertureTooLarge, BranchingInput, ConstructionError,
                     DiamondOverlap, SegmentEscapes, ValidationError)
from .geometry import AdjacencyOracle, ArcOrderOracle
from .ifs import IFSSystem
from .paths import holder_path_stages

# ---------------------------------------------------------------------------
# branching detection


@dataclass
class BranchingReport:
    branching: bool
    levels_checked: int
    end_letters: tuple | None      # the two valence-1 letters of G_1
    witness: tuple | None          # offending word pair when branching


def square_iterate(system: IFSSystem) -> IFSSystem:
    """The IFS of all two-letter compositions phi_i o phi_j."""
    mats, offs = [], []
    for i in range(1, system.k + 1):
        for j in range(1, system.k + 1):
            Ai, bi = system.matrices[i - 1], system.offsets[i - 1]
            Aj, bj = system.matrices[j - 1], system.offsets[j - 1]
            mats.append(Ai @ Aj)
            offs.append(Ai @ bj + bi)
    return IFSSystem(mats, offs, system.metric)


def detect_branching(system: IFSSystem, oracle: AdjacencyOracle | None = None,
                     n_max: int = 3) -> BranchingReport:
    """Check that the cylinder graphs G_1..G_n_max are combinatorial paths.

    Branching means some cylinder meets three or more same-level cylinders
    (or a cycle closes up); a non-branching connected system is an arc.
    """
    if oracle is None:
        oracle = AdjacencyOracle()
    end_letters = None
    first_fail = None
    for n in range(1, n_max + 1):
        words = [()]
        for _ in range(n):
            words = [w + (i,) for w in words for i in range(1, system.k + 1)]
        deg = {w: 0 for w in words}
        edges = 0
        for a in range(len(words)):
            for b in range(a + 1, len(words)):
                if oracle.adjacent(system, words[a], words[b]):
                    deg[words[a]] += 1
                    deg[words[b]] += 1
                    edges += 1
                    if deg[words[a]] > 2 or deg[words[b]] > 2:
                        return BranchingReport(True, first_fail or n, None,
                                               (words[a], words[b]))
        ends = [w for w in words if deg[w] == 1]
        if len(ends) != 2 or edges != len(words) - 1:
            # not a path at this level (a cycle, say); keep scanning one
            # more level for a valence-3 witness pair before giving up
            if first_fail is not None:
                return BranchingReport(True, first_fail, None, None)
            first_fail = n
            continue
        if first_fail is not None:
            return BranchingReport(True, first_fail, None, None)
        if n == 1:
            end_letters = (ends[0][0], ends[1][0])
    if first_fail is not None:
        return BranchingReport(True, first_fail, None, None)
    return BranchingReport(False, n_max, end_letters, None)


def _terminal_point(system, oracle, i0, j0, start_letter,
                    weight_floor=1e-9) -> np.ndarray:
    """Nested-cylinder limit of the terminal word growing from start_letter:
    at each level extend by whichever of the two end letters keeps valence 1
    in the next cylinder graph, until the cylinder weight drops below the
    floor."""
    w = (start_letter,)
    nb = None  # the unique same-level neighbour of the terminal cylinder
    # level-1 neighbour
    for i in range(1, system.k + 1):
        if i != start_letter and oracle.adjacent(system, w, (i,)):
            nb = (i,)
    weight = system.word_weight(w)
    while weight >= weight_floor:
        pool = [w + (i,) for i in range(1, system.k + 1)]
        if nb is not None:
            pool += [nb + (i,) for i in range(1, system.k + 1)]
        chosen = None
        for cand_letter in sorted({i0, j0}):
            cand = w + (cand_letter,)
            nbs = [u for u in pool
                   if u != cand and oracle.adjacent(system, cand, u)]
            if len(nbs) == 1:
                chosen = (cand, nbs[0])
                break
        if chosen is None:
            raise ConstructionError(
                f"no valence-1 extension of terminal word {w}")
        w, nb = chosen
        weight = system.word_weight(w)
    return system.apply_word(w, system.base_point)


def arc_endpoints(system: IFSSystem,
                  oracle: AdjacencyOracle | None = None) -> tuple:
    """The two endpoints of a non-branching connected attractor."""
    if oracle is None:
        oracle = AdjacencyOracle()
    report = detect_branching(system, oracle)
    if report.branching:
        raise BranchingInput(f"system branches: witness {report.witness}")
    i0, j0 = report.end_letters
    v0 = _terminal_point(system, oracle, i0, j0, i0)
    v1 = _terminal_point(system, oracle, i0, j0, j0)
    return v0, v1


def arc_parameterize(system: IFSSystem, depth: int,
                     oracle: AdjacencyOracle | None = None) -> SampledCurve:
    """Holder parameterization of a non-branching connected attractor from
    one arc endpoint to the other.  Systems with fewer than four maps are
    replaced by their square iterate first (the valence analysis needs
    enough letters to separate ends from interiors)."""
    if oracle is None:
        oracle = AdjacencyOracle()
    if system.k < 4:
        system = square_iterate(system)
        if isinstance(oracle.exact, ArcOrderOracle):
            old = oracle.exact
            k2 = system.k
            perm = None
            if old.arc_positions is not None:
                p = old.arc_positions
                k = len(p)
                perm = [p[a] * k + p[b] for a in range(k) for b in range(k)]
            oracle = AdjacencyOracle(
                mode="exact",
                exact=ArcOrderOracle(k2, old.e0, old.e1, arc_positions=perm))
    v0, v1 = arc_endpoints(system, oracle)
    stages = holder_path_stages(system, v0, v1, depth, oracle)
    return stages[-1]


def discrete_injectivity(curve: SampledCurve, tol: float = 1e-9) -> bool:
    """True when no breakpoint value repeats except at consecutive
    parameters (shared interval endpoints)."""
    pts = curve.points
    order = np.lexsort(pts.T[::-1])
    sorted_pts = pts[order]
    dup = np.all(np.abs(np.diff(sorted_pts, axis=0)) <= tol, axis=1)
    for j in np.nonzero(dup)[0]:
        if abs(int(order[j]) - int(order[j + 1])) != 1:
            return False
    return True


# ---------------------------------------------------------------------------
# diamond snowflakes


def _frac_up(x: float, digits: int = 15) -> Fraction:
    f = Fraction(x).limit_denominator(10 ** digits)
    return f if f >= x else f + Fraction(1, 10 ** digits)


def _sat_disjoint(poly1, poly2) -> bool:
    """Strict separation of two convex polygons (exact rational SAT)."""
    for poly_a, poly_b in ((poly1, poly2), (poly2, poly1)):
        n = len(poly_a)
        for i in range(n):
            ax, ay = poly_a[i]
            bx, by = poly_a[(i + 1) % n]
            nx, ny = ay - by, bx - ax  # outward or inward; sign handled below
            pa = [nx * x + ny * y for x, y in poly_a]
            pb = [nx * x + ny * y for x, y in poly_b]
            if max(pa) < min(pb) or max(pb) < min(pa):
                return True
    return False


@dataclass
class DiamondSpec:
    """A polygonal snowflake generator: the chain of segments
    (vertices[0]=(0,0)) -> ... -> (vertices[k]=(1,0)) with one diamond
    aperture per segment."""
    vertices: np.ndarray  # (k+1, 2)
    apertures: np.ndarray  # (k,), each in (0, 1/2)

    def __init__(self, vertices, apertures):
        self.vertices = np.asarray(vertices, dtype=float)
        self.apertures = np.asarray(apertures, dtype=float)
        self.validate()

    @property
    def k(self) -> int:
        return len(self.vertices) - 1

    def segment(self, i: int):
        """(p_i, q_i) of segment i (1-based)."""
        return self.vertices[i - 1], self.vertices[i]

    def lengths(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.vertices, axis=0), axis=1)

    def validate(self):
        v = self.vertices
        a = self.apertures
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValidationError("need at least two segments in the plane")
        if len(a) != len(v) - 1:
            raise ValidationError("need one aperture per segment")
        if not (np.allclose(v[0], [0, 0]) and np.allclose(v[-1], [1, 0])):
            raise ValidationError("the chain must run from (0,0) to (1,0)")
        if np.any(a <= 0) or np.any(a >= 0.5):
            raise ApertureTooLarge("apertures must lie strictly in (0, 1/2)")
        lens = self.lengths()
        if np.any(lens <= 0) or np.any(lens >= 1):
            raise ValidationError("segment lengths must lie in (0, 1)")
        self._check_interior()
        self._check_segment_intersections()
        self._check_diamonds()

    def _check_interior(self):
        """Interior vertices must lie strictly inside the base diamond
        D_1/2 of the unit segment: 3 y^2 < min(x, 1-x)^2 with 0 < x < 1,
        checked in exact rational arithmetic."""
        for x, y in self.vertices[1:-1]:
            fx, fy = Fraction(x), Fraction(y)
            if not (0 < fx < 1 and 3 * fy * fy < min(fx, 1 - fx) ** 2):
                raise SegmentEscapes(
                    f"vertex ({x}, {y}) is not interior to the base diamond")

    def _check_segment_intersections(self):
        """Non-consecutive segments must be disjoint; consecutive ones share
        exactly their common vertex (exact rational arithmetic)."""
        segs = [tuple(map(Fraction, p)) + tuple(map(Fraction, q))
                for p, q in (self.segment(i) for i in range(1, self.k + 1))]

        def orient(ax, ay, bx, by, cx, cy):
            return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)

        def on_segment(ax, ay, bx, by, px, py):
            return (orient(ax, ay, bx, by, px, py) == 0
                    and min(ax, bx) <= px <= max(ax, bx)
                    and min(ay, by) <= py <= max(ay, by))

        def segments_cross(s, t):
            ax, ay, bx, by = s
            cx, cy, dx, dy = t
            d1 = orient(ax, ay, bx, by, cx, cy)
            d2 = orient(ax, ay, bx, by, dx, dy)
            d3 = orient(cx, cy, dx, dy, ax, ay)
            d4 = orient(cx, cy, dx, dy, bx, by)
            if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) \
                    and d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0:
                return True
            for (px, py), seg in (((cx, cy), s), ((dx, dy), s),
                                  ((ax, ay), t), ((bx, by), t)):
                if on_segment(seg[0], seg[1], seg[2], seg[3], px, py):
                    return True
            return False

        for i in range(len(segs)):
            for j in range(i + 1, len(segs)):
                if j == i + 1:
                    # consecutive: must meet exactly at the shared vertex,
                    # in particular they must not be collinear overlapping
                    shared = segs[i][2:4]
                    ax, ay, bx, by = segs[i]
                    cx, cy, dx, dy = segs[j]
                    if orient(ax, ay, bx, by, dx, dy) == 0 \
                            and on_segment(ax, ay, bx, by, dx, dy):
                        raise ValidationError(
                            f"segments {i + 1} and {j + 1} overlap")
                    if on_segment(cx, cy, dx, dy, ax, ay):
                        raise ValidationError(
                            f"segments {i + 1} and {j + 1} overlap")
                    continue
                if segments_cross(segs[i], segs[j]):
                    raise ValidationError(
                        f"non-consecutive segments {i + 1} and {j + 1} "
                        "intersect")

    def _rhombus(self, i: int, enlarged: bool = True):
        """Rational rhombus containing D_a(l_i): vertices p, m+c*n, q, m-c*n
        with c an upper rounding of |l| a / (2 sqrt(1-a^2))."""
        p, q = self.segment(i)
        a = float(self.apertures[i - 1])
        lam = a / (2.0 * np.sqrt(1.0 - a * a))
        lam_f = _frac_up(lam) if enlarged else Fraction(lam).limit_denominator(10 ** 15)
        px, py = Fraction(p[0]), Fraction(p[1])
        qx, qy = Fraction(q[0]), Fraction(q[1])
        mx, my = (px + qx) / 2, (py + qy) / 2
        dx, dy = qx - px, qy - py
        return [(px, py), (mx - lam_f * dy, my + lam_f * dx),
                (qx, qy), (mx + lam_f * dy, my - lam_f * dx)]

    def _check_diamonds(self):
        """Diamonds must be pairwise disjoint except for shared segment
        endpoints.  Non-consecutive pairs: exact SAT on outward-rounded
        rhombi.  Consecutive pairs: each rhombus lies in the cone of
        half-angle arcsin(a) at the shared vertex, so disjoint cones (apex
        aside) suffice."""
        k = self.k
        for i in range(1, k + 1):
            for j in range(i + 1, k + 1):
                if j == i + 1:
                    v = self.vertices[i]
                    u1 = self.vertices[i - 1] - v   # back along segment i
                    u2 = self.vertices[i + 1] - v   # forward along segment j
                    ang = np.arccos(np.clip(
                        np.dot(u1, u2)
                        / (np.linalg.norm(u1) * np.linalg.norm(u2)),
                        -1.0, 1.0))
                    lim = (np.arcsin(self.apertures[i - 1])
                           + np.arcsin(self.apertures[j - 1]))
                    if ang <= lim + 1e-9:
                        raise DiamondOverlap(
                            f"diamonds {i} and {j} overlap at the shared "
                            f"vertex (turn angle {ang:.6f} <= {lim:.6f})")
                    continue
                if not _sat_disjoint(self._rhombus(i), self._rhombus(j)):
                    raise DiamondOverlap(f"diamonds {i} and {j} intersect")


def snowflake_ifs(spec: DiamondSpec):
    """The IFS of the snowflake: phi_i maps the base diamond onto the
    diamond of segment i,

        phi_i(x, y) = p_i + x (q_i - p_i) + y (h_i / h_0) n_i

    with n_i the unit left normal of l_i and h the diamond apex height.
    The columns of the linear part are orthogonal with norms |l_i| and
    |l_i| * sqrt(3) a_i / sqrt(1 - a_i^2) < |l_i| (apertures below 1/2),
    so Lip phi_i = |l_i| exactly.

    Returns (system, oracle): the oracle knows the arc order of the maps
    (normalization may reorder them by contraction ratio).
    """
    k = spec.k
    h0 = 1.0 / (2.0 * np.sqrt(3.0))  # apex height of the base diamond
    mats, offs, lips = [], [], []
    for i in range(1, k + 1):
        p, q = spec.segment(i)
        u = q - p
        ln = float(np.linalg.norm(u))
        a = float(spec.apertures[i - 1])
        h = (ln / 2.0) * a / np.sqrt(1.0 - a * a)
        n = np.array([-u[1], u[0]]) / ln
        mats.append(np.column_stack([u, (h / h0) * n]))
        offs.append(p)
        lips.append(ln)
    system = IFSSystem(mats, offs)
    # recover the arc position of each (sorted) system letter
    order = sorted(range(k), key=lambda j: round(lips[j], 12))  # same sort
    arc_positions = [order[letter] for letter in range(k)]
    oracle = AdjacencyOracle(
        mode="exact",
        exact=ArcOrderOracle(k, (0.0, 0.0), (1.0, 0.0),
                             arc_positions=arc_positions))
    return system, oracle


# ---------------------------------------------------------------------------
# bounded turning


def bounded_turning_estimate(system: IFSSystem,
                             oracle: AdjacencyOracle | None = None,
                             depth: int = 4, budget: int = 100_000) -> float:
    """Empirical bounded-turning constant: over adjacent first-level
    cylinder pairs with intersection witness z, the largest
    max(d(x,z), d(y,z)) / d(x,y) with x, y drawn from depth covers of the
    two cylinders.  Growth of this estimate with depth flags arcs that wind
    unboundedly near a point."""
    if oracle is None:
        oracle = AdjacencyOracle()
    from .geometry import attractor_cover
    delta = float(system.lips[-1]) ** depth
    cov = attractor_cover(system, delta)
    best = 0.0
    for i in range(1, system.k + 1):
        for j in range(i + 1, system.k + 1):
            if not oracle.adjacent(system, (i,), (j,)):
                continue
            z = oracle.witness(system, (i,), (j,))
            if z is None:
                continue
            px = system.apply(i, cov.points)
            py = system.apply(j, cov.points)
            stride = max(1, int(np.ceil(len(px) * len(py) / budget)))
            sub = max(1, int(np.sqrt(stride)))
            px = px[::sub]
            py = py[::sub]
            dxz = system.metric.dist(px, z)[:, None]
            dyz = system.metric.dist(py, z)[None, :]
            dxy = system.metric.dist(px[:, None, :], py[None, :, :])
            ok = dxy > 1e-12
            if np.any(ok):
                ratio = np.maximum(dxz, dyz)[ok] / dxy[ok]
                best = max(best, float(np.max(ratio)))
    return best
