"""Holder curve constructions on connected self-similar sets.

Two constructions live here.

holder_path builds a (1/s)-Holder path between two attractor points by
stagewise refinement: at stage m the domain [0, 1] is partitioned into
intervals, each assigned a cylinder word w from the cut at r^m (r = smallest
Lipschitz constant), with the interval at least L_w^s long and its endpoint
values on K_w.  Refining an interval chains through the sub-cut at r^(m+1)
between the two endpoint values, placing an intersection witness of
consecutive cylinders at each new breakpoint.  Consecutive stages differ by
less than 3 r^m in the sup metric, so the stages converge geometrically.

parameterize builds a closed alpha-root Holder curve through the *whole*
attractor for any exponent alpha above the similarity dimension, by walking
the cylinder tree: each tree node w owns a parameter interval of mass
M_w = 2 * sum over descendant cut levels of L_parent^alpha, spent on paired
in/out edge intervals of length L_w^alpha around each child interval.  Edge
intervals carry a Holder path from the node anchor to the child anchor,
precomposed with t -> t^(s/alpha) so each edge is a Holder-1 homeomorphism
away from exponent s.  Anchors are q_w = phi_w(q) with q the fixed point of
the first map.  Below the requested depth the curve plateaus at the anchor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (AlphaTooSmall, ConstructionError, NoChain,
                     ValidationError)
from .geometry import AdjacencyOracle, ArcOrderOracle
from .ifs import IFSSystem, Word, similarity_dimension, word_cut
from .curves import SampledCurve


def holder_limit_bound(alpha: float, beta: float, xi1: float, xi2: float,
                       M: float) -> float:
    """Holder constant surviving a uniform limit of Holder-alpha maps.

    For maps f_m with Holder constants at most alpha on scales >= xi1^m,
    sup-distance steps at most beta * xi2^m between stages, and domain/step
    comparability constant M, the limit is Holder with constant at most

        H = (alpha/xi1) max(1, M) + (2 beta / (xi1 (1 - xi2))) max(1, 1/M).
    """
    if not (0 < xi1 < 1 and 0 < xi2 < 1):
        raise ValidationError("xi1 and xi2 must lie in (0, 1)")
    if alpha <= 0 or beta < 0 or M <= 0:
        raise ValidationError("alpha and M must be positive, beta nonnegative")
    return (alpha / xi1) * max(1.0, M) \
        + (2.0 * beta / (xi1 * (1.0 - xi2))) * max(1.0, 1.0 / M)


# ---------------------------------------------------------------------------
# chains of adjacent cylinders


def _member_candidates(system, cut, point, oracle, tol=1e-9):
    """Cut words whose cylinder contains the point (within the resolution of
    the oracle's refinement cover), closest first."""
    coarse = []
    base = system.base_point
    bound = system.diam_bound
    for w in cut:
        rep = system.apply_word(w.letters, base)
        d = float(system.metric.dist(point, rep))
        if d <= w.weight * bound + tol:
            coarse.append(w)
    # refine: the point must come within the certified cover error of the
    # cylinder's own depth-q cover cloud
    cov = oracle._cover(system)
    out = []
    for w in coarse:
        cloud = system.apply_word(w.letters, cov.points)
        d = float(np.min(system.metric.dist(point, cloud)))
        if d <= w.weight * cov.eps + tol:
            out.append((d, w))
    out.sort(key=lambda t: (t[0], t[1].letters))
    if not out:
        return []
    # the cover cloud resolves each cylinder only to about weight * eps, so a
    # boundary point can appear "inside" a neighbouring cylinder as well; keep
    # only candidates essentially tied with the closest match
    best = out[0][0]
    return [w for d, w in out if d <= best + tol]


def chain(system: IFSSystem, x, y, delta: float,
          oracle: AdjacencyOracle | None = None,
          root=()) -> list[Word]:
    """A repetition-free chain of pairwise-adjacent cut cylinders leading
    from a cylinder containing x to one containing y, by breadth-first
    search over the cut at delta (restricted below `root`)."""
    if oracle is None:
        oracle = AdjacencyOracle()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    cut = word_cut(system, delta, root=root)
    if len(cut) == 1:
        return list(cut)
    starts = _member_candidates(system, cut, x, oracle)
    targets = _member_candidates(system, cut, y, oracle)
    if not starts or not targets:
        raise NoChain("an endpoint lies in no cut cylinder (cover tolerance)")
    target_set = {w.letters for w in targets}

    # adjacency graph of the cut (cuts here are small: one refinement level)
    n = len(cut)
    adj = [[] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if oracle.adjacent(system, cut[i], cut[j]):
                adj[i].append(j)
                adj[j].append(i)
    index = {w.letters: i for i, w in enumerate(cut)}

    for start in starts:
        s0 = index[start.letters]
        parent = {s0: None}
        queue = [s0]
        found = None
        while queue:
            nxt = []
            for v in queue:
                if cut[v].letters in target_set:
                    found = v
                    break
                for nb in adj[v]:
                    if nb not in parent:
                        parent[nb] = v
                        nxt.append(nb)
            if found is not None:
                break
            queue = nxt
        if found is not None:
            path = []
            v = found
            while v is not None:
                path.append(cut[v])
                v = parent[v]
            return path[::-1]
    raise NoChain(f"no chain at delta={delta} joins the two points")


# ---------------------------------------------------------------------------
# Holder paths between two attractor points


@dataclass
class _Interval:
    a: float
    b: float
    letters: tuple
    weight: float
    va: np.ndarray  # value at a, lies on the cylinder
    vb: np.ndarray  # value at b


def _stage_curve(intervals, metric) -> SampledCurve:
    params = [intervals[0].a]
    points = [intervals[0].va]
    for iv in intervals:
        params.append(iv.b)
        points.append(iv.vb)
    return SampledCurve(np.array(params), np.array(points), metric)


def _is_arc_oracle(oracle):
    return oracle is not None and isinstance(oracle.exact, ArcOrderOracle)


def _refine(system, intervals, delta, oracle, s):
    """One refinement stage: split every interval along a chain through its
    sub-cut at delta."""
    arc = _is_arc_oracle(oracle)
    out = []
    for iv in intervals:
        sub = word_cut(system, delta, root=iv.letters)
        if len(sub) == 1 and sub[0].letters == iv.letters:
            out.append(iv)
            continue
        if arc:
            # cylinders of an arc are consecutive; a chain between the two
            # arc endpoints of K_w is simply all children in arc order (which
            # need not match lexicographic order when the maps were re-sorted
            # by contraction ratio)
            digit = oracle.exact._digit
            sub = sorted(sub, key=lambda u: tuple(digit(i) for i in u.letters))
            e0 = system.apply_word(sub[0].letters, oracle.exact.e0)
            e1 = system.apply_word(sub[-1].letters, oracle.exact.e1)
            if (np.allclose(iv.va, e0, atol=1e-9)
                    and np.allclose(iv.vb, e1, atol=1e-9)):
                links = sub
            else:
                links = chain(system, iv.va, iv.vb, delta, oracle,
                              root=iv.letters)
        else:
            links = chain(system, iv.va, iv.vb, delta, oracle,
                          root=iv.letters)
        values = [iv.va]
        for u, unext in zip(links, links[1:]):
            wit = oracle.witness(system, u, unext)
            if wit is None:
                raise ConstructionError(
                    f"chain cylinders {u.letters} and {unext.letters} "
                    "report no intersection witness")
            values.append(np.asarray(wit, dtype=float))
        values.append(iv.vb)

        # interval budget: child i gets L^s, the slack goes to the last one
        total = iv.b - iv.a
        lens = [u.weight ** s for u in links]
        lens[-1] = total - sum(lens[:-1])
        if lens[-1] <= 0:
            raise ConstructionError("interval budget exhausted during refinement")
        a = iv.a
        for u, ln, va, vb in zip(links, lens, values, values[1:]):
            out.append(_Interval(a, a + ln, u.letters, u.weight, va, vb))
            a += ln
        out[-1].b = iv.b  # guard against float drift
    return out


def holder_path_stages(system: IFSSystem, x, y, m_max: int,
                       oracle: AdjacencyOracle | None = None) -> list[SampledCurve]:
    """All stage curves f_1 .. f_m_max of the Holder path construction."""
    if oracle is None:
        oracle = AdjacencyOracle()
    if m_max < 1:
        raise ValidationError("m_max must be >= 1")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = similarity_dimension(system)
    r = float(system.lips[0])
    intervals = [_Interval(0.0, 1.0, (), 1.0, x, y)]
    stages = []
    for m in range(1, m_max + 1):
        intervals = _refine(system, intervals, r ** m, oracle, s)
        stages.append(_stage_curve(intervals, system.metric))
    return stages


def holder_path(system: IFSSystem, x, y, m_max: int,
                oracle: AdjacencyOracle | None = None) -> SampledCurve:
    """A (1/s)-Holder path on the attractor from x to y, refined to stage
    m_max."""
    return holder_path_stages(system, x, y, m_max, oracle)[-1]


# ---------------------------------------------------------------------------
# whole-attractor parameterization via the cylinder tree


def _relative_cut(system, delta):
    """Cut of relative words at delta in (lips[0], 1]; delta == 1 means the
    single letters (the cut convention at exactly 1 does not apply here)."""
    if delta >= 1.0:
        return [Word((i,), float(system.lips[i - 1]))
                for i in range(1, system.k + 1)]
    return word_cut(system, delta)


def _edge_mass_table(system, alpha, r):
    """Solve for G(t) = M_w / L_w^alpha over the reachable set of relative
    thresholds t = r^(m+1) / L_w.

    M_w is the total parameter mass of the subtree at w:
        M_w = 2 * card(children) * L_w^alpha + sum over children of M_child
    which closes over finitely many t values (rounded) for gallery systems;
    the resulting linear system is a contraction for alpha above the
    similarity dimension and is solved directly.
    """
    def key(t):
        return round(min(t, 1.0), 12)

    t0 = key(r)
    keys = [t0]
    seen = {t0}
    rows = {}
    i = 0
    while i < len(keys):
        t = keys[i]
        i += 1
        cut = _relative_cut(system, t)
        row = []
        for v in cut:
            tn = key(r * t / v.weight)
            if tn not in seen:
                if len(seen) >= 20000:
                    raise ConstructionError(
                        "edge mass recursion does not close over a "
                        "manageable set of scales")
                seen.add(tn)
                keys.append(tn)
            row.append((v.weight, tn))
        rows[t] = row
    idx = {t: j for j, t in enumerate(keys)}
    n = len(keys)
    A = np.zeros((n, n))
    b = np.zeros(n)
    for t, row in rows.items():
        j = idx[t]
        b[j] = 2.0 * len(row)
        for weight, tn in row:
            A[j, idx[tn]] += weight ** alpha
    G = np.linalg.solve(np.eye(n) - A, b)
    if np.any(G <= 0):
        raise ConstructionError("edge mass solve produced nonpositive masses")
    return {t: float(g) for t, g in zip(keys, G)}, key


def parameterize(system: IFSSystem, alpha: float, N: int,
                 oracle: AdjacencyOracle | None = None,
                 edge_depth: int = 2, edge_samples: int = 32) -> SampledCurve:
    """A closed curve through the whole attractor, Holder with exponent
    1/alpha for any alpha above the similarity dimension, truncated at
    cylinder-tree depth N (cut levels of r = smallest Lipschitz constant).

    The returned curve starts and ends at the anchor q (fixed point of the
    most contractive map) and passes through every anchor q_w for w in the
    cuts at r^1 .. r^N exactly.
    """
    if oracle is None:
        oracle = AdjacencyOracle()
    s = similarity_dimension(system)
    if alpha <= s:
        raise AlphaTooSmall(
            f"alpha={alpha} must exceed the similarity dimension {s:.6f}")
    if N < 1:
        raise ValidationError("N must be >= 1")
    r = float(system.lips[0])
    q = system.base_point
    G, key = _edge_mass_table(system, alpha, r)

    # sample grid for one edge: psi(t) = t^(s/alpha) at dyadic nodes
    grid = (np.arange(edge_samples + 1) / edge_samples) ** (s / alpha)

    path_cache: dict[tuple, np.ndarray] = {}

    def edge_points(v_letters):
        """Holder path q -> phi_v(q) sampled along the psi grid."""
        if v_letters not in path_cache:
            target = system.apply_word(v_letters, q)
            g = holder_path(system, q, target, edge_depth, oracle)
            path_cache[v_letters] = g.evaluate(grid)
        return path_cache[v_letters]

    params: list[float] = [0.0]
    points: list[np.ndarray] = [q]

    def emit(t, p):
        params.append(float(t))
        points.append(p)

    def visit(letters, Aw, bw, weight, level, lo, mass):
        """Lay out the subtree of w on [lo, lo + mass]."""
        if level == N:
            emit(lo + mass, Aw @ q + bw)  # plateau at the anchor
            return
        t = key(r ** (level + 1) / weight)
        children = _relative_cut(system, min(t, 1.0))
        edge_len = weight ** alpha
        pos = lo
        for v in children:
            Av, bv = system.word_affine(v.letters)
            cw = weight * v.weight
            cmass = cw ** alpha * G[key(r ** (level + 2) / cw)]
            pts = edge_points(v.letters) @ Aw.T + bw
            # edge in
            for j in range(1, edge_samples + 1):
                emit(pos + edge_len * j / edge_samples, pts[j])
            pos += edge_len
            # child subtree
            visit(letters + v.letters, Aw @ Av, Aw @ bv + bw, cw,
                  level + 1, pos, cmass)
            pos += cmass
            # edge out (reversed)
            for j in range(1, edge_samples + 1):
                emit(pos + edge_len * j / edge_samples,
                     pts[edge_samples - j])
            pos += edge_len

    total = G[key(r)]
    visit((), np.eye(system.dim), np.zeros(system.dim), 1.0, 0, 0.0, total)
    params_arr = np.array(params) / total  # normalize the domain to [0, 1]
    return SampledCurve(params_arr, np.array(points), system.metric)
