"""Space-filling tours of branching self-similar sets.

Pipeline: a separation witness (an interior point v with a protective radius
tau) induces hierarchical point nets V_1 c V_2 c ... on the attractor, one
point per cut cylinder.  Spanning trees of the cylinder-adjacency graph are
built level by level (per-cylinder trees plus one lifted edge per coarse
edge).  The tour of the finest tree is grown stage by stage: a double
traversal of the subtree spanning V_1 fixes the coarse order, then each
refinement pads the stage intervals with untraced branches and splices every
remaining component of the next subtree into the walk where it is passed.
Every tree edge ends up traced exactly twice; with equal parameter length
per edge traversal the result is a Holder curve onto a 3r^N-dense subset of
the attractor.

All metric inequalities in this module (separation, proximity, edge length
windows) are stated in the sup-norm companion of the system metric
(Metric.dist_inf), under which the usual unit-cube-type attractors have
diameter at most 1.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .curves import SampledCurve
from .errors import (ConstructionError, LiftFailed, NoBranching,
                     NotSelfSimilar, SeparationViolated, ValidationError)
from .geometry import AdjacencyOracle, attractor_cover
from .ifs import IFSSystem, word_cut

__all__ = [
    "SOSCData", "NetLevel", "NetTree", "validate_sosc", "build_nets",
    "build_trees", "tour_parameterize", "tour_stages", "tree_road",
    "tree_branches", "select_untraced_branch", "splice_detour",
]


# ---------------------------------------------------------------------------
# separation witness


@dataclass
class SOSCData:
    """Separation witness for a self-similar system: an attractor point v
    whose tau-ball stays inside an open set on which the maps act disjointly.
    r is the net mesh ratio (default lips[0] * tau / 4)."""
    v: np.ndarray
    tau: float
    r: float


def _euclid_radius(metric, t: float) -> float:
    """A Euclidean search radius that contains every pair at dist_inf <= t."""
    if metric.exponents is None:
        return float(np.sqrt(metric.dim) * t)
    return float(np.sqrt(np.sum(t ** (2.0 / metric.exponents))))


def _all_matrices_equal(system: IFSSystem) -> bool:
    first = system.matrices[0]
    return all(np.array_equal(m, first) for m in system.matrices[1:])


def _word_points(system: IFSSystem, words, v: np.ndarray) -> np.ndarray:
    """phi_w(v) for every word in the list, vectorized when all maps share
    one linear part (then phi_w(v) = A^n v + sum_i A^i b_{w_i})."""
    v = np.asarray(v, dtype=float)
    n = len(words)
    out = np.empty((n, system.metric.dim))
    if n == 0:
        return out
    if _all_matrices_equal(system):
        A = system.matrices[0]
        by_len = {}
        for idx, w in enumerate(words):
            letters = w.letters if hasattr(w, "letters") else w
            by_len.setdefault(len(letters), []).append((idx, letters))
        max_len = max(by_len)
        # tab[i][l] = A^i @ offsets[l]
        tab = [np.stack(system.offsets)]
        for _ in range(max_len - 1):
            tab.append(tab[-1] @ A.T)
        pows = [np.eye(system.metric.dim)]
        for _ in range(max_len):
            pows.append(A @ pows[-1])
        for length, entries in by_len.items():
            idx = np.array([e[0] for e in entries])
            lets = np.array([e[1] for e in entries]) - 1
            acc = np.tile(pows[length] @ v, (len(idx), 1))
            for i in range(length):
                acc += tab[i][lets[:, i]]
            out[idx] = acc
        return out
    for i, w in enumerate(words):
        letters = w.letters if hasattr(w, "letters") else w
        out[i] = system.apply_word(letters, v)
    return out


def validate_sosc(system: IFSSystem, v, tau: float, levels: int = 2,
                  r: float | None = None) -> SOSCData:
    """Check that (v, tau) is a usable separation witness and fix the mesh
    ratio r.

    Verifies that every map is a similarity under the system metric (sampled
    pairs, relative tolerance 1e-10), that v lies on the attractor (within
    cover resolution), and that the net points {phi_w(v) : w in A*(r^m)} are
    pairwise at least 8r * r^m apart in dist_inf for m = 1..levels.
    """
    v = np.asarray(v, dtype=float)
    metric = system.metric
    if v.shape != (metric.dim,):
        raise ValidationError("witness point has wrong dimension")
    if not tau > 0:
        raise ValidationError("tau must be positive")

    rng = np.random.default_rng(0)
    x = rng.uniform(0.0, 1.0, size=(64, metric.dim))
    y = rng.uniform(0.0, 1.0, size=(64, metric.dim))
    base = metric.dist(x, y)
    for i in range(1, system.k + 1):
        lhs = metric.dist(system.apply(i, x), system.apply(i, y))
        expect = system.lips[i - 1] * base
        if np.max(np.abs(lhs - expect)) > 1e-10 * max(1.0, np.max(expect)):
            raise NotSelfSimilar(
                f"map {i} is not a similarity under {metric}")

    if r is None:
        r = float(system.lips[0]) * tau / 4.0
    if not 0 < r < 1:
        raise ValidationError(f"mesh ratio r={r} outside (0, 1)")

    cov = attractor_cover(system, float(system.lips[-1]) ** 5)
    if float(np.min(metric.dist(v, cov.points))) > cov.eps + 1e-12:
        raise ValidationError("witness point v does not lie on the attractor")

    for m in range(1, levels + 1):
        cut = word_cut(system, r ** m)
        pts = _word_points(system, cut, v)
        thresh = 8.0 * r * r ** m
        tree = cKDTree(pts)
        pairs = tree.query_pairs(_euclid_radius(metric, thresh),
                                 output_type="ndarray")
        if len(pairs):
            d = metric.dist_inf(pts[pairs[:, 0]], pts[pairs[:, 1]])
            bad = np.where(d < thresh)[0]
            if len(bad):
                i, j = pairs[bad[0]]
                raise SeparationViolated(
                    f"net points of {cut[i].letters} and {cut[j].letters} "
                    f"are {d[bad[0]]:.3g} < {thresh:.3g} apart at level {m}")
    return SOSCData(v=v, tau=float(tau), r=float(r))


# ---------------------------------------------------------------------------
# nets


@dataclass
class NetLevel:
    """One net level: one representative point per cut cylinder at mesh r^m.

    owner[i] is the index of the vertex's ancestor cylinder one level up
    (-1 at level 1); chosen[i] is the index of the vertex's identical copy
    one level down (None at the finest level, where the net is exactly
    {phi_w(v)}).
    """
    level: int
    words: list
    points: np.ndarray
    owner: np.ndarray | None = None
    chosen: np.ndarray | None = None


def _owner_array(coarse_words, fine_words) -> np.ndarray:
    """For each fine word, the index of its prefix in the coarse cut.

    Both lists are lexicographically sorted, so descendant blocks are
    contiguous and a two-pointer sweep suffices.
    """
    owner = np.empty(len(fine_words), dtype=np.int64)
    ci = 0
    for fi, w in enumerate(fine_words):
        while True:
            u = coarse_words[ci]
            if w[:len(u)] == u:
                break
            ci += 1
            if ci >= len(coarse_words):
                raise ConstructionError("cut nesting broken: orphan word")
        owner[fi] = ci
    return owner


def _check_separation(metric, pts, thresh, level):
    tree = cKDTree(pts)
    pairs = tree.query_pairs(_euclid_radius(metric, thresh),
                             output_type="ndarray")
    if len(pairs):
        d = metric.dist_inf(pts[pairs[:, 0]], pts[pairs[:, 1]])
        if np.any(d <= thresh):
            k = int(np.argmin(d))
            raise ConstructionError(
                f"net separation {d[k]:.3g} <= {thresh:.3g} at level {level}")


def build_nets(system: IFSSystem, sosc: SOSCData, N: int) -> list[NetLevel]:
    """Nets V_1 c ... c V_N, one point per cut cylinder at each mesh r^m.

    V_N consists of the points phi_w(v) themselves; each coarser vertex is
    the nearest finer vertex inside its own cylinder, so the nets are nested
    by construction.  Asserts per level: proximity to phi_w(v) below
    2r * r^m and pairwise separation above 4r * r^m.
    """
    if N < 1:
        raise ValidationError("N must be >= 1")
    r = sosc.r
    metric = system.metric
    cuts = [[w.letters for w in word_cut(system, r ** m)]
            for m in range(1, N + 1)]
    levels = [NetLevel(level=m + 1, words=cuts[m],
                       points=np.empty((len(cuts[m]), metric.dim)))
              for m in range(N)]
    levels[-1].points = _word_points(system, cuts[-1], sosc.v)

    for m in range(N - 1, 0, -1):
        fine, coarse = levels[m], levels[m - 1]
        fine.owner = _owner_array(coarse.words, fine.words)
        anchors = _word_points(system, coarse.words, sosc.v)
        chosen = np.empty(len(coarse.words), dtype=np.int64)
        starts = np.searchsorted(fine.owner, np.arange(len(coarse.words)))
        ends = np.append(starts[1:], len(fine.words))
        for i in range(len(coarse.words)):
            blk = slice(starts[i], ends[i])
            d = metric.dist_inf(anchors[i], fine.points[blk])
            chosen[i] = starts[i] + int(np.argmin(d))
        coarse.chosen = chosen
        coarse.points = fine.points[chosen]

    for m, lvl in enumerate(levels, start=1):
        anchors = _word_points(system, lvl.words, sosc.v)
        prox = metric.dist_inf(lvl.points, anchors)
        if np.any(prox >= 2.0 * r * r ** m):
            raise ConstructionError(
                f"net proximity bound 2r*r^m failed at level {m} "
                f"(max {np.max(prox):.3g})")
        _check_separation(metric, lvl.points, 4.0 * r * r ** m, m)
    return levels


# ---------------------------------------------------------------------------
# trees


@dataclass
class NetTree:
    """Spanning tree of one net level.  edges is an (E, 2) index array."""
    level: int
    words: list
    points: np.ndarray
    edges: np.ndarray
    owner: np.ndarray | None = None


def _verified_pairs(system, words, points, scale, oracle, lex_sorted=True):
    """Cylinder-adjacency edges among the given words, found by a KD-tree
    point prefilter followed by oracle verification."""
    metric = system.metric
    t = 2.0 * scale * max(1.0, system.diam_bound)
    tree = cKDTree(points)
    cand = tree.query_pairs(_euclid_radius(metric, t), output_type="ndarray")
    out = []
    for i, j in sorted(map(tuple, cand)):
        if oracle.adjacent(system, words[i], words[j]):
            out.append((i, j))
    return out


def _bfs_tree(n, pairs, root, order_key) -> list[tuple[int, int]]:
    """Deterministic BFS spanning tree; neighbors visited in order_key order.
    Raises if the graph is not connected."""
    adj = [[] for _ in range(n)]
    for i, j in pairs:
        adj[i].append(j)
        adj[j].append(i)
    for lst in adj:
        lst.sort(key=order_key)
    seen = np.zeros(n, dtype=bool)
    seen[root] = True
    queue = [root]
    edges = []
    while queue:
        nxt = []
        for u in queue:
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    edges.append((u, w))
                    nxt.append(w)
        queue = nxt
    if not seen.all():
        raise ConstructionError(
            "cylinder adjacency graph is disconnected; no spanning tree")
    return edges


def _branch_root(n, pairs, order_key) -> int:
    """Vertex to root a per-cylinder tree at: one of maximal degree (so the
    tree keeps a valence >= 3 vertex whenever the graph has one), lex-least
    on ties."""
    deg = np.zeros(n, dtype=np.int64)
    for i, j in pairs:
        deg[i] += 1
        deg[j] += 1
    best = max(range(n), key=lambda i: (deg[i], ), default=0)
    top = [i for i in range(n) if deg[i] == deg[best]]
    return min(top, key=order_key)


def _assert_edge_window(metric, points, edges, r, m):
    if len(edges) == 0:
        return
    e = np.asarray(edges)
    d = metric.dist_inf(points[e[:, 0]], points[e[:, 1]])
    lo, hi = 8.0 * r * r ** m, 2.0 * r ** m
    if np.any(d < lo) or np.any(d >= hi):
        k = int(np.argmin(d)) if np.any(d < lo) else int(np.argmax(d))
        raise ConstructionError(
            f"tree edge length {d[k]:.4g} outside [{lo:.4g}, {hi:.4g}) "
            f"at level {m}")


def build_trees(system: IFSSystem, sosc: SOSCData, nets: list[NetLevel],
                oracle: AdjacencyOracle | None = None) -> list[NetTree]:
    """Spanning trees T_1..T_N over the nets.

    T_1 is a BFS spanning tree (from the lexicographically least word) of the
    level-1 cylinder adjacency graph.  Each finer tree is the union of one
    spanning tree per coarse cylinder (rooted so as to retain a branch vertex
    of valence >= 3 when the cylinder's adjacency graph has one) plus, for
    every coarse tree edge, a single lifted edge joining the two descendant
    blocks at their lexicographically least adjacent pair.
    """
    if oracle is None:
        oracle = AdjacencyOracle()
    r = sosc.r
    metric = system.metric
    trees = []

    lvl = nets[0]
    pairs = _verified_pairs(system, lvl.words, lvl.points, r, oracle)
    root = min(range(len(lvl.words)), key=lambda i: lvl.words[i])
    edges = _bfs_tree(len(lvl.words), pairs, root,
                      order_key=lambda i: lvl.words[i])
    tree1 = NetTree(level=1, words=lvl.words, points=lvl.points,
                    edges=np.array(edges, dtype=np.int64))
    _assert_edge_window(metric, lvl.points, tree1.edges, r, 1)
    trees.append(tree1)

    for m in range(2, len(nets) + 1):
        fine, coarse = nets[m - 1], nets[m - 2]
        starts = np.searchsorted(fine.owner, np.arange(len(coarse.words)))
        ends = np.append(starts[1:], len(fine.words))
        all_edges = []

        # per-cylinder spanning trees; within a cylinder adjacency only
        # depends on the relative words (phi_u maps the restricted attractor
        # isometrically up to scale), so for uniform systems one relative
        # tree serves every block
        rel_cache = None
        rel_misses = 0
        for i in range(len(coarse.words)):
            blk = slice(starts[i], ends[i])
            words = fine.words[blk.start:blk.stop]
            u = coarse.words[i]
            rel = [w[len(u):] for w in words]
            if rel_cache is not None and rel_cache[0] == rel:
                rel_edges = rel_cache[1]
            else:
                rel_misses += 1
                pts = _word_points(system, rel, sosc.v)
                scale = max(system.word_weight(w) for w in rel)
                rel_pairs = _verified_pairs(system, rel, pts, scale, oracle)
                rroot = _branch_root(len(rel), rel_pairs,
                                     order_key=lambda a: rel[a])
                rel_edges = _bfs_tree(len(rel), rel_pairs, rroot,
                                      order_key=lambda a: rel[a])
                rel_cache = (rel, rel_edges)
            all_edges.extend((starts[i] + a, starts[i] + b)
                             for a, b in rel_edges)

        # one lifted edge per coarse tree edge; for uniform systems the
        # choice only depends on the relative translation of the two
        # cylinders (identical descendant blocks shift rigidly), so each
        # distinct offset is searched once
        thresh = 2.0 * r ** m * max(1.0, system.diam_bound)
        uniform = _all_matrices_equal(system) and rel_misses == 1
        anchors = (_word_points(system, coarse.words, sosc.v)
                   if uniform else None)
        lift_cache: dict[tuple, tuple[int, int] | None] = {}
        for a, b in map(tuple, trees[-1].edges):
            ba, bb = slice(starts[a], ends[a]), slice(starts[b], ends[b])
            key = None
            if uniform and ba.stop - ba.start == bb.stop - bb.start:
                shift = (anchors[b] - anchors[a]) / r ** m
                key = tuple(np.round(shift, 9))
                if key in lift_cache:
                    hit = lift_cache[key]
                    if hit is not None:
                        all_edges.append((ba.start + hit[0],
                                          bb.start + hit[1]))
                        continue
            d = metric.dist_inf(fine.points[ba, None, :],
                                fine.points[None, bb, :])
            cand = np.argwhere(d <= thresh)
            cand = sorted(
                (fine.words[ba.start + ii], fine.words[bb.start + jj], ii, jj)
                for ii, jj in cand)
            lifted = None
            for _, _, ii, jj in cand:
                if oracle.adjacent(system, fine.words[ba.start + ii],
                                   fine.words[bb.start + jj]):
                    lifted = (int(ii), int(jj))
                    break
            if key is not None:
                lift_cache[key] = lifted
            if lifted is None:
                raise LiftFailed(
                    f"no adjacent descendant pair realizes tree edge "
                    f"{coarse.words[a]} -- {coarse.words[b]} at level {m}")
            all_edges.append((ba.start + lifted[0], bb.start + lifted[1]))

        tree = NetTree(level=m, words=fine.words, points=fine.points,
                       edges=np.array(all_edges, dtype=np.int64),
                       owner=fine.owner)
        if len(tree.edges) != len(fine.words) - 1:
            raise ConstructionError(
                f"level-{m} edge count {len(tree.edges)} != |V| - 1")
        _assert_edge_window(metric, fine.points, tree.edges, r, m)
        trees.append(tree)
    return trees


# ---------------------------------------------------------------------------
# roads, branches (used when tours must be augmented below existing stages)


def tree_road(n: int, edges, a: int, b: int) -> list[int]:
    """The unique path between two vertices of a tree, as a vertex list."""
    adj = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    parent = {a: None}
    queue = [a]
    while queue and b not in parent:
        nxt = []
        for u in queue:
            for w in adj[u]:
                if w not in parent:
                    parent[w] = u
                    nxt.append(w)
        queue = nxt
    if b not in parent:
        raise ConstructionError("road endpoints lie in different components")
    path = [b]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return path[::-1]


def tree_branches(n: int, edges, road) -> list[tuple[int, list[int]]]:
    """Connected components of the tree minus the road, each rooted at the
    road vertex it hangs off; returned as (attach_vertex, component)."""
    on_road = set(road)
    adj = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = set(road)
    out = []
    for v in road:
        for w in sorted(adj[v]):
            if w in seen:
                continue
            comp = [w]
            seen.add(w)
            stack = [w]
            while stack:
                u = stack.pop()
                for t in adj[u]:
                    if t not in seen and t not in on_road:
                        seen.add(t)
                        comp.append(t)
                        stack.append(t)
            out.append((v, sorted(comp)))
    return out


def select_untraced_branch(branches, traced_edges, groups):
    """First branch holding an entire vertex group and at least one untraced
    edge; None when no branch qualifies.

    branches: output of tree_branches; traced_edges: set of frozenset edges
    already covered; groups: candidate vertex groups (each the vertex set of
    one cylinder) that a detour must cover in full.
    """
    for attach, comp in branches:
        comp_set = set(comp)
        has_untraced = any(
            frozenset((attach, w)) not in traced_edges for w in comp)
        if not has_untraced:
            continue
        for g in groups:
            if g and set(g) <= comp_set:
                return attach, comp, g
    return None


def splice_detour(tour: list[int], position: int, detour: list[int]) -> list[int]:
    """Insert a closed detour (starting and ending at tour[position]) into a
    vertex tour."""
    if detour[0] != tour[position] or detour[-1] != tour[position]:
        raise ValidationError("detour must start and end at the splice vertex")
    return tour[:position + 1] + detour[1:] + tour[position + 1:]


# ---------------------------------------------------------------------------
# tours


def _level_indices_in_finest(nets: list[NetLevel]) -> list[np.ndarray]:
    """For each level, the indices of its vertices inside the finest net."""
    idx = [np.arange(len(nets[-1].words))]
    for lvl in reversed(nets[:-1]):
        idx.append(idx[-1][lvl.chosen])
    return idx[::-1]


class _TourBuilder:
    """Stagewise 2-to-1 tour of the finest spanning tree.

    The walk is grown coarse to fine.  The first stage double-traverses the
    minimal subtree spanning the coarsest net V_1, breaking the parameter
    interval at V_1 visits.  Each refinement then (a) pads every stage
    interval with one previously untraced branch hanging off the interval's
    road, and (b) splices every still-untraced component of the next
    subtree into the walk at a visit of its attachment vertex, choosing the
    visit whose interval currently carries the least walk time.  Splicing
    at pass-through time is what keeps the tour spatially local: a stretch
    of the walk that crosses a region also tours that region's subtree, so
    no short parameter window carries a large displacement.
    """

    def __init__(self, system, sosc, nets, trees):
        self.metric = system.metric
        self.r = sosc.r
        self.system = system
        fine = trees[-1]
        self.words = fine.words
        self.pts = fine.points
        self.n = len(self.words)
        level_idx = _level_indices_in_finest(nets)
        self.in_net = []
        for ix in level_idx:
            mask = np.zeros(self.n, dtype=bool)
            mask[ix] = True
            self.in_net.append(mask)

        adj = [[] for _ in range(self.n)]
        for i, j in map(tuple, fine.edges):
            adj[i].append(int(j))
            adj[j].append(int(i))
        for lst in adj:
            lst.sort(key=lambda a: self.words[a])
        self.adj = adj
        self.edge_set = {frozenset(map(int, e)) for e in fine.edges}

        self.root = int(level_idx[0][min(
            range(len(nets[0].words)), key=lambda i: nets[0].words[i])])
        self._root_tree()
        # subtree counts of net members per level
        self.cnt = []
        for mask in self.in_net:
            c = mask.astype(np.int64)
            for v in self.tin_order[::-1]:
                if v != self.root:
                    c[self.parent[v]] += c[v]
            self.cnt.append(c)
        # edge v--parent[v] is identified with v; traced flags in tin order
        self.traced_tin = np.zeros(self.n, dtype=bool)
        self.pts_tin = self.pts[self.tin_order]
        self._blocks = {}

    def _root_tree(self):
        n = self.n
        parent = np.full(n, -1, dtype=np.int64)
        depth = np.zeros(n, dtype=np.int64)
        tin = np.empty(n, dtype=np.int64)
        tout = np.empty(n, dtype=np.int64)
        order = np.empty(n, dtype=np.int64)
        clock = 0
        parent[self.root] = self.root
        stack = [(self.root, iter(self.adj[self.root]))]
        tin[self.root] = 0
        order[0] = self.root
        clock = 1
        while stack:
            u, it = stack[-1]
            advanced = False
            for w in it:
                if parent[w] == -1:
                    parent[w] = u
                    depth[w] = depth[u] + 1
                    tin[w] = clock
                    order[clock] = w
                    clock += 1
                    stack.append((w, iter(self.adj[w])))
                    advanced = True
                    break
            if not advanced:
                tout[u] = clock
                stack.pop()
        self.parent, self.depth = parent, depth
        self.tin, self.tout, self.tin_order = tin, tout, order

    # -- traced-edge bookkeeping (an edge is named by its deeper vertex) --

    def _is_traced(self, v: int) -> bool:
        return bool(self.traced_tin[self.tin[v]])

    def _mark_subtree(self, c: int):
        self.traced_tin[self.tin[c]:self.tout[c]] = True

    def _subtree_untraced(self, c: int) -> bool:
        return not self.traced_tin[self.tin[c]:self.tout[c]].any()

    def _subtree_diam(self, c: int) -> float:
        blk = self.pts_tin[self.tin[c]:self.tout[c]]
        span = np.max(blk, axis=0) - np.min(blk, axis=0)
        if self.metric.exponents is not None:
            span = span ** self.metric.exponents
        return float(np.max(span))

    # -- cut blocks of net vertices, for branch qualification --

    def _block_ranges(self, level: int) -> tuple[np.ndarray, np.ndarray]:
        """tin ranges (min sorted, paired max) of the finest-net vertex
        blocks below each cut word at mesh r^level."""
        if level not in self._blocks:
            cut = [w.letters for w in word_cut(self.system, self.r ** level)]
            owner = _owner_array(cut, self.words)
            lo = np.full(len(cut), self.n, dtype=np.int64)
            hi = np.full(len(cut), -1, dtype=np.int64)
            np.minimum.at(lo, owner, self.tin)
            np.maximum.at(hi, owner, self.tin)
            sel = hi >= 0
            lo, hi = lo[sel], hi[sel]
            o = np.argsort(lo)
            self._blocks[level] = (lo[o], hi[o])
        return self._blocks[level]

    def _holds_full_block(self, c: int, level: int) -> bool:
        """Does subtree(c) contain every finest-net vertex of some cut
        cylinder at mesh r^level?"""
        lo, hi = self._block_ranges(level)
        a = np.searchsorted(lo, self.tin[c], side="left")
        b = np.searchsorted(lo, self.tout[c], side="left")
        if a == b:
            return False
        return bool(np.min(hi[a:b]) < self.tout[c])

    # -- walks --

    def _double_tour(self, start: int, allowed: np.ndarray) -> list[int]:
        """Closed depth-first double traversal from start over the child
        edges marked allowed; children visited in lexicographic word order
        (the adjacency lists are pre-sorted)."""
        parent = self.parent
        walk = [start]
        stack = [(start, iter(self.adj[start]))]
        while stack:
            u, it = stack[-1]
            advanced = False
            for w in it:
                if parent[w] == u and allowed[w]:
                    walk.append(w)
                    stack.append((w, iter(self.adj[w])))
                    advanced = True
                    break
            if not advanced:
                stack.pop()
                if stack:
                    walk.append(stack[-1][0])
        return walk

    def _road(self, a: int, b: int) -> list[int]:
        """The unique tree path between two vertices (parent walk to the
        least common ancestor)."""
        ra, rb = [a], [b]
        while self.depth[ra[-1]] > self.depth[rb[-1]]:
            ra.append(int(self.parent[ra[-1]]))
        while self.depth[rb[-1]] > self.depth[ra[-1]]:
            rb.append(int(self.parent[rb[-1]]))
        while ra[-1] != rb[-1]:
            ra.append(int(self.parent[ra[-1]]))
            rb.append(int(self.parent[rb[-1]]))
        return ra + rb[-2::-1]

    @staticmethod
    def _rebuild(seq: list[int], inserts: dict[int, list[list[int]]],
                 break_sets: list[np.ndarray]) -> tuple[list[int], list[np.ndarray]]:
        """Insert closed detours after the given positions and shift every
        breakpoint array accordingly.  Each detour must start and end at
        seq[pos]."""
        if not inserts:
            return seq, break_sets
        positions = np.array(sorted(inserts), dtype=np.int64)
        lengths = np.array([sum(len(d) - 1 for d in inserts[int(p)])
                            for p in positions], dtype=np.int64)
        out = []
        prev = 0
        for p in positions:
            p = int(p)
            out.extend(seq[prev:p + 1])
            for det in inserts[p]:
                if det[0] != seq[p] or det[-1] != seq[p]:
                    raise ConstructionError(
                        "detour does not close at its splice vertex")
                out.extend(det[1:])
            prev = p + 1
        out.extend(seq[prev:])
        shifted = []
        for arr in break_sets:
            off = np.cumsum(lengths)[
                np.searchsorted(positions, arr, side="left") - 1]
            off[np.searchsorted(positions, arr, side="left") == 0] = 0
            shifted.append(arr + off)
        return out, shifted

    # -- refinement phases --

    def _insert_branches(self, seq, break_sets, m, N):
        """Pad every stage-m interval with one untraced branch hanging off
        the interval's road, so that the final tour spends time in every
        interval proportional to a full finer-cut cylinder (the tour-count
        lower bound behind the uniform Holder constant).

        A branch qualifies when it carries every finest-net vertex of some
        cut cylinder at mesh r^(m+t+1), with t searched upward from 1; cut
        levels beyond the finest net impose no block condition.  Among
        qualifying untraced branches the smallest is chosen, preferring
        those of diameter at most r^m.
        """
        breaks = break_sets[-1]
        inserts: dict[int, list[list[int]]] = {}
        for x, y in zip(breaks[:-1], breaks[1:]):
            x, y = int(x), int(y)
            a, b = seq[x], seq[y]
            if a == b:
                continue
            road = self._road(a, b)
            on_road = set(road)
            cands = []
            for u in road:
                for c in self.adj[u]:
                    if self.parent[c] == u and c not in on_road:
                        cands.append((int(self.tout[c] - self.tin[c]), c, u))
            cands.sort(key=lambda e: (e[0], self.words[e[1]]))
            segment = seq[x:y + 1]
            chosen = None
            for t in range(1, max(N - m, 1) + 1):
                level = m + t + 1
                fallback = None
                for size, c, u in cands:
                    if level <= N and not self._holds_full_block(c, level):
                        continue
                    if not self._subtree_untraced(c):
                        continue
                    if self._subtree_diam(c) <= self.r ** m:
                        chosen = (c, u)
                        break
                    if fallback is None:
                        fallback = (c, u)
                if chosen is None:
                    chosen = fallback
                if chosen is not None:
                    break
            if chosen is None:
                warnings.warn(
                    f"no untraced branch qualifies on a stage-{m} interval; "
                    "skipping insertion", RuntimeWarning)
                continue
            c, u = chosen
            pos = x + segment.index(u)
            allowed = np.zeros(self.n, dtype=bool)
            lo, hi = self.tin[c], self.tout[c]
            allowed[self.tin_order[lo:hi]] = True
            det = [u] + self._double_tour(c, allowed) + [u]
            inserts.setdefault(pos, []).append(det)
            self._mark_subtree(c)
        return self._rebuild(seq, inserts, break_sets)

    def _splice_components(self, seq, break_sets, level_mask):
        """Splice every untraced component of the level's subtree into the
        walk, each as a closed double traversal hung at a visit of its
        attachment vertex.

        Among the possible visits the one whose interval has received the
        least material relative to its own walk length is chosen (largest
        components first).  Proportional rather than equal filling matters:
        a depth-first tour climbs long roads between far-apart net points,
        and such an interval must keep the same share of parameter time at
        every refinement or its displacement-to-time ratio degrades."""
        pending = level_mask & ~self.traced_tin[self.tin]
        pending[self.root] = False
        if not pending.any():
            return seq, break_sets
        # group pending edges into components; comp tops are traced vertices
        comp_of = np.full(self.n, -1, dtype=np.int64)
        attach, size, top_word = [], [], []
        for v in self.tin_order:
            if not pending[v]:
                continue
            p = int(self.parent[v])
            if pending[p]:
                comp_of[v] = comp_of[p]
                size[comp_of[v]] += 1
            else:
                comp_of[v] = len(attach)
                attach.append(p)
                size.append(1)
                top_word.append(self.words[v])

        seq_arr = np.asarray(seq, dtype=np.int64)
        sort_ix = np.argsort(seq_arr, kind="stable")
        sorted_vals = seq_arr[sort_ix]

        def occurrences(v):
            a = np.searchsorted(sorted_vals, v, side="left")
            b = np.searchsorted(sorted_vals, v, side="right")
            return np.sort(sort_ix[a:b])

        breaks = break_sets[-1]
        weight = np.maximum(np.diff(breaks).astype(np.float64), 1.0)
        load = np.zeros(len(weight))
        inserts: dict[int, list[list[int]]] = {}
        order = sorted(range(len(attach)),
                       key=lambda i: (-size[i], top_word[i]))
        for ci in order:
            u = attach[ci]
            pos = occurrences(u)
            iv = np.clip(np.searchsorted(breaks, pos, side="right") - 1,
                         0, len(breaks) - 2)
            k = int(np.lexsort((pos, load[iv] / weight[iv]))[0])
            p, chosen_iv = int(pos[k]), int(iv[k])
            allowed = pending & (comp_of == ci)
            det = self._double_tour_from_attach(u, allowed)
            inserts.setdefault(p, []).append(det)
            load[chosen_iv] += len(det) - 1
        self.traced_tin[self.tin[comp_of >= 0]] = True
        return self._rebuild(seq, inserts, break_sets)

    def _double_tour_from_attach(self, u, allowed):
        walk = [u]
        stack = [(u, iter(self.adj[u]))]
        while stack:
            v, it = stack[-1]
            advanced = False
            for w in it:
                if self.parent[w] == v and allowed[w]:
                    walk.append(w)
                    stack.append((w, iter(self.adj[w])))
                    advanced = True
                    break
            if not advanced:
                stack.pop()
                if stack:
                    walk.append(stack[-1][0])
        return walk

    def _select_breakpoints(self, seq, prev_breaks, m) -> np.ndarray:
        """Refine the breakpoint set one level: scan each interval and break
        whenever the walk has moved 4r^m from the last breakpoint, dropping
        a trailing breakpoint that lands within 2r*r^m of the interval end.
        Consecutive breakpoints are then at least 2r*r^m apart in dist_inf
        and no interval wanders beyond (4/r)*r^m of its left endpoint."""
        theta = 4.0 * self.r ** m
        sep = 2.0 * self.r * self.r ** m
        pts = self.pts[np.asarray(seq, dtype=np.int64)]
        out = []
        chunk = 512
        for X, Y in zip(prev_breaks[:-1], prev_breaks[1:]):
            X, Y = int(X), int(Y)
            out.append(X)
            added = []
            pos = X
            while True:
                nxt = None
                start = pos + 1
                while start < Y:
                    stop = min(start + chunk, Y)
                    d = self.metric.dist_inf(pts[pos], pts[start:stop])
                    hit = np.flatnonzero(d >= theta)
                    if len(hit):
                        nxt = start + int(hit[0])
                        break
                    start = stop
                if nxt is None:
                    break
                added.append(nxt)
                pos = nxt
            if added and float(self.metric.dist_inf(
                    pts[added[-1]], pts[Y])) < sep:
                added.pop()
            out.extend(added)
        out.append(int(prev_breaks[-1]))
        return np.array(out, dtype=np.int64)

    def build(self, N: int) -> tuple[list[int], list[np.ndarray]]:
        """Run the staged construction; returns the final walk and the
        breakpoint positions of every stage."""
        seq = self._double_tour(self.root, self.cnt[0] >= 1)
        self.traced_tin[self.tin[self.cnt[0] >= 1]] = True
        self.traced_tin[self.tin[self.root]] = False
        in1 = self.in_net[0]
        breaks = [0]
        for p in range(1, len(seq)):
            if in1[seq[p]]:
                breaks.append(p)
        if breaks[-1] != len(seq) - 1:
            raise ConstructionError("stage-1 walk does not close at the root")
        break_sets = [np.array(breaks, dtype=np.int64)]

        for m in range(1, N + 1):
            if m < N:
                seq, break_sets = self._insert_branches(seq, break_sets, m, N)
                seq, break_sets = self._splice_components(
                    seq, break_sets, self.cnt[m] >= 1)
                nxt = self._select_breakpoints(seq, break_sets[-1], m + 1)
                break_sets.append(nxt)
        return seq, break_sets


def _assert_stage_bounds(seq, pts, break_sets, metric, r):
    """Per stage-m interval of the final walk: endpoints at least 2r*r^m
    apart and the whole interval within (5/r)*r^m of its left endpoint."""
    seq_arr = np.asarray(seq, dtype=np.int64)
    walk_pts = pts[seq_arr]
    last = len(seq) - 1
    for m, pos in enumerate(break_sets, start=1):
        lo, hi = 2.0 * r * r ** m, (5.0 / r) * r ** m
        a, b = pos[:-1], pos[1:]
        pa = walk_pts[a]
        d_end = metric.dist_inf(pa, walk_pts[b])
        closing = (b == last) & (seq_arr[a] == seq_arr[b])
        if np.any((d_end < lo) & ~closing):
            raise ConstructionError(
                f"stage-{m} interval endpoints closer than 2r*r^m")
        counts = np.diff(pos)
        lefts = np.repeat(pa, counts, axis=0)
        d_all = metric.dist_inf(lefts, walk_pts[pos[0]:pos[-1]])
        seg_max = np.maximum.reduceat(d_all, pos[:-1] - pos[0])
        if np.any(np.maximum(seg_max, d_end) > hi):
            raise ConstructionError(
                f"stage-{m} interval wanders beyond (5/r)*r^m")


def tour_stages(system: IFSSystem, sosc: SOSCData, N: int,
                oracle: AdjacencyOracle | None = None) -> list[SampledCurve]:
    """Stage curves f_1..f_N of the staged tour construction followed by
    the full walk F_N; every stage is the restriction of F_N to a coarser
    breakpoint set."""
    if oracle is None:
        oracle = AdjacencyOracle()
    from .arcs import detect_branching
    report = detect_branching(system, oracle, n_max=2)
    if not report.branching:
        raise NoBranching(
            "system is an arc (no cylinder meets three others); "
            "use the arc parameterization instead")
    nets = build_nets(system, sosc, N)
    trees = build_trees(system, sosc, nets, oracle)
    fine = trees[-1]

    builder = _TourBuilder(system, sosc, nets, trees)
    seq, break_sets = builder.build(N)

    # every tree edge must be walked exactly twice
    counts = Counter(frozenset(e) for e in zip(seq, seq[1:]))
    if set(counts) != builder.edge_set or any(
            c != 2 for c in counts.values()):
        raise ConstructionError("tour does not trace every tree edge twice")

    pts = fine.points
    _assert_stage_bounds(seq, pts, break_sets, system.metric, sosc.r)

    params = np.arange(len(seq)) / (len(seq) - 1)
    tour_pts = pts[np.asarray(seq, dtype=np.int64)]
    stages = [SampledCurve(params[pos], tour_pts[pos], system.metric)
              for pos in break_sets]
    stages.append(SampledCurve(params, tour_pts, system.metric))
    return stages


def tour_parameterize(system: IFSSystem, sosc: SOSCData, N: int,
                      oracle: AdjacencyOracle | None = None) -> SampledCurve:
    """Closed (1/s)-Holder tour of the level-N net: a piecewise-linear curve
    through the finest spanning tree, each of the 2(|V_N| - 1) edge
    traversals taking equal parameter length."""
    return tour_stages(system, sosc, N, oracle)[-1]
