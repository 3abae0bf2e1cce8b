import numpy as np
import pytest

from holdercurves.errors import (ConstructionError, NoBranching,
                                 SeparationViolated, ValidationError)
from holdercurves.gallery import gallery_entry
from holdercurves.tours import (build_nets, build_trees, select_untraced_branch,
                                splice_detour, tour_parameterize, tour_stages,
                                tree_branches, tree_road, validate_sosc)

#        4
#        |
#    0 - 1 - 2 - 3
#            |
#            5
TREE_EDGES = [(0, 1), (1, 2), (2, 3), (1, 4), (2, 5)]


def test_tree_road():
    assert tree_road(6, TREE_EDGES, 0, 3) == [0, 1, 2, 3]
    assert tree_road(6, TREE_EDGES, 4, 5) == [4, 1, 2, 5]
    assert tree_road(6, TREE_EDGES, 3, 3) == [3]


def test_tree_road_disconnected():
    with pytest.raises(ConstructionError):
        tree_road(4, [(0, 1)], 0, 3)


def test_tree_branches():
    road = [0, 1, 2, 3]
    assert tree_branches(6, TREE_EDGES, road) == [(1, [4]), (2, [5])]
    # a single-vertex road leaves one component per incident subtree
    got = {(attach, tuple(comp))
           for attach, comp in tree_branches(6, TREE_EDGES, [1])}
    assert got == {(1, (0,)), (1, (2, 3, 5)), (1, (4,))}


def test_select_untraced_branch():
    branches = [(1, [4]), (2, [5])]
    sel = select_untraced_branch(branches, set(), [[4], [5]])
    assert sel == (1, [4], [4])
    # branch (1,4) already traced: pick the next one
    sel = select_untraced_branch(branches, {frozenset((1, 4))}, [[4], [5]])
    assert sel == (2, [5], [5])
    # no group fits inside any branch
    assert select_untraced_branch(branches, set(), [[4, 5]]) is None


def test_splice_detour():
    assert splice_detour([0, 1, 2], 1, [1, 4, 1]) == [0, 1, 4, 1, 2]
    with pytest.raises(ValidationError):
        splice_detour([0, 1, 2], 1, [4, 1])


@pytest.fixture(scope="module")
def square():
    e = gallery_entry("square")
    v, tau = e.sosc_witness
    return e.system, validate_sosc(e.system, v, tau), e.oracle()


@pytest.fixture(scope="module")
def square_stages(square):
    sys_, sosc, oracle = square
    return tour_stages(sys_, sosc, 2, oracle)


def test_validate_sosc_square(square):
    sys_, sosc, _ = square
    # default mesh ratio is L_1 * tau / 4
    assert sosc.r == pytest.approx(float(sys_.lips[0]) * 0.4 / 4.0)
    np.testing.assert_allclose(sosc.v, [0.5, 0.5])


def test_validate_sosc_rejects_crowded_witness():
    e = gallery_entry("gasket")
    v, _ = e.sosc_witness
    with pytest.raises(SeparationViolated):
        validate_sosc(e.system, v, 2.0)


def test_validate_sosc_rejects_off_attractor_point():
    e = gallery_entry("gasket")
    with pytest.raises(ValidationError):
        validate_sosc(e.system, np.array([2.0, 2.0]), 0.2)


def test_nets_nested_and_separated(square):
    sys_, sosc, _ = square
    nets = build_nets(sys_, sosc, 2)
    # r = 0.05 puts the level-1 cut at word depth 5 and level 2 at depth 9
    assert len(nets[0].points) == 4 ** 5
    assert len(nets[1].points) == 4 ** 9
    # nesting: every coarse point is a fine point
    np.testing.assert_array_equal(nets[0].points,
                                  nets[1].points[nets[0].chosen])
    # owners index the coarse cut and partition the fine net
    assert sorted(set(nets[1].owner.tolist())) == list(range(4 ** 5))
    # build_nets certifies separation at every level; spot-check level 1
    d = sys_.metric.pairwise_min(nets[0].points)
    assert d > 4.0 * sosc.r ** 2


def test_trees_span_with_windowed_edges(square):
    sys_, sosc, oracle = square
    nets = build_nets(sys_, sosc, 1)
    trees = build_trees(sys_, sosc, nets, oracle)
    r = sosc.r
    (t,) = trees
    n = len(t.points)
    assert len(t.edges) == n - 1  # spanning tree
    for i, j in t.edges:
        d = float(sys_.metric.dist_inf(t.points[i], t.points[j]))
        assert 8.0 * r * r <= d < 2.0 * r


def test_tour_square_every_edge_twice(square):
    sys_, sosc, oracle = square
    (f1,) = tour_stages(sys_, sosc, 1, oracle)[-1:]
    # closed walk over the level-1 net: (n - 1) edges, each walked twice
    n = 4 ** 5
    assert len(f1) == 2 * (n - 1) + 1
    np.testing.assert_allclose(f1.points[0], f1.points[-1], atol=1e-12)
    assert len(np.unique(f1.points, axis=0)) == n


def test_tour_stage_is_restriction(square_stages):
    f1, f2, full = square_stages
    assert len(f1) < len(f2) < len(full)
    for stage in (f1, f2):
        idx = np.searchsorted(full.params, stage.params)
        np.testing.assert_allclose(full.params[idx], stage.params, atol=0)
        np.testing.assert_array_equal(full.points[idx], stage.points)


def test_tour_parameter_lengths_equal_per_edge(square_stages):
    full = square_stages[-1]
    steps = np.diff(full.params)
    np.testing.assert_allclose(steps, steps[0], rtol=1e-9)


def test_tour_rejects_arcs():
    e = gallery_entry("koch")
    sosc = validate_sosc(e.system, np.array([0.5, np.sqrt(3) / 6.0]), 0.2)
    with pytest.raises(NoBranching):
        tour_parameterize(e.system, sosc, 1, e.oracle())
