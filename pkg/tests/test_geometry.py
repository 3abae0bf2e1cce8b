import numpy as np
import pytest

from holdercurves.gallery import gallery_entry
from holdercurves.geometry import (AdjacencyOracle, ArcOrderOracle,
                                   GasketOracle, attractor_cover,
                                   connectedness_check, cylinders_adjacent,
                                   hausdorff_distance, intersection_witness)
from holdercurves.metrics import Metric


def test_attractor_cover_certified():
    sys_ = gallery_entry("koch").system
    cov = attractor_cover(sys_, 0.05)
    assert len(cov.words) == len(cov.points)
    # every deeper representative point is within eps of the cover
    fine = attractor_cover(sys_, 0.01)
    assert hausdorff_distance(fine.points, cov.points,
                              sys_.metric) <= cov.eps


def test_hausdorff_distance_singletons():
    m = Metric(2)
    assert hausdorff_distance(np.array([[0.0, 0.0]]),
                              np.array([[1.0, 0.0]]), m) == pytest.approx(1.0)


def test_gasket_oracle_agrees_with_geometry():
    e = gallery_entry("gasket")
    oracle = e.oracle()
    sys_ = e.system
    # level-1: all three cylinders touch pairwise at edge midpoints
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            if i != j:
                assert oracle.adjacent(sys_, (i,), (j,))
    # disjoint level-2 cylinders on opposite corners
    assert not oracle.adjacent(sys_, (1, 1), (2, 2))


def test_arc_order_oracle():
    o = ArcOrderOracle(4, (0.0, 0.0), (1.0, 0.0))
    sys_ = gallery_entry("koch").system
    assert o.adjacent(sys_, (1,), (2,))
    assert not o.adjacent(sys_, (1,), (3,))
    assert o.adjacent(sys_, (1, 4), (2, 1))  # consecutive across the joint
    w = o.witness(sys_, (1,), (2,))
    np.testing.assert_allclose(w, sys_.apply_word((1,), [1.0, 0.0]),
                               atol=1e-12)


def test_oracle_unwraps_nested_wrapper():
    inner = AdjacencyOracle(mode="exact", exact=GasketOracle())
    outer = AdjacencyOracle(exact=inner)
    assert isinstance(outer.exact, GasketOracle)
    assert outer.mode == "exact"


def test_adjacency_is_symmetric_and_reflexive_on_nested():
    sys_ = gallery_entry("gasket").system
    oracle = gallery_entry("gasket").oracle()
    assert cylinders_adjacent(sys_, (1,), (1, 2), oracle)  # nested cylinders
    a = cylinders_adjacent(sys_, (1,), (2,), oracle)
    b = cylinders_adjacent(sys_, (2,), (1,), oracle)
    assert a == b


def test_intersection_witness_on_gasket():
    e = gallery_entry("gasket")
    z = intersection_witness(e.system, (1,), (2,), e.oracle())
    # cylinders 1 and 2 share the midpoint of the bottom edge
    np.testing.assert_allclose(z, [0.5, 0.0], atol=1e-9)


def test_connectedness_gasket_connected():
    e = gallery_entry("gasket")
    res = connectedness_check(e.system, e.oracle())
    assert res.verdict == "connected"
    assert res.components == [[1, 2, 3]]
    assert res.gap is None


def test_connectedness_cantor_pair_certified_gap():
    e = gallery_entry("cantor-pair")
    res = connectedness_check(e.system)
    assert res.verdict == "disconnected"
    assert sorted(map(sorted, res.components)) == [[1], [2]]
    # true gap is 1/3; the certificate must be positive and below it
    assert 0.0 < res.gap <= 1.0 / 3.0 + 1e-12
    assert res.gap > 0.3


def test_connected_likely_with_approximate_oracle():
    res = connectedness_check(gallery_entry("gasket").system)
    assert res.verdict == "connected-likely"
    assert res.connected
