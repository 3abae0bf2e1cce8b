import numpy as np
import pytest

from holdercurves.arcs import (DiamondSpec, arc_endpoints, arc_parameterize,
                               bounded_turning_estimate, detect_branching,
                               discrete_injectivity, snowflake_ifs,
                               square_iterate)
from holdercurves.errors import (ApertureTooLarge, BranchingInput,
                                 DiamondOverlap, SegmentEscapes,
                                 ValidationError)
from holdercurves.gallery import gallery_entry


def koch():
    e = gallery_entry("koch")
    return e.system, e.oracle()


def test_koch_is_non_branching():
    sys_, oracle = koch()
    rep = detect_branching(sys_, oracle)
    assert not rep.branching
    assert sorted(rep.end_letters) == [1, 4]


def test_gasket_branches():
    e = gallery_entry("gasket")
    rep = detect_branching(e.system, e.oracle())
    assert rep.branching
    assert rep.witness is not None


def test_gasket_arc_endpoints_raise():
    e = gallery_entry("gasket")
    with pytest.raises(BranchingInput):
        arc_endpoints(e.system, e.oracle())


def test_koch_endpoints():
    sys_, oracle = koch()
    v0, v1 = arc_endpoints(sys_, oracle)
    got = np.sort(np.array([v0, v1]), axis=0)
    np.testing.assert_allclose(got, [[0.0, 0.0], [1.0, 0.0]], atol=1e-8)


def test_koch_arc_parameterization():
    sys_, oracle = koch()
    f = arc_parameterize(sys_, 4, oracle)
    # runs between the arc endpoints and never revisits a value
    ends = np.sort(np.array([f.points[0], f.points[-1]]), axis=0)
    np.testing.assert_allclose(ends, [[0.0, 0.0], [1.0, 0.0]], atol=1e-8)
    assert discrete_injectivity(f)


def test_square_iterate_counts():
    sys_, _ = koch()
    sq = square_iterate(sys_)
    assert sq.k == 16
    np.testing.assert_allclose(sq.lips, np.full(16, 1.0 / 9.0))


def test_discrete_injectivity_detects_repeats():
    from holdercurves.curves import SampledCurve
    from holdercurves.metrics import euclidean
    good = SampledCurve(np.array([0.0, 0.5, 1.0]),
                        np.array([[0.0], [1.0], [2.0]]), euclidean(1))
    bad = SampledCurve(np.array([0.0, 0.5, 1.0]),
                       np.array([[0.0], [1.0], [0.0]]), euclidean(1))
    assert discrete_injectivity(good)
    assert not discrete_injectivity(bad)


# --- diamond snowflakes -----------------------------------------------------


def test_diamond_spec_validation():
    tri = [[0.0, 0.0], [0.5, 0.2], [1.0, 0.0]]
    DiamondSpec(tri, [0.3, 0.3])  # fine
    with pytest.raises(ApertureTooLarge):
        DiamondSpec(tri, [0.3, 0.6])
    with pytest.raises(ValidationError):
        DiamondSpec(tri, [0.3])
    with pytest.raises(ValidationError):
        DiamondSpec([[0.0, 0.0], [0.5, 0.2], [1.1, 0.0]], [0.3, 0.3])
    with pytest.raises(SegmentEscapes):
        # apex far above the base diamond
        DiamondSpec([[0.0, 0.0], [0.5, 0.4], [1.0, 0.0]], [0.3, 0.3])
    with pytest.raises(DiamondOverlap):
        # sharp bend with wide-open diamonds that overlap at the vertex
        DiamondSpec([[0.0, 0.0], [0.5, 0.2], [0.45, 0.03], [1.0, 0.0]],
                    [0.49, 0.49, 0.49])


def test_snowflake_lipschitz_constants():
    spec = gallery_entry("fig3-snowflake").spec
    sys_, _ = snowflake_ifs(spec)
    lens = np.sort(spec.lengths())
    np.testing.assert_allclose(sys_.lips, lens, atol=1e-12)


def test_snowflake_is_arc():
    spec = DiamondSpec([[0.0, 0.0], [0.5, 0.2], [1.0, 0.0]], [0.3, 0.3])
    sys_, oracle = snowflake_ifs(spec)
    rep = detect_branching(sys_, oracle)
    assert not rep.branching
    f = arc_parameterize(sys_, 3, oracle)
    assert discrete_injectivity(f)
    ends = {tuple(np.round(f.points[0], 9)), tuple(np.round(f.points[-1], 9))}
    assert ends == {(0.0, 0.0), (1.0, 0.0)}


def test_snowflake_fixed_points_on_chain():
    """Each map fixes nothing outside its own diamond; the first and last
    maps fix the chain endpoints."""
    spec = gallery_entry("fig3-snowflake").spec
    sys_, oracle = snowflake_ifs(spec)
    ao = oracle.exact
    pos0 = ao.arc_positions.index(0)
    posl = ao.arc_positions.index(sys_.k - 1)
    np.testing.assert_allclose(sys_.fixed_point(pos0 + 1), [0.0, 0.0],
                               atol=1e-12)
    np.testing.assert_allclose(sys_.fixed_point(posl + 1), [1.0, 0.0],
                               atol=1e-12)


def test_bounded_turning_koch():
    sys_, oracle = koch()
    est3 = bounded_turning_estimate(sys_, oracle, depth=3)
    est5 = bounded_turning_estimate(sys_, oracle, depth=5)
    assert est3 >= 1.0  # never below the triangle-inequality floor
    # the koch arc has bounded turning: deeper covers do not blow up
    assert est5 <= 1.5 * est3
