import math

import numpy as np
import pytest

from holdercurves.carpets import (SpongeSpec, carpet_connectivity_precheck,
                                  carpet_dimensions, carpet_oracle,
                                  snowflake_metric, sponge_ifs,
                                  sponge_parameterize)
from holdercurves.errors import DisconnectedCarpet, ValidationError
from holdercurves.gallery import gallery_entry

FULL22 = SpongeSpec((2, 2), [(1, 1), (1, 2), (2, 1), (2, 2)])


def test_spec_validation():
    with pytest.raises(ValidationError):
        SpongeSpec((2,), [(1,)])
    with pytest.raises(ValidationError):
        SpongeSpec((3, 2), [(1, 1)])          # decreasing bases
    with pytest.raises(ValidationError):
        SpongeSpec((2, 3), [])
    with pytest.raises(ValidationError):
        SpongeSpec((2, 3), [(1, 1), (1, 1)])  # duplicate
    with pytest.raises(ValidationError):
        SpongeSpec((2, 3), [(1, 4)])          # out of range
    with pytest.raises(ValidationError):
        SpongeSpec((2, 3), [(1, 1, 1)])       # wrong arity


def test_sponge_ifs_shapes():
    assert sponge_ifs(FULL22).k == 4
    fig2 = sponge_ifs(gallery_entry("fig2-carpet").spec)
    assert fig2.k == 5 and float(fig2.lips[0]) == 0.5
    fig4 = sponge_ifs(gallery_entry("fig4-carpet").spec)
    assert fig4.k == 14 and float(fig4.lips[0]) == pytest.approx(1.0 / 3.0)


def test_fig2_similarity_dimension():
    rep = carpet_dimensions(gallery_entry("fig2-carpet").spec)
    assert rep.similarity == pytest.approx(math.log2(5.0), abs=1e-12)


def test_fig4_dimensions_high_precision():
    """All four values of the bases-(3,6) carpet against a 50-digit oracle."""
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 50
    rep = carpet_dimensions(gallery_entry("fig4-carpet").spec)
    ln3, ln6 = mp.log(3), mp.log(6)
    theta = ln3 / ln6
    haus = mp.log(2 * mp.mpf(6) ** theta + mp.mpf(2) ** theta) / ln3
    mink = 1 + mp.log(mp.mpf(14) / 3) / ln6
    assert rep.similarity == pytest.approx(float(mp.log(14) / ln3), abs=1e-9)
    assert rep.hausdorff == pytest.approx(float(haus), abs=1e-9)
    assert rep.minkowski == pytest.approx(float(mink), abs=1e-9)
    assert rep.assouad == pytest.approx(2.0, abs=1e-12)


def test_single_cell_and_full_grid_dimensions():
    one = carpet_dimensions(SpongeSpec((2, 3), [(1, 2)]))
    assert one.similarity == one.hausdorff == one.minkowski == one.assouad == 0.0
    full = SpongeSpec((2, 3), [(i, j) for i in (1, 2) for j in (1, 2, 3)])
    rep = carpet_dimensions(full)
    # the metric dimensions of the full square are 2; the similarity value
    # log_{n1}(card A) exceeds it for unequal bases (it is only the Holder
    # exponent bound, not a dimension of the set)
    for val in (rep.hausdorff, rep.minkowski, rep.assouad):
        assert val == pytest.approx(2.0, abs=1e-12)
    assert rep.similarity == pytest.approx(math.log2(6.0), abs=1e-12)


def _random_spec(rng):
    n1 = int(rng.integers(2, 5))
    n2 = int(rng.integers(n1, 9))
    all_cells = [(i, j) for i in range(1, n1 + 1) for j in range(1, n2 + 1)]
    m = int(rng.integers(1, len(all_cells) + 1))
    picks = rng.choice(len(all_cells), size=m, replace=False)
    return SpongeSpec((n1, n2), [all_cells[p] for p in picks])


def test_dimension_ordering_chain():
    """hausdorff <= minkowski <= min(assouad, similarity) on random carpets."""
    rng = np.random.default_rng(42)
    for _ in range(200):
        rep = carpet_dimensions(_random_spec(rng))
        assert rep.hausdorff <= rep.minkowski + 1e-9
        assert rep.minkowski <= min(rep.assouad, rep.similarity) + 1e-9


def test_equal_bases_collapse():
    rep = carpet_dimensions(gallery_entry("sierpinski-carpet").spec)
    s = math.log(8.0) / math.log(3.0)
    for val in (rep.similarity, rep.hausdorff, rep.minkowski, rep.assouad):
        assert val == pytest.approx(s, abs=1e-12)
    assert "equal bases" in rep.note


def test_snowflake_metric_exponents():
    assert snowflake_metric(FULL22).exponents is None  # plain Euclidean
    m23 = snowflake_metric(SpongeSpec((2, 3), [(1, 1)]))
    np.testing.assert_allclose(m23.exponents,
                               [1.0, math.log(2.0) / math.log(3.0)],
                               atol=1e-15)
    m235 = snowflake_metric(gallery_entry("sponge235").spec)
    np.testing.assert_allclose(
        m235.exponents,
        [1.0, math.log(2) / math.log(3), math.log(2) / math.log(5)],
        atol=1e-15)


def test_lift_makes_maps_exact_similarities():
    """Under the snowflake metric every sponge map scales distances by
    exactly 1/n_1 (relative error 1e-12 over 1000 random pairs)."""
    spec = gallery_entry("sponge235").spec
    lifted = sponge_ifs(spec, snowflake=True)
    rng = np.random.default_rng(5)
    x = rng.random((1000, 3))
    y = rng.random((1000, 3))
    base = lifted.metric.dist(x, y)
    for i in range(1, lifted.k + 1):
        d = lifted.metric.dist(lifted.apply(i, x), lifted.apply(i, y))
        np.testing.assert_allclose(d * spec.bases[0], base, rtol=1e-12)


def test_connectivity_fig4():
    pre = carpet_connectivity_precheck(gallery_entry("fig4-carpet").spec)
    assert pre.classification == "general"
    assert pre.first_iteration_connected
    assert pre.touches_left and pre.touches_right
    assert pre.witness_cell == (2, 1)
    assert pre.verdict.connected


def test_connectivity_two_full_columns():
    cells = [(i, j) for i in (1, 3) for j in range(1, 7)]
    pre = carpet_connectivity_precheck(SpongeSpec((3, 6), cells))
    assert not pre.first_iteration_connected
    assert pre.verdict.verdict == "disconnected"


def test_connectivity_classifications():
    full = carpet_connectivity_precheck(FULL22)
    assert full.classification == "square"
    line = carpet_connectivity_precheck(
        SpongeSpec((2, 3), [(1, 1), (1, 2), (1, 3)]))
    assert line.classification == "vertical-line"
    point = carpet_connectivity_precheck(SpongeSpec((2, 3), [(2, 2)]))
    assert point.classification == "point"


def test_parameterize_vertical_line_degenerate():
    curve = sponge_parameterize(SpongeSpec((2, 3), [(2, 1), (2, 2), (2, 3)]), 1)
    np.testing.assert_allclose(curve.points, [[1.0, 0.0], [1.0, 1.0]])


def test_parameterize_rejects_disconnected():
    cells = [(i, j) for i in (1, 3) for j in range(1, 7)]
    with pytest.raises(DisconnectedCarpet):
        sponge_parameterize(SpongeSpec((3, 6), cells), 1)


def test_parameterize_fig2_meets_every_rectangle():
    spec = gallery_entry("fig2-carpet").spec
    curve = sponge_parameterize(spec, 1, r=0.078)
    assert curve.metric.exponents is None  # descended to Euclidean
    n1, n2 = spec.bases
    for (i, j) in spec.cells:
        inside = ((curve.points[:, 0] >= (i - 1) / n1 - 1e-12)
                  & (curve.points[:, 0] <= i / n1 + 1e-12)
                  & (curve.points[:, 1] >= (j - 1) / n2 - 1e-12)
                  & (curve.points[:, 1] <= j / n2 + 1e-12))
        assert np.any(inside)


def test_parameterize_square_space_filling():
    curve = sponge_parameterize(FULL22, 2, r=0.078)
    grid = np.stack(np.meshgrid(np.linspace(0, 1, 21),
                                np.linspace(0, 1, 21)), axis=-1).reshape(-1, 2)
    from holdercurves.geometry import hausdorff_distance
    from holdercurves.metrics import euclidean
    assert hausdorff_distance(grid, curve.points, euclidean(2)) <= 3 * 0.078 ** 2 + 0.06
