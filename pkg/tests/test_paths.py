import numpy as np
import pytest

from holdercurves.errors import AlphaTooSmall, ValidationError
from holdercurves.gallery import gallery_entry
from holdercurves.geometry import (AdjacencyOracle, ArcOrderOracle,
                                   hausdorff_distance)
from holdercurves.ifs import IFSSystem, similarity_dimension, word_cut
from holdercurves.paths import (chain, holder_limit_bound, holder_path,
                                holder_path_stages, parameterize)

SEGMENT = IFSSystem(
    matrices=np.array([[[0.5]], [[0.5]]]),
    offsets=np.array([[0.0], [0.5]]),
)


def test_limit_bound_values():
    assert holder_limit_bound(1.0, 1.0, 0.5, 0.5, 1.0) == pytest.approx(10.0)
    # beta = 0: a constant sequence keeps just the stagewise constant
    assert holder_limit_bound(2.0, 0.0, 0.5, 0.5, 2.0) == pytest.approx(8.0)
    assert holder_limit_bound(3.0, 0.0, 0.25, 0.9, 1.0) == pytest.approx(12.0)


def test_limit_bound_validation():
    with pytest.raises(ValidationError):
        holder_limit_bound(1.0, 1.0, 1.5, 0.5, 1.0)
    with pytest.raises(ValidationError):
        holder_limit_bound(1.0, 1.0, 0.5, 0.0, 1.0)
    with pytest.raises(ValidationError):
        holder_limit_bound(-1.0, 1.0, 0.5, 0.5, 1.0)
    with pytest.raises(ValidationError):
        holder_limit_bound(1.0, 1.0, 0.5, 0.5, 0.0)


def test_chain_on_gasket():
    e = gallery_entry("gasket")
    sys_ = e.system
    x = sys_.fixed_point(1)
    y = sys_.fixed_point(2)
    links = chain(sys_, x, y, 0.25, e.oracle())
    # repetition-free and pairwise adjacent in order
    letters = [w.letters for w in links]
    assert len(set(letters)) == len(letters)
    oracle = e.oracle()
    for u, v in zip(links, links[1:]):
        assert oracle.adjacent(sys_, u, v)


def test_path_endpoints_pinned():
    e = gallery_entry("gasket")
    sys_ = e.system
    x = sys_.fixed_point(1)
    y = sys_.fixed_point(3)
    for f in holder_path_stages(sys_, x, y, 4, e.oracle()):
        np.testing.assert_allclose(f.points[0], x, atol=1e-12)
        np.testing.assert_allclose(f.points[-1], y, atol=1e-12)
        assert f.params[0] == 0.0 and f.params[-1] == pytest.approx(1.0)


def test_path_telescoping():
    """Consecutive stages differ by less than 3 r^m at shared breakpoints."""
    e = gallery_entry("gasket")
    sys_ = e.system
    stages = holder_path_stages(sys_, sys_.fixed_point(1),
                                sys_.fixed_point(2), 5, e.oracle())
    r = float(sys_.lips[0])
    for m, (f, g) in enumerate(zip(stages, stages[1:]), start=1):
        gaps = sys_.metric.dist(f.points, g.evaluate(f.params))
        assert float(np.max(gaps)) < 3.0 * r ** m


def test_path_interval_budget():
    """Every stage-m interval is at least L_w^s long."""
    e = gallery_entry("gasket")
    sys_ = e.system
    s = similarity_dimension(sys_)
    f = holder_path(sys_, sys_.fixed_point(1), sys_.fixed_point(2), 3,
                    e.oracle())
    r = float(sys_.lips[0])
    # the cut at r^3 selects words with weight in [r^4, r^3), here r^4 exactly
    w_min = min(w.weight for w in word_cut(sys_, r ** 3))
    lengths = np.diff(f.params)
    assert np.all(lengths >= w_min ** s - 1e-12)
    assert np.sum(lengths) == pytest.approx(1.0)


def test_segment_path_is_linear():
    oracle = AdjacencyOracle(mode="exact",
                             exact=ArcOrderOracle(2, (0.0,), (1.0,)))
    f = holder_path(SEGMENT, [0.0], [1.0], 5, oracle)
    np.testing.assert_allclose(f.points[:, 0], f.params, atol=1e-9)


def test_parameterize_alpha_too_small():
    with pytest.raises(AlphaTooSmall):
        parameterize(gallery_entry("gasket").system, 1.5, 2,
                     gallery_entry("gasket").oracle())


def test_parameterize_rejects_bad_depth():
    with pytest.raises(ValidationError):
        parameterize(SEGMENT, 1.1, 0)


def test_parameterize_segment_covers_interval():
    f = parameterize(SEGMENT, 1.1, 4)
    cover = np.linspace(0.0, 1.0, 201)[:, None]
    assert hausdorff_distance(f.points, cover, SEGMENT.metric) <= 0.1
    # closed curve through the base anchor
    np.testing.assert_allclose(f.points[0], f.points[-1], atol=1e-12)


def test_parameterize_gasket_hits_anchors():
    e = gallery_entry("gasket")
    sys_ = e.system
    f = parameterize(sys_, 1.7, 2, e.oracle())
    q = sys_.base_point
    pts = f.points
    for w in word_cut(sys_, float(sys_.lips[0]) ** 2):
        anchor = sys_.apply_word(w.letters, q)
        d = np.min(sys_.metric.dist(anchor, pts))
        assert d <= 1e-9


def test_parameterize_holder_modulus():
    """Empirical Holder modulus at exponent 1/alpha stays bounded on a
    random sample of parameter pairs."""
    e = gallery_entry("gasket")
    sys_ = e.system
    alpha = 1.8
    f = parameterize(sys_, alpha, 2, e.oracle())
    rng = np.random.default_rng(11)
    t = rng.random(400)
    u = rng.random(400)
    ratios = sys_.metric.dist(f.evaluate(t), f.evaluate(u)) \
        / np.abs(t - u) ** (1.0 / alpha)
    assert float(np.max(ratios)) < 50.0
