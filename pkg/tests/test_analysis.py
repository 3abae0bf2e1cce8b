import math

import numpy as np
import pytest

from holdercurves.analysis import (box_counting_dimension,
                                   exponent_scan, holder_constant_estimate,
                                   s_variation_estimate)
from holdercurves.arcs import arc_parameterize
from holdercurves.curves import SampledCurve
from holdercurves.errors import (InsufficientDepths, ScalesBelowResolution,
                                 ValidationError)
from holdercurves.gallery import gallery_entry
from holdercurves.metrics import euclidean


def unit_segment_curve(n=65):
    t = np.linspace(0.0, 1.0, n)
    return SampledCurve(t, t[:, None], euclidean(1))


def test_segment_s_variation_is_length():
    # at s = 1 the estimator recovers the curve length
    assert s_variation_estimate(unit_segment_curve(), 1.0) \
        == pytest.approx(1.0, abs=1e-12)


def test_s_variation_monotone_in_depth():
    e = gallery_entry("koch")
    f = arc_parameterize(e.system, 4, e.oracle())
    s = math.log(4.0) / math.log(3.0)
    vals = [s_variation_estimate(f, s, depth=d) for d in (2, 4, 6, 8)]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


def test_s_variation_bounded_by_holder_constant():
    """sum of diam^s over a partition is at most H^s when the curve is
    Holder-(1/s) with constant H on [0, 1]."""
    e = gallery_entry("koch")
    f = arc_parameterize(e.system, 4, e.oracle())
    s = math.log(4.0) / math.log(3.0)
    var = s_variation_estimate(f, s)
    hold = holder_constant_estimate(f, 1.0 / s)
    assert var <= hold * (1.0 + 1e-9)


def test_holder_constant_segment():
    # identity curve: d(f(t), f(u)) / |t-u| = 1 everywhere
    assert holder_constant_estimate(unit_segment_curve(), 1.0) \
        == pytest.approx(1.0, abs=1e-12)


def test_exponent_scan_koch():
    e = gallery_entry("koch")
    s = math.log(4.0) / math.log(3.0)
    curves = [arc_parameterize(e.system, d, e.oracle()) for d in (1, 3, 5)]
    res = exponent_scan(curves, [1.05, s, 1.5])
    assert res.verdicts[1.05] == "diverging"
    assert res.verdicts[s] == "bounded"
    assert res.verdicts[1.5] == "bounded"
    assert res.crossover == pytest.approx(s)


def test_exponent_scan_straight_family_all_bounded():
    curves = [unit_segment_curve(n) for n in (9, 33, 129)]
    res = exponent_scan(curves, [1.0, 1.3, 2.0])
    assert all(v == "bounded" for v in res.verdicts.values())
    assert res.crossover == pytest.approx(1.0)


def test_exponent_scan_needs_three_depths():
    with pytest.raises(InsufficientDepths):
        exponent_scan([unit_segment_curve(), unit_segment_curve()], [1.5])


def test_box_counting_segment():
    pts = unit_segment_curve(4097).points
    dim, counts = box_counting_dimension(pts, [2.0 ** -e for e in range(3, 9)])
    assert dim == pytest.approx(1.0, abs=0.05)
    assert counts[2.0 ** -3] == 8 + 1  # endpoint 1.0 opens one extra box


def test_box_counting_koch():
    e = gallery_entry("koch")
    f = arc_parameterize(e.system, 6, e.oracle())
    dim, _ = box_counting_dimension(f.points,
                                    [3.0 ** -e for e in range(2, 6)])
    assert dim == pytest.approx(math.log(4.0) / math.log(3.0), abs=0.08)


def test_box_counting_guard_rails():
    pts = np.zeros((4, 2))
    with pytest.raises(ValidationError):
        box_counting_dimension(pts, [0.5])
    with pytest.raises(ValidationError):
        box_counting_dimension(pts, [-0.5, 0.1])
    with pytest.raises(ScalesBelowResolution):
        box_counting_dimension(pts, [0.001, 0.5], cover_eps=0.01)
