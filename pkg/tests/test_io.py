import json

import numpy as np
import pytest

from holdercurves.arcs import DiamondSpec
from holdercurves.carpets import SpongeSpec, sponge_ifs
from holdercurves.errors import ValidationError
from holdercurves.gallery import gallery_entry
from holdercurves.io import (dumps_spec, load_spec, loads_spec, save_spec,
                             spec_to_dict)


def test_ifs_round_trip_bit_identical():
    sys_ = gallery_entry("koch").system
    back = loads_spec(dumps_spec(sys_))
    np.testing.assert_array_equal(back.matrices, sys_.matrices)
    np.testing.assert_array_equal(back.offsets, sys_.offsets)
    np.testing.assert_array_equal(back.lips, sys_.lips)


def test_snowflake_metric_round_trip():
    sys_ = sponge_ifs(gallery_entry("fig2-carpet").spec, snowflake=True)
    back = loads_spec(dumps_spec(sys_))
    np.testing.assert_array_equal(back.metric.exponents,
                                  sys_.metric.exponents)
    np.testing.assert_array_equal(back.lips, sys_.lips)


def test_declared_lips_survive():
    # the snowflake lift declares lip 1/n1, which differs from the operator
    # norm of the diagonal matrix; the file must carry it
    sys_ = sponge_ifs(gallery_entry("fig2-carpet").spec, snowflake=True)
    d = spec_to_dict(sys_)
    assert all(m["lip"] == 0.5 for m in d["maps"])


def test_arc_order_round_trip():
    from holdercurves.arcs import snowflake_ifs
    spec = gallery_entry("fig3-snowflake").spec
    sys_, oracle = snowflake_ifs(spec)
    sys_.arc_order = {"e0": [0.0, 0.0], "e1": [1.0, 0.0],
                      "positions": list(oracle.exact.arc_positions)}
    back = loads_spec(dumps_spec(sys_))
    assert back.arc_order == sys_.arc_order


def test_carpet_round_trip():
    spec = gallery_entry("fig4-carpet").spec
    back = loads_spec(dumps_spec(spec))
    assert isinstance(back, SpongeSpec)
    assert back == spec


def test_diamond_round_trip():
    spec = gallery_entry("fig3-snowflake").spec
    back = loads_spec(dumps_spec(spec))
    assert isinstance(back, DiamondSpec)
    np.testing.assert_array_equal(back.vertices, spec.vertices)
    np.testing.assert_array_equal(back.apertures, spec.apertures)


def test_file_round_trip(tmp_path):
    path = tmp_path / "koch.ifs.json"
    sys_ = gallery_entry("koch").system
    save_spec(sys_, path)
    back = load_spec(path)
    np.testing.assert_array_equal(back.matrices, sys_.matrices)


def test_rejects_bad_input():
    with pytest.raises(ValidationError):
        loads_spec("{not json")
    with pytest.raises(ValidationError):
        loads_spec(json.dumps({"kind": "mystery"}))
    with pytest.raises(ValidationError):
        loads_spec(json.dumps({"dim": 1, "maps": []}))
    # a description file containing a non-contractive map is invalid
    doc = {"kind": "ifs", "dim": 1,
           "maps": [{"matrix": [2.0], "offset": [0.0]},
                    {"matrix": [0.5], "offset": [0.0]}]}
    with pytest.raises(ValidationError):
        loads_spec(json.dumps(doc))


def test_rejects_malformed_carpet():
    with pytest.raises(ValidationError):
        loads_spec(json.dumps({"kind": "carpet", "bases": [2, 3],
                               "cells": [[1, 9]]}))
