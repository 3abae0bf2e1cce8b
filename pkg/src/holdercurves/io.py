"""Reading and writing system description files (JSON).

Three kinds of description are supported, discriminated by a "kind" field:

  ifs      {"kind": "ifs", "dim": n, "metric": "euclidean" |
            {"snowflake": [e_1, ..., e_n]},
            "maps": [{"matrix": row-major list, "offset": list,
                      "lip": optional float}, ...],
            "arc_order": optional {"e0": point, "e1": point,
                                   "positions": list or null}}

The optional "arc_order" block records that the level-1 cylinders are
consecutive along an arc with the given endpoints; loaders attach it to the
returned system (``system.arc_order``) so an exact adjacency oracle can be
rebuilt from the file alone.
  carpet   {"kind": "carpet", "bases": [n_1, ...], "cells": [[c_1, ...], ...]}
  diamond  {"kind": "diamond", "vertices": [[x, y], ...],
            "apertures": [a_1, ...]}

Floats are written with repr-precision so a round trip reproduces the
in-process system bit-identically.
"""

from __future__ import annotations

import json
import warnings

import numpy as np

from .arcs import DiamondSpec
from .carpets import SpongeSpec
from .errors import ValidationError
from .ifs import IFSSystem
from .metrics import Metric

__all__ = ["load_spec", "loads_spec", "ifs_to_dict", "spec_to_dict",
           "dumps_spec", "save_spec"]


def _metric_from_field(dim: int, field) -> Metric:
    if field in (None, "euclidean"):
        return Metric(dim)
    if isinstance(field, dict) and "snowflake" in field:
        return Metric(dim, exponents=field["snowflake"])
    raise ValidationError(f"unrecognized metric description {field!r}")


def _ifs_from_dict(d: dict) -> IFSSystem:
    try:
        dim = int(d["dim"])
        maps = d["maps"]
    except KeyError as exc:
        raise ValidationError(f"ifs description missing field {exc}")
    if not maps:
        raise ValidationError("ifs description has no maps")
    mats, offs, lips = [], [], []
    has_lips = any("lip" in m for m in maps)
    for m in maps:
        mat = np.asarray(m["matrix"], dtype=float).reshape(dim, dim)
        off = np.asarray(m["offset"], dtype=float)
        if off.shape != (dim,):
            raise ValidationError("offset has wrong dimension")
        mats.append(mat)
        offs.append(off)
        lips.append(m.get("lip"))
    metric = _metric_from_field(dim, d.get("metric"))
    # IFSSystem drops non-contractive maps with a warning; a description
    # file with such a map is invalid, so the drop becomes an error here
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        system = IFSSystem(mats, offs, metric,
                           declared_lips=lips if has_lips else None)
    if system.k != len(maps):
        raise ValidationError(
            "description contains non-contractive maps: "
            + "; ".join(str(w.message) for w in caught))
    if "arc_order" in d:
        a = d["arc_order"]
        system.arc_order = {
            "e0": [float(x) for x in a["e0"]],
            "e1": [float(x) for x in a["e1"]],
            "positions": (None if a.get("positions") is None
                          else [int(p) for p in a["positions"]]),
        }
    return system


def _carpet_from_dict(d: dict) -> SpongeSpec:
    try:
        return SpongeSpec(d["bases"], [tuple(c) for c in d["cells"]])
    except KeyError as exc:
        raise ValidationError(f"carpet description missing field {exc}")


def _diamond_from_dict(d: dict) -> DiamondSpec:
    try:
        return DiamondSpec(d["vertices"], d["apertures"])
    except KeyError as exc:
        raise ValidationError(f"diamond description missing field {exc}")


_PARSERS = {"ifs": _ifs_from_dict, "carpet": _carpet_from_dict,
            "sponge": _carpet_from_dict, "diamond": _diamond_from_dict,
            "snowflake": _diamond_from_dict}


def loads_spec(text: str):
    """Parse a description string into an IFSSystem, SpongeSpec or
    DiamondSpec."""
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"description is not valid JSON: {exc}")
    if not isinstance(d, dict) or "kind" not in d:
        raise ValidationError('description must be an object with a "kind"')
    kind = d["kind"]
    if kind not in _PARSERS:
        raise ValidationError(f"unknown description kind {kind!r}")
    return _PARSERS[kind](d)


def load_spec(path):
    with open(path) as fh:
        return loads_spec(fh.read())


def ifs_to_dict(system: IFSSystem) -> dict:
    metric = ("euclidean" if system.metric.is_euclidean
              else {"snowflake": [float(e) for e in system.metric.exponents]})
    d = {
        "kind": "ifs",
        "dim": system.dim,
        "metric": metric,
        "maps": [
            {"matrix": [float(v) for v in system.matrices[i].ravel()],
             "offset": [float(v) for v in system.offsets[i]],
             "lip": float(system.lips[i])}
            for i in range(system.k)],
    }
    arc = getattr(system, "arc_order", None)
    if arc is not None:
        d["arc_order"] = {
            "e0": [float(x) for x in arc["e0"]],
            "e1": [float(x) for x in arc["e1"]],
            "positions": (None if arc.get("positions") is None
                          else [int(p) for p in arc["positions"]]),
        }
    return d


def spec_to_dict(obj) -> dict:
    """Description dictionary for any supported system object."""
    if isinstance(obj, IFSSystem):
        return ifs_to_dict(obj)
    if isinstance(obj, SpongeSpec):
        return {"kind": "carpet", "bases": list(obj.bases),
                "cells": [list(c) for c in obj.cells]}
    if isinstance(obj, DiamondSpec):
        return {"kind": "diamond",
                "vertices": [[float(x), float(y)] for x, y in obj.vertices],
                "apertures": [float(a) for a in obj.apertures]}
    raise ValidationError(f"cannot serialize {type(obj).__name__}")


def dumps_spec(obj) -> str:
    return json.dumps(spec_to_dict(obj), indent=2) + "\n"


def save_spec(obj, path):
    with open(path, "w") as fh:
        fh.write(dumps_spec(obj))
