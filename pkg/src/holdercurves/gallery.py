"""Built-in example systems with documented constants.

Every entry carries the system itself, an exact adjacency oracle when one
is available, a separation witness (v, tau) for the tour pipeline when the
attractor supports it, and a table of documented constants, each tagged
with its provenance and a short derivation anchor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arcs import DiamondSpec, snowflake_ifs
from .carpets import SpongeSpec, carpet_oracle, sponge_ifs
from .errors import ValidationError
from .geometry import AdjacencyOracle, ArcOrderOracle, GasketOracle
from .ifs import IFSSystem

__all__ = ["DocumentedConstant", "GalleryEntry", "gallery_names",
           "gallery_entry"]


@dataclass(frozen=True)
class DocumentedConstant:
    value: float
    provenance: str     # "closed form" | "derived" | "construction"
    source: str         # one-line derivation anchor


@dataclass
class GalleryEntry:
    name: str
    description: str
    kind: str                       # "ifs" | "carpet" | "diamond"
    system: IFSSystem
    spec: object | None = None      # SpongeSpec / DiamondSpec when applicable
    exact_oracle: object | None = None
    sosc_witness: tuple | None = None  # (v, tau) for the tour pipeline
    documented_constants: dict = field(default_factory=dict)

    def oracle(self) -> AdjacencyOracle:
        """The best adjacency oracle for this entry."""
        if self.exact_oracle is not None:
            return AdjacencyOracle(exact=self.exact_oracle)
        return AdjacencyOracle()


def _segment():
    mats = [[[0.5]], [[0.5]]]
    offs = [[0.0], [0.5]]
    return GalleryEntry(
        name="segment",
        description="the unit segment as two ratio-1/2 maps on the line",
        kind="ifs",
        system=IFSSystem(mats, offs),
        documented_constants={
            "similarity_dimension": DocumentedConstant(
                1.0, "closed form", "2 * (1/2)^s = 1 gives s = 1"),
        })


def _cantor_pair():
    mats = [[[1.0 / 3.0]], [[1.0 / 3.0]]]
    offs = [[0.0], [2.0 / 3.0]]
    return GalleryEntry(
        name="cantor-pair",
        description="middle-third pair: two ratio-1/3 maps separated by a "
                    "length-1/3 gap (disconnected)",
        kind="ifs",
        system=IFSSystem(mats, offs),
        documented_constants={
            "similarity_dimension": DocumentedConstant(
                math.log(2.0) / math.log(3.0), "closed form",
                "2 * (1/3)^s = 1 gives s = log_3 2"),
            "gap": DocumentedConstant(
                1.0 / 3.0, "closed form",
                "distance between [0, 1/3] and [2/3, 1]"),
        })


def _koch():
    c, s3 = 0.5, math.sqrt(3.0) / 2.0
    rot = np.array([[c, -s3], [s3, c]]) / 3.0       # +60 degrees, scaled
    roti = np.array([[c, s3], [-s3, c]]) / 3.0      # -60 degrees, scaled
    eye = np.eye(2) / 3.0
    mats = [eye, rot, roti, eye]
    offs = [[0.0, 0.0], [1.0 / 3.0, 0.0],
            [0.5, math.sqrt(3.0) / 6.0], [2.0 / 3.0, 0.0]]
    return GalleryEntry(
        name="koch",
        description="von Koch curve: four ratio-1/3 maps from (0,0) to (1,0)",
        kind="ifs",
        system=IFSSystem(mats, offs),
        exact_oracle=ArcOrderOracle(4, (0.0, 0.0), (1.0, 0.0)),
        documented_constants={
            "similarity_dimension": DocumentedConstant(
                math.log(4.0) / math.log(3.0), "closed form",
                "4 * (1/3)^s = 1 gives s = log_3 4"),
        })


def _gasket():
    corners = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3.0) / 2.0]])
    mats = [np.eye(2) * 0.5] * 3
    offs = corners * 0.5
    return GalleryEntry(
        name="gasket",
        description="Sierpinski gasket: three ratio-1/2 maps on an "
                    "equilateral triangle",
        kind="ifs",
        system=IFSSystem(mats, offs),
        exact_oracle=GasketOracle(),
        sosc_witness=(np.array([5.0 / 8.0, math.sqrt(3.0) / 8.0]), 0.2),
        documented_constants={
            "similarity_dimension": DocumentedConstant(
                math.log(3.0) / math.log(2.0), "closed form",
                "3 * (1/2)^s = 1 gives s = log_2 3"),
        })


def _sponge_entry(name, description, bases, cells, sosc=None, extras=None):
    spec = SpongeSpec(bases, cells)
    n1 = bases[0]
    consts = {
        "similarity_dimension": DocumentedConstant(
            math.log(len(spec.cells)) / math.log(n1), "closed form",
            f"{len(spec.cells)} maps of snowflake ratio 1/{n1}"),
    }
    if extras:
        consts.update(extras)
    return GalleryEntry(
        name=name, description=description, kind="carpet",
        system=sponge_ifs(spec), spec=spec,
        exact_oracle=carpet_oracle(spec).exact,
        sosc_witness=sosc, documented_constants=consts)


def _square():
    return _sponge_entry(
        "square", "the full 2x2 grid carpet (the unit square)",
        (2, 2), [(i, j) for i in (1, 2) for j in (1, 2)],
        sosc=(np.array([0.5, 0.5]), 0.4))


def _sierpinski_carpet():
    cells = [(i, j) for i in (1, 2, 3) for j in (1, 2, 3) if (i, j) != (2, 2)]
    return _sponge_entry(
        "sierpinski-carpet",
        "the 3x3 carpet with the center cell removed",
        (3, 3), cells)


def _fig2_carpet():
    cells = [(1, 1), (1, 3), (2, 1), (2, 2), (2, 3)]
    theta = math.log(2.0) / math.log(3.0)
    extras = {
        "hausdorff_dimension": DocumentedConstant(
            math.log(2.0 ** theta + 3.0 ** theta) / math.log(2.0),
            "closed form",
            "log_2(sum_i t_i^theta), theta = log_3 2, columns t = (2, 3)"),
    }
    return _sponge_entry(
        "fig2-carpet",
        "five-cell carpet on the 2x3 grid (similarity dimension log_2 5)",
        (2, 3), cells, extras=extras)


def _fig4_carpet():
    cells = ([(1, j) for j in range(1, 7)] + [(3, j) for j in range(1, 7)]
             + [(2, 1), (2, 6)])
    return _sponge_entry(
        "fig4-carpet",
        "fourteen-cell carpet on the 3x6 grid: two full columns joined "
        "top and bottom",
        (3, 6), cells)


def _sponge235():
    bases = (2, 3, 5)
    cells = [(a, b, c) for a in range(1, 3) for b in range(1, 4)
             for c in range(1, 6)]
    return _sponge_entry(
        "sponge-235", "the full 2x3x5 grid sponge (the unit cube)",
        bases, cells)


def _fig3_snowflake():
    spec = DiamondSpec(
        vertices=[(0.0, 0.0), (0.46, 0.2), (0.47, -0.268), (0.48, 0.276),
                  (0.52, -0.276), (0.53, 0.268), (0.54, -0.2), (1.0, 0.0)],
        apertures=[0.015] * 7)
    system, oracle = snowflake_ifs(spec)
    exact = oracle.exact
    sum_sq = float(np.sum(spec.lengths() ** 2))
    from .ifs import similarity_dimension
    return GalleryEntry(
        name="fig3-snowflake",
        description="a seven-segment polygonal snowflake with total squared "
                    "length above 1 (plane-filling-pressure example)",
        kind="diamond",
        system=system, spec=spec, exact_oracle=exact,
        documented_constants={
            "sum_squared_lengths": DocumentedConstant(
                sum_sq, "derived",
                "sum |l_i|^2 over the generator segments; > 1 forces "
                "Holder exponent 1/2 to fail"),
            "similarity_dimension": DocumentedConstant(
                float(similarity_dimension(system)), "derived",
                "bisection on sum |l_i|^s = 1"),
        })


_FACTORIES = {
    "segment": _segment,
    "cantor-pair": _cantor_pair,
    "koch": _koch,
    "gasket": _gasket,
    "square": _square,
    "sierpinski-carpet": _sierpinski_carpet,
    "fig2-carpet": _fig2_carpet,
    "fig4-carpet": _fig4_carpet,
    "fig3-snowflake": _fig3_snowflake,
    "sponge-235": _sponge235,
}

_ALIASES = {
    "fig2": "fig2-carpet",
    "fig4": "fig4-carpet",
    "fig3": "fig3-snowflake",
    "sponge235": "sponge-235",
}


def gallery_names() -> list[str]:
    return sorted(_FACTORIES)


def gallery_entry(name: str) -> GalleryEntry:
    """Build the named gallery entry (aliases fig2/fig3/fig4 accepted)."""
    key = _ALIASES.get(name, name)
    if key not in _FACTORIES:
        raise ValidationError(
            f"unknown gallery entry {name!r}; available: "
            + ", ".join(gallery_names()))
    return _FACTORIES[key]()
