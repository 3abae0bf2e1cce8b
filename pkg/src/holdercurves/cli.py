"""Command-line front end.

Subcommands: dim, cut, connect, path, param, arc, snowflake, tour, carpet,
sponge, scan, gallery.  Every subcommand takes its input either from
``--gallery NAME`` or ``--spec FILE`` and optionally writes artifacts
(CSV/SVG/JSON) next to the ``--out`` base path.

Exit codes: 0 success, 1 usage error, 2 validation error, 3 construction
error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .analysis import exponent_scan
from .arcs import (DiamondSpec, arc_parameterize, detect_branching,
                   snowflake_ifs)
from .carpets import (SpongeSpec, carpet_connectivity_precheck,
                      carpet_dimensions, carpet_oracle, sponge_ifs,
                      sponge_parameterize)
from .errors import ConstructionError, ValidationError
from .geometry import (AdjacencyOracle, ArcOrderOracle, attractor_cover,
                       connectedness_check)
from .ifs import IFSSystem, cut_mass, similarity_dimension, word_cut
from .io import ifs_to_dict, load_spec
from .gallery import gallery_entry, gallery_names
from .curves import cover_points_csv
from .paths import holder_path, parameterize
from .tours import build_nets, build_trees, tour_stages, validate_sosc


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; the CLI contract
    reserves 2 for validation errors and uses 1 for usage."""

    def error(self, message):
        self.exit(1, f"{self.prog}: usage error: {message}\n")


# ---------------------------------------------------------------------------
# input plumbing


def _load_input(args):
    """The object behind --gallery/--spec plus its gallery entry (if any)."""
    if args.gallery:
        entry = gallery_entry(args.gallery)
        obj = entry.spec if entry.spec is not None else entry.system
        return obj, entry
    if args.spec:
        return load_spec(args.spec), None
    raise ValidationError("one of --gallery or --spec is required")


def _as_ifs(obj, lifted: bool = False) -> IFSSystem:
    """Coerce any loadable object to an IFS (sponges optionally lifted)."""
    if isinstance(obj, IFSSystem):
        return obj
    if isinstance(obj, SpongeSpec):
        return sponge_ifs(obj, snowflake=lifted)
    if isinstance(obj, DiamondSpec):
        system, _ = snowflake_ifs(obj)
        return system
    raise ValidationError(f"cannot interpret input of type {type(obj)!r}")


def _oracle_for(obj, entry, choice: str) -> AdjacencyOracle:
    if choice == "approx":
        return AdjacencyOracle()
    if entry is not None and entry.exact_oracle is not None:
        return entry.oracle()
    if isinstance(obj, SpongeSpec):
        return carpet_oracle(obj)
    if isinstance(obj, DiamondSpec):
        _, oracle = snowflake_ifs(obj)
        return oracle
    arc = getattr(obj, "arc_order", None)
    if arc is not None:
        return AdjacencyOracle(mode="exact", exact=ArcOrderOracle(
            obj.k, arc["e0"], arc["e1"], arc_positions=arc["positions"]))
    if choice == "exact":
        raise ValidationError("no exact oracle is available for this input")
    return AdjacencyOracle()


def _write(args, suffix: str, text: str):
    if not args.out:
        return
    path = f"{args.out}.{suffix}"
    with open(path, "w") as fh:
        fh.write(text)
    print(f"wrote {path}")


def _emit_curve(args, curve):
    _write(args, "csv", curve.to_csv())
    _write(args, "svg", curve.to_svg())


def _parse_point(text: str) -> np.ndarray:
    return np.array([float(x) for x in text.split(",")], dtype=float)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_dim(args):
    obj, entry = _load_input(args)
    if isinstance(obj, SpongeSpec):
        s = carpet_dimensions(obj).similarity
    else:
        s = similarity_dimension(_as_ifs(obj))
    print(f"s = {s:.5f}")
    _write(args, "json", json.dumps({"similarity_dimension": s}))
    return 0


def _cmd_cut(args):
    obj, entry = _load_input(args)
    system = _as_ifs(obj, lifted=True)
    cut = word_cut(system, args.delta)
    s = similarity_dimension(system)
    mass = cut_mass(system, cut, s)
    cover = attractor_cover(system, args.delta)
    print(f"cut at delta={args.delta:g}: {len(cut)} words, "
          f"mass at s={s:.6f}: {mass:.12f}")
    _write(args, "csv", cover_points_csv(cover.words, cover.points))
    return 0


def _cmd_connect(args):
    obj, entry = _load_input(args)
    system = _as_ifs(obj)
    oracle = _oracle_for(obj, entry, args.oracle)
    res = connectedness_check(system, oracle)
    if res.verdict == "disconnected":
        print(f"Disconnected (certified); {len(res.components)} components, "
              f"gap >= {res.gap:.6g}")
    elif res.verdict == "connected":
        print("Connected (certified)")
    else:
        print("Connected (likely; approximate oracle)")
    _write(args, "json", json.dumps({
        "verdict": res.verdict,
        "components": res.components,
        "gap": res.gap,
    }))
    return 0


def _cmd_path(args):
    obj, entry = _load_input(args)
    system = _as_ifs(obj)
    oracle = _oracle_for(obj, entry, args.oracle)
    x = _parse_point(args.x)
    y = _parse_point(args.y)
    curve = holder_path(system, x, y, args.m_max, oracle)
    print(f"path with {len(curve)} breakpoints, stage {args.m_max}")
    _emit_curve(args, curve)
    return 0


def _cmd_param(args):
    obj, entry = _load_input(args)
    system = _as_ifs(obj)
    oracle = _oracle_for(obj, entry, args.oracle)
    curve = parameterize(system, args.alpha, args.N, oracle)
    print(f"closed (1/{args.alpha:g})-Holder curve through the attractor, "
          f"{len(curve)} breakpoints")
    _emit_curve(args, curve)
    return 0


def _cmd_arc(args):
    obj, entry = _load_input(args)
    system = _as_ifs(obj)
    oracle = _oracle_for(obj, entry, args.oracle)
    curve = arc_parameterize(system, args.depth, oracle)
    a = curve.points[0]
    b = curve.points[-1]
    print(f"arc with {len(curve)} breakpoints from {a.tolist()} "
          f"to {b.tolist()}")
    _emit_curve(args, curve)
    return 0


def _cmd_snowflake(args):
    obj, entry = _load_input(args)
    if not isinstance(obj, DiamondSpec):
        raise ValidationError("snowflake expects a diamond generator spec")
    system, oracle = snowflake_ifs(obj)
    d = ifs_to_dict(system)
    ao = oracle.exact
    d["arc_order"] = {"e0": ao.e0.tolist(), "e1": ao.e1.tolist(),
                      "positions": ao.arc_positions}
    text = json.dumps(d, indent=2) + "\n"
    s = similarity_dimension(system)
    print(f"generated {system.k}-map self-affine snowflake IFS, "
          f"s = {s:.6f}")
    if args.out:
        _write(args, "ifs.json", text)
    else:
        print(text)
    return 0


def _cmd_tour(args):
    obj, entry = _load_input(args)
    system = _as_ifs(obj, lifted=True)
    oracle = _oracle_for(obj, entry, args.oracle)
    if args.v is not None:
        v = _parse_point(args.v)
        tau = args.tau
        if tau is None:
            raise ValidationError("--tau is required when --v is given")
    elif entry is not None and entry.sosc_witness is not None:
        v, tau = entry.sosc_witness
    else:
        raise ValidationError("no separation witness: pass --v and --tau")
    sosc = validate_sosc(system, v, tau, levels=min(args.N, 2),
                         r=args.r_override)
    curve = tour_stages(system, sosc, args.N, oracle)[-1]
    print(f"closed tour with {len(curve)} samples at mesh r={sosc.r:g}, "
          f"depth N={args.N}")
    _emit_curve(args, curve)
    _write(args, "json", json.dumps(
        _tour_report(system, sosc, args.N, oracle), indent=1))
    return 0


def _tour_report(system, sosc, N, oracle) -> dict:
    """Numeric record of the per-level net and tree inequalities."""
    nets = build_nets(system, sosc, N)
    trees = build_trees(system, sosc, nets, oracle)
    r = sosc.r
    levels = []
    for net, tree in zip(nets, trees):
        m = net.level
        pts = tree.points
        lengths = system.metric.dist_inf(pts[tree.edges[:, 0]],
                                         pts[tree.edges[:, 1]])
        levels.append({
            "level": m,
            "net_size": len(net.words),
            "separation_bound": 8 * r * r ** m,
            "edge_count": len(tree.edges),
            "edge_min": float(lengths.min()),
            "edge_max": float(lengths.max()),
            "edge_window_low": 8 * r * r ** m,
            "edge_window_high": 2 * r ** m,
        })
    return {"r": r, "tau": sosc.tau, "v": np.asarray(sosc.v).tolist(),
            "levels": levels}


def _cmd_carpet(args):
    obj, entry = _load_input(args)
    if not isinstance(obj, SpongeSpec):
        raise ValidationError("carpet expects a sponge/carpet spec")
    report = carpet_dimensions(obj)
    payload = {
        "similarity": report.similarity,
        "hausdorff": report.hausdorff,
        "minkowski": report.minkowski,
        "assouad": report.assouad,
        "note": report.note,
    }
    if obj.dim == 2:
        pre = carpet_connectivity_precheck(obj)
        payload["connectivity"] = {
            "classification": pre.classification,
            "first_iteration_connected": pre.first_iteration_connected,
            "touches_left": pre.touches_left,
            "touches_right": pre.touches_right,
            "witness_cell": pre.witness_cell,
            "verdict": None if pre.verdict is None else pre.verdict.verdict,
        }
    text = json.dumps(payload, indent=1)
    print(text)
    _write(args, "json", text)
    return 0


def _cmd_sponge(args):
    obj, entry = _load_input(args)
    if not isinstance(obj, SpongeSpec):
        raise ValidationError("sponge expects a sponge/carpet spec")
    curve = sponge_parameterize(obj, args.N, r=args.r_override)
    print(f"space-filling sponge tour with {len(curve)} samples, "
          f"depth N={args.N}")
    _emit_curve(args, curve)
    return 0


def _cmd_scan(args):
    obj, entry = _load_input(args)
    depths = [int(d) for d in args.depths.split(",")]
    exponents = [float(a) for a in args.exponents.split(",")]
    if isinstance(obj, SpongeSpec):
        system = sponge_ifs(obj, snowflake=True)
        oracle = carpet_oracle(obj)
        from .carpets import _interior_witness
        _, v = _interior_witness(obj, system)
        exps = system.metric.exponents
        if exps is None:
            exps = np.ones(obj.dim)
        tau = 0.5 * float(np.min(np.minimum(v, 1.0 - v) ** exps))
        sosc = validate_sosc(system, v, tau, levels=min(max(depths), 2),
                             r=args.r_override)
        curves = tour_stages(system, sosc, max(depths), oracle)
    else:
        system = _as_ifs(obj)
        oracle = _oracle_for(obj, entry, args.oracle)
        report = detect_branching(system, oracle)
        if report.branching:
            raise ValidationError(
                "scan over a branching IFS needs a carpet spec (tours) or "
                "a non-branching system (arcs)")
        curves = [arc_parameterize(system, d, oracle) for d in depths]
    res = exponent_scan(curves, exponents)
    rows = ["exponent;" + ";".join(f"depth{i + 1}"
                                   for i in range(len(curves)))]
    for a in res.exponents:
        rows.append(f"{a!r};" + ";".join(repr(v) for v in res.estimates[a]))
    for a in res.exponents:
        print(f"alpha={a:g}: {res.verdicts[a]}  "
              + " ".join(f"{v:.4g}" for v in res.estimates[a]))
    print(f"crossover estimate: {res.crossover}")
    _write(args, "csv", "\n".join(rows) + "\n")
    _write(args, "json", json.dumps({
        "exponents": res.exponents,
        "verdicts": res.verdicts,
        "estimates": {str(a): res.estimates[a] for a in res.exponents},
        "crossover": res.crossover,
    }, indent=1))
    return 0


def _cmd_gallery(args):
    for name in gallery_names():
        entry = gallery_entry(name)
        print(f"{name:18s} [{entry.kind}] {entry.description}")
        for key, const in entry.documented_constants.items():
            print(f"{'':18s}   {key} = {const.value!r} "
                  f"[{const.provenance}: {const.source}]")
    return 0


# ---------------------------------------------------------------------------
# argument wiring


def _build_parser() -> _Parser:
    top = _Parser(prog="holdercurves",
                  description="Holder parameterizations of IFS attractors")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("--gallery", help="named gallery example")
            p.add_argument("--spec", help="spec file (IFS/carpet/diamond)")
        p.add_argument("--out", help="base path for emitted artifacts")
        p.add_argument("--oracle", choices=("auto", "approx", "exact"),
                       default="auto", help="cylinder adjacency oracle")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads (outputs identical regardless)")
        p.add_argument("--seed", type=int, default=0,
                       help="reserved; all computations are deterministic")

    common(sub.add_parser("dim", help="similarity dimension"))
    p = sub.add_parser("cut", help="word cut and its s-mass")
    common(p)
    p.add_argument("--delta", type=float, required=True)

    common(sub.add_parser("connect", help="connectedness of the attractor"))

    p = sub.add_parser("path", help="Holder path between attractor points")
    common(p)
    p.add_argument("--x", required=True, help="start point, comma separated")
    p.add_argument("--y", required=True, help="end point, comma separated")
    p.add_argument("--m-max", type=int, default=6)

    p = sub.add_parser("param", help="closed curve through the attractor")
    common(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--N", type=int, default=3)

    p = sub.add_parser("arc", help="arc parameterization (non-branching)")
    common(p)
    p.add_argument("--depth", type=int, default=5)

    p = sub.add_parser("snowflake",
                       help="generate the self-affine snowflake IFS")
    common(p)

    p = sub.add_parser("tour", help="space-filling net tour (branching IFS)")
    common(p)
    p.add_argument("--N", type=int, default=2)
    p.add_argument("--v", help="separation witness point, comma separated")
    p.add_argument("--tau", type=float)
    p.add_argument("--r-override", type=float, dest="r_override")

    common(sub.add_parser("carpet", help="carpet dimensions + connectivity"))

    p = sub.add_parser("sponge", help="space-filling tour of a sponge")
    common(p)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--r-override", type=float, dest="r_override")

    p = sub.add_parser("scan", help="Holder exponent sharpness scan")
    common(p)
    p.add_argument("--depths", default="1,3,5",
                   help="comma-separated construction depths")
    p.add_argument("--exponents", required=True,
                   help="comma-separated exponents to test")
    p.add_argument("--r-override", type=float, dest="r_override")

    common(sub.add_parser("gallery", help="list the example gallery"),
           needs_input=False)
    return top


_DISPATCH = {
    "dim": _cmd_dim,
    "cut": _cmd_cut,
    "connect": _cmd_connect,
    "path": _cmd_path,
    "param": _cmd_param,
    "arc": _cmd_arc,
    "snowflake": _cmd_snowflake,
    "tour": _cmd_tour,
    "carpet": _cmd_carpet,
    "sponge": _cmd_sponge,
    "scan": _cmd_scan,
    "gallery": _cmd_gallery,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except ConstructionError as exc:
        print(f"construction error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
