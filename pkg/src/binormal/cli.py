"""Command-line entry point.

One command per invocation; every report is a single JSON document on
stdout (or the --out file).  Exit codes: 0 success, 1 verification failure,
2 input error, 3 parameter error.  All randomized direction nets are driven
by --seed, so identical configuration reproduces identical payloads.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__, analysis, constructions, formats
from .geometry import (
    Chord,
    InputError,
    NormalInventory,
    ParameterError,
    VerificationError,
    nonoriented_chord_distance,
)
from .polytope import Polytope, enumerate_double_normals
from .smooth import SupportBody, ball, ellipsoid, find_double_normals, perturbed_ball

DEFAULT_SEED = 0
DEFAULT_TOL = 1e-9


@dataclass(eq=False)
class ReportEnvelope:
    command: str
    config: dict
    timing_s: float
    payload: dict
    tool: str = "binormal"
    version: str = __version__

    def to_json(self) -> str:
        doc = {
            "tool": self.tool,
            "version": self.version,
            "command": self.command,
            "config": formats._json_safe(self.config),
            "timing_s": round(self.timing_s, 6),
            "payload": formats._json_safe(self.payload),
        }
        return json.dumps(doc, indent=1)


def parse_body_spec(spec: str) -> SupportBody:
    """Named smooth bodies: ellipsoid:a,b[,c...], ball:r[,dim],
    perturbed_ball:R,amp,freq[,phase[,amp,freq,phase...]]."""
    name, _, argstr = spec.partition(":")
    try:
        args = [float(tok) for tok in argstr.split(",") if tok] if argstr else []
    except ValueError as exc:
        raise InputError(f"bad body parameters in {spec!r}: {exc}") from exc
    if name == "ellipsoid":
        return ellipsoid(args)
    if name == "ball":
        if len(args) == 1:
            return ball(args[0])
        if len(args) == 2:
            return ball(args[0], int(args[1]))
        raise InputError("ball takes radius[,dim]")
    if name == "perturbed_ball":
        if len(args) < 3:
            raise InputError("perturbed_ball takes R,amp,freq[,phase...]")
        base, rest = args[0], args[1:]
        if len(rest) % 3 == 0:
            terms = [(rest[i], rest[i + 1], rest[i + 2]) for i in range(0, len(rest), 3)]
        elif len(rest) % 2 == 0:
            terms = [(rest[i], rest[i + 1], 0.0) for i in range(0, len(rest), 2)]
        else:
            raise InputError("perturbed_ball terms must be (amp,freq[,phase]) groups")
        return perturbed_ball(base, terms)
    raise InputError(f"unknown body kind {name!r}")


def parse_chord(spec: str) -> Chord:
    """Chord literal 'x,y,...;x,y,...'."""
    try:
        tail, head = spec.split(";")
        return Chord([float(t) for t in tail.split(",")],
                     [float(t) for t in head.split(",")])
    except (ValueError, InputError) as exc:
        raise InputError(f"bad chord literal {spec!r}: {exc}") from exc


def _inventory_for(args) -> tuple[NormalInventory, Polytope | None]:
    if getattr(args, "body", None):
        body = parse_body_spec(args.body)
        inv = find_double_normals(body, tol=args.tol, seed=args.seed)
        return inv, None
    if getattr(args, "infile", None):
        p = formats.load_geometry(args.infile, args.tol)
        return enumerate_double_normals(p, args.tol), p
    raise InputError("provide --in FILE or --body SPEC")


def cmd_normals(args) -> dict:
    inv, _ = _inventory_for(args)
    return {
        "inventory": formats.inventory_to_dict(inv),
        "kuiper": {
            "count": inv.nonoriented_count,
            "bound": inv.kuiper_bound(),
            "ok": inv.nonoriented_count >= inv.kuiper_bound(),
        },
    }


def _classify_dict(c: analysis.MaximizingClassification) -> dict:
    return {"verdict": c.verdict, "margin": c.margin, "worst_angle": c.worst_angle}


def cmd_construct(args) -> dict:
    gen = args.generator
    tol = args.tol
    payload: dict = {"generator": gen}
    if gen == "ladder1":
        lad = constructions.arc_ladder_d1(args.R, args.Theta, args.n)
        hull = lad.hull_with_arc(args.arc_count, tol)
        alpha = math.pi / 2 - 1e-4
        verdicts = [
            analysis.classify_maximizing(hull, c, eta=lad.radius, alpha=alpha, tol=tol)
            for c in lad.chords()
        ]
        payload.update({
            "delta": lad.delta,
            "n": lad.n,
            "lengths": lad.lengths(),
            "min_acute_margin": lad.min_acute_margin,
            "log_ratio": lad.log_ratio,
            "log_ratio_half": lad.log_ratio_half,
            "strict_max_count": sum(v.strict_max for v in verdicts),
            "point_count": 2 * lad.n,
        })
        geometry = hull
    elif gen == "ladder2":
        lad = constructions.sphere_ladder_d2(args.R, args.A, args.T, args.m)
        check = constructions.acute_check_d2(lad)
        m0, per_m = constructions.scan_acute_threshold(
            args.R, args.A, args.T, m_max=max(args.m, 6)
        )
        payload.update({
            "delta": lad.delta,
            "m": lad.m,
            "point_count": len(lad.points),
            "acute_pass": check.passed,
            "min_margin": check.min_margin,
            "threshold_m0": m0,
            "margins_by_m": per_m,
            "log_ratio": lad.log_ratio,
            "ratio_limit": 0.75,
        })
        geometry = lad.hull_with_antipodes(tol)
    elif gen == "capgraft":
        base = formats.load_geometry(args.infile, tol)
        graft = constructions.spherical_cap_graft(
            base, parse_chord(args.chord), args.R, args.eps, args.resolution, tol
        )
        payload.update(graft.certificate)
        payload["new_normals"] = [formats._chord_to_dict(c) for c in graft.new_normals]
        geometry = graft.polytope
    elif gen == "rectgraft":
        base = formats.load_geometry(args.infile, tol)
        graft = constructions.rectangle_graft(
            base, parse_chord(args.chord), args.extra_len, args.width, tol=tol
        )
        alpha = math.pi / 2 - 1e-4
        payload.update(graft.certificate)
        payload["diagonals"] = [formats._chord_to_dict(c) for c in graft.new_normals]
        payload["classification"] = [
            _classify_dict(analysis.classify_maximizing(
                graft.polytope, c, eta=base.diameter, alpha=alpha, tol=tol))
            for c in graft.new_normals
        ]
        geometry = graft.polytope
    elif gen == "conesharpen":
        base = formats.load_geometry(args.infile, tol)
        pairs = []
        for tokens in args.pairs.split(","):
            a, _, b = tokens.partition("-")
            pairs.append((int(a), int(b)))
        sharp = constructions.cone_sharpen(base.vertices, pairs, args.p, tol)
        alpha = math.pi / 2 - 1.0 / (2 * args.p)
        payload.update(sharp.certificate)
        payload["classification"] = [
            _classify_dict(analysis.classify_maximizing(
                sharp.polytope, c, eta=base.diameter, alpha=alpha, tol=tol))
            for c in sharp.chords
        ]
        geometry = sharp.polytope
    else:  # pragma: no cover - argparse restricts choices
        raise ParameterError(f"unknown generator {gen}")

    formats.save_geometry(geometry, args.geom_out, args.format)
    payload["geometry_file"] = args.geom_out
    payload["vertex_count"] = geometry.n_vertices
    return payload


def cmd_analyze(args) -> dict:
    if getattr(args, "report", None):
        with open(args.report) as fh:
            doc = json.load(fh)
        obj = doc.get("payload", doc).get("inventory", doc.get("inventory"))
        if obj is None:
            raise InputError(f"{args.report} carries no inventory payload")
        inv = formats.inventory_from_dict(obj)
        poly = None
    else:
        inv, poly = _inventory_for(args)
    if not inv.isolated and not inv.families:
        raise InputError("empty inventory: nothing to analyze")

    payload: dict = {"inventory_size": inv.nonoriented_count}
    sp = analysis.spectrum(inv, args.tol)
    payload["spectrum"] = {
        "lengths": sp.lengths,
        "injective": sp.injective,
        "min_length": sp.min_length,
        "collisions": len(sp.collisions),
        "family_lengths": sp.family_lengths,
    }
    if len(inv.isolated) >= 2:
        h = analysis.holder_verify(inv, args.tol)
        payload["holder"] = {"max_ratio": h.max_ratio, "bound": h.bound,
                             "passed": h.passed}
    feet = np.array(
        [r.chord.tail for r in inv.isolated] + [r.chord.head for r in inv.isolated]
        + [f.representative.tail for f in inv.families]
        + [f.representative.head for f in inv.families]
    )
    payload["box_dimensions"] = {
        "feet": _box_slopes(feet),
        "chords": _box_slopes([r.chord for r in inv.isolated]),
        "spectrum": _box_slopes(sp.lengths),
    }
    if poly is not None and args.classify:
        alpha = math.pi / 2 - 1e-6
        payload["classification"] = [
            {**formats._chord_to_dict(r.chord),
             **_classify_dict(analysis.classify_maximizing(
                 poly, r.chord, eta=poly.diameter, alpha=alpha, tol=args.tol))}
            for r in inv.isolated
        ]
    return payload


def _box_slopes(items) -> dict:
    arr, dist = analysis._as_metric_array(items)
    n = arr.shape[0]
    if n == 0:
        return {"note": "empty set"}
    if n == 1:
        return {"slope_fit": 0.0, "note": "single point"}
    radii, _ = analysis._insertion_radii(arr, dist)
    spread = float(np.max(radii[1:])) if len(radii) > 1 else 0.0
    if spread <= 0:
        return {"slope_fit": 0.0, "note": "coincident points"}
    ladder = analysis.default_delta_ladder(4.0 * spread)
    rep = analysis.box_dimension_estimate(items, ladder)
    return {
        "deltas": rep.deltas,
        "counts": rep.counts,
        "slope_fit": rep.slope_fit,
        "slope_min_window": rep.slope_min_window,
        "slope_max_window": rep.slope_max_window,
        "note": "finite-ladder slope proxies, not limits",
    }


def cmd_verify(args) -> dict:
    p = formats.load_geometry(args.infile, args.tol)
    inv = enumerate_double_normals(p, args.tol)
    checks = {}
    checks["kuiper"] = inv.nonoriented_count >= inv.kuiper_bound()
    if len(inv.isolated) >= 2:
        checks["holder"] = analysis.holder_verify(inv, args.tol).passed
    if getattr(args, "report", None):
        with open(args.report) as fh:
            doc = json.load(fh)
        obj = doc.get("payload", doc).get("inventory", doc.get("inventory"))
        if obj is None:
            raise InputError(f"{args.report} carries no inventory payload")
        ref = formats.inventory_from_dict(obj)
        radius = 10 * args.tol * p.diameter
        matched = all(
            any(nonoriented_chord_distance(a.chord, b.chord) <= radius
                for b in inv.isolated)
            for a in ref.isolated
        )
        checks["roundtrip"] = matched and len(ref.families) == len(inv.families)
    payload = {"checks": checks, "inventory_size": inv.nonoriented_count}
    if not all(checks.values()):
        raise VerificationError(json.dumps(formats._json_safe(payload)))
    return payload


def cmd_export(args) -> dict:
    if getattr(args, "report", None):
        with open(args.report) as fh:
            doc = json.load(fh)
        obj = doc.get("payload", doc).get("inventory", doc.get("inventory"))
        inv = formats.inventory_from_dict(obj) if obj else None
    else:
        inv = None
    if getattr(args, "body", None):
        body = parse_body_spec(args.body)
        if inv is None:
            inv = find_double_normals(body, tol=args.tol, seed=args.seed)
        if args.format == "figure":
            if body.dim != 2:
                raise InputError("figure export needs a planar body")
            _figure_smooth(body, inv, args.out)
            return {"figure": args.out, "chords": len(inv.isolated)}
        raise InputError("mesh export of smooth bodies is not supported; use a polytope")
    p = formats.load_geometry(args.infile, args.tol)
    if inv is None:
        inv = enumerate_double_normals(p, args.tol)
    if args.format == "figure":
        if p.dim != 2:
            raise InputError(f"figure export needs a planar body, got dimension {p.dim}")
        _figure_polytope(p, inv, args.out)
        return {"figure": args.out, "chords": len(inv.isolated)}
    if args.format == "mesh":
        if p.dim != 3:
            raise InputError(f"mesh export needs a 3-d body, got dimension {p.dim}")
        formats.save_off(p, args.out)
        sidecar = args.out + ".chords.json"
        chords = [formats._chord_to_dict(r.chord) for r in inv.isolated] + [
            formats._chord_to_dict(f.representative) for f in inv.families
        ]
        with open(sidecar, "w") as fh:
            json.dump({"chords": chords}, fh, indent=1)
        return {"mesh": args.out, "sidecar": sidecar, "chords": len(chords)}
    raise InputError(f"unknown export format {args.format!r}")


def _boundary_loop(p: Polytope) -> np.ndarray:
    c = p.vertices.mean(axis=0)
    ang = np.arctan2(*(p.vertices - c).T[::-1])
    loop = p.vertices[np.argsort(ang)]
    return np.vstack([loop, loop[:1]])


def _draw_chords(ax, inv: NormalInventory):
    for k, rec in enumerate(inv.isolated):
        c = rec.chord
        ax.plot([c.tail[0], c.head[0]], [c.tail[1], c.head[1]], "r-", lw=0.8)
        mid = c.midpoint
        ax.annotate(f"b{k}: {c.length():.4g}", mid, fontsize=7, color="darkred")
    for k, f in enumerate(inv.families):
        c = f.representative
        ax.plot([c.tail[0], c.head[0]], [c.tail[1], c.head[1]], "b--", lw=0.8)
        ax.annotate(f"f{k} (dim {f.dimension}): {c.length():.4g}",
                    c.midpoint, fontsize=7, color="navy")


def _figure_polytope(p: Polytope, inv: NormalInventory, out: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 6))
    loop = _boundary_loop(p)
    ax.plot(loop[:, 0], loop[:, 1], "k-", lw=1.2)
    _draw_chords(ax, inv)
    ax.set_aspect("equal")
    ax.set_title(p.name or "polytope")
    fig.savefig(out)
    plt.close(fig)


def _figure_smooth(body: SupportBody, inv: NormalInventory, out: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 6))
    phi = np.linspace(0, 2 * math.pi, 512)
    pts = body.points(np.stack([np.cos(phi), np.sin(phi)], axis=1))
    ax.plot(pts[:, 0], pts[:, 1], "k-", lw=1.2)
    _draw_chords(ax, inv)
    ax.set_aspect("equal")
    ax.set_title(body.kind)
    fig.savefig(out)
    plt.close(fig)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="binormal",
        description="Double normals of convex bodies: enumeration, search, "
                    "constructions, and analysis.",
    )
    ap.add_argument("--version", action="version", version=f"binormal {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, classify=False, out_help="write the JSON report here instead of stdout",
               out_required=False):
        p.add_argument("--tol", type=float, default=DEFAULT_TOL,
                       help="tolerance on unit-diameter scale (default 1e-9)")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                       help="seed for all direction nets (default 0)")
        p.add_argument("--out", help=out_help, required=out_required)
        if classify:
            p.add_argument("--classify", action="store_true",
                           help="classify isolated chords as strict maxima")

    p = sub.add_parser("normals", help="enumerate or search double normals")
    p.add_argument("--in", dest="infile", help="polytope file (.json or .off)")
    p.add_argument("--body", help="smooth body spec, e.g. ellipsoid:2,1.5,1")
    common(p)

    p = sub.add_parser("construct", help="run a generator and emit geometry + certificate")
    p.add_argument("generator",
                   choices=["ladder1", "ladder2", "capgraft", "rectgraft", "conesharpen"])
    p.add_argument("--in", dest="infile", help="base polytope for the grafts")
    p.add_argument("--chord", help="chord literal 'x,y,...;x,y,...'")
    p.add_argument("--R", type=float, help="radius parameter")
    p.add_argument("--Theta", type=float, help="planar ladder angular extent")
    p.add_argument("--n", type=int, help="planar ladder rung count")
    p.add_argument("--arc-count", type=int, default=64, help="base arc samples")
    p.add_argument("--A", type=float, help="spherical ladder radial excess")
    p.add_argument("--T", type=float, help="spherical ladder angular span")
    p.add_argument("--m", type=int, help="spherical ladder grid parameter")
    p.add_argument("--eps", type=float, help="cap graft Hausdorff budget")
    p.add_argument("--resolution", type=int, default=64,
                   help="cap samples per angular unit")
    p.add_argument("--extra-len", type=float, help="rectangle overhang")
    p.add_argument("--width", type=float, help="rectangle width")
    p.add_argument("--pairs", help="cone apex index pairs, e.g. 0-3,5-7")
    p.add_argument("--p", type=int, help="cone bluntness parameter")
    p.add_argument("--geom-out", required=True, help="geometry output path")
    p.add_argument("--format", choices=["json", "off"], default=None)
    common(p)

    p = sub.add_parser("analyze", help="spectrum, Hoelder, and dimension reports")
    p.add_argument("--in", dest="infile", help="polytope file")
    p.add_argument("--body", help="smooth body spec")
    p.add_argument("--report", help="existing normals report to analyze")
    common(p, classify=True)

    p = sub.add_parser("verify", help="re-run certificates; exit 1 on failure")
    p.add_argument("--in", dest="infile", required=True, help="polytope file")
    p.add_argument("--report", help="inventory report to check against")
    common(p)

    p = sub.add_parser("export", help="figures (d=1) and annotated meshes (d=2)")
    p.add_argument("--in", dest="infile", help="polytope file")
    p.add_argument("--body", help="smooth body spec")
    p.add_argument("--report", help="inventory report to draw")
    p.add_argument("--format", choices=["figure", "mesh"], required=True)
    common(p, out_help="output figure/mesh path", out_required=True)
    return ap


_DISPATCH = {
    "normals": cmd_normals,
    "construct": cmd_construct,
    "analyze": cmd_analyze,
    "verify": cmd_verify,
    "export": cmd_export,
}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    t0 = time.perf_counter()
    try:
        payload = _DISPATCH[args.command](args)
    except VerificationError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 1
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except ParameterError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return 3
    env = ReportEnvelope(
        command=args.command,
        config={k: v for k, v in vars(args).items() if k != "command"},
        timing_s=time.perf_counter() - t0,
        payload=payload,
    )
    text = env.to_json()
    if getattr(args, "out", None) and args.command != "export":
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
