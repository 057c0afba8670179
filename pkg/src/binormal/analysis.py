"""Length spectra, packing counts and box-dimension slopes, the 2-Hoelder
bound on the length map, maximizing-chord classification, the planar
diametral map, and the curvature lower bound at feet of maximizing chords.

Dimension numbers reported here are finite-ladder slope estimates: a finite
delta-ladder can only bracket the liminf/limsup box dimensions, so the
windowed slopes are labeled proxies and no convergence claim is made.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .geometry import (
    DEFAULT_TOL,
    Chord,
    InputError,
    NormalInventory,
    ParameterError,
    PreconditionError,
    chord_distance,
    nonoriented_chord_distance,
    unit,
)
from .polytope import Polytope, support_margin
from .smooth import SupportBody, chord_length_gradient, curvature_probe, polyline_body

_EXACT_PACKING_LIMIT = 15


# --------------------------------------------------------------------------
# packing counts and dimension slopes
# --------------------------------------------------------------------------

def _as_metric_array(items):
    """Normalize supported inputs to (array, pairwise-distance) form.

    Accepts point arrays (any ambient dimension, 1-d values included) and
    lists of chords, which are embedded as stacked endpoint rows and
    measured with the max-endpoint metric.
    """
    if isinstance(items, (list, tuple)) and items and isinstance(items[0], Chord):
        arr = np.array([np.concatenate([c.tail, c.head]) for c in items])
        d = items[0].dim

        def dist_rows(a, b):
            t = np.linalg.norm(a[..., :d] - b[..., :d], axis=-1)
            h = np.linalg.norm(a[..., d:] - b[..., d:], axis=-1)
            return np.maximum(t, h)

        return arr, dist_rows
    arr = np.asarray(items, dtype=float)
    if arr.size == 0:
        return arr.reshape(0, 1), None
    if arr.ndim == 1:
        arr = arr[:, None]

    def dist_rows(a, b):
        return np.linalg.norm(a - b, axis=-1)

    return arr, dist_rows


def _insertion_radii(arr, dist_rows):
    """Farthest-point insertion radii from the lexicographically smallest seed.

    The radii are nonincreasing, so every packing count read off them is
    automatically monotone in delta.
    """
    n = arr.shape[0]
    if n == 0:
        return np.array([]), np.array([], dtype=int)
    seed = int(np.lexsort(arr.T[::-1])[0])
    order = [seed]
    radii = [math.inf]
    mind = dist_rows(arr, arr[seed])
    for _ in range(n - 1):
        nxt = int(np.argmax(mind))
        r = float(mind[nxt])
        order.append(nxt)
        radii.append(r)
        mind = np.minimum(mind, dist_rows(arr, arr[nxt]))
    return np.array(radii), np.array(order, dtype=int)


def packing_count(items, delta: float) -> int:
    """Size of a greedy maximal delta-separated subset.

    Farthest-point insertion from the lexicographically smallest element;
    insertion stops when no remaining element is at distance >= delta from
    the chosen set, so the result N is maximal and satisfies
    P(2*delta) <= N <= P(delta) with P the exact packing number.  Ladder
    slopes are therefore unaffected asymptotically by the greedy gap.
    """
    if delta <= 0:
        raise ParameterError("delta must be positive")
    arr, dist_rows = _as_metric_array(items)
    if arr.shape[0] == 0:
        return 0
    radii, _ = _insertion_radii(arr, dist_rows)
    return int(np.sum(radii >= delta))


def max_packing_exact(items, delta: float) -> int:
    """Exact maximum delta-separated subset size by branch and bound.

    Exponential; refuses more than 15 elements.  Retained as the oracle the
    greedy count is sandwiched against.
    """
    if delta <= 0:
        raise ParameterError("delta must be positive")
    arr, dist_rows = _as_metric_array(items)
    n = arr.shape[0]
    if n == 0:
        return 0
    if n > _EXACT_PACKING_LIMIT:
        raise InputError(f"exact packing is limited to {_EXACT_PACKING_LIMIT} elements")
    ok = np.ones((n, n), dtype=bool)
    for i in range(n):
        ok[i] = dist_rows(arr, arr[i]) >= delta
        ok[i, i] = True
    best = 0

    def grow(start, chosen):
        nonlocal best
        best = max(best, len(chosen))
        for j in range(start, n):
            if n - j + len(chosen) <= best:
                break
            if all(ok[j, c] for c in chosen):
                grow(j + 1, chosen + [j])

    grow(0, [])
    return best


@dataclass(eq=False)
class PackingReport:
    """delta-ladder packing counts and dimension-slope estimates.

    ``slope_fit`` is the least-squares slope of ln(count) against
    -ln(delta); the min/max two-rung slopes are finite proxies for the
    liminf/limsup box-counting dimensions.
    """

    deltas: np.ndarray
    counts: np.ndarray
    slope_fit: float
    slope_min_window: float
    slope_max_window: float

    def __post_init__(self):
        if np.any(np.diff(self.counts) < 0):
            raise InputError("packing counts must be nondecreasing as delta shrinks")


def default_delta_ladder(diameter: float, rungs: int = 8, ratio: float = 0.5):
    """Geometric ladder with the default shape: top rung = diameter / 4."""
    if diameter <= 0:
        raise ParameterError("diameter must be positive")
    top = diameter / 4.0
    return [top * ratio ** k for k in range(rungs)]


def box_dimension_estimate(items, ladder) -> PackingReport:
    """Packing-count slope over a decreasing delta-ladder.

    ``ladder`` must be strictly decreasing with at least 4 rungs.  All
    counts are read off one farthest-point insertion pass, which guarantees
    their monotonicity in delta.
    """
    ladder = [float(d) for d in ladder]
    if len(ladder) < 4:
        raise InputError("ladder too short: at least 4 rungs are required")
    if any(b >= a for a, b in zip(ladder, ladder[1:])) or ladder[-1] <= 0:
        raise InputError("ladder must be strictly decreasing and positive")
    arr, dist_rows = _as_metric_array(items)
    if arr.shape[0] == 0:
        raise InputError("cannot estimate the dimension of an empty set")
    radii, _ = _insertion_radii(arr, dist_rows)
    counts = np.array([int(np.sum(radii >= d)) for d in ladder])
    x = -np.log(np.array(ladder))
    y = np.log(np.maximum(counts, 1))
    if np.ptp(y) == 0:
        slope = 0.0
    else:
        slope = float(np.polyfit(x, y, 1)[0])
    win = (y[1:] - y[:-1]) / (x[1:] - x[:-1])
    return PackingReport(np.array(ladder), counts, slope,
                         float(np.min(win)), float(np.max(win)))


# --------------------------------------------------------------------------
# spectrum and the 2-Hoelder bound
# --------------------------------------------------------------------------

@dataclass(eq=False)
class SpectrumReport:
    """Sorted double-normal lengths with an injectivity verdict.

    ``lengths`` covers isolated chords and one entry per family (the length
    map is constant on a parallel-face family); ``collisions`` lists pairs
    of distinct isolated chords with equal lengths within tolerance, and
    ``injective`` refers to the isolated (non-oriented) chords.
    """

    lengths: np.ndarray
    injective: bool
    min_length: float
    collisions: list
    family_lengths: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.lengths) and self.min_length != self.lengths[0]:
            raise InputError("spectrum must be sorted with min_length first")


def spectrum(inv: NormalInventory, tol: float = DEFAULT_TOL) -> SpectrumReport:
    """Length spectrum of an inventory."""
    if not inv.isolated and not inv.families:
        raise InputError("empty inventory has no spectrum")
    iso = [(rec.length, rec.chord) for rec in inv.isolated]
    fam = [f.length for f in inv.families]
    all_lengths = np.sort(np.array([l for l, _ in iso] + fam))
    scale = float(all_lengths[-1])
    collisions = []
    for (la, ca), (lb, cb) in combinations(iso, 2):
        if abs(la - lb) <= tol * scale:
            collisions.append((ca, cb))
    return SpectrumReport(
        lengths=all_lengths,
        injective=not collisions,
        min_length=float(all_lengths[0]),
        collisions=collisions,
        family_lengths=fam,
    )


@dataclass(eq=False)
class HolderReport:
    max_ratio: float
    bound: float       # 1 / min spectrum length
    passed: bool
    witness: tuple | None  # chord pair achieving max_ratio


def holder_verify(inv: NormalInventory, tol: float = DEFAULT_TOL) -> HolderReport:
    """Verify |len(b0) - len(b1)| <= d(b0, b1)^2 / min_length over all pairs.

    The chord distance of each pair is minimized over the two relative
    orientations (the bound holds for every oriented pair, so the aligned
    orientation gives the sharpest test).  The witness pair realizes the
    maximal ratio; on ladder inventories it is an adjacent-rung pair and
    comes within a few percent of the bound.
    """
    if len(inv.isolated) < 2:
        raise InputError("need at least two isolated chords to test the bound")
    sp = spectrum(inv, tol)
    if sp.min_length <= tol:
        raise InputError("degenerate spectrum: minimal length is zero")
    bound = 1.0 / sp.min_length

    tails = np.array([r.chord.tail for r in inv.isolated])
    heads = np.array([r.chord.head for r in inv.isolated])
    lens = np.array([r.length for r in inv.isolated])
    dt = np.linalg.norm(tails[:, None, :] - tails[None, :, :], axis=-1)
    dh = np.linalg.norm(heads[:, None, :] - heads[None, :, :], axis=-1)
    dtx = np.linalg.norm(tails[:, None, :] - heads[None, :, :], axis=-1)
    dhx = np.linalg.norm(heads[:, None, :] - tails[None, :, :], axis=-1)
    dist = np.minimum(np.maximum(dt, dh), np.maximum(dtx, dhx))
    np.fill_diagonal(dist, np.inf)
    dlen = np.abs(lens[:, None] - lens[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = dlen / (dist * dist)
    ratio[dlen == 0.0] = 0.0  # identical chords contribute nothing
    k = int(np.argmax(ratio))
    i, j = divmod(k, len(lens))
    max_ratio = float(ratio[i, j])
    passed = max_ratio <= bound * (1.0 + 1e-9) + tol
    return HolderReport(max_ratio, bound, passed,
                        (inv.isolated[i].chord, inv.isolated[j].chord))


# --------------------------------------------------------------------------
# maximizing-chord classification
# --------------------------------------------------------------------------

@dataclass(eq=False)
class MaximizingClassification:
    verdict: str      # "strict_max" or "inconclusive"
    margin: float     # pi/2 - largest observed foot angle
    worst_angle: float

    @property
    def strict_max(self) -> bool:
        return self.verdict == "strict_max"


def classify_maximizing(body: Polytope, b: Chord, eta: float, alpha: float,
                        tol: float = DEFAULT_TOL) -> MaximizingClassification:
    """Sufficient strict-maximum test by foot angles.

    The chord is a strict local maximum of the length function if every
    boundary point near a foot is seen from that foot under an angle smaller
    than ``alpha`` < pi/2 with the chord.  On a polytope the supremum of
    those angles is attained along edge directions out of the foot, and
    every vertex direction lies in the tangent cone, so the test reduces to
    the vertex directions and is independent of the radius ``eta`` (which is
    recorded for interface fidelity).  Feet interior to a positive-
    dimensional face see angles of exactly pi/2 inside the face, so such
    chords are never classified strict.

    ``inconclusive`` is not a refutation: the angle criterion is sufficient
    only (a ball's diameters are maximizing yet reach pi/2).
    """
    if not (0.0 < alpha < math.pi / 2.0):
        raise ParameterError("alpha must lie strictly between 0 and pi/2")
    if eta <= 0:
        raise ParameterError("eta must be positive")
    slack = tol * body.diameter
    m1 = support_margin(body, b.tail, b.vector)
    m2 = support_margin(body, b.head, -b.vector)
    if m1 < -slack or m2 < -slack:
        raise PreconditionError("chord is not a double normal of the body")

    worst = 0.0
    for foot, other in ((b.tail, b.head), (b.head, b.tail)):
        face = body.minimal_face(foot, max(tol, 1e-9))
        if face.dim >= 1:
            worst = max(worst, math.pi / 2.0)
            continue
        u = unit(other - foot)
        rel = body.vertices - foot
        norms = np.linalg.norm(rel, axis=1)
        keep = norms > slack
        cosang = (rel[keep] @ u) / norms[keep]
        worst = max(worst, float(np.max(np.arccos(np.clip(cosang, -1.0, 1.0)))))
    verdict = "strict_max" if worst < alpha else "inconclusive"
    return MaximizingClassification(verdict, math.pi / 2.0 - worst, worst)


# --------------------------------------------------------------------------
# planar diametral map
# --------------------------------------------------------------------------

@dataclass(eq=False)
class DiametralReport:
    tail_params: np.ndarray    # boundary position angles of the tails
    head_params: np.ndarray    # boundary position angles of the heads
    monotone: bool
    affine_diameters: list[Chord]


def diametral_map_d1(body: SupportBody, samples: int = 256) -> DiametralReport:
    """Sample the endpoint map of affine diameters of a planar body.

    For each outward normal direction u on a uniform net, the chord
    (grad(u), grad(-u)) is the affine diameter with supporting lines
    orthogonal to u.  Boundary positions are measured as polar angles about
    an interior point; the map is monotone when the head angle is
    nondecreasing (mod 2 pi) as the tail angle increases, within one sample
    step.
    """
    if body.dim != 2:
        raise PreconditionError("the diametral map is a planar construction")
    if not body.strictly_convex:
        raise PreconditionError("the diametral map needs a strictly convex body")
    if samples < 8:
        raise ParameterError("need at least 8 samples")
    phi = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    us = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    tails = body.points(us)
    heads = body.points(-us)
    interior = 0.5 * (tails.mean(axis=0) + heads.mean(axis=0))
    t_ang = np.mod(np.arctan2(*(tails - interior).T[::-1]), 2 * math.pi)
    h_ang = np.mod(np.arctan2(*(heads - interior).T[::-1]), 2 * math.pi)
    order = np.argsort(t_ang)
    h_sorted = h_ang[order]
    step = 2.0 * math.pi / samples
    # circular increments: regress beyond one sample step breaks monotonicity,
    # and a monotone circle map winds exactly once
    inc = np.diff(np.concatenate([h_sorted, h_sorted[:1] + 2 * math.pi]))
    inc = np.mod(inc + step, 2 * math.pi) - step
    monotone = bool(np.all(inc >= -step) and abs(np.sum(inc) / (2 * math.pi) - 1.0) < 0.51)
    chords = [Chord(t, h) for t, h in zip(tails, heads)]
    return DiametralReport(t_ang[order], h_sorted, monotone, chords)


# --------------------------------------------------------------------------
# curvature bound at feet of maximizing chords
# --------------------------------------------------------------------------

@dataclass(eq=False)
class CurvatureBoundReport:
    passed: bool
    min_lower_curvature: float
    bound: float              # 1 / chord length
    per_probe: list           # (foot index, tangent, lower-curvature estimate)


def curvature_bound_check(body, c: Chord, probes_per_foot: int = 4,
                          scales=None, tol: float = DEFAULT_TOL) -> CurvatureBoundReport:
    """At each foot of a maximizing chord the lower curvature is at least
    the reciprocal chord length; probe it in a net of tangent directions.

    The lower curvature estimate in a direction is the reciprocal of the
    upper curvature radius from :func:`binormal.smooth.curvature_probe`
    (curvatures and radii pair up crosswise).  ``body`` may be a smooth
    support body or a planar polytope (probed as a polygon; a vertex foot
    yields radius -> 0, an unbounded curvature estimate).

    The maximizing property itself is the caller's certificate; this check
    verifies the chord is a double normal and tests the curvature
    consequence.
    """
    if isinstance(body, Polytope):
        if body.dim != 2:
            raise InputError("polytope curvature probing is planar only")
        slack = tol * body.diameter
        if (support_margin(body, c.tail, c.vector) < -slack
                or support_margin(body, c.head, -c.vector) < -slack):
            raise PreconditionError("chord is not a double normal of the body")
        probe_body = polyline_body(body.vertices)
    else:
        probe_body = body
        _, gnorm = chord_length_gradient(body, c, tol)
        if gnorm > 1000 * tol * body.diameter:
            raise PreconditionError("chord is not a double normal of the body")

    bound = 1.0 / c.length()
    diam = probe_body.diameter
    if scales is None:
        scales = [diam * s for s in (1e-2, 5e-3, 2e-3, 1e-3)]
    axis = unit(c.vector)
    per_probe = []
    worst = math.inf
    for fi, foot in enumerate((c.tail, c.head)):
        for tau in _tangent_net(axis, probe_body.dim, probes_per_foot):
            est = curvature_probe(probe_body, foot, tau, scales, tol)
            lower_curv = 0.0 if est.upper_radius == math.inf else (
                math.inf if est.upper_radius <= 0 else 1.0 / est.upper_radius
            )
            per_probe.append((fi, tau, lower_curv))
            worst = min(worst, lower_curv)
    return CurvatureBoundReport(worst >= bound - tol, worst, bound, per_probe)


def _tangent_net(axis: np.ndarray, dim: int, count: int):
    _, _, vh = np.linalg.svd(axis[None, :])
    basis = vh[1:]
    if dim == 2:
        return [basis[0], -basis[0]]
    out = []
    for k in range(max(count, 2)):
        ang = 2.0 * math.pi * k / max(count, 2)
        out.append(unit(math.cos(ang) * basis[0] + math.sin(ang) * basis[1]))
    return out
