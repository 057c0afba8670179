"""Generators for explicit bodies with certifiably rich double-normal sets.

Two ladder families place points at carefully separated radii so that every
rung chord is a strictly maximizing chord of the hull, with chord lengths
forming an arithmetic progression of known gap; two graft operations add
double normals to an existing polytope while staying Hausdorff-close to it;
cone sharpening turns chosen chords into strict maxima by intersecting with
blunt revolution cones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import chunked_map
from .geometry import (
    DEFAULT_TOL,
    Chord,
    ParameterError,
    PreconditionError,
    hausdorff_distance,
    unit,
)
from .polytope import Polytope, build_hull, support_margin

_COS_BOUND_GRID = 4097


def _rot90(v: np.ndarray) -> np.ndarray:
    return np.array([-v[1], v[0]])


def _check_planar_cos_bound(theta: float) -> None:
    """cos t <= 1 - t^2/3 must hold on [0, theta] (it fails above ~2.16)."""
    t = np.linspace(0.0, theta, _COS_BOUND_GRID)
    gap = (1.0 - t * t / 3.0) - np.cos(t)
    worst = int(np.argmin(gap))
    if gap[worst] < 0:
        raise ParameterError(
            f"theta={theta:g} violates the bound cos t <= 1 - t^2/3 "
            f"(fails near t={t[worst]:.4f}); choose theta below ~2.16"
        )


# --------------------------------------------------------------------------
# planar arc ladder
# --------------------------------------------------------------------------

@dataclass(eq=False)
class LadderD1:
    """Planar ladder of n points at radii R + i*delta along a shrinking fan
    of angles i*theta/n, plus their antipodes through the center.

    delta = R * theta^2 / (4 n^2).  The rung chords (v_i, v_i') have lengths
    2(R + i*delta): an arithmetic progression with gap 2*delta.
    """

    center: np.ndarray
    base_dir: np.ndarray
    radius: float
    theta: float
    n: int
    delta: float
    radii: np.ndarray
    points: np.ndarray
    antipodes: np.ndarray
    min_acute_margin: float

    def chords(self) -> list[Chord]:
        return [Chord(self.antipodes[i], self.points[i]) for i in range(self.n)]

    def lengths(self) -> np.ndarray:
        return 2.0 * self.radii

    @property
    def log_ratio(self) -> float:
        """ln n / (-ln delta); tends to 1/2 as n grows."""
        return math.log(self.n) / -math.log(self.delta) if self.n > 1 else 0.0

    @property
    def log_ratio_half(self) -> float:
        """ln n / (-ln(delta/2)), the packing-ladder variant of log_ratio."""
        return math.log(self.n) / -math.log(self.delta / 2.0) if self.n > 1 else 0.0

    def arc_points(self, count: int = 64) -> np.ndarray:
        """Samples of the base arc of radius R spanning angles [0, 2*theta]."""
        ang = np.linspace(0.0, 2.0 * self.theta, max(count, 3))
        perp = _rot90(self.base_dir)
        return self.center + self.radius * (
            np.cos(ang)[:, None] * self.base_dir + np.sin(ang)[:, None] * perp
        )

    def hull_with_arc(self, arc_count: int = 64, tol: float = DEFAULT_TOL) -> Polytope:
        """Hull of the rungs, their antipodes, and both base arcs."""
        arc = self.arc_points(arc_count)
        arc_opp = 2.0 * self.center - arc
        pts = np.vstack([self.points, self.antipodes, arc, arc_opp])
        return build_hull(pts, tol, name=f"ladder1(n={self.n})")


def arc_ladder_d1(radius: float, theta: float, n: int, center=None,
                  base_dir=None) -> LadderD1:
    """Build the planar arc ladder and verify its acuteness certificates.

    Parameters
    ----------
    radius, theta, n : construction parameters (R > 0, theta in (0, ~2.16],
        n >= 1); theta must satisfy cos t <= 1 - t^2/3 on [0, theta], which
        is checked numerically.
    center, base_dir : optional placement (defaults: origin, +x axis).  The
        i-th rung sits at angle i*theta/n from base_dir.

    Every triangle (center, v_i, v_j) is verified acute, which certifies the
    rung chords as strictly maximizing in any hull of the ladder with its
    base arc.  Chord lengths are pairwise at least 2*delta apart, exactly.
    """
    if radius <= 0:
        raise ParameterError("radius must be positive")
    if n < 1:
        raise ParameterError("n must be at least 1")
    if theta <= 0:
        raise ParameterError("theta must be positive")
    _check_planar_cos_bound(theta)
    center = np.zeros(2) if center is None else np.asarray(center, dtype=float)
    base_dir = np.array([1.0, 0.0]) if base_dir is None else unit(np.asarray(base_dir, dtype=float))
    if center.shape != (2,) or base_dir.shape != (2,):
        raise ParameterError("the arc ladder is a planar construction")

    delta = radius * theta * theta / (4.0 * n * n)
    i = np.arange(1, n + 1)
    radii = radius + i * delta
    ang = i * theta / n
    perp = _rot90(base_dir)
    points = center + radii[:, None] * (
        np.cos(ang)[:, None] * base_dir + np.sin(ang)[:, None] * perp
    )
    antipodes = 2.0 * center - points

    margin = _verify_acute_d1(radius, theta, n, radii, ang)
    return LadderD1(center, base_dir, radius, theta, n, delta, radii, points,
                    antipodes, margin)


def _verify_acute_d1(radius, theta, n, radii, ang) -> float:
    """All triangles (center, v_i, v_j), i != j, must be acute."""
    if n == 1:
        return math.pi / 2.0
    rj = radii[:, None]
    ri = radii[None, :]
    dang = np.abs(ang[:, None] - ang[None, :])
    iu = np.triu_indices(n, k=1)
    # angle at the shorter rung: acute iff R_j / R_i > cos((i - j) theta / n)
    vertex_margin = (np.minimum(ri, rj) / np.maximum(ri, rj) - np.cos(dang))[iu]
    # angle at the center is the angular gap itself
    center_margin = (math.pi / 2.0 - dang)[iu]
    worst = float(min(vertex_margin.min(), center_margin.min()))
    if worst <= 0:
        raise ParameterError(
            "ladder parameters leave a non-acute triangle "
            f"(worst margin {worst:.3e}); reduce theta or increase n"
        )
    return worst


# --------------------------------------------------------------------------
# spherical ladder
# --------------------------------------------------------------------------

def _sphere_param(lam, th):
    return np.stack(
        [np.cos(lam) * np.cos(th), np.cos(lam) * np.sin(th), np.sin(lam)], axis=-1
    )


@dataclass(eq=False)
class LadderD2:
    """m^3 points near a sphere of radius R + A, on the grid
    v_ij = r_ij * phi(i*T/m^2, j*T/m) with r_ij = R + A - (j*m^2 + i)*delta
    and delta = R*T^2 / (16 m^4).

    The chords (v_ij, -v_ij) have lengths 2*r_ij: an arithmetic progression
    with gap 2*delta over the linear index j*m^2 + i.
    """

    radius: float
    apex: float   # A
    span: float   # T
    m: int
    delta: float
    index: np.ndarray   # (m^3, 2) of (i, j)
    radii: np.ndarray
    points: np.ndarray

    def lengths(self) -> np.ndarray:
        return 2.0 * self.radii

    def chords(self) -> list[Chord]:
        return [Chord(-p, p) for p in self.points]

    @property
    def log_ratio(self) -> float:
        """3 ln m / (4 ln m - ln(R T^2 / 32)); tends to 3/4 as m grows."""
        if self.m < 2:
            return 0.0
        lm = math.log(self.m)
        return 3.0 * lm / (4.0 * lm - math.log(self.radius * self.span ** 2 / 32.0))

    def hull_with_antipodes(self, tol: float = DEFAULT_TOL) -> Polytope:
        pts = np.vstack([self.points, -self.points])
        return build_hull(pts, tol, name=f"ladder2(m={self.m})")


def sphere_ladder_d2(radius: float, apex: float, span: float, m: int) -> LadderD2:
    """Build the spherical ladder (no acuteness guarantee; see
    :func:`acute_check_d2` and :func:`scan_acute_threshold`)."""
    if radius <= 0 or apex <= 0:
        raise ParameterError("radius and apex excess must be positive")
    if not (0.0 < span < math.pi / 4.0):
        raise ParameterError("span must lie strictly between 0 and pi/4")
    if m < 1:
        raise ParameterError("m must be at least 1")
    delta = radius * span ** 2 / (16.0 * m ** 4)
    ii, jj = np.meshgrid(np.arange(m * m), np.arange(m), indexing="ij")
    idx = np.stack([ii.ravel(), jj.ravel()], axis=1)
    lin = idx[:, 1] * m * m + idx[:, 0]
    order = np.argsort(lin)
    idx = idx[order]
    radii = radius + apex - (idx[:, 1] * m * m + idx[:, 0]) * delta
    pts = radii[:, None] * _sphere_param(idx[:, 0] * span / (m * m),
                                         idx[:, 1] * span / m)
    return LadderD2(radius, apex, span, m, delta, idx, radii, pts)


@dataclass(eq=False)
class AcuteCheckResult:
    passed: bool
    min_margin: float
    failing_pairs: list  # ((i, j), (i', j')) index tuples


def acute_check_d2(ladder) -> AcuteCheckResult:
    """Evaluate <v', v' - v> over all ordered point pairs.

    All values positive means every chord (v, -v) meets every other ladder
    point at an acute angle from its feet, which is the certificate that the
    chords are strictly maximizing in the hull of the ladder with its
    antipodes (the antipodal points satisfy the inequality automatically
    because all radii exceed 0 and the angular spread stays below pi/2).

    Accepts a :class:`LadderD2` or a raw point array.
    """
    pts = ladder.points if isinstance(ladder, LadderD2) else np.atleast_2d(
        np.asarray(ladder, dtype=float)
    )
    index = ladder.index if isinstance(ladder, LadderD2) else np.stack(
        [np.arange(len(pts)), np.zeros(len(pts), dtype=int)], axis=1
    )
    nk = len(pts)
    if nk == 1:
        return AcuteCheckResult(True, math.inf, [])
    sq = np.sum(pts * pts, axis=1)

    def row_block(rows):
        g = pts[rows] @ pts.T            # <v_k, v_kp> for k in rows
        d = sq[None, :] - g              # <v_kp, v_kp - v_k>
        for local, k in enumerate(rows):
            d[local, k] = np.inf
        return d

    blocks = np.array_split(np.arange(nk), max(1, nk // 64))
    parts = chunked_map(row_block, blocks)
    dmat = np.vstack(parts)
    min_margin = float(dmat.min())
    failing = []
    if min_margin <= 0:
        bad = np.argwhere(dmat <= 0)
        for k, kp in bad[:64]:
            failing.append((tuple(index[k]), tuple(index[kp])))
    return AcuteCheckResult(min_margin > 0, min_margin, failing)


def scan_acute_threshold(radius: float, apex: float, span: float,
                         m_max: int = 12, window: int = 4):
    """Smallest m0 such that the acute check passes for every
    m in [m0, m0 + window - 1]; the guarantee is only asymptotic, so the
    threshold is discovered by scanning, not assumed.

    Returns (m0, per_m) where per_m maps m to its minimal margin.
    """
    per_m = {}
    for m in range(1, m_max + 1):
        per_m[m] = acute_check_d2(sphere_ladder_d2(radius, apex, span, m)).min_margin
    for m0 in range(1, m_max - window + 2):
        if all(per_m[m] > 0 for m in range(m0, m0 + window)):
            return m0, per_m
    raise ParameterError(
        f"no passing window of width {window} found for m <= {m_max}"
    )


# --------------------------------------------------------------------------
# grafts
# --------------------------------------------------------------------------

@dataclass(eq=False)
class GraftResult:
    polytope: Polytope
    new_normals: list[Chord]
    certificate: dict = field(default_factory=dict)


def _require_double_normal(p: Polytope, b: Chord, tol: float) -> None:
    slack = tol * p.diameter
    m1 = support_margin(p, b.tail, b.vector)
    m2 = support_margin(p, b.head, -b.vector)
    if m1 < -slack or m2 < -slack:
        raise PreconditionError(
            f"chord is not a double normal of the polytope "
            f"(support margins {m1:.2e}, {m2:.2e})"
        )


def spherical_cap_graft(p: Polytope, b: Chord, radius: float, eps: float,
                        resolution: int = 64, tol: float = DEFAULT_TOL) -> GraftResult:
    """Graft two antipodal spherical caps around the feet of a double normal.

    The hull of the polytope with the part of the ball B(midpoint, radius)
    lying beyond the two hyperplanes through the feet (normal to the chord)
    exposes two spherical caps, symmetric through the midpoint; every
    antipodal pair of exposed cap points is a double normal of length
    2*radius.  The caps are sampled at ``resolution`` points per radian and
    the discrete hull is certified.

    Raises
    ------
    PreconditionError
        If ``b`` is not a double normal or ``radius <= length/2``.
    ParameterError
        If the result moves farther than ``eps`` from the input
        ("cap graft exceeds eps").
    """
    _require_double_normal(p, b, tol)
    half = b.length() / 2.0
    scale = p.diameter
    if radius <= half + 10 * tol * scale:
        raise PreconditionError(
            f"cap radius {radius:g} must exceed half the chord length {half:g}"
        )
    if p.dim not in (2, 3):
        raise ParameterError("cap grafting is implemented for ambient dimension 2 and 3")
    o = b.midpoint
    axis = unit(b.vector)
    alpha = math.acos(half / radius)

    caps = _sample_cap(p.dim, o, axis, radius, alpha, resolution)
    mirrored = 2.0 * o - caps
    hull = build_hull(np.vstack([p.vertices, caps, mirrored]), tol,
                      name=(p.name or "polytope") + "+caps")
    d_ph = hausdorff_distance(p.vertices, hull.vertices, tol)
    if d_ph >= eps:
        raise ParameterError(
            f"cap graft exceeds eps: Hausdorff distance {d_ph:.6g} >= {eps:g}"
        )

    slack = tol * hull.diameter
    new_normals = []
    margins = []
    for q in caps:
        if min(np.linalg.norm(hull.vertices - q, axis=1)) > slack:
            continue  # sample swallowed by the hull
        qm = 2.0 * o - q
        m1 = support_margin(hull, q, qm - q)
        m2 = support_margin(hull, qm, q - qm)
        if m1 >= -slack and m2 >= -slack:
            new_normals.append(Chord(qm, q))
            margins.append(min(m1, m2))
    if not new_normals:
        raise ParameterError("no cap sample survived as a certified double normal")
    return GraftResult(hull, new_normals, {
        "hausdorff": d_ph,
        "eps": eps,
        "cap_radius": radius,
        "chord_length": 2.0 * radius,
        "worst_support_margin": float(min(margins)),
        "certified_count": len(new_normals),
    })


def _sample_cap(dim, o, axis, radius, alpha, resolution):
    if dim == 2:
        k = max(3, int(math.ceil(2 * alpha * resolution)) + 1)
        ang = np.linspace(-alpha, alpha, k)
        perp = _rot90(axis)
        return o + radius * (np.cos(ang)[:, None] * axis + np.sin(ang)[:, None] * perp)
    # dim == 3: latitude rings around the pole
    _, _, vh = np.linalg.svd(axis[None, :])
    e1, e2 = vh[1], vh[2]
    pts = [o + radius * axis]
    n_rings = max(2, int(math.ceil(alpha * resolution / 4.0)))
    for lat in np.linspace(alpha / n_rings, alpha, n_rings):
        n_az = max(3, int(math.ceil(2 * math.pi * resolution * math.sin(lat) / 4.0)))
        az = np.linspace(0.0, 2.0 * math.pi, n_az, endpoint=False)
        ring = (
            o
            + radius * math.cos(lat) * axis
            + radius * math.sin(lat) * (np.cos(az)[:, None] * e1 + np.sin(az)[:, None] * e2)
        )
        pts.append(ring)
    return np.vstack([np.atleast_2d(q) for q in pts])


def rectangle_graft(p: Polytope, b: Chord, extra_len: float, width: float,
                    width_dir=None, tol: float = DEFAULT_TOL) -> GraftResult:
    """Graft a thin rectangle along a double normal so that both rectangle
    diagonals become strictly maximizing double normals of the hull.

    The rectangle is centered at the chord midpoint with its long side
    parallel to the chord (length = chord length + 2*extra_len) and short
    side ``width``.  Certification requires the hyperplanes normal to each
    diagonal through its endpoints to miss the input polytope; the violated
    separation is reported when ``width`` is too large.
    """
    _require_double_normal(p, b, tol)
    scale = p.diameter
    if width <= 10 * tol * scale:
        raise ParameterError("width below the degeneracy threshold 10*tol*diameter")
    if extra_len <= 0:
        raise ParameterError("extra_len must be positive")
    axis = unit(b.vector)
    if width_dir is None:
        proj = [e - np.dot(e, axis) * axis for e in np.eye(p.dim)]
        width_dir = unit(proj[int(np.argmax([np.linalg.norm(v) for v in proj]))])
    else:
        width_dir = unit(np.asarray(width_dir, dtype=float))
        if abs(np.dot(width_dir, axis)) > 1e-9:
            raise ParameterError("width_dir must be orthogonal to the chord")
    o = b.midpoint
    long_half = b.length() / 2.0 + extra_len
    w_half = width / 2.0
    x3 = o - long_half * axis - w_half * width_dir
    x3p = o - long_half * axis + w_half * width_dir
    y3 = o + long_half * axis + w_half * width_dir
    y3p = o + long_half * axis - w_half * width_dir

    slack = tol * scale
    for tailc, headc in ((x3, y3), (x3p, y3p)):
        d_hat = unit(headc - tailc)
        lo = float(np.min((p.vertices - tailc) @ d_hat))
        hi = float(np.max((p.vertices - headc) @ d_hat))
        if lo <= slack or hi >= -slack:
            raise ParameterError(
                "width too large to certify: the diagonal-normal hyperplanes "
                f"cut the polytope (separations {lo:.3e}, {-hi:.3e})"
            )

    hull = build_hull(np.vstack([p.vertices, [x3, x3p, y3, y3p]]), tol,
                      name=(p.name or "polytope") + "+rect")
    diagonals = [Chord(x3, y3), Chord(x3p, y3p)]
    margins = []
    hslack = tol * hull.diameter
    for c in diagonals:
        m1 = support_margin(hull, c.tail, c.vector)
        m2 = support_margin(hull, c.head, -c.vector)
        if m1 < -hslack or m2 < -hslack:
            raise ParameterError(
                "rectangle corners failed the support certificate; "
                "reduce width or extra_len"
            )
        margins.append(min(m1, m2))
    d_ph = hausdorff_distance(p.vertices, hull.vertices, tol)
    return GraftResult(hull, diagonals, {
        "hausdorff": d_ph,
        "worst_support_margin": float(min(margins)),
        "extra_len": extra_len,
        "width": width,
    })


# --------------------------------------------------------------------------
# cone sharpening
# --------------------------------------------------------------------------

@dataclass(eq=False)
class ConeSharpenResult:
    polytope: Polytope
    inside: object          # point -> bool membership predicate
    kept: np.ndarray        # indices of surviving input points
    chords: list[Chord]
    certificate: dict = field(default_factory=dict)


def cone_sharpen(points, pairs, p: int, tol: float = DEFAULT_TOL) -> ConeSharpenResult:
    """Intersect a hull with blunt revolution cones to make chosen chords
    strictly maximizing.

    For each index pair (a, b), two solid half-cones are placed with apexes
    at the two points, axis along the chord, and half-angle pi/2 - 1/p; any
    point of the sharpened body then sees each chord endpoint under an angle
    strictly below pi/2, which is the strict-maximum certificate.  As p
    grows the cones flatten toward half-spaces and the body is unchanged in
    the limit.

    Returns a membership predicate for the exact intersection and the hull
    of the surviving sample points (always a subset of the intersection).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if p < 2:
        raise ParameterError("cone parameter p must be at least 2")
    base = build_hull(pts, tol, name="cone-sharpen-base")
    scale = base.diameter
    slack = tol * scale
    apex_list = []
    for a, b in pairs:
        ua, vb = pts[a], pts[b]
        for endpoint in (ua, vb):
            if min(np.linalg.norm(base.vertices - endpoint, axis=1)) > slack:
                raise PreconditionError(
                    "chord endpoints must be extreme points of the hull"
                )
        apex_list.append((ua, unit(vb - ua)))
        apex_list.append((vb, unit(ua - vb)))
    beta = math.pi / 2.0 - 1.0 / p
    cos_beta = math.cos(beta)

    def in_cones(q) -> bool:
        q = np.asarray(q, dtype=float)
        for apex, ax in apex_list:
            d = q - apex
            nn = np.linalg.norm(d)
            if nn <= slack:
                continue
            if np.dot(d, ax) < (cos_beta - tol) * nn:
                return False
        return True

    def inside(q) -> bool:
        from .geometry import distance_to_hull

        return in_cones(q) and distance_to_hull(q, base.vertices) <= slack

    kept = np.array([i for i in range(len(pts)) if in_cones(pts[i])], dtype=int)
    keep_pts = [pts[kept]] if len(kept) else []
    for a, b in pairs:
        keep_pts.append(pts[[a, b]])
    sharpened = build_hull(np.vstack(keep_pts), tol, name="cone-sharpened")
    chords = [Chord(pts[a], pts[b]) for a, b in pairs]
    worst = math.inf
    hslack = tol * sharpened.diameter
    for c in chords:
        m1 = support_margin(sharpened, c.tail, c.vector)
        m2 = support_margin(sharpened, c.head, -c.vector)
        if m1 < -hslack or m2 < -hslack:
            raise ParameterError(
                "sharpened hull lost a chord's support certificate; increase p"
            )
        worst = min(worst, m1, m2)
    return ConeSharpenResult(sharpened, inside, kept, chords, {
        "half_angle": beta,
        "kept_points": int(len(kept)),
        "worst_support_margin": float(worst),
    })
