"""Smooth convex bodies given by support functions.

A body is represented by its support function h and the gradient of the
1-homogeneous extension, which is the boundary touching point of the
supporting hyperplane with outward normal u.  Double normals of strictly
convex smooth bodies are exactly the nonzero critical chords of the length
function, equivalently the zeros on the direction sphere of the tangential
residual of grad h(u) - grad h(-u); the solver looks for those zeros by
multistart damped Newton.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .geometry import (
    DEFAULT_TOL,
    Chord,
    InputError,
    IsolatedNormal,
    NormalFamily,
    NormalInventory,
    ParameterError,
    PreconditionError,
    VerificationError,
    chord_distance,
    nonoriented_chord_distance,
    sphere_net,
    unit,
)

# multistart density per boundary dimension d: 100 * 2^d starts
_STARTS_PER_DIM = 100
_NEWTON_MAX_ITER = 50
_FAMILY_MIN_MEMBERS = 20


@dataclass(eq=False)
class SupportBody:
    """Convex body described by a support function and its touching-point map.

    ``h`` maps unit directions (n, dim) to support values (n,);
    ``grad`` maps unit directions to boundary points (n, dim).
    ``polygon`` is set only for polyline bodies (ordered ccw boundary).
    """

    dim: int
    h: object
    grad: object
    kind: str
    params: dict = field(default_factory=dict)
    strictly_convex: bool = True
    polygon: np.ndarray | None = None
    _diameter: float | None = None

    def support(self, u) -> float:
        u = np.asarray(u, dtype=float)
        return float(self.h(u[None, :])[0])

    def point(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.asarray(self.grad(u[None, :])[0], dtype=float)

    def points(self, us: np.ndarray) -> np.ndarray:
        return np.asarray(self.grad(np.asarray(us, dtype=float)), dtype=float)

    @property
    def diameter(self) -> float:
        if self._diameter is None:
            net = sphere_net(self.dim, 128, seed=7)
            vals = self.h(net) + self.h(-net)
            self._diameter = float(np.max(vals))
        return self._diameter

    def spot_check(self, tol: float = 1e-7, seed: int = 11) -> None:
        """Sample-direction sanity checks: homogeneity of the extension,
        grad consistency <grad(u), u> = h(u), and midpoint convexity of h."""
        net = sphere_net(self.dim, 32, seed=seed)
        hv = self.h(net)
        pts = self.points(net)
        if np.max(np.abs(np.sum(pts * net, axis=1) - hv)) > tol * max(1.0, np.max(np.abs(hv))):
            raise InputError("support gradient inconsistent with support values")
        a, b = net[: len(net) // 2], net[len(net) // 2:]
        mid = a + b
        ok = np.linalg.norm(mid, axis=1) > 1e-9
        hm = self.h(mid[ok] / np.linalg.norm(mid[ok], axis=1, keepdims=True))
        sub = hm * np.linalg.norm(mid[ok], axis=1) <= self.h(a[ok]) + self.h(b[ok]) + tol
        if not np.all(sub):
            raise InputError("support function fails midpoint subadditivity")


def ellipsoid(semiaxes) -> SupportBody:
    """Axis-aligned ellipsoid with the given semiaxes (any dimension >= 2)."""
    a = np.asarray(semiaxes, dtype=float)
    if a.ndim != 1 or len(a) < 2 or np.any(a <= 0):
        raise ParameterError("ellipsoid needs >= 2 positive semiaxes")
    a2 = a * a

    def h(us):
        us = np.atleast_2d(us)
        return np.sqrt(np.sum(a2 * us * us, axis=1))

    def grad(us):
        us = np.atleast_2d(us)
        return a2 * us / h(us)[:, None]

    body = SupportBody(len(a), h, grad, "ellipsoid", {"semiaxes": a.tolist()})
    body._diameter = float(2 * np.max(a))
    body.spot_check()
    return body


def ball(radius: float, dim: int = 2) -> SupportBody:
    if radius <= 0:
        raise ParameterError("ball radius must be positive")
    return ellipsoid([radius] * dim)


def perturbed_ball(base_radius: float, terms) -> SupportBody:
    """Planar body with support function R + sum_k A_k cos(k phi + p_k).

    ``terms`` is a list of (amplitude, frequency, phase) triples; frequency
    is a positive integer.  Convexity (h + h'' > 0) is verified on a dense
    angular grid.
    """
    terms = [(float(a), int(k), float(p)) for a, k, p in terms]
    if base_radius <= 0:
        raise ParameterError("base radius must be positive")

    def h_phi(phi):
        out = np.full_like(phi, base_radius, dtype=float)
        for amp, k, ph in terms:
            out += amp * np.cos(k * phi + ph)
        return out

    def dh_phi(phi):
        out = np.zeros_like(phi, dtype=float)
        for amp, k, ph in terms:
            out -= amp * k * np.sin(k * phi + ph)
        return out

    grid = np.linspace(0, 2 * math.pi, 4096, endpoint=False)
    curv_den = h_phi(grid)
    for amp, k, ph in terms:
        curv_den -= amp * k * k * np.cos(k * grid + ph)  # h + h''
    if np.min(curv_den) <= 0:
        raise ParameterError(
            "perturbation destroys convexity: h + h'' reaches "
            f"{np.min(curv_den):.3g} <= 0"
        )

    def h(us):
        us = np.atleast_2d(us)
        phi = np.arctan2(us[:, 1], us[:, 0])
        return h_phi(phi) * np.linalg.norm(us, axis=1)

    def grad(us):
        us = np.atleast_2d(us)
        n = np.linalg.norm(us, axis=1, keepdims=True)
        uu = us / n
        phi = np.arctan2(uu[:, 1], uu[:, 0])
        hv, dv = h_phi(phi), dh_phi(phi)
        perp = np.stack([-uu[:, 1], uu[:, 0]], axis=1)
        return hv[:, None] * uu + dv[:, None] * perp

    body = SupportBody(2, h, grad, "perturbed_ball",
                       {"base_radius": base_radius, "terms": terms})
    body.spot_check()
    return body


def polyline_body(points) -> SupportBody:
    """Planar polytope wrapped in the support-function interface.

    Used for corner probes; the gradient map returns an extreme touching
    point, so the body is not strictly convex and the critical-point solver
    rejects it.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != 2 or pts.shape[0] < 3:
        raise InputError("polyline body needs >= 3 planar points")
    from scipy.spatial import ConvexHull

    hull = ConvexHull(pts)
    poly = pts[hull.vertices]  # ccw order in 2-d

    def h(us):
        us = np.atleast_2d(us)
        return np.max(us @ poly.T, axis=1)

    def grad(us):
        us = np.atleast_2d(us)
        return poly[np.argmax(us @ poly.T, axis=1)]

    return SupportBody(2, h, grad, "polyline_boundary", {"n_points": len(poly)},
                       strictly_convex=False, polygon=poly)


def width(body: SupportBody, u) -> float:
    """h(u) + h(-u): distance between the two supporting hyperplanes
    orthogonal to the unit direction u."""
    u = unit(np.asarray(u, dtype=float))
    return body.support(u) + body.support(-u)


def tangent_basis(u: np.ndarray) -> np.ndarray:
    """Orthonormal rows spanning the tangent space of the sphere at u."""
    u = unit(np.asarray(u, dtype=float))
    _, _, vh = np.linalg.svd(u[None, :])
    return vh[1:]


def _residual_vector(body: SupportBody, u: np.ndarray) -> np.ndarray:
    """Component orthogonal to u of grad(u) - grad(-u); zero exactly at
    double-normal directions."""
    g = body.point(u) - body.point(-u)
    return g - np.dot(g, u) * u


def _newton_refine(body: SupportBody, u0: np.ndarray, tol: float, diam: float):
    u = unit(u0.copy())
    d = body.dim - 1
    step = math.sqrt(max(tol, 1e-15))
    res = _residual_vector(body, u)
    rn = np.linalg.norm(res)
    target = 0.05 * tol * diam
    for _ in range(_NEWTON_MAX_ITER):
        if rn <= target:
            break
        t = tangent_basis(u)
        g = t @ res
        jac = np.empty((d, d))
        for j in range(d):
            up = unit(u + step * t[j])
            jac[:, j] = (t @ _residual_vector(body, up) - g) / step
        try:
            dxi = np.linalg.solve(jac, -g)
        except np.linalg.LinAlgError:
            dxi = np.linalg.lstsq(jac, -g, rcond=None)[0]
        lam, improved = 1.0, False
        for _ in range(30):
            u_new = unit(u + t.T @ (lam * dxi))
            res_new = _residual_vector(body, u_new)
            rn_new = np.linalg.norm(res_new)
            if rn_new < rn:
                u, res, rn = u_new, res_new, rn_new
                improved = True
                break
            lam *= 0.5
        if not improved:
            break
    return u, rn


def find_double_normals(body: SupportBody, n_starts: int | None = None,
                        tol: float = DEFAULT_TOL, seed: int = 0) -> NormalInventory:
    """Double normals of a smooth body as zeros of the width-criticality
    residual on the direction sphere.

    Multistart damped Newton over a seeded low-discrepancy direction net;
    converged directions u yield chords (grad(-u), grad(u)).  Zeros are
    deduplicated in the chord metric at 10 * tol * diameter.  A large,
    connected cloud of zeros along which the residual stays below tolerance
    is reported as one family (the connection radius is a few times the net
    spacing; a continuum sampled at net resolution cannot be connected at
    tolerance scale, so the radius is a documented heuristic).

    Raises
    ------
    PreconditionError
        For bodies that are not strictly convex.
    VerificationError
        If no start converges; the message carries a residual histogram.
    """
    if not body.strictly_convex:
        raise PreconditionError("the critical-point solver needs a strictly convex body")
    d = body.dim - 1
    if n_starts is None:
        n_starts = _STARTS_PER_DIM * (2 ** d)
    diam = body.diameter
    net = sphere_net(body.dim, n_starts, seed)

    zeros: list[tuple[np.ndarray, float]] = []
    residuals = []
    for u0 in net:
        u, rn = _newton_refine(body, u0, tol, diam)
        residuals.append(rn)
        if rn <= tol * diam:
            zeros.append((u, rn))
    if not zeros:
        decades = np.floor(np.log10(np.maximum(residuals, 1e-300))).astype(int)
        counts = {}
        for d_ in decades:
            counts[int(d_)] = counts.get(int(d_), 0) + 1
        detail = ", ".join(f"1e{k}: {v}" for k, v in sorted(counts.items()))
        raise VerificationError(
            f"no multistart converged (residual histogram by decade: {detail})"
        )

    # dedupe into non-oriented clusters
    clusters: list[dict] = []
    radius = 10 * tol * diam
    for u, rn in zeros:
        chord = Chord(body.point(-u), body.point(u))
        hit = None
        for cl in clusters:
            if nonoriented_chord_distance(chord, cl["chord"]) <= radius:
                hit = cl
                break
        if hit is None:
            clusters.append({"chord": chord.canonical(radius), "dirs": [u],
                             "residual": rn})
        else:
            hit["dirs"].append(u)
            hit["residual"] = min(hit["residual"], rn)

    families: list[NormalFamily] = []
    isolated_clusters = clusters
    if len(clusters) >= _FAMILY_MIN_MEMBERS:
        families, isolated_clusters = _detect_families(body, clusters, tol, diam)

    isolated = [
        IsolatedNormal(cl["chord"], residual=cl["residual"] / max(diam, 1e-300))
        for cl in isolated_clusters
    ]
    inv = NormalInventory(isolated=isolated, families=families, dim=body.dim,
                          meta={"tol": tol, "n_starts": n_starts, "seed": seed,
                                "body": body.kind})
    inv.isolated.sort(key=lambda r: (r.length, tuple(np.round(r.chord.tail, 12))))
    inv.check_kuiper()
    return inv


def _detect_families(body: SupportBody, clusters: list[dict], tol: float,
                     diam: float):
    """Split clusters into connected families and genuinely isolated chords."""
    reps = [cl["chord"] for cl in clusters]
    n = len(reps)
    dmat = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            dmat[i, j] = dmat[j, i] = min(
                chord_distance(reps[i], reps[j]),
                chord_distance(reps[i], reps[j].reversed()),
            )
    np.fill_diagonal(dmat, np.inf)
    nn = np.min(dmat, axis=1)
    # low-discrepancy nets cluster locally, so the median nearest-neighbor
    # gap underestimates the net spacing; the 90th percentile is stable
    radius = min(4.0 * float(np.percentile(nn, 90)), 0.2 * diam)
    # union-find components
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if dmat[i, j] <= radius:
                pi, pj = find(i), find(j)
                if pi != pj:
                    parent[pi] = pj
    comps: dict[int, list[int]] = {}
    for i in range(n):
        comps.setdefault(find(i), []).append(i)

    families, isolated = [], []
    for members in comps.values():
        if len(members) < _FAMILY_MIN_MEMBERS or not _residual_connected(
            body, clusters, members, dmat, radius, tol, diam
        ):
            isolated.extend(clusters[i] for i in members)
            continue
        dirs = np.array([clusters[i]["dirs"][0] for i in members])
        rep_i = min(
            members,
            key=lambda i: np.linalg.norm(clusters[i]["dirs"][0] - dirs.mean(axis=0)),
        )
        families.append(
            NormalFamily(clusters[rep_i]["chord"], _family_dim(dirs, body.dim),
                         member_count=len(members))
        )
    return families, isolated


def _residual_connected(body, clusters, members, dmat, radius, tol, diam) -> bool:
    """Residual must stay below tolerance along arcs between near members."""
    checked = 0
    for a in range(len(members)):
        for b in range(a + 1, len(members)):
            i, j = members[a], members[b]
            if dmat[i, j] > radius or checked >= 64:
                continue
            ua, ub = clusters[i]["dirs"][0], clusters[j]["dirs"][0]
            if np.dot(ua, ub) < 0:
                ub = -ub
            for t in (0.25, 0.5, 0.75):
                um = unit((1 - t) * ua + t * ub)
                if np.linalg.norm(_residual_vector(body, um)) > 10 * tol * diam:
                    return False
            checked += 1
    return True


def _family_dim(dirs: np.ndarray, dim: int) -> int:
    """Intrinsic dimension of a direction cloud on the sphere."""
    d = dim - 1
    # folded to one hemisphere for non-oriented comparison
    folded = dirs * np.where(dirs @ dirs[0] < 0, -1.0, 1.0)[:, None]
    centered = folded - folded.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    spread = s[0] if s.size else 0.0
    if spread <= 1e-9:
        return 1
    rank = int(np.sum(s > 0.05 * spread))
    return min(max(rank - 1, 1), d) if rank > d else min(rank, d)


def _normal_direction_at(body: SupportBody, x, tol: float) -> np.ndarray:
    """Outward normal u with grad(u) = x, for x on the boundary.

    Solved as a zero of the tangential part of x - grad(u) by the same
    damped Newton used for the double-normal search.
    """
    x = np.asarray(x, dtype=float)
    diam = body.diameter
    u = unit(x) if np.linalg.norm(x) > 1e-12 else sphere_net(body.dim, 1, 0)[0]
    d = body.dim - 1
    step = math.sqrt(max(tol, 1e-15))

    def res_vec(v):
        r = x - body.point(v)
        return r - np.dot(r, v) * v

    res = res_vec(u)
    rn = np.linalg.norm(res)
    for _ in range(_NEWTON_MAX_ITER):
        if rn <= 0.01 * tol * diam:
            break
        t = tangent_basis(u)
        g = t @ res
        jac = np.empty((d, d))
        for j in range(d):
            jac[:, j] = (t @ res_vec(unit(u + step * t[j])) - g) / step
        try:
            dxi = np.linalg.solve(jac, -g)
        except np.linalg.LinAlgError:
            dxi = np.linalg.lstsq(jac, -g, rcond=None)[0]
        lam, improved = 1.0, False
        for _ in range(30):
            u_new = unit(u + t.T @ (lam * dxi))
            res_new = res_vec(u_new)
            rn_new = np.linalg.norm(res_new)
            if rn_new < rn:
                u, res, rn = u_new, res_new, rn_new
                improved = True
                break
            lam *= 0.5
        if not improved:
            break
    if np.linalg.norm(body.point(u) - x) > 100 * tol * diam:
        raise PreconditionError("point is not on the body boundary")
    return u


def chord_length_gradient(body: SupportBody, b: Chord, tol: float = DEFAULT_TOL):
    """Gradient of the chord-length function in orthonormal tangent charts
    at both feet.

    The derivative of |x - y| under a tangential motion of x is the
    tangential component of the unit chord vector, so the gradient at each
    foot is that projection expressed in a tangent basis.  At a double
    normal both projections vanish.

    Returns
    -------
    (gradient, norm) : gradient stacked as (2, d) rows (tail chart then head
    chart), and its Euclidean norm.
    """
    if b.length() <= tol * body.diameter:
        raise PreconditionError("degenerate chord has no length gradient")
    u_tail = _normal_direction_at(body, b.tail, tol)
    u_head = _normal_direction_at(body, b.head, tol)
    e = unit(b.tail - b.head)
    g_tail = tangent_basis(u_tail) @ e
    g_head = tangent_basis(u_head) @ (-e)
    g = np.stack([g_tail, g_head])
    return g, float(np.linalg.norm(g))


# --------------------------------------------------------------------------
# curvature probes
# --------------------------------------------------------------------------

@dataclass(eq=False)
class CurvatureEstimate:
    """Scale-resolved osculating-radius estimates at a boundary point.

    ``lower_radius``/``upper_radius`` are min/max of the circle radii
    r_z = |z - x|^2 / (2 <z - x, n_in>) over the smallest-scale window;
    math.inf marks a flat direction (denominator below tolerance).
    """

    lower_radius: float
    upper_radius: float
    scales_used: list
    samples: list  # (realized scale, radius) pairs

    def __post_init__(self):
        if self.lower_radius > self.upper_radius:
            raise VerificationError("curvature estimate has lower > upper")


def _probe_radii(x, zs, n_in, tol, diam):
    out = []
    for z in zs:
        d = z - x
        den = 2.0 * float(np.dot(d, n_in))
        num = float(np.dot(d, d))
        if den <= tol * diam * math.sqrt(num):
            out.append((math.sqrt(num), math.inf))
        else:
            out.append((math.sqrt(num), num / den))
    return out


def curvature_probe(body: SupportBody, x, tau, scales,
                    tol: float = DEFAULT_TOL) -> CurvatureEstimate:
    """Estimate lower/upper curvature radii at x in tangent direction tau.

    For each requested scale s a boundary point z at arc parameter about s
    from x, in the half-plane spanned by the normal line and tau, is probed
    with the circle-through-two-points radius formula.  The reported
    lower/upper radii are the min/max over the smallest-scale window
    (realized scales within twice the smallest one).
    """
    x = np.asarray(x, dtype=float)
    tau = np.asarray(tau, dtype=float)
    scales = sorted(float(s) for s in scales)
    if not scales or scales[0] <= 0:
        raise ParameterError("scales must be positive")
    diam = body.diameter

    if body.polygon is not None:
        n_in, zs = _polygon_probe_points(body.polygon, x, tau, scales, tol, diam)
    else:
        u0 = _normal_direction_at(body, x, tol)
        if abs(np.dot(unit(tau), u0)) > 1e-6:
            raise PreconditionError("tau is not tangent at x")
        t_hat = unit(tau - np.dot(tau, u0) * u0)
        n_in = -u0
        zs = []
        for s in scales:
            psi = s / max(diam / 2.0, 1e-300)
            z = body.point(unit(math.cos(psi) * u0 + math.sin(psi) * t_hat))
            for _ in range(8):  # secant steps to land |z - x| near s
                r = np.linalg.norm(z - x)
                if r <= 1e-300 or abs(r - s) <= 0.05 * s:
                    break
                psi *= s / r
                z = body.point(unit(math.cos(psi) * u0 + math.sin(psi) * t_hat))
            zs.append(z)

    samples = _probe_radii(x, zs, n_in, tol, diam)
    window_cut = 2.0 * samples[0][0] if samples else 0.0
    window = [r for s, r in samples if s <= window_cut] or [r for _, r in samples]
    return CurvatureEstimate(
        lower_radius=min(window),
        upper_radius=max(window),
        scales_used=[s for s, _ in samples],
        samples=samples,
    )


def _polygon_probe_points(poly, x, tau, scales, tol, diam):
    """Walk the polygon boundary from x along tau; inward normal is the
    rotation of tau toward the interior."""
    tau = unit(tau)
    n_in = np.array([-tau[1], tau[0]])
    centroid = poly.mean(axis=0)
    if np.dot(n_in, centroid - x) < 0:
        n_in = -n_in
    # locate x on the boundary and build the forward vertex walk
    n = len(poly)
    best, best_d = None, np.inf
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        ab = b - a
        t = np.clip(np.dot(x - a, ab) / np.dot(ab, ab), 0, 1)
        d = np.linalg.norm(a + t * ab - x)
        if d < best_d:
            best, best_d = (i, t), d
    if best_d > 100 * tol * diam:
        raise PreconditionError("point is not on the polygon boundary")
    i0, t0 = best
    # choose walking direction along tau
    edge_dir = unit(poly[(i0 + 1) % n] - poly[i0])
    forward = np.dot(edge_dir, tau) >= 0
    zs = []
    for s in scales:
        remaining = s
        i, t = i0, t0
        for _ in range(2 * n + 2):
            a, b = poly[i % n], poly[(i + 1) % n]
            if forward:
                seg = np.linalg.norm(b - a) * (1 - t)
                if remaining <= seg + 1e-300:
                    z = a + (t + remaining / np.linalg.norm(b - a)) * (b - a)
                    break
                remaining -= seg
                i, t = i + 1, 0.0
            else:
                seg = np.linalg.norm(b - a) * t
                if remaining <= seg + 1e-300:
                    z = a + (t - remaining / np.linalg.norm(b - a)) * (b - a)
                    break
                remaining -= seg
                i, t = i - 1, 1.0
        zs.append(z)
    return n_in, zs


# --------------------------------------------------------------------------
# planar Hessian cross-check
# --------------------------------------------------------------------------

@dataclass(eq=False)
class HessianCheck:
    analytic: np.ndarray
    numeric: np.ndarray
    max_abs_diff: float
    degeneracy_indicator: float  # |1/gamma_tail + 1/gamma_head - w|


def _walk_arclength(body: SupportBody, phi0: float, s: float) -> np.ndarray:
    """Boundary point at signed ccw arclength s from the point with outward
    normal angle phi0 (planar bodies only)."""
    eps = 1e-6

    def point_at(phi):
        return body.point(np.array([math.cos(phi), math.sin(phi)]))

    def speed_inv(_, phi):
        dp = (point_at(phi[0] + eps) - point_at(phi[0] - eps)) / (2 * eps)
        return [1.0 / max(np.linalg.norm(dp), 1e-300)]

    if s == 0.0:
        return point_at(phi0)
    sol = solve_ivp(speed_inv, (0.0, s), [phi0], rtol=1e-12, atol=1e-14,
                    dense_output=False)
    return point_at(float(sol.y[0, -1]))


def hessian_check_d1(body: SupportBody, b: Chord, gamma_tail: float,
                     gamma_head: float, tol: float = DEFAULT_TOL) -> HessianCheck:
    """Compare the closed-form planar Hessian of the chord-length function
    with central finite differences in arclength charts.

    With w the chord length and gamma the boundary curvatures at the feet,
    the Hessian at a double normal is
    ``[[1/w - gamma_tail, 1/w], [1/w, 1/w - gamma_head]]`` in ccw arclength
    charts at both feet.  The degeneracy indicator is
    ``|1/gamma_tail + 1/gamma_head - w|``; zero means a singular Hessian.
    """
    if body.dim != 2:
        raise PreconditionError("the Hessian cross-check is planar (d = 1) only")
    _, gnorm = chord_length_gradient(body, b, tol)
    if gnorm > 1000 * tol * body.diameter:
        raise PreconditionError(
            f"chord is not a double normal (gradient norm {gnorm:.2e})"
        )
    w = b.length()
    analytic = np.array([
        [1.0 / w - gamma_tail, 1.0 / w],
        [1.0 / w, 1.0 / w - gamma_head],
    ])

    u_tail = _normal_direction_at(body, b.tail, tol)
    u_head = _normal_direction_at(body, b.head, tol)
    phi_t = math.atan2(u_tail[1], u_tail[0])
    phi_h = math.atan2(u_head[1], u_head[0])
    h = (max(tol, 1e-14)) ** (1.0 / 3.0) * body.diameter

    def ell(ds, dt):
        p = _walk_arclength(body, phi_t, ds) if ds else body.point(u_tail)
        q = _walk_arclength(body, phi_h, dt) if dt else body.point(u_head)
        return float(np.linalg.norm(p - q))

    f00 = ell(0, 0)
    f_ss = (ell(h, 0) - 2 * f00 + ell(-h, 0)) / (h * h)
    f_tt = (ell(0, h) - 2 * f00 + ell(0, -h)) / (h * h)
    f_st = (ell(h, h) - ell(h, -h) - ell(-h, h) + ell(-h, -h)) / (4 * h * h)
    numeric = np.array([[f_ss, f_st], [f_st, f_tt]])

    inv_sum = (1.0 / gamma_tail if gamma_tail else math.inf) + (
        1.0 / gamma_head if gamma_head else math.inf
    )
    return HessianCheck(
        analytic=analytic,
        numeric=numeric,
        max_abs_diff=float(np.max(np.abs(analytic - numeric))),
        degeneracy_indicator=float(abs(inv_sum - w)),
    )
