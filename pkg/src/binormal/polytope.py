"""Polytopes: hulls with face lattices, standardness certification, and
exact enumeration of double normals with support-inequality certificates.

A double normal is certified here by two support inequalities: the
hyperplane through each foot, normal to the chord, must have every vertex on
the chord side.  Enumeration visits unordered pairs of vertex-disjoint faces
and solves the closest-approach problem between their affine spans; every
double normal arises this way because the chord is orthogonal to the spans
of the minimal faces containing its feet, and those faces share no vertex.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from .geometry import (
    DEFAULT_TOL,
    AffineSubspace,
    Chord,
    InputError,
    IsolatedNormal,
    NormalFamily,
    NormalInventory,
    PreconditionError,
    distance_to_hull,
    nonoriented_chord_distance,
    orthonormal_rows,
    subspace_nearest_pair,
    unit,
)

# Facet-merge threshold for hull equations (absolute, on unit normals).
_FACET_MERGE_TOL = 1e-7


@dataclass(frozen=True)
class Face:
    """A face of the lattice: its dimension and vertex-index set."""

    dim: int
    vertex_ids: frozenset


@dataclass(eq=False)
class Facet:
    """Top-dimensional proper face with its outward unit normal and offset."""

    vertex_ids: frozenset
    normal: np.ndarray
    offset: float


@dataclass(eq=False)
class Polytope:
    """Vertex representation plus derived facets and face lattice.

    Invariants (established by :func:`build_hull`): every listed vertex is
    extreme; each facet normal supports the polytope with equality exactly on
    the facet's vertex set; the face lattice is closed under intersection.
    """

    vertices: np.ndarray
    facets: list[Facet]
    faces: list[Face]
    name: str | None = None
    _spans: dict = field(default_factory=dict, repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def diameter(self) -> float:
        if "diameter" not in self._cache:
            d = np.linalg.norm(
                self.vertices[:, None, :] - self.vertices[None, :, :], axis=-1
            )
            self._cache["diameter"] = float(d.max())
        return self._cache["diameter"]

    def _facet_arrays(self):
        if "normals" not in self._cache:
            self._cache["normals"] = np.array([f.normal for f in self.facets])
            self._cache["offsets"] = np.array([f.offset for f in self.facets])
        return self._cache["normals"], self._cache["offsets"]

    def face_points(self, face: Face) -> np.ndarray:
        return self.vertices[sorted(face.vertex_ids)]

    def face_span(self, face: Face, tol: float = DEFAULT_TOL) -> AffineSubspace:
        if face not in self._spans:
            self._spans[face] = AffineSubspace.from_points(self.face_points(face), tol)
        return self._spans[face]

    def contains(self, x, tol: float = DEFAULT_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        normals, offsets = self._facet_arrays()
        return bool(np.all(normals @ x <= offsets + tol * self.diameter))

    def active_facets(self, x, tol: float = DEFAULT_TOL) -> list[Facet]:
        x = np.asarray(x, dtype=float)
        normals, offsets = self._facet_arrays()
        hit = np.abs(normals @ x - offsets) <= tol * self.diameter
        return [self.facets[i] for i in np.nonzero(hit)[0]]

    def on_boundary(self, x, tol: float = DEFAULT_TOL) -> bool:
        return self.contains(x, tol) and bool(self.active_facets(x, tol))

    def minimal_face(self, x, tol: float = DEFAULT_TOL) -> Face:
        """Smallest face containing ``x``; ties break toward lower dimension."""
        active = self.active_facets(x, tol)
        if not active:
            raise PreconditionError("point is not on the boundary of the polytope")
        ids = frozenset.intersection(*[f.vertex_ids for f in active])
        candidates = [f for f in self.faces if f.vertex_ids == ids]
        if candidates:
            return candidates[0]
        # x sits on facets whose intersection is not in the lattice only if
        # numerics misclassified activity; fall back to the smallest face
        # containing x within tolerance.
        slack = tol * self.diameter
        best = None
        for f in sorted(self.faces, key=lambda f: f.dim):
            if distance_to_hull(x, self.face_points(f)) <= slack:
                best = f
                break
        if best is None:
            raise PreconditionError("point is not on the boundary of the polytope")
        return best


def build_hull(points, tol: float = DEFAULT_TOL, name: str | None = None) -> Polytope:
    """Convex hull of a point set as a :class:`Polytope`.

    Parameters
    ----------
    points : array-like, shape (n, dim)
        At least dim + 1 affinely independent points, dim >= 2.  Non-extreme
        points are discarded.
    tol : float
        Rank/merge tolerance on unit-diameter scale.

    Raises
    ------
    InputError
        If the input is affinely degenerate (affine dimension < ambient) or
        the ambient dimension is unsupported.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise InputError("need at least dim + 2 points to build a hull")
    dim = pts.shape[1]
    if dim < 2 or dim > 8:
        raise InputError(f"ambient dimension {dim} outside the supported range 2..8")
    rank = orthonormal_rows(pts[1:] - pts[0], tol).shape[0]
    if rank < dim:
        raise InputError(
            f"input is dimension-deficient: affine dimension {rank} < ambient {dim}"
        )
    try:
        hull = ConvexHull(pts)
    except QhullError as exc:  # pragma: no cover - rank check catches most
        raise InputError(f"hull construction failed: {exc}") from exc

    keep = np.array(sorted(hull.vertices))
    vertices = pts[keep]
    old_to_new = {int(o): i for i, o in enumerate(keep)}

    # merge qhull's simplicial output into true facets
    groups: list[tuple[np.ndarray, float, set]] = []
    for simplex, eq in zip(hull.simplices, hull.equations):
        n, off = eq[:-1], -float(eq[-1])
        hit = None
        for g in groups:
            if np.linalg.norm(g[0] - n) <= _FACET_MERGE_TOL and abs(g[1] - off) <= _FACET_MERGE_TOL * max(1.0, abs(off)):
                hit = g
                break
        if hit is None:
            groups.append((n, off, set(int(s) for s in simplex)))
        else:
            hit[2].update(int(s) for s in simplex)

    diameter = float(
        np.max(np.linalg.norm(vertices[:, None, :] - vertices[None, :, :], axis=-1))
    )
    slack = max(tol, 1e-12) * max(diameter, 1.0)
    facets = []
    for n, off, members in groups:
        n = unit(n)
        off = float(np.dot(n, pts[next(iter(members))]))
        vals = vertices @ n
        on = np.abs(vals - off) <= 10 * slack
        if np.any(vals > off + 10 * slack):
            raise InputError("hull facet certificate failed; input may be ill-conditioned")
        facets.append(Facet(frozenset(np.nonzero(on)[0].tolist()), n, off))

    faces = _face_lattice(vertices, facets, tol)
    return Polytope(vertices=vertices, facets=facets, faces=faces, name=name)


def _face_lattice(vertices: np.ndarray, facets: list[Facet], tol: float) -> list[Face]:
    """All proper faces, 0 <= dim <= d, closed under intersection."""
    sets = {f.vertex_ids for f in facets}
    frontier = set(sets)
    while frontier:
        fresh = set()
        for a, b in itertools.product(frontier, sets):
            c = a & b
            if c and c not in sets and c not in fresh:
                fresh.add(c)
        sets |= fresh
        frontier = fresh
    # vertices are always faces, even if no facet intersection isolates them
    for i in range(vertices.shape[0]):
        sets.add(frozenset([i]))
    faces = []
    for ids in sets:
        pts = vertices[sorted(ids)]
        d = orthonormal_rows(pts[1:] - pts[0], tol).shape[0] if len(ids) > 1 else 0
        faces.append(Face(d, ids))
    faces.sort(key=lambda f: (f.dim, tuple(sorted(f.vertex_ids))))
    return faces


def support_check(p: Polytope, x, u, tol: float = DEFAULT_TOL) -> bool:
    """Does the hyperplane through ``x`` with normal ``u`` support ``p``,
    with ``p`` on the positive side of ``u``?

    ``x`` must lie on the boundary of ``p`` (within tolerance).  The test is
    ``<u, v - x> >= -tol * diameter`` for every vertex ``v``.
    """
    x = np.asarray(x, dtype=float)
    if not p.on_boundary(x, max(tol, 1e-7)):
        raise PreconditionError("support_check requires a boundary point")
    return support_margin(p, x, u) >= -tol * p.diameter


def support_margin(p: Polytope, x, u) -> float:
    """min over vertices of <u_hat, v - x>; nonnegative iff supporting."""
    uh = unit(np.asarray(u, dtype=float))
    return float(np.min((p.vertices - np.asarray(x, dtype=float)) @ uh))


# --------------------------------------------------------------------------
# double-normal enumeration
# --------------------------------------------------------------------------

def _clip_family(p: Polytope, face_a: Face, face_b: Face, pair, tol: float):
    """Intersect the closest-pair family with face membership.

    The minimizer set of two affine spans with common direction space W is
    {(pa + w, pb + w) : w in W}.  Membership of both feet in their faces cuts
    W down to a convex polytope in W-coordinates; its dimension and a
    representative interior point are estimated from axis and diagonal
    extent LPs.
    """
    va = p.face_points(face_a)
    vb = p.face_points(face_b)
    na, nb = va.shape[0], vb.shape[0]
    dim = p.dim
    w_basis = pair.common_directions
    k = w_basis.shape[0]
    # variables: barycentric weights (lam, mu); y - x must equal pb - pa
    a_eq = np.zeros((dim + 2, na + nb))
    a_eq[:dim, :na] = -va.T
    a_eq[:dim, na:] = vb.T
    a_eq[dim, :na] = 1.0
    a_eq[dim + 1, na:] = 1.0
    b_eq = np.concatenate([pair.point_b - pair.point_a, [1.0, 1.0]])

    def solve(c):
        res = linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
        if not res.success:
            return None
        lam = res.x[:na]
        return va.T @ lam  # the tail point x

    x0 = solve(np.zeros(na + nb))
    if x0 is None:
        return None
    probes = [x0]
    dirs = [w_basis[j] for j in range(k)]
    for i, j in itertools.combinations(range(k), 2):
        dirs.append(unit(w_basis[i] + w_basis[j]))
        dirs.append(unit(w_basis[i] - w_basis[j]))
    extents = []
    for d in dirs:
        c = np.concatenate([-(va @ d), np.zeros(nb)])
        hi = solve(c)
        lo = solve(-c)
        if hi is None or lo is None:
            continue
        probes.extend([hi, lo])
        extents.append(float(np.dot(hi - lo, d)))
    probes = np.array(probes)
    rep_tail = probes.mean(axis=0)
    rep_head = rep_tail + (pair.point_b - pair.point_a)
    slack = tol * max(p.diameter, 1.0)
    fam_dim = orthonormal_rows(probes - rep_tail, max(tol, 1e-10)).shape[0]
    if extents and max(extents, default=0.0) <= slack:
        fam_dim = 0
    return Chord(rep_tail, rep_head), fam_dim


def enumerate_double_normals(p: Polytope, tol: float = DEFAULT_TOL) -> NormalInventory:
    """Exhaustive double-normal inventory of a polytope.

    For every unordered pair of vertex-disjoint faces, the closest pair of
    their affine spans is computed.  A unique minimizer is accepted as an
    isolated double normal when both feet lie in their faces and both
    support inequalities hold; a positive-dimensional minimizer family is
    clipped to face membership and reported symbolically with its dimension.
    Chords found through several nested face pairs are merged, attributed to
    the minimal faces of their feet; isolated candidates that are members of
    a reported family are absorbed by it.

    Raises
    ------
    VerificationError
        If fewer than d + 1 non-oriented double normals are found, which a
        convex body cannot have; this signals an implementation bug.
    """
    scale = p.diameter
    slack = tol * scale
    iso_candidates: list[IsolatedNormal] = []
    fam_candidates: list[NormalFamily] = []

    faces = p.faces
    for fa, fb in itertools.combinations(faces, 2):
        if fa.vertex_ids & fb.vertex_ids:
            continue
        pair = subspace_nearest_pair(p.face_span(fa, tol), p.face_span(fb, tol), tol)
        if pair.distance <= slack:
            continue  # spans meet: no nondegenerate perpendicular chord here
        if pair.unique:
            x, y = pair.point_a, pair.point_b
            if distance_to_hull(x, p.face_points(fa)) > slack:
                continue
            if distance_to_hull(y, p.face_points(fb)) > slack:
                continue
            m1 = support_margin(p, x, y - x)
            m2 = support_margin(p, y, x - y)
            if m1 < -slack or m2 < -slack:
                continue
            iso_candidates.append(
                IsolatedNormal(Chord(x, y), fa.vertex_ids, fb.vertex_ids,
                               residual=max(0.0, -min(m1, m2)) / max(scale, 1e-300))
            )
        else:
            clipped = _clip_family(p, fa, fb, pair, tol)
            if clipped is None:
                continue
            rep, fam_dim = clipped
            m1 = support_margin(p, rep.tail, rep.vector)
            m2 = support_margin(p, rep.head, -rep.vector)
            if m1 < -slack or m2 < -slack:
                continue
            if fam_dim == 0:
                iso_candidates.append(
                    IsolatedNormal(rep, fa.vertex_ids, fb.vertex_ids,
                                   residual=max(0.0, -min(m1, m2)) / max(scale, 1e-300))
                )
            else:
                fam_candidates.append(
                    NormalFamily(rep, fam_dim, fa.vertex_ids, fb.vertex_ids)
                )

    families = _dedupe_families(fam_candidates, slack)
    isolated = _dedupe_isolated(p, iso_candidates, families, slack, tol)

    inv = NormalInventory(isolated=isolated, families=families, dim=p.dim,
                          meta={"tol": tol, "body": p.name or "polytope"})
    inv.isolated.sort(key=lambda r: (r.length, tuple(np.round(r.chord.tail, 12))))
    inv.families.sort(key=lambda f: (f.length, tuple(sorted(f.tail_face or ()))))
    inv.check_kuiper()
    return inv


def _dedupe_families(cands: list[NormalFamily], slack: float) -> list[NormalFamily]:
    """Drop families nested inside a larger family with the same perpendicular."""
    keep = []
    for f in cands:
        absorbed = False
        for g in cands:
            if g is f:
                continue
            nested = (
                f.tail_face <= g.tail_face and f.head_face <= g.head_face
            ) or (
                f.tail_face <= g.head_face and f.head_face <= g.tail_face
            )
            strict = (f.tail_face | f.head_face) != (g.tail_face | g.head_face)
            if nested and strict and _same_perp(f.representative, g.representative, slack):
                absorbed = True
                break
        if not absorbed:
            keep.append(f)
    # identical face pairs can be produced once only, but guard anyway
    out = []
    seen = set()
    for f in keep:
        key = frozenset([f.tail_face, f.head_face])
        if key not in seen:
            seen.add(key)
            out.append(f)
    return out


def _same_perp(c1: Chord, c2: Chord, slack: float) -> bool:
    v1, v2 = c1.vector, c2.vector
    return bool(
        np.linalg.norm(v1 - v2) <= 10 * slack or np.linalg.norm(v1 + v2) <= 10 * slack
    )


def _member_of_family(p: Polytope, rec: IsolatedNormal, fam: NormalFamily,
                      slack: float) -> bool:
    """Is the isolated candidate a member of the family's minimizer set?"""
    fa = next(f for f in p.faces if f.vertex_ids == fam.tail_face)
    fb = next(f for f in p.faces if f.vertex_ids == fam.head_face)
    for c in (rec.chord, rec.chord.reversed()):
        if np.linalg.norm(c.vector - fam.representative.vector) > 10 * slack:
            continue
        if distance_to_hull(c.tail, p.face_points(fa)) > 10 * slack:
            continue
        if distance_to_hull(c.head, p.face_points(fb)) > 10 * slack:
            continue
        return True
    return False


def _dedupe_isolated(p: Polytope, cands: list[IsolatedNormal],
                     families: list[NormalFamily], slack: float,
                     tol: float) -> list[IsolatedNormal]:
    survivors = [
        rec for rec in cands
        if not any(_member_of_family(p, rec, fam, slack) for fam in families)
    ]
    # cluster identical chords (any orientation), keep minimal face pair
    clusters: list[list[IsolatedNormal]] = []
    for rec in survivors:
        placed = False
        for cl in clusters:
            if nonoriented_chord_distance(rec.chord, cl[0].chord) <= 10 * slack:
                cl.append(rec)
                placed = True
                break
        if not placed:
            clusters.append([rec])
    out = []
    for cl in clusters:
        best = min(cl, key=lambda r: len(r.tail_face | r.head_face))
        chord = best.chord.canonical(10 * slack)
        tail_face = p.minimal_face(chord.tail, max(tol, 1e-9))
        head_face = p.minimal_face(chord.head, max(tol, 1e-9))
        out.append(IsolatedNormal(chord, tail_face.vertex_ids, head_face.vertex_ids,
                                  residual=min(r.residual for r in cl)))
    return out


# --------------------------------------------------------------------------
# standardness
# --------------------------------------------------------------------------

@dataclass(eq=False)
class StandardnessReport:
    standard: bool
    witnesses: list  # failing (I, J) index-set pairs / facet-id pairs


def is_standard(obj, tol: float = DEFAULT_TOL) -> StandardnessReport:
    """General-position certificate forcing a finite double-normal set.

    For a point set: every pair of disjoint index sets ``I``, ``J`` of size
    at most the ambient dimension must satisfy the generic rank condition
    ``rank(M_IJ) = |I| + |J| - 2 - max(0, |I| + |J| - dim - 2)``, where the
    columns of ``M_IJ`` are the in-set difference vectors.  For a
    :class:`Polytope`: every pair of facets without a common vertex must have
    direction spaces intersecting in the minimal possible dimension.

    Returns the verdict plus the list of violating pairs.
    """
    if isinstance(obj, Polytope):
        return _polytope_standard(obj, tol)
    pts = np.atleast_2d(np.asarray(obj, dtype=float))
    n, dim = pts.shape
    witnesses = []
    idx = list(range(n))
    for ka in range(1, dim + 1):
        for kb in range(ka, dim + 1):
            expected = ka + kb - 2 - max(0, ka + kb - dim - 2)
            if expected == 0:
                continue
            pairs = []
            for i_set in itertools.combinations(idx, ka):
                rest = [j for j in idx if j not in i_set]
                for j_set in itertools.combinations(rest, kb):
                    if kb == ka and j_set < i_set:
                        continue  # unordered pair already visited
                    pairs.append((i_set, j_set))
            if not pairs:
                continue
            ii = np.array([pr[0] for pr in pairs])
            jj = np.array([pr[1] for pr in pairs])
            block_i = pts[ii[:, 1:]] - pts[ii[:, :1]]
            block_j = pts[jj[:, 1:]] - pts[jj[:, :1]]
            mats = np.concatenate([block_i, block_j], axis=1).transpose(0, 2, 1)
            s = np.linalg.svd(mats, compute_uv=False)
            cut = np.maximum(tol * s[:, :1], 1e-13)
            ranks = np.sum(s > cut, axis=1)
            for r in np.nonzero(ranks != expected)[0]:
                witnesses.append((tuple(pairs[r][0]), tuple(pairs[r][1])))
    return StandardnessReport(not witnesses, witnesses)


def _polytope_standard(p: Polytope, tol: float) -> StandardnessReport:
    witnesses = []
    for a, b in itertools.combinations(range(len(p.facets)), 2):
        fa, fb = p.facets[a], p.facets[b]
        if fa.vertex_ids & fb.vertex_ids:
            continue
        sa = AffineSubspace.from_points(p.vertices[sorted(fa.vertex_ids)], tol)
        sb = AffineSubspace.from_points(p.vertices[sorted(fb.vertex_ids)], tol)
        joint = orthonormal_rows(np.vstack([sa.basis, sb.basis]), tol).shape[0]
        inter = sa.dim + sb.dim - joint
        if inter != max(0, sa.dim + sb.dim - p.dim):
            witnesses.append((a, b))
    return StandardnessReport(not witnesses, witnesses)


def random_standard_polytope(dim: int, n_vertices: int, rng: np.random.Generator,
                             tol: float = DEFAULT_TOL, max_tries: int = 50) -> Polytope:
    """Random polytope with all sample points extreme and a standard vertex set.

    Points are drawn on a radially jittered sphere, which makes every point
    extreme and the configuration generic with probability one; standardness
    is certified, not assumed.
    """
    for _ in range(max_tries):
        u = rng.normal(size=(n_vertices, dim))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        pts = u * rng.uniform(0.8, 1.2, size=(n_vertices, 1))
        try:
            p = build_hull(pts, tol)
        except InputError:
            continue
        if p.n_vertices != n_vertices:
            continue
        if is_standard(pts, tol).standard:
            return p
    raise InputError("failed to sample a standard polytope; try fewer vertices")
