"""Fixed-dimension vector/affine primitives and the max-endpoint chord metric.

Everything here is pure and operates on plain numpy arrays.  Ambient
dimension is a runtime value (2 through 8 is the tested range for the
polytope machinery; the primitives work in any dimension >= 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls
from scipy.stats import norm, qmc

# Absolute tolerance on unit-diameter scale.  Every operation that compares
# against it first multiplies by the relevant diameter.
DEFAULT_TOL = 1e-9


class BinormalError(Exception):
    """Base class for all library errors."""


class InputError(BinormalError):
    """Malformed or unusable input (bad file, wrong dimension, empty set)."""


class ParameterError(BinormalError):
    """Parameter outside its admissible range."""


class PreconditionError(BinormalError):
    """A documented operation precondition does not hold."""


class VerificationError(BinormalError):
    """An internal certificate failed; indicates a bug, not bad input."""


def as_point(x) -> np.ndarray:
    p = np.asarray(x, dtype=float)
    if p.ndim != 1:
        raise InputError(f"a point must be a 1-d coordinate array, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise InputError("point coordinates must be finite")
    return p


def unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0.0:
        raise InputError("cannot normalize the zero vector")
    return v / n


@dataclass(frozen=True, eq=False)
class Chord:
    """Ordered pair of boundary points.

    ``tail == head`` is allowed only where an operation explicitly accepts a
    degenerate chord; constructors of double-normal records never emit one.
    """

    tail: np.ndarray
    head: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tail", as_point(self.tail))
        object.__setattr__(self, "head", as_point(self.head))
        if self.tail.shape != self.head.shape:
            raise InputError("chord endpoints must share an ambient dimension")
        self.tail.setflags(write=False)
        self.head.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.tail.shape[0]

    @property
    def vector(self) -> np.ndarray:
        return self.head - self.tail

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.tail + self.head)

    def length(self) -> float:
        return float(np.linalg.norm(self.head - self.tail))

    def reversed(self) -> "Chord":
        return Chord(self.head, self.tail)

    def canonical(self, eps: float = 0.0) -> "Chord":
        """Lexicographically smaller endpoint first; identifies orientations.

        Coordinates within ``eps`` of each other are treated as tied so that
        floating noise cannot flip the choice between near-symmetric chords.
        """
        for a, b in zip(self.tail, self.head):
            if a < b - eps:
                return self
            if a > b + eps:
                return self.reversed()
        return self

    def __repr__(self):
        t = np.array2string(self.tail, precision=6, suppress_small=True)
        h = np.array2string(self.head, precision=6, suppress_small=True)
        return f"Chord({t} -> {h})"


def chord_length(c: Chord) -> float:
    """Euclidean length of a chord (zero for a degenerate chord)."""
    return c.length()


def chord_distance(c1: Chord, c2: Chord) -> float:
    """max(|tail1 - tail2|, |head1 - head2|).

    Balls in this metric are Cartesian products of endpoint balls, which is
    what makes it the right metric for sets of oriented chords.
    """
    return float(
        max(
            np.linalg.norm(c1.tail - c2.tail),
            np.linalg.norm(c1.head - c2.head),
        )
    )


def nonoriented_chord_distance(c1: Chord, c2: Chord) -> float:
    """Chord metric minimized over the relative orientation of the pair."""
    return min(chord_distance(c1, c2), chord_distance(c1, c2.reversed()))


def orthonormal_rows(vectors: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormalize the rows of ``vectors`` by modified Gram-Schmidt.

    Rows whose residual norm falls below ``tol`` times the largest input row
    norm are treated as dependent and dropped, so the number of returned rows
    is the numerical rank.
    """
    v = np.atleast_2d(np.asarray(vectors, dtype=float)).copy()
    if v.size == 0:
        return v.reshape(0, v.shape[-1] if v.ndim == 2 else 0)
    cutoff = tol * max(np.max(np.linalg.norm(v, axis=1)), 1.0)
    basis: list[np.ndarray] = []
    for row in v:
        w = row.copy()
        for b in basis:
            w -= np.dot(w, b) * b
        # second pass for numerical orthogonality
        for b in basis:
            w -= np.dot(w, b) * b
        n = np.linalg.norm(w)
        if n > cutoff:
            basis.append(w / n)
    if not basis:
        return np.zeros((0, v.shape[1]))
    return np.array(basis)


@dataclass(frozen=True, eq=False)
class AffineSubspace:
    """Affine subspace given by a base point and an orthonormal direction basis.

    ``basis`` has one row per direction; zero rows means a single point.
    """

    base: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "base", as_point(self.base))
        b = np.atleast_2d(np.asarray(self.basis, dtype=float))
        if b.size == 0:
            b = np.zeros((0, self.base.shape[0]))
        object.__setattr__(self, "basis", b)
        if self.basis.shape[1] != self.base.shape[0]:
            raise InputError("basis vectors must match the base point dimension")
        gram = self.basis @ self.basis.T
        if gram.size and np.max(np.abs(gram - np.eye(len(gram)))) > 1e-7:
            raise InputError("basis rows must be orthonormal")

    @classmethod
    def from_points(cls, points, tol: float = DEFAULT_TOL) -> "AffineSubspace":
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        base = pts[0]
        return cls(base, orthonormal_rows(pts[1:] - base, tol))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.base.shape[0]

    def project(self, x: np.ndarray) -> np.ndarray:
        d = x - self.base
        return self.base + self.basis.T @ (self.basis @ d)


@dataclass(frozen=True, eq=False)
class Hyperplane:
    """Oriented hyperplane {x : <normal, x> = offset} with unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        object.__setattr__(self, "normal", unit(as_point(self.normal)))
        object.__setattr__(self, "offset", float(self.offset))

    def signed_distance(self, x) -> float:
        return float(np.dot(self.normal, as_point(x)) - self.offset)

    @classmethod
    def through(cls, point, normal) -> "Hyperplane":
        n = unit(as_point(normal))
        return cls(n, float(np.dot(n, as_point(point))))


@dataclass(frozen=True, eq=False)
class NearestPair:
    """Result of the closest-approach problem for two affine subspaces."""

    distance: float
    point_a: np.ndarray
    point_b: np.ndarray
    unique: bool
    common_directions: np.ndarray  # orthonormal rows spanning the minimizer family


def subspace_nearest_pair(
    a: AffineSubspace, b: AffineSubspace, tol: float = DEFAULT_TOL
) -> NearestPair:
    """Closest pair of points between two affine subspaces.

    When the direction spaces intersect nontrivially the minimizer set is a
    positive-dimensional family ``{(pa + w, pb + w)}`` with ``w`` ranging over
    the common direction space; ``unique`` is False and the returned pair is
    the minimum-norm representative.  The difference ``pa - pb`` is orthogonal
    to both direction spaces.
    """
    if a.ambient_dim != b.ambient_dim:
        raise InputError("subspaces live in different ambient dimensions")
    u, v = a.basis, b.basis
    m = np.concatenate([u, -v], axis=0).T  # columns span the joint motion
    rhs = b.base - a.base
    if m.shape[1] == 0:
        pa, pb = a.base, b.base
        common = np.zeros((0, a.ambient_dim))
    else:
        coef, _, rank, sv = np.linalg.lstsq(m, rhs, rcond=tol)
        pa = a.base + u.T @ coef[: u.shape[0]]
        pb = b.base + v.T @ coef[u.shape[0]:]
        if rank < m.shape[1]:
            # the intersection of the direction spaces is the image under u
            # of the null space of [u.T, -v.T]
            _, s, vt = np.linalg.svd(m)
            cut = tol * (s[0] if s.size else 1.0)
            null = vt[np.concatenate([s, np.zeros(vt.shape[0] - s.size)]) <= cut]
            common = orthonormal_rows(null[:, : u.shape[0]] @ u, tol)
        else:
            common = np.zeros((0, a.ambient_dim))
    dist = float(np.linalg.norm(pa - pb))
    return NearestPair(dist, pa, pb, common.shape[0] == 0, common)


def nearest_point_in_hull(x: np.ndarray, vertices: np.ndarray) -> tuple[np.ndarray, float]:
    """Nearest point of the convex hull of ``vertices`` to ``x``.

    Solved as a nonnegative least-squares problem with a penalized affine
    constraint, then polished by an equality-constrained solve on the active
    support.  Exact up to floating rounding for the sizes used here.
    """
    v = np.atleast_2d(np.asarray(vertices, dtype=float))
    x = as_point(x)
    if v.shape[0] == 1:
        return v[0], float(np.linalg.norm(x - v[0]))
    scale = max(1.0, float(np.max(np.abs(v))), float(np.max(np.abs(x))))
    c = 1e6 * scale
    a = np.vstack([v.T, np.full((1, v.shape[0]), c)])
    rhs = np.concatenate([x, [c]])
    lam, _ = nnls(a, rhs)
    support = lam > 1e-12
    if np.count_nonzero(support) == 0:
        support = np.ones(v.shape[0], dtype=bool)
    vs = v[support]
    # polish: min |vs.T w - x| s.t. sum(w) = 1 via KKT system
    k = vs.shape[0]
    g = vs @ vs.T
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = g
    kkt[:k, k] = 1.0
    kkt[k, :k] = 1.0
    rhs2 = np.concatenate([vs @ x, [1.0]])
    try:
        sol = np.linalg.lstsq(kkt, rhs2, rcond=None)[0]
        w = sol[:k]
        if np.all(w >= -1e-9):
            w = np.clip(w, 0.0, None)
            w /= w.sum()
            p = vs.T @ w
            return p, float(np.linalg.norm(p - x))
    except np.linalg.LinAlgError:
        pass
    s = lam.sum()
    if s <= 0:
        i = int(np.argmin(np.linalg.norm(v - x, axis=1)))
        return v[i], float(np.linalg.norm(v[i] - x))
    p = v.T @ (lam / s)
    return p, float(np.linalg.norm(p - x))


def distance_to_hull(x: np.ndarray, vertices: np.ndarray) -> float:
    """Euclidean distance from ``x`` to the convex hull of ``vertices``."""
    return nearest_point_in_hull(x, vertices)[1]


_GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0


def sphere_net(dim: int, count: int, seed: int = 0) -> np.ndarray:
    """Deterministic low-discrepancy net of unit directions in R^dim.

    Golden-angle sequence on the circle and a Fibonacci lattice on the
    2-sphere (both with gap ratios bounded by small constants), a scrambled
    Sobol sequence mapped through the Gaussian inverse CDF above that; the
    net is fully determined by ``seed`` (which rotates the lattice).
    """
    if dim < 1:
        raise ParameterError("dimension must be >= 1")
    count = max(count, 1)
    if dim == 1:
        return np.array([[1.0], [-1.0]])[:count]
    rng = np.random.default_rng(seed)
    if dim == 2:
        ang = 2.0 * np.pi * np.mod(np.arange(count) / _GOLDEN, 1.0)
        ang += rng.uniform(0.0, 2.0 * np.pi)
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    if dim == 3:
        k = np.arange(count)
        z = 1.0 - 2.0 * (k + 0.5) / count
        r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
        az = 2.0 * np.pi * np.mod(k / _GOLDEN, 1.0)
        pts = np.stack([r * np.cos(az), r * np.sin(az), z], axis=1)
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        return pts @ q.T
    sob = qmc.Sobol(d=dim, scramble=True, seed=seed)
    pts = sob.random(1 << max(int(np.ceil(np.log2(count))), 0))[:count]
    g = norm.ppf(np.clip(pts, 1e-12, 1 - 1e-12))
    norms = np.linalg.norm(g, axis=1)
    norms[norms == 0] = 1.0
    return g / norms[:, None]


def hausdorff_distance(p_points, q_points, tol: float = DEFAULT_TOL,
                       net_count: int = 256, seed: int = 0) -> float:
    """Pompeiu-Hausdorff distance between the convex hulls of two point sets.

    The exact value is ``max_v d(v, conv Q)`` over vertices ``v`` of ``P``
    (and symmetrically): the distance-to-a-convex-set function is convex, so
    its maximum over a hull is attained at a vertex.  A support-function
    discrepancy ``max_u |h_P(u) - h_Q(u)|`` over a seeded direction net is
    computed as an independent lower bound; the net value undershoots the
    supremum by at most O(spacing^2 * circumradius), so the returned maximum
    of the two is the vertex-based exact value with the net as a cross-check.
    """
    p = np.atleast_2d(np.asarray(p_points, dtype=float))
    q = np.atleast_2d(np.asarray(q_points, dtype=float))
    if p.size == 0 or q.size == 0:
        raise InputError("hausdorff_distance requires nonempty point sets")
    if p.shape[1] != q.shape[1]:
        raise InputError("point sets live in different ambient dimensions")
    d_pq = max(distance_to_hull(v, q) for v in p)
    d_qp = max(distance_to_hull(w, p) for w in q)
    exact = max(d_pq, d_qp)
    dirs = sphere_net(p.shape[1], net_count, seed)
    support_gap = float(np.max(np.abs(np.max(dirs @ p.T, axis=1) - np.max(dirs @ q.T, axis=1))))
    return max(exact, support_gap)


# --------------------------------------------------------------------------
# Double-normal inventory records, shared by the exact and numeric searches.
# --------------------------------------------------------------------------

@dataclass(eq=False)
class IsolatedNormal:
    """One isolated double normal with its support-inequality certificate.

    ``tail_face``/``head_face`` are vertex-index frozensets for polytopes and
    None for smooth bodies.  ``residual`` is the worst support-inequality
    slack (polytopes) or the tangential residual norm (smooth bodies), on the
    body's diameter scale.
    """

    chord: Chord
    tail_face: frozenset | None = None
    head_face: frozenset | None = None
    residual: float = 0.0

    @property
    def length(self) -> float:
        return self.chord.length()


@dataclass(eq=False)
class NormalFamily:
    """A positive-dimensional connected family of double normals.

    Families are reported symbolically (face pair, dimension, representative)
    rather than sampled into point lists; the length map is constant on a
    parallel-face family because all members share one perpendicular vector.
    """

    representative: Chord
    dimension: int
    tail_face: frozenset | None = None
    head_face: frozenset | None = None
    member_count: int | None = None  # for numerically detected families

    @property
    def length(self) -> float:
        return self.representative.length()


@dataclass(eq=False)
class NormalInventory:
    """Isolated double normals plus continuum families, with certificates."""

    isolated: list[IsolatedNormal] = field(default_factory=list)
    families: list[NormalFamily] = field(default_factory=list)
    dim: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def nonoriented_count(self) -> int:
        """Non-oriented double normals proven to exist.

        Each family counts at least 1; a numerically detected continuum
        counts its deduplicated members (it certainly contains them all).
        """
        return len(self.isolated) + sum(
            max(1, f.member_count or 1) for f in self.families
        )

    def kuiper_bound(self) -> int:
        """Least admissible number of non-oriented double normals: d + 1."""
        return self.dim

    def check_kuiper(self) -> None:
        """Raise if the inventory is smaller than the guaranteed lower bound."""
        if self.nonoriented_count < self.kuiper_bound():
            raise VerificationError(
                f"only {self.nonoriented_count} non-oriented double normals found; "
                f"at least {self.kuiper_bound()} must exist in dimension {self.dim}"
            )

    def lengths(self) -> np.ndarray:
        vals = [rec.length for rec in self.isolated] + [f.length for f in self.families]
        return np.sort(np.array(vals))
