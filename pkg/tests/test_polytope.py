import math

import numpy as np
import pytest

from binormal.geometry import (
    Chord,
    InputError,
    PreconditionError,
    nonoriented_chord_distance,
)
from binormal.polytope import (
    build_hull,
    enumerate_double_normals,
    is_standard,
    random_standard_polytope,
    support_check,
)

from conftest import (
    assert_matches_oracle,
    facet_boundary_grid,
    polygon_boundary_grid,
)

SQRT2 = math.sqrt(2)


def test_build_hull_square(unit_square):
    assert unit_square.n_vertices == 4
    assert len(unit_square.facets) == 4
    dims = sorted(f.dim for f in unit_square.faces)
    assert dims == [0, 0, 0, 0, 1, 1, 1, 1]


def test_build_hull_discards_interior_point():
    p = build_hull([[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5]])
    assert p.n_vertices == 4


def test_build_hull_tetrahedron(regular_tetrahedron):
    assert regular_tetrahedron.n_vertices == 4
    assert len(regular_tetrahedron.facets) == 4
    assert all(len(f.vertex_ids) == 3 for f in regular_tetrahedron.facets)


def test_build_hull_rejects_degenerate():
    with pytest.raises(InputError, match="dimension"):
        build_hull([[0, 0], [1, 0], [2, 0], [3, 0]])


def test_face_lattice_closed_under_intersection(regular_tetrahedron):
    sets = {f.vertex_ids for f in regular_tetrahedron.faces}
    for a in sets:
        for b in sets:
            c = a & b
            if c:
                assert c in sets


def test_support_check_examples(unit_square):
    assert support_check(unit_square, [0, 0.5], [1, 0]) is True
    assert support_check(unit_square, [0, 0.5], [0, 1]) is False
    assert support_check(unit_square, [0, 0], [1 / SQRT2, 1 / SQRT2]) is True
    with pytest.raises(PreconditionError):
        support_check(unit_square, [0.5, 0.5], [1, 0])


def test_minimal_face_assignment(unit_square):
    f = unit_square.minimal_face([0.0, 0.5])
    assert f.dim == 1
    corner = unit_square.minimal_face([0.0, 0.0])
    assert corner.dim == 0


# --------------------------------------------------------------------------
# enumeration against frozen oracle values
# --------------------------------------------------------------------------

def test_square_enumeration(unit_square):
    inv = enumerate_double_normals(unit_square)
    lengths = sorted(r.length for r in inv.isolated)
    assert lengths == pytest.approx([SQRT2, SQRT2], abs=1e-12)
    assert len(inv.families) == 2
    assert all(f.dimension == 1 for f in inv.families)
    assert all(f.length == pytest.approx(1.0, abs=1e-12) for f in inv.families)
    # the two diagonals
    diag = {frozenset(map(tuple, (r.chord.tail, r.chord.head))) for r in inv.isolated}
    assert frozenset({(0.0, 0.0), (1.0, 1.0)}) in diag
    assert frozenset({(1.0, 0.0), (0.0, 1.0)}) in diag


def test_triangle_enumeration(equilateral_triangle):
    # the boundary-grid oracle finds the three altitudes and, because each
    # side is the longest chord, the three vertex-pair sides as well
    inv = enumerate_double_normals(equilateral_triangle)
    lengths = sorted(round(r.length, 9) for r in inv.isolated)
    alt = round(math.sqrt(3) / 2, 9)
    assert lengths == [alt] * 3 + [1.0] * 3
    assert not inv.families
    spacing = 1 / 60
    assert_matches_oracle(inv, equilateral_triangle,
                          polygon_boundary_grid(equilateral_triangle, spacing),
                          1.5 * spacing)


def test_square_matches_oracle(unit_square):
    inv = enumerate_double_normals(unit_square)
    spacing = 1 / 50
    assert_matches_oracle(inv, unit_square,
                          polygon_boundary_grid(unit_square, spacing), 1.5 * spacing)


def test_tetrahedron_enumeration(regular_tetrahedron):
    # frozen from the facet-grid oracle: 4 vertex-facet altitudes, 3
    # edge-edge perpendiculars, 12 vertex-to-opposite-edge perpendiculars,
    # and the 6 edges themselves (each edge is a metric diameter)
    inv = enumerate_double_normals(regular_tetrahedron)
    lengths = sorted(round(r.length, 9) for r in inv.isolated)
    expected = sorted(
        [round(1 / SQRT2, 9)] * 3
        + [round(math.sqrt(2.0 / 3.0), 9)] * 4
        + [round(math.sqrt(3) / 2, 9)] * 12
        + [1.0] * 6
    )
    assert lengths == expected
    assert not inv.families
    spacing = 0.1
    assert_matches_oracle(inv, regular_tetrahedron,
                          facet_boundary_grid(regular_tetrahedron, spacing),
                          1.5 * spacing)


def test_cube_families():
    cube = build_hull([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)])
    inv = enumerate_double_normals(cube)
    iso_lengths = sorted(round(r.length, 9) for r in inv.isolated)
    assert iso_lengths == [round(math.sqrt(3), 9)] * 4
    fam_dims = sorted(f.dimension for f in inv.families)
    assert fam_dims == [1] * 6 + [2] * 3
    fam_lengths = sorted(round(f.length, 9) for f in inv.families)
    assert fam_lengths == [1.0] * 3 + [round(SQRT2, 9)] * 6


@pytest.mark.parametrize("seed,dim,nv", [(0, 2, 6), (1, 2, 9), (2, 3, 7)])
def test_random_polytope_matches_oracle(seed, dim, nv):
    rng = np.random.default_rng(seed)
    p = random_standard_polytope(dim, nv, rng)
    inv = enumerate_double_normals(p)
    if dim == 2:
        spacing = p.diameter / 80
        grid = polygon_boundary_grid(p, spacing)
    else:
        spacing = p.diameter / 16
        grid = facet_boundary_grid(p, spacing)
    assert_matches_oracle(inv, p, grid, 1.5 * spacing)


def test_standard_polytope_has_no_families():
    rng = np.random.default_rng(7)
    for dim in (2, 3):
        p = random_standard_polytope(dim, dim + 4, rng)
        inv = enumerate_double_normals(p)
        assert not inv.families
        assert inv.nonoriented_count >= dim


def test_kuiper_count_on_random_corpus():
    rng = np.random.default_rng(11)
    for dim in (2, 3):
        for _ in range(3):
            p = random_standard_polytope(dim, int(rng.integers(dim + 3, 11)), rng)
            inv = enumerate_double_normals(p)
            assert len(inv.isolated) + len(inv.families) >= dim


def test_rigid_motion_equivariance():
    rng = np.random.default_rng(3)
    p = random_standard_polytope(3, 7, rng)
    inv = enumerate_double_normals(p)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    shift = rng.normal(size=3)
    moved = build_hull(p.vertices @ q.T + shift)
    inv2 = enumerate_double_normals(moved)
    assert len(inv2.isolated) == len(inv.isolated)
    for rec in inv.isolated:
        image = Chord(q @ rec.chord.tail + shift, q @ rec.chord.head + shift)
        assert min(
            nonoriented_chord_distance(image, s.chord) for s in inv2.isolated
        ) < 1e-7 * p.diameter


# --------------------------------------------------------------------------
# standardness
# --------------------------------------------------------------------------

def test_square_vertices_not_standard(unit_square):
    rep = is_standard(unit_square.vertices)
    assert not rep.standard
    # the witnesses are exactly the two opposite-edge index pairs
    pair_sets = {frozenset((frozenset(i), frozenset(j))) for i, j in rep.witnesses}
    verts = [tuple(v) for v in unit_square.vertices]
    bottom = frozenset(i for i, v in enumerate(verts) if v[1] == 0.0)
    top = frozenset(i for i, v in enumerate(verts) if v[1] == 1.0)
    left = frozenset(i for i, v in enumerate(verts) if v[0] == 0.0)
    right = frozenset(i for i, v in enumerate(verts) if v[0] == 1.0)
    assert pair_sets == {
        frozenset((bottom, top)),
        frozenset((left, right)),
    }


def test_tetrahedron_standard(regular_tetrahedron):
    assert is_standard(regular_tetrahedron.vertices).standard


def test_perturbed_triangle_standard():
    rng = np.random.default_rng(0)
    pts = np.array([[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]]) + rng.normal(
        scale=0.01, size=(3, 2)
    )
    assert is_standard(pts).standard


def test_facet_mode_standardness(unit_square, regular_tetrahedron):
    assert not is_standard(unit_square).standard
    # tetrahedron facets pairwise share vertices: vacuously standard
    assert is_standard(regular_tetrahedron).standard
    cube = build_hull([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)])
    assert not is_standard(cube).standard
