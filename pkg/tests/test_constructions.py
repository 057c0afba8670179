import math

import numpy as np
import pytest

from binormal.constructions import (
    acute_check_d2,
    arc_ladder_d1,
    cone_sharpen,
    rectangle_graft,
    scan_acute_threshold,
    sphere_ladder_d2,
    spherical_cap_graft,
)
from binormal.geometry import Chord, ParameterError, PreconditionError
from binormal.polytope import build_hull, enumerate_double_normals
from binormal.analysis import classify_maximizing


def _all_triangles_acute(center, points):
    """Independent oracle: arccos at every corner of every triangle."""
    n = len(points)
    for i in range(n):
        for j in range(i + 1, n):
            a, b, c = center, points[i], points[j]
            for p, q, r in ((a, b, c), (b, a, c), (c, a, b)):
                u, v = q - p, r - p
                ang = math.acos(
                    np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v))
                )
                if ang >= math.pi / 2:
                    return False
    return True


# --------------------------------------------------------------------------
# planar ladder
# --------------------------------------------------------------------------

def test_ladder1_small_example():
    lad = arc_ladder_d1(1.0, 0.5, 2)
    assert lad.delta == pytest.approx(0.015625, abs=0)
    np.testing.assert_allclose(lad.radii, [1.015625, 1.03125], atol=0)


def test_ladder1_geometry_invariants():
    lad = arc_ladder_d1(1.3, 0.4, 25, center=[0.5, -0.2], base_dir=[0, 1])
    i = np.arange(1, 26)
    np.testing.assert_allclose(
        np.linalg.norm(lad.points - lad.center, axis=1), 1.3 + i * lad.delta,
        atol=1e-12,
    )
    # angle of the i-th rung from the base direction
    rel = lad.points - lad.center
    ang = np.arccos(np.clip(rel @ np.array([0.0, 1.0]) / np.linalg.norm(rel, axis=1), -1, 1))
    np.testing.assert_allclose(ang, i * 0.4 / 25, atol=1e-12)
    np.testing.assert_allclose(lad.antipodes, 2 * lad.center - lad.points, atol=0)


def test_ladder1_acute_oracle():
    lad = arc_ladder_d1(1.0, 0.5, 40)
    assert lad.min_acute_margin > 0
    assert _all_triangles_acute(lad.center, lad.points)


def test_ladder1_length_gaps_exact():
    lad = arc_ladder_d1(1.0, 0.5, 50)
    lengths = lad.lengths()
    gaps = np.diff(np.sort(lengths))
    assert np.all(gaps >= 2 * lad.delta - 1e-15)


def test_ladder1_ratio_trend():
    ratios = [arc_ladder_d1(1.0, 0.5, n).log_ratio for n in (10, 100, 1000)]
    assert ratios[0] < ratios[1] < ratios[2] < 0.5
    assert ratios[2] > 0.40


def test_ladder1_rejects_large_theta():
    with pytest.raises(ParameterError, match="cos t"):
        arc_ladder_d1(1.0, 3.0, 5)


def test_ladder1_chords_strictly_maximize():
    lad = arc_ladder_d1(1.0, 0.5, 12)
    hull = lad.hull_with_arc(64)
    for c in lad.chords():
        res = classify_maximizing(hull, c, eta=1.0, alpha=math.pi / 2 - 1e-4)
        assert res.strict_max


# --------------------------------------------------------------------------
# spherical ladder
# --------------------------------------------------------------------------

def test_ladder2_small_example():
    lad = sphere_ladder_d2(1.0, 0.1, 0.4, 3)
    assert lad.delta == pytest.approx(0.16 / 1296, rel=1e-15)
    assert len(lad.points) == 27
    assert lad.radii[0] == pytest.approx(1.1, abs=0)


def test_ladder2_single_point():
    lad = sphere_ladder_d2(1.0, 0.1, 0.4, 1)
    np.testing.assert_allclose(lad.points, [[1.1, 0.0, 0.0]], atol=1e-15)
    assert acute_check_d2(lad).passed


def test_ladder2_counts_and_ratio():
    for m in (2, 4, 8):
        lad = sphere_ladder_d2(1.0, 0.1, 0.4, m)
        assert len(lad.points) == m ** 3
        lm = math.log(m)
        expected = 3 * lm / (4 * lm - math.log(1.0 * 0.16 / 32.0))
        assert lad.log_ratio == pytest.approx(expected, abs=0)
    ratios = [sphere_ladder_d2(1.0, 0.1, 0.4, m).log_ratio for m in (2, 4, 8, 16)]
    assert all(a < b for a, b in zip(ratios, ratios[1:]))
    assert all(r < 0.75 for r in ratios)


def test_ladder2_parameter_guards():
    with pytest.raises(ParameterError):
        sphere_ladder_d2(1.0, 0.1, math.pi / 4, 3)
    with pytest.raises(ParameterError):
        sphere_ladder_d2(1.0, -0.1, 0.4, 3)
    with pytest.raises(ParameterError):
        sphere_ladder_d2(0.0, 0.1, 0.4, 3)


def test_acute_check_collinear_fails():
    pts = np.array([[1.0, 0.0, 0.0], [0.5, 0.0, 0.0]])
    res = acute_check_d2(pts)
    assert not res.passed
    assert res.min_margin < 0


def test_acute_check_gram_identity():
    lad = sphere_ladder_d2(1.0, 0.1, 0.4, 2)
    res = acute_check_d2(lad)
    # direct evaluation of <v', v' - v> over ordered pairs
    worst = math.inf
    for k, vk in enumerate(lad.points):
        for kp, vkp in enumerate(lad.points):
            if k != kp:
                worst = min(worst, float(np.dot(vkp, vkp - vk)))
    assert res.min_margin == pytest.approx(worst, rel=1e-12)


def test_threshold_scan():
    m0, per_m = scan_acute_threshold(1.0, 0.1, 0.4, m_max=6)
    assert m0 == 1
    assert all(per_m[m] > 0 for m in range(m0, m0 + 4))


# --------------------------------------------------------------------------
# grafts
# --------------------------------------------------------------------------

def test_cap_graft_certificates(centered_square):
    diag = Chord([-1, -1], [1, 1])
    g = spherical_cap_graft(centered_square, diag, 1.43, 0.2)
    assert g.certificate["hausdorff"] < 0.2
    for c in g.new_normals:
        assert c.length() == pytest.approx(2 * 1.43, abs=1e-9)
    assert g.certificate["worst_support_margin"] >= -1e-9 * g.polytope.diameter
    # the antipodal cap chords are recovered by a fresh enumeration
    inv = enumerate_double_normals(g.polytope)
    lengths = [r.length for r in inv.isolated]
    assert sum(abs(l - 2.86) < 1e-9 for l in lengths) >= len(g.new_normals)


def test_cap_graft_eps_gate(centered_square):
    with pytest.raises(ParameterError, match="exceeds eps"):
        spherical_cap_graft(centered_square, Chord([-1, -1], [1, 1]), 1.45, 0.2)


def test_cap_graft_degenerate_radius(centered_square):
    half = math.sqrt(2)
    with pytest.raises(PreconditionError):
        spherical_cap_graft(centered_square, Chord([-1, -1], [1, 1]), half, 0.2)


def test_cap_graft_requires_double_normal(centered_square):
    with pytest.raises(PreconditionError):
        spherical_cap_graft(centered_square, Chord([-1, -1], [1, 0]), 1.6, 0.5)


def test_cap_graft_3d():
    cube = build_hull([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)])
    diag = Chord([-1, -1, -1], [1, 1, 1])
    g = spherical_cap_graft(cube, diag, 1.76, 0.3, resolution=48)
    assert g.certificate["hausdorff"] < 0.3
    assert g.certificate["certified_count"] >= 1
    assert all(c.length() == pytest.approx(3.52, abs=1e-9) for c in g.new_normals)


def test_rect_graft_square(centered_square):
    g = rectangle_graft(centered_square, Chord([-1, -1], [1, 1]), 0.05, 0.02)
    assert len(g.new_normals) == 2
    for c in g.new_normals:
        res = classify_maximizing(g.polytope, c, eta=1.0, alpha=math.pi / 2 - 1e-3)
        assert res.strict_max
    assert g.certificate["hausdorff"] < 0.1


def test_rect_graft_triangle_altitude(equilateral_triangle):
    inv = enumerate_double_normals(equilateral_triangle)
    altitude = min(inv.isolated, key=lambda r: r.length).chord
    g = rectangle_graft(equilateral_triangle, altitude, 0.03, 0.01)
    for c in g.new_normals:
        assert classify_maximizing(g.polytope, c, eta=1.0,
                                   alpha=math.pi / 2 - 1e-3).strict_max


def test_rect_graft_width_guards(centered_square):
    diag = Chord([-1, -1], [1, 1])
    with pytest.raises(ParameterError, match="degeneracy"):
        rectangle_graft(centered_square, diag, 0.05, 1e-10)
    with pytest.raises(ParameterError, match="width too large"):
        rectangle_graft(centered_square, diag, 0.05, 2.5)


# --------------------------------------------------------------------------
# cone sharpening
# --------------------------------------------------------------------------

def _ball_samples_with_poles(n=48, seed=2):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, 2))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return np.vstack([pts, [[1.0, 0.0], [-1.0, 0.0]]])


def test_cone_sharpen_diameter():
    pts = _ball_samples_with_poles()
    res = cone_sharpen(pts, [(len(pts) - 2, len(pts) - 1)], p=10)
    cls = classify_maximizing(res.polytope, res.chords[0], eta=1.0,
                              alpha=math.pi / 2 - 1.0 / 20)
    assert cls.strict_max
    assert res.inside([0.0, 0.0])
    assert not res.inside([0.999, 0.3])  # clipped by the cone at the apex


def test_cone_sharpen_large_p_keeps_body():
    pts = _ball_samples_with_poles()
    res = cone_sharpen(pts, [(len(pts) - 2, len(pts) - 1)], p=10 ** 6)
    assert len(res.kept) == len(pts)  # wedges of width O(1/p) cut nothing


def test_cone_sharpen_ladder_pairs():
    lad = arc_ladder_d1(1.0, 0.5, 6)
    pts = np.vstack([lad.arc_points(48), 2 * lad.center - lad.arc_points(48),
                     lad.points, lad.antipodes])
    n_arc = 96
    pairs = [(n_arc + 6 + 0, n_arc + 0), (n_arc + 6 + 3, n_arc + 3)]
    res = cone_sharpen(pts, pairs, p=30)
    for c in res.chords:
        assert classify_maximizing(res.polytope, c, eta=1.0,
                                   alpha=math.pi / 2 - 1e-4).strict_max


def test_cone_sharpen_rejects_interior_apex():
    pts = np.vstack([_ball_samples_with_poles(), [[0.0, 0.0]]])
    with pytest.raises(PreconditionError, match="extreme"):
        cone_sharpen(pts, [(len(pts) - 1, 0)], p=5)


def test_cone_sharpen_rejects_small_p():
    pts = _ball_samples_with_poles()
    with pytest.raises(ParameterError):
        cone_sharpen(pts, [(len(pts) - 2, len(pts) - 1)], p=1)
