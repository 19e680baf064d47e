import numpy as np
import pytest

from app.exception.global_handler import DegenerateHullError, DimensionMismatchError, DomainError
from app.geometry.forms import R3
from app.geometry.groups import (
    base_point_for,
    octagon_fuchsian_generators,
    orbit,
    parabolic_square_generators,
    trivial_group,
)
from app.geometry.hull import (
    PolyhedralSurface,
    convex_hull,
    equivariance_check,
    is_spacelike_face,
    lower_hull_fuchsian,
    ordered_polygon,
    parabolic_hull,
    plane_fit,
)
from app.service.presets import cube, random_polytope, unit_square


def test_cube_hull_merges_coplanar_triangles(euclidean_cube):
    assert euclidean_cube.n_vertices == 8
    assert euclidean_cube.n_faces == 6
    assert all(len(face) == 4 for face in euclidean_cube.faces)
    assert len(euclidean_cube.edges) == 12
    assert euclidean_cube.is_closed
    assert euclidean_cube.euler_characteristic == 2


def test_faces_are_counter_clockwise_from_outside(euclidean_cube):
    for f in range(euclidean_cube.n_faces):
        normal, offset = euclidean_cube.face_plane(f)
        assert offset == pytest.approx(1.0)
        assert np.isclose(np.abs(normal).max(), 1.0)


def test_interior_and_face_points_are_dropped():
    points = np.vstack([cube(), [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.2, 0.1, -0.3]]])
    surface = convex_hull(points)
    assert surface.n_vertices == 8
    assert surface.n_faces == 6


def test_planar_input_is_a_doubly_covered_polygon():
    surface = convex_hull(unit_square(), space=R3)
    assert surface.n_faces == 2
    assert surface.faces[0] == tuple(reversed(surface.faces[1]))
    assert surface.is_closed
    assert surface.euler_characteristic == 2


def test_degenerate_inputs():
    with pytest.raises(DegenerateHullError):
        convex_hull([[0, 0, 0], [1, 0, 0], [0, 1, 0]])
    with pytest.raises(DegenerateHullError):
        convex_hull([[0, 0, 0], [1, 0, 0], [2, 0, 0], [3, 0, 0]])
    with pytest.raises(DimensionMismatchError):
        convex_hull([[0, 0], [1, 0], [0, 1], [1, 1]])


def test_vertex_ring_is_cyclic(euclidean_cube):
    ring = euclidean_cube.vertex_ring(0)
    assert ring is not None and len(ring) == 3
    for f, g in zip(ring, ring[1:] + ring[:1]):
        assert f != g


def test_vertex_ring_of_open_surface_is_none():
    triangle = PolyhedralSurface(points=np.eye(3), faces=((0, 1, 2),))
    assert not triangle.is_closed
    assert triangle.vertex_ring(0) is None


def test_plane_fit_and_ordered_polygon():
    square = np.array([[0.0, 0.0, 1.0], [1.0, 1.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
    order = ordered_polygon(square, np.array([0.0, 0.0, 1.0]))
    normal, offset = plane_fit(square[order])
    assert np.allclose(normal, [0.0, 0.0, 1.0])
    assert offset == pytest.approx(1.0)


def test_fuchsian_lower_hull_is_spacelike_and_equivariant():
    group = octagon_fuchsian_generators()
    base = np.array([0.0, 0.0, 1.0])
    surface = lower_hull_fuchsian(orbit(group, base, 3), group, 3)
    assert surface.stable_faces
    assert all(is_spacelike_face(surface, f) for f in surface.stable_faces)
    report = equivariance_check(surface, group)
    assert report.violations == []


def test_equivariance_check_with_trivial_group(euclidean_cube):
    report = equivariance_check(euclidean_cube, trivial_group(R3))
    assert report.checked == 0 and report.violations == []


def test_parabolic_group_words_kept_on_vertices():
    group = parabolic_square_generators()
    surface = parabolic_hull(orbit(group, base_point_for(group), 2), group, 2)
    assert surface.words is not None
    assert "" in surface.words
    assert len(surface.words) == surface.n_vertices


def _face_point_sets(surface: PolyhedralSurface) -> set[frozenset]:
    return {frozenset(tuple(np.round(surface.points[v], 12)) for v in cycle) for cycle in surface.faces}


def test_hull_of_hull_vertices_is_unchanged(euclidean_cube, rng):
    for surface in (euclidean_cube, random_polytope(rng, n=12, radius=1.0)):
        again = convex_hull(surface.points, space=R3)
        assert again.n_vertices == surface.n_vertices
        assert _face_point_sets(again) == _face_point_sets(surface)


def _faces_at_base_point(surface: PolyhedralSurface) -> tuple[list[int], set[frozenset]]:
    ring = surface.vertex_ring(surface.words.index(""))
    assert ring is not None
    return ring, {frozenset(surface.words[v] for v in surface.faces[f]) for f in ring}


def test_fuchsian_faces_at_base_point_settle_by_depth_two():
    group = octagon_fuchsian_generators()
    base = np.array([0.0, 0.0, 1.0])
    shallow = lower_hull_fuchsian(orbit(group, base, 2), group, 2)
    deep = lower_hull_fuchsian(orbit(group, base, 3), group, 3)

    ring, shallow_faces = _faces_at_base_point(shallow)
    assert all(shallow.stable_mask[f] for f in ring)
    assert shallow_faces == _faces_at_base_point(deep)[1]


def test_certification_orbit_respects_depth_cap():
    group = octagon_fuchsian_generators()
    core = orbit(group, np.array([0.0, 0.0, 1.0]), 2)
    with pytest.raises(DomainError, match="orbit depth out of range"):
        lower_hull_fuchsian(core, group, 7)
