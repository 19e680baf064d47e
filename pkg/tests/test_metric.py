import dataclasses

import numpy as np
import pytest

from app.exception.global_handler import GeometryError, MixedCurvatureError, OpenSurfaceError
from app.geometry.forms import H3, R3, hilbert_distance, klein_lift
from app.geometry.groups import octagon_fuchsian_generators, orbit
from app.geometry.hull import PolyhedralSurface, convex_hull, lower_hull_fuchsian
from app.geometry.metric import (
    OUTSIDE_TABLE,
    TableRow,
    check_single_vertex_orbit,
    classify,
    closed_surface_metric,
    cone_angles,
    face_geometry,
    fundamental_set,
    gauss_bonnet_residual,
    polygon_geometry,
    quotient_metric,
    sign_class,
    table_row,
)
from app.service.presets import octahedron, unit_square


@pytest.fixture(scope="module")
def fuchsian():
    group = octagon_fuchsian_generators()
    surface = lower_hull_fuchsian(orbit(group, np.array([0.0, 0.0, 1.0]), 3), group, 3)
    return group, surface


def test_euclidean_cube_curvature(euclidean_cube):
    report = closed_surface_metric(euclidean_cube)
    assert report.K == 0 and report.genus == 0 and report.epsilon == "+"
    assert len(report.cone_points) == 8
    assert all(c.curvature == pytest.approx(np.pi / 2) for c in report.cone_points)
    assert report.gb_residual < 1e-8
    assert report.total_area == pytest.approx(24.0)
    assert classify(report).row == 2


def test_klein_cube_is_row_one(klein_cube):
    report = closed_surface_metric(klein_cube)
    assert report.K == -1 and report.epsilon == "+"
    assert report.gb_residual < 1e-6
    assert report.total_area > 0
    assert classify(report).row == 1


def test_spherical_cube_is_row_three(spherical_cube):
    report = closed_surface_metric(spherical_cube)
    assert report.K == 1 and report.epsilon == "+"
    assert report.gb_residual < 1e-6
    assert classify(report).row == 3


def test_doubly_covered_square():
    report = closed_surface_metric(convex_hull(unit_square(), space=R3))
    assert len(report.cone_points) == 4
    assert abs(report.total_curvature - 4.0 * np.pi) <= 1e-12
    assert report.total_area == pytest.approx(2.0)


def test_hyperbolic_triangle_area_is_angle_deficit():
    vertices = np.array([klein_lift(x) for x in ([0.5, 0, 0], [0, 0.5, 0], [0, 0, 0.5])])
    geometry = polygon_geometry(H3, vertices)
    assert geometry.area == pytest.approx(np.pi - sum(geometry.angles))
    assert 0 < geometry.area < np.pi
    assert max(geometry.lengths) - min(geometry.lengths) < 1e-12


def test_open_surface_is_rejected():
    triangle = PolyhedralSurface(points=np.eye(3), faces=((0, 1, 2),))
    with pytest.raises(OpenSurfaceError):
        closed_surface_metric(triangle)


def test_gauss_bonnet_residual_formula():
    assert gauss_bonnet_residual([-4.0 * np.pi], 2, 0, 10.0) == pytest.approx(0.0)
    assert gauss_bonnet_residual([1.0], 1, -1, 1.0) == pytest.approx(0.0)


@pytest.mark.parametrize(
    "genus, K, epsilon, expected",
    [
        (0, -1, "+", 1),
        (0, 0, "+", 2),
        (0, 1, "+", 3),
        (0, 1, "-", 4),
        (1, -1, "+", 5),
        (1, 1, "-", 6),
        (2, -1, "+", 7),
        (2, -1, "-", 8),
        (2, 0, "-", 9),
        (3, 1, "-", 10),
    ],
)
def test_table_rows(genus, K, epsilon, expected):
    row = table_row(genus, K, epsilon)
    assert isinstance(row, TableRow)
    assert row.row == expected


@pytest.mark.parametrize("genus, K, epsilon", [(0, -1, "-"), (0, 0, "-"), (1, 0, "+"), (2, 0, "+"), (1, -1, "-")])
def test_infeasible_combinations_are_outside_table(genus, K, epsilon):
    assert table_row(genus, K, epsilon) == OUTSIDE_TABLE


def test_mixed_signs_raise():
    with pytest.raises(MixedCurvatureError):
        table_row(0, 0, "mixed")


def test_sign_class_without_cone_points_is_mixed():
    assert sign_class([]) == "mixed"


def test_flat_hexagonal_vertex_has_no_curvature():
    ring = [(np.cos(k * np.pi / 3.0), np.sin(k * np.pi / 3.0), 0.0) for k in range(6)]
    fan = PolyhedralSurface(
        points=np.array([(0.0, 0.0, 0.0), *ring]),
        faces=tuple((0, k + 1, (k + 1) % 6 + 1) for k in range(6)),
    )
    (centre,) = cone_angles(fan)
    assert centre.vertex == 0
    assert abs(centre.curvature) <= 1e-12


def test_flat_scaling_keeps_angles_and_scales_area():
    t = 2.5
    small = closed_surface_metric(convex_hull(octahedron(), space=R3))
    large = closed_surface_metric(convex_hull(t * octahedron(), space=R3))
    assert large.total_area == pytest.approx(t * t * small.total_area, rel=1e-12)
    for a, b in zip(small.cone_points, large.cone_points):
        assert abs(a.curvature - b.curvature) <= 1e-12


def test_hyperbolic_edge_lengths_are_hilbert_distances(klein_cube):
    for f, cycle in enumerate(klein_cube.faces):
        chart = klein_cube.points[list(cycle)]
        expected = [hilbert_distance(chart[i], chart[(i + 1) % len(cycle)]) for i in range(len(cycle))]
        assert np.allclose(face_geometry(klein_cube, f).lengths, expected, rtol=0.0, atol=1e-9)


def test_fuchsian_base_vertex_cone_angle(fuchsian):
    _, surface = fuchsian
    (base,) = [c for c in cone_angles(surface) if c.word == ""]
    assert abs(base.angle - 6.0 * np.pi) <= 1e-6
    assert abs(base.curvature + 4.0 * np.pi) <= 1e-6


def test_fundamental_faces_share_one_vertex_orbit(fuchsian):
    group, surface = fuchsian
    faces = fundamental_set(surface, group).representatives
    check_single_vertex_orbit(surface, group, faces)
    assert quotient_metric(surface, group).vertices == 1


def test_vertex_with_foreign_word_is_rejected(fuchsian):
    group, surface = fuchsian
    faces = fundamental_set(surface, group).representatives
    vertex = next(v for v in surface.faces[faces[0]] if surface.words[v])
    words = list(surface.words)
    words[vertex] = words[vertex] + "a"
    tampered = dataclasses.replace(surface, words=tuple(words))
    with pytest.raises(GeometryError, match="outside the base point orbit"):
        check_single_vertex_orbit(tampered, group, faces)
