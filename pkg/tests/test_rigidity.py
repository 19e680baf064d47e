import numpy as np
import pytest

from app.exception.global_handler import DomainError, OpenSurfaceError, ProjectiveSamplingError
from app.geometry.hull import PolyhedralSurface
from app.geometry.rigidity import (
    TRIVIAL_DIM,
    apply_projective_map,
    assemble_deformation_system,
    cross_matrix,
    deformation_space,
    killing_residual,
    projective_invariance_check,
    random_projective_map,
    trivial_fields,
)
from app.service.presets import random_polytope


def test_cross_matrix():
    x, y = np.array([1.0, 2.0, 3.0]), np.array([-1.0, 0.5, 2.0])
    assert np.allclose(cross_matrix(x) @ y, np.cross(x, y))


@pytest.mark.parametrize("fixture", ["euclidean_tetrahedron", "euclidean_octahedron", "euclidean_cube"])
def test_convex_polytopes_are_rigid(fixture, request):
    surface = request.getfixturevalue(fixture)
    report = deformation_space(surface)
    assert report.deformation_dim == TRIVIAL_DIM
    assert report.rigid
    assert len(report.singular_values) <= 12


def test_system_shape_and_killing_fields(euclidean_tetrahedron):
    system = assemble_deformation_system(euclidean_tetrahedron)
    # 6 edges, 2 endpoints, 3 rows each
    assert system.shape == (36, 24)
    assert np.abs(system @ trivial_fields(4)).max() <= 1e-12
    assert killing_residual(euclidean_tetrahedron) <= 1e-10


def test_random_hulls_are_rigid(rng):
    for _ in range(5):
        assert deformation_space(random_polytope(rng, n=10, radius=1.0)).deformation_dim == TRIVIAL_DIM


def test_open_complexes_need_opt_in():
    triangle = PolyhedralSurface(points=np.eye(3), faces=((0, 1, 2),))
    with pytest.raises(OpenSurfaceError):
        deformation_space(triangle)
    assert deformation_space(triangle, allow_open=True).deformation_dim == 6


def test_hinge_has_one_extra_motion():
    points = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, 1.0, 0.0], [0.5, -1.0, 0.3]])
    hinge = PolyhedralSurface(points=points, faces=((0, 1, 2), (1, 0, 3)))
    assert deformation_space(hinge, allow_open=True).deformation_dim == 7


def test_curved_surfaces_are_rejected(klein_cube):
    with pytest.raises(DomainError):
        deformation_space(klein_cube)


def test_random_projective_map(rng):
    matrix = random_projective_map(rng)
    assert matrix.shape == (4, 4)
    assert np.abs(matrix - np.eye(4)).max() <= 0.2
    affine = random_projective_map(rng, affine=True)
    assert np.array_equal(affine[3], [0.0, 0.0, 0.0, 1.0])


def test_projective_map_across_infinity_is_rejected(euclidean_cube):
    matrix = np.eye(4)
    matrix[3] = (1.0, 0.0, 0.0, 0.0)
    with pytest.raises(ProjectiveSamplingError):
        apply_projective_map(euclidean_cube, matrix)


def test_projective_map_keeps_faces_planar(euclidean_cube):
    mapped = apply_projective_map(euclidean_cube, np.eye(4) + 0.05 * np.ones((4, 4)))
    assert mapped.faces == euclidean_cube.faces
    assert deformation_space(mapped).deformation_dim == TRIVIAL_DIM


@pytest.mark.parametrize("affine", [False, True])
def test_projective_invariance(euclidean_octahedron, affine):
    report = projective_invariance_check(euclidean_octahedron, 20, seed=3, affine=affine)
    assert report.passed
    assert report.base_dim == TRIVIAL_DIM
    assert len(report.trials) == 20
    assert all(t.deformation_dim == TRIVIAL_DIM for t in report.trials)


@pytest.mark.parametrize("rel_tol", [1e-6, 1e-8, 1e-10])
@pytest.mark.parametrize("fixture", ["euclidean_tetrahedron", "euclidean_octahedron", "euclidean_cube"])
def test_kernel_dimension_is_stable_across_thresholds(fixture, rel_tol, request):
    surface = request.getfixturevalue(fixture)
    assert deformation_space(surface, rel_tol).deformation_dim == TRIVIAL_DIM


@pytest.mark.parametrize("scale", [0.1, 10.0])
def test_kernel_dimension_is_scale_invariant(euclidean_octahedron, scale):
    scaled = PolyhedralSurface(points=scale * euclidean_octahedron.points, faces=euclidean_octahedron.faces)
    assert deformation_space(scaled).deformation_dim == TRIVIAL_DIM
