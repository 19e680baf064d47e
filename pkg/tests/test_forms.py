import numpy as np
import pytest

from app.exception.global_handler import DimensionMismatchError, DomainError, SeparationError
from app.geometry.forms import (
    DS3,
    H2,
    H3,
    R21,
    R3,
    S3,
    TANGENCY_POINT,
    AmbientPoint,
    chart_lift,
    chart_project,
    desitter_lift,
    form_eval,
    geodesic_distance,
    halfspace_distance,
    halfspace_to_hyperboloid,
    halfspace_to_klein,
    hilbert_distance,
    horosphere_residual,
    klein_lift,
    klein_project,
    space_form,
)
from app.service.presets import random_ball_points


def test_form_eval_uses_signature():
    assert form_eval(R21, (0, 0, 1), (0, 0, 1)) == -1.0
    assert form_eval(H3, (1, 2, 3, 4), (1, 1, 1, 1)) == pytest.approx(2.0)


def test_form_eval_rejects_wrong_length():
    with pytest.raises(DimensionMismatchError):
        form_eval(H3, (1, 2, 3), (1, 2, 3))


@pytest.mark.parametrize("space", [R3, R21, H3, S3])
def test_form_eval_is_symmetric_and_bilinear(space, rng):
    for _ in range(50):
        x, y, z = rng.normal(size=(3, space.dim))
        s, t = rng.normal(size=2)
        assert form_eval(space, x, y) == pytest.approx(form_eval(space, y, x), abs=1e-12)
        combined = form_eval(space, s * x + t * y, z)
        assert combined == pytest.approx(s * form_eval(space, x, z) + t * form_eval(space, y, z), abs=1e-12)


def test_klein_project_of_hyperbola_point():
    projected = klein_project((0.0, np.sinh(1.0), np.cosh(1.0)))
    assert np.allclose(projected, (0.0, np.tanh(1.0)), atol=1e-12)
    assert klein_project(np.array([0.0, np.sinh(1.0), np.cosh(1.0)]), H2).shape == (2,)


def test_klein_project_lands_in_open_ball(rng):
    for v in rng.normal(scale=2.0, size=(200, 3)):
        x = np.append(v, np.sqrt(1.0 + np.dot(v, v)))
        assert np.linalg.norm(klein_project(x)) < 1.0


def test_klein_project_inverts_klein_lift(rng):
    for x in random_ball_points(rng, 200, radius=0.95):
        assert np.abs(klein_project(klein_lift(x)) - x).max() <= 1e-12


def test_klein_project_rejects_lower_sheet():
    with pytest.raises(DomainError):
        klein_project((0.0, 0.0, 0.0, -1.0))


@pytest.mark.parametrize("lift, space", [(klein_lift, H3), (desitter_lift, DS3)])
def test_chart_lifts_land_on_pseudo_spheres(lift, space):
    point = np.array([0.3, -0.2, 0.1]) if space is H3 else np.array([1.5, 0.2, -0.4])
    x = lift(point)
    assert form_eval(space, x, x) == pytest.approx(space.model_constant, abs=1e-12)
    assert np.allclose(chart_project(space, x)[0], point)


def test_sphere_chart_round_trip():
    points = np.array([[0.0, 0.0, 0.0], [1.0, -2.0, 0.5]])
    lifted = chart_lift(S3, points)
    assert np.allclose(np.linalg.norm(lifted, axis=1), 1.0)
    assert np.allclose(chart_project(S3, lifted), points)


def test_klein_lift_outside_ball_is_rejected():
    with pytest.raises(DomainError):
        klein_lift([0.6, 0.8, 0.0])


def test_ambient_point_checks_sheet():
    assert AmbientPoint.on(H3, klein_lift([0.1, 0.0, 0.0])).space is H3
    with pytest.raises(DomainError):
        AmbientPoint.on(H3, -klein_lift([0.1, 0.0, 0.0]))
    with pytest.raises(DomainError):
        AmbientPoint.on(H3, [0.0, 0.0, 0.0, 2.0])


def test_hilbert_distance_matches_hyperboloid(rng):
    xs = random_ball_points(rng, 200, radius=0.95)
    ys = random_ball_points(rng, 200, radius=0.95)
    for x, y in zip(xs, ys):
        assert abs(hilbert_distance(x, y) - geodesic_distance(H3, klein_lift(x), klein_lift(y))) <= 1e-9


def test_hilbert_distance_of_equal_points_is_zero():
    assert hilbert_distance([0.2, 0.1, 0.0], [0.2, 0.1, 0.0]) == 0.0


def test_hilbert_distance_along_axis():
    assert hilbert_distance([0.0, 0.0, 0.0], [np.tanh(1.0), 0.0, 0.0]) == pytest.approx(1.0, abs=1e-12)


def test_hyperbolic_triangle_inequality(rng):
    points = np.array([klein_lift(x) for x in random_ball_points(rng, 600, radius=0.95)])
    for a, b, c in points.reshape(200, 3, 4):
        ab, bc, ac = (geodesic_distance(H3, p, q) for p, q in ((a, b), (b, c), (a, c)))
        assert ac <= ab + bc + 1e-9


def test_sphere_distance_of_orthogonal_points():
    assert geodesic_distance(S3, (1, 0, 0, 0), (0, 1, 0, 0)) == pytest.approx(np.pi / 2)


def test_desitter_distance_spacelike_and_separated():
    a = np.array([2.0, 0.0, 0.0, np.sqrt(3.0)])
    b = np.array([0.0, 2.0, 0.0, np.sqrt(3.0)])
    # ⟨a, b⟩ = −3 < −1
    with pytest.raises(SeparationError):
        geodesic_distance(DS3, a, b)
    c = np.array([1.0, 0.0, 0.0, 0.0])
    d = np.array([0.0, 1.0, 0.0, 0.0])
    assert geodesic_distance(DS3, c, d) == pytest.approx(np.pi / 2)


def test_minkowski_timelike_segment_is_rejected():
    with pytest.raises(SeparationError):
        geodesic_distance(R21, (0, 0, 0), (0, 0, 1))


def test_halfspace_models_agree():
    q1, q2 = (0.3, -0.4, 1.2), (-1.0, 0.5, 0.7)
    expected = halfspace_distance(q1, q2)
    assert geodesic_distance(H3, halfspace_to_hyperboloid(q1), halfspace_to_hyperboloid(q2)) == pytest.approx(expected)
    assert hilbert_distance(halfspace_to_klein(q1), halfspace_to_klein(q2)) == pytest.approx(expected)


def test_halfspace_to_klein_preserves_distance(rng):
    def sample() -> np.ndarray:
        return np.array([*rng.uniform(-3.0, 3.0, size=2), rng.uniform(0.2, 3.0)])

    for _ in range(200):
        q1, q2 = sample(), sample()
        expected = halfspace_distance(q1, q2)
        measured = hilbert_distance(halfspace_to_klein(q1), halfspace_to_klein(q2))
        assert abs(measured - expected) <= 1e-8 * max(1.0, expected)


def test_halfspace_unit_point_maps_to_klein_origin():
    assert np.allclose(halfspace_to_klein((0.0, 0.0, 1.0)), 0.0)


def test_height_one_plane_maps_to_ellipsoid(rng):
    for u, v in rng.uniform(-5.0, 5.0, size=(100, 2)):
        assert abs(horosphere_residual(halfspace_to_klein((u, v, 1.0)))) <= 1e-9
    assert horosphere_residual(TANGENCY_POINT) == pytest.approx(0.0)


def test_space_form_lookup():
    assert space_form(0, "-") is R21
    assert space_form(1, "-") is DS3
    with pytest.raises(DomainError):
        space_form(2, "+")
