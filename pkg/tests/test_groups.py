import numpy as np
import pytest

from app.exception.global_handler import DomainError, GeometryError
from app.geometry.forms import H3, R21, form_eval, horosphere_residual
from app.geometry.groups import (
    Isometry,
    base_point_for,
    equidistant_fuchsian_generators,
    inverse_word,
    octagon_fuchsian_generators,
    orbit,
    parabolic_square_generators,
    reduce_word,
    trivial_group,
    word_lengths,
)


def test_word_helpers():
    assert inverse_word("abC") == "cBA"
    assert reduce_word("abBAc") == "c"


@pytest.mark.parametrize(
    "factory", [octagon_fuchsian_generators, equidistant_fuchsian_generators, parabolic_square_generators]
)
def test_generators_preserve_form_and_sheet(factory):
    group = factory()
    group.check()
    for symbol in group.alphabet:
        iso = group.isometry(symbol)
        assert iso.form_defect() < 1e-9
        assert iso.preserves_upper_sheet()


def test_check_rejects_sheet_swap():
    flip = Isometry(np.diag([1.0, 1.0, -1.0]), R21, "a")
    group = octagon_fuchsian_generators()
    bad = type(group)(
        name="flip", space=R21, kind="fuchsian", umbilic_surface="", generators=(flip,)
    )
    with pytest.raises(GeometryError):
        bad.check()


def test_isometry_inverse_and_composition():
    g = octagon_fuchsian_generators().generators[1]
    product = g @ g.inverse()
    assert product.label == ""
    assert np.allclose(product.matrix, np.eye(3))


def test_generator_image_height():
    group = octagon_fuchsian_generators()
    image = group.isometry("a").apply(np.array([0.0, 0.0, 1.0]))[0]
    assert image[-1] == pytest.approx(5.0 + 4.0 * np.sqrt(2.0), abs=1e-9)
    assert form_eval(R21, image, image) == pytest.approx(-1.0)


def test_parabolic_generators_fix_horosphere():
    group = parabolic_square_generators()
    klein = np.array([[0.0, 0.0, 0.0], [0.2, -0.1, 0.3]])
    klein[1, 2] = 0.5 - np.sqrt((1.0 - 2.0 * (0.2**2 + 0.1**2)) / 4.0)
    for symbol in group.alphabet:
        for point in group.isometry(symbol).apply_chart(klein):
            assert abs(horosphere_residual(point)) <= 1e-9


def test_orbit_layers_and_words():
    group = octagon_fuchsian_generators()
    points = orbit(group, np.array([0.0, 0.0, 1.0]), 2)
    lengths = word_lengths(points)
    assert points[0].word == ""
    assert np.count_nonzero(lengths == 1) == 8
    assert np.count_nonzero(lengths == 2) == 56
    assert all(reduce_word(p.word) == p.word for p in points)
    assert list(lengths) == sorted(lengths)


def test_orbit_deduplicates_commuting_words():
    group = parabolic_square_generators()
    points = orbit(group, base_point_for(group), 2)
    # ab = ba: the length-2 layer of Z² has 8 distinct points
    assert np.count_nonzero(word_lengths(points) == 2) == 8
    assert "ab" in {p.word for p in points} and "ba" not in {p.word for p in points}


def test_orbit_depth_is_bounded():
    group = octagon_fuchsian_generators()
    with pytest.raises(DomainError):
        orbit(group, np.array([0.0, 0.0, 1.0]), 9)
    with pytest.raises(DomainError):
        orbit(group, np.array([0.0, 0.0, 1.0]), -1)


def test_base_point_validation():
    group = octagon_fuchsian_generators()
    assert np.allclose(base_point_for(group), [0.0, 0.0, 1.0])
    with pytest.raises(DomainError):
        base_point_for(group, (0.0, 0.0, 2.0))
    hyperbolic = equidistant_fuchsian_generators()
    lifted = base_point_for(hyperbolic, (0.0, 0.0, 0.5))
    assert form_eval(H3, lifted, lifted) == pytest.approx(-1.0)


def test_equidistant_group_preserves_plane_distance():
    group = equidistant_fuchsian_generators()
    base = base_point_for(group, (0.0, 0.0, float(np.tanh(0.5))))
    for p in orbit(group, base, 2):
        assert p.point[2] == pytest.approx(base[2])


def test_trivial_group_has_no_generators():
    group = trivial_group(H3)
    assert group.alphabet == {}
    assert group.relation_defect() == 0.0
