import numpy as np
import pytest

from app.config.logging import configure_logging
from app.config.settings import Settings, get_settings
from app.geometry.forms import H3, R3, S3
from app.geometry.hull import PolyhedralSurface, convex_hull
from app.service.presets import KLEIN_CUBE_RADIUS, cube, octahedron, tetrahedron
from app.service.scene_service import SceneService


@pytest.fixture(scope="session", autouse=True)
def _logging() -> None:
    configure_logging(get_settings())


@pytest.fixture(scope="session")
def settings() -> Settings:
    return get_settings()


@pytest.fixture
def scene_service(settings: Settings) -> SceneService:
    return SceneService(settings)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


@pytest.fixture
def euclidean_cube() -> PolyhedralSurface:
    return convex_hull(cube(), space=R3)


@pytest.fixture
def euclidean_tetrahedron() -> PolyhedralSurface:
    return convex_hull(tetrahedron(), space=R3)


@pytest.fixture
def euclidean_octahedron() -> PolyhedralSurface:
    return convex_hull(octahedron(), space=R3)


@pytest.fixture
def klein_cube() -> PolyhedralSurface:
    return convex_hull(cube(KLEIN_CUBE_RADIUS / np.sqrt(3.0)), space=H3)


@pytest.fixture
def spherical_cube() -> PolyhedralSurface:
    return convex_hull(cube(), space=S3)
