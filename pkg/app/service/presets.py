"""
✅ 다면체 preset
- 정다면체는 외접 반지름(circumradius)으로, 일반화 다면체용 정육면체는 반변 길이 s 로 지정
- 무작위 다면체는 항상 np.random.Generator 를 받는다 (seed 재현성)
"""
from typing import Callable

import numpy as np
import structlog

from app.exception.global_handler import ConfigurationError
from app.geometry.forms import H3, R3, FormSpace
from app.geometry.hull import PolyhedralSurface, convex_hull

logger = structlog.stdlib.get_logger(__name__)

KLEIN_CUBE_RADIUS = 0.6
KLEIN_TETRAHEDRON_RADIUS = 0.5
RANDOM_BALL_RADIUS = 0.8
HYPERIDEAL_HALF_SIDE = 0.65
OVERTRUNCATED_HALF_SIDE = 0.9
# 무작위 다면체의 원점은 모든 면 평면에서 이 거리 이상 떨어져야 함
ORIGIN_MARGIN = 0.05


def tetrahedron(radius: float = 1.0) -> np.ndarray:
    return radius * np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float) / np.sqrt(3.0)


def octahedron(radius: float = 1.0) -> np.ndarray:
    return radius * np.vstack([np.eye(3), -np.eye(3)])


def cube(half_side: float = 1.0) -> np.ndarray:
    signs = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], dtype=float)
    return half_side * signs


def unit_square() -> np.ndarray:
    """z = 0 평면의 단위 정사각형 (이중 덮인 다각형 용)"""
    return np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float)


def random_ball_points(rng: np.random.Generator, n: int, radius: float = RANDOM_BALL_RADIUS) -> np.ndarray:
    """반지름 radius 인 공 안에서 균일 표본"""
    directions = rng.normal(size=(n, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = radius * rng.uniform(size=n) ** (1.0 / 3.0)
    return directions * radii[:, None]


def random_polytope(
    rng: np.random.Generator,
    n: int = 10,
    radius: float = RANDOM_BALL_RADIUS,
    space: FormSpace = R3,
    *,
    max_attempts: int = 100,
) -> PolyhedralSurface:
    """
    공 안의 무작위 점 n 개의 볼록 껍질, 원점이 충분히 내부에 있을 때까지 다시 뽑음
    """
    for attempt in range(max_attempts):
        surface = convex_hull(random_ball_points(rng, n, radius), space=space)
        offsets = [surface.face_plane(f)[1] for f in range(surface.n_faces)]
        if min(offsets) > ORIGIN_MARGIN:
            logger.debug("[PresetFactory] 무작위 다면체", vertices=surface.n_vertices, attempts=attempt + 1)
            return surface
    raise ConfigurationError("could not sample a polytope around the origin", {"attempts": max_attempts})


_POLAR_DUAL: dict[str, Callable[[], np.ndarray]] = {
    "cube": lambda: cube(KLEIN_CUBE_RADIUS / np.sqrt(3.0)),
    "tetrahedron": lambda: tetrahedron(KLEIN_TETRAHEDRON_RADIUS),
    "octahedron": lambda: octahedron(KLEIN_CUBE_RADIUS),
}

_GENERALIZED: dict[str, Callable[[], np.ndarray]] = {
    "ideal-tetrahedron": lambda: tetrahedron(1.0),
    "hyperideal-cube": lambda: cube(HYPERIDEAL_HALF_SIDE),
    "overtruncated-cube": lambda: cube(OVERTRUNCATED_HALF_SIDE),
}

_RIGIDITY: dict[str, Callable[[], np.ndarray]] = {
    "tetrahedron": tetrahedron,
    "octahedron": octahedron,
    "cube": cube,
}


def klein_polytope(preset: str, rng: np.random.Generator) -> PolyhedralSurface:
    if preset == "random":
        return random_polytope(rng, space=H3)
    return convex_hull(_POLAR_DUAL[preset](), space=H3)


def projective_polytope(preset: str) -> PolyhedralSurface:
    """Klein chart 좌표의 사영 다면체 (단위 공 밖의 꼭짓점 허용)"""
    return convex_hull(_GENERALIZED[preset](), space=R3)


def euclidean_polytope(preset: str, rng: np.random.Generator) -> PolyhedralSurface:
    if preset == "random":
        return random_polytope(rng, radius=1.0)
    return convex_hull(_RIGIDITY[preset](), space=R3)
