"""
✅ 다면체 곡면의 유도 원뿔 계량
- face_geometry(): 변 길이, 내각, 넓이 (평탄/쌍곡/구면/de Sitter 면)
- cone_angles(): 닫힌 링크를 가진 꼭짓점의 원뿔각 θ 와 곡률 k = 2π − θ
- quotient_metric(): 군 작용의 몫 곡면에 대한 보고서 (종수, K, ε, Gauss–Bonnet 잔차)
- classify(): (g, K, ε) → 실현 표의 행

🔍 Gauss–Bonnet:
Σ k_i = 2π(2 − 2g) − K·A
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import structlog
from pydantic import BaseModel

from app.exception.global_handler import (
    GeometryError,
    MixedCurvatureError,
    NonSpacelikeFaceError,
    OpenSurfaceError,
    UnstableFundamentalSetError,
)
from app.geometry.forms import EPS_REPORT, FormSpace, form_eval, geodesic_distance, space_form
from app.geometry.groups import GroupSpec, inverse_word
from app.geometry.hull import PolyhedralSurface

logger = structlog.stdlib.get_logger(__name__)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class FaceGeometry:
    lengths: tuple[float, ...]
    angles: tuple[float, ...]
    area: float


class ConePoint(BaseModel):
    vertex: int
    word: Optional[str] = None
    angle: float
    curvature: float


class LargeFlag(BaseModel):
    """(1,−) 계량의 '큰' 조건은 국소 검사만 수행: 모든 원뿔각 > 2π"""
    value: bool
    scope: str = "local check only: every cone angle exceeds 2*pi"


class ConeMetricReport(BaseModel):
    K: int
    epsilon: str
    genus: int
    euler_characteristic: int
    vertices: int
    edges: int
    faces: int
    cone_points: list[ConePoint]
    total_area: float
    gb_residual: float
    large_flag: Optional[LargeFlag] = None

    @property
    def total_curvature(self) -> float:
        return float(sum(c.curvature for c in self.cone_points))


class TableRow(BaseModel):
    row: int
    genus_class: str
    K: int
    epsilon: str
    space_form: str
    construction: str


TABLE = (
    (1, "0", -1, "+", "convex polytope in H3 (Klein model)"),
    (2, "0", 0, "+", "convex polytope in R3"),
    (3, "0", 1, "+", "convex polytope in S3 (gnomonic chart)"),
    (4, "0", 1, "-", "polar dual of a hyperbolic polytope in dS3"),
    (5, "1", -1, "+", "parabolic polyhedron in H3"),
    (6, "1", 1, "-", "polar dual of a parabolic polyhedron in dS3"),
    (7, ">=2", -1, "+", "Fuchsian polyhedron in H3"),
    (8, ">=2", -1, "-", "Fuchsian polyhedron in AdS3"),
    (9, ">=2", 0, "-", "Fuchsian polyhedron in R^{2,1}"),
    (10, ">=2", 1, "-", "polar dual of a Fuchsian polyhedron in dS3"),
)

OUTSIDE_TABLE = "outside table"


def _tangent_angle(
    space: FormSpace, a: np.ndarray, b: np.ndarray, c: np.ndarray, project: Callable[[np.ndarray, np.ndarray], np.ndarray]
) -> float:
    tb, tc = project(a, b), project(a, c)
    nb, nc = form_eval(space, tb, tb), form_eval(space, tc, tc)
    if nb <= 0 or nc <= 0:
        raise NonSpacelikeFaceError("face has a non space-like tangent direction", {"space": space.name})
    inner = form_eval(space, tb, tc)
    return float(np.arctan2(np.sqrt(max(nb * nc - inner * inner, 0.0)), inner))


def polygon_geometry(space: FormSpace, vertices: np.ndarray) -> FaceGeometry:
    """
    주변 공간 좌표로 주어진 볼록 다각형의 내재 기하
    - 평탄: 형식에 대한 정규 직교 틀에서 신발끈 공식
    - ℍ³: 넓이 = (n − 2)π − Σ 내각
    - 𝕊³, dS³: 넓이 = Σ 내각 − (n − 2)π
    """
    n = len(vertices)
    lengths = tuple(geodesic_distance(space, vertices[i], vertices[(i + 1) % n]) for i in range(n))

    if space.model_constant == 0:
        def project(a: np.ndarray, b: np.ndarray) -> np.ndarray:
            return b - a
    elif space.model_constant == -1:
        def project(a: np.ndarray, b: np.ndarray) -> np.ndarray:
            return b + form_eval(space, a, b) * a
    else:
        def project(a: np.ndarray, b: np.ndarray) -> np.ndarray:
            return b - form_eval(space, a, b) * a

    angles = tuple(
        _tangent_angle(space, vertices[i], vertices[(i + 1) % n], vertices[i - 1], project) for i in range(n)
    )

    if space.model_constant == 0:
        area = _flat_area(space, vertices)
    elif space.model_constant == -1:
        area = (n - 2) * np.pi - sum(angles)
    else:
        area = sum(angles) - (n - 2) * np.pi
    return FaceGeometry(lengths, angles, float(area))


def _flat_area(space: FormSpace, vertices: np.ndarray) -> float:
    origin = vertices[0]
    e1 = vertices[1] - origin
    e1 = e1 / np.sqrt(form_eval(space, e1, e1))
    e2 = None
    for candidate in vertices[2:]:
        w = candidate - origin
        w = w - form_eval(space, w, e1) * e1
        q = form_eval(space, w, w)
        if q > 0 and (e2 is None or q > form_eval(space, e2, e2)):
            e2 = w
    if e2 is None:
        return 0.0
    e2 = e2 / np.sqrt(form_eval(space, e2, e2))
    coords = np.array([[form_eval(space, v - origin, e1), form_eval(space, v - origin, e2)] for v in vertices])
    x, y = coords[:, 0], coords[:, 1]
    return float(0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def face_geometry(surface: PolyhedralSurface, face: int) -> FaceGeometry:
    return polygon_geometry(surface.space, surface.lifted[list(surface.faces[face])])


def space_curvature(space: FormSpace) -> int:
    if space.model_constant == 0:
        return 0
    if space.name in {"H3", "H2"}:
        return -1
    return 1


def corner_angle(surface: PolyhedralSurface, face: int, vertex: int, cache: Optional[dict] = None) -> float:
    if cache is not None and face in cache:
        geometry = cache[face]
    else:
        geometry = face_geometry(surface, face)
        if cache is not None:
            cache[face] = geometry
    return geometry.angles[surface.faces[face].index(vertex)]


def cone_angles(surface: PolyhedralSurface) -> list[ConePoint]:
    """
    링크가 닫혀 있고 인접 면이 모두 안정인 꼭짓점의 원뿔각
    - 절단 경계 꼭짓점은 기본값으로 채우지 않고 제외
    """
    cache: dict[int, FaceGeometry] = {}
    result = []
    for v in surface.used_vertices:
        ring = surface.vertex_ring(v)
        if ring is None or not all(surface.stable_mask[f] for f in ring):
            continue
        theta = sum(corner_angle(surface, f, v, cache) for f in ring)
        result.append(
            ConePoint(
                vertex=v,
                word=None if surface.words is None else surface.words[v],
                angle=float(theta),
                curvature=float(TWO_PI - theta),
            )
        )
    return result


def gauss_bonnet_residual(curvatures: Sequence[float], genus: int, K: int, area: float) -> float:
    return float(abs(sum(curvatures) - TWO_PI * (2 - 2 * genus) + K * area))


def sign_class(cone_points: Sequence[ConePoint]) -> str:
    curvatures = [c.curvature for c in cone_points]
    if curvatures and all(k > EPS_REPORT for k in curvatures):
        return "+"
    if curvatures and all(k < -EPS_REPORT for k in curvatures):
        return "-"
    return "mixed"


def _genus(chi: int) -> int:
    if chi > 2 or chi % 2:
        raise GeometryError("Euler characteristic of an orientable closed surface expected", {"chi": chi})
    return (2 - chi) // 2


def _report(
    *,
    K: int,
    chi: int,
    counts: tuple[int, int, int],
    cone_points: list[ConePoint],
    area: float,
    large: bool = False,
) -> ConeMetricReport:
    genus = _genus(chi)
    singular = [c for c in cone_points if abs(c.curvature) > EPS_REPORT]
    residual = gauss_bonnet_residual([c.curvature for c in cone_points], genus, K, area)
    report = ConeMetricReport(
        K=K,
        epsilon=sign_class(singular),
        genus=genus,
        euler_characteristic=chi,
        vertices=counts[0],
        edges=counts[1],
        faces=counts[2],
        cone_points=singular,
        total_area=float(area),
        gb_residual=residual,
        large_flag=LargeFlag(value=all(c.angle > TWO_PI for c in cone_points)) if large else None,
    )
    return report


def closed_surface_metric(surface: PolyhedralSurface, *, large: bool = False) -> ConeMetricReport:
    """자명한 군: 닫힌 곡면 전체가 기본 집합"""
    if not surface.is_closed:
        raise OpenSurfaceError("closed surface expected", {"faces": surface.n_faces})
    cache: dict[int, FaceGeometry] = {f: face_geometry(surface, f) for f in range(surface.n_faces)}
    cone_points = cone_angles(surface)
    if len(cone_points) != len(surface.used_vertices):
        raise OpenSurfaceError("vertex link is not a single cycle of faces")
    area = sum(g.area for g in cache.values())
    return _report(
        K=space_curvature(surface.space),
        chi=surface.euler_characteristic,
        counts=(len(surface.used_vertices), len(surface.edges), surface.n_faces),
        cone_points=cone_points,
        area=area,
        large=large,
    )


def _matches(a: np.ndarray, b: np.ndarray) -> bool:
    """허용 오차 안에서 같은 점 집합인지"""
    if len(a) != len(b):
        return False
    scale = np.maximum(1.0, np.linalg.norm(a, axis=1))
    remaining = list(range(len(b)))
    for i, point in enumerate(a):
        hit = next((j for j in remaining if np.linalg.norm(b[j] - point) <= EPS_REPORT * scale[i]), None)
        if hit is None:
            return False
        remaining.remove(hit)
    return True


@dataclass(frozen=True)
class FundamentalSet:
    """몫 복합체: 면 류 대표, 변 류 수, 기저 꼭짓점 주위 면 고리"""
    base: int
    ring: tuple[int, ...]
    representatives: tuple[int, ...]
    ring_class: tuple[int, ...]
    edge_classes: int


def fundamental_set(surface: PolyhedralSurface, group: GroupSpec) -> FundamentalSet:
    """
    기저점 p 에 닿는 안정 면들로부터 몫 복합체 구성
    - 면 류: 꼭짓점 h_i(p) 를 p 로 옮긴 상대 점 집합 h_i⁻¹ X_k 로 비교
    - 변 류: 상대 변위 쌍 {h_a⁻¹ X_b, h_b⁻¹ X_a} 로 비교, 각 류는 정확히 두 번 나타나야 함
    """
    if surface.words is None or "" not in surface.words:
        raise UnstableFundamentalSetError("surface carries no orbit words")
    base = surface.words.index("")
    ring = surface.vertex_ring(base)
    if ring is None or not all(surface.stable_mask[f] for f in ring):
        raise UnstableFundamentalSetError(
            "no stable fundamental set at this depth, increase depth", {"depth": surface.depth}
        )

    ambient = surface.lifted
    inverse = {w: group.element(inverse_word(w)) for w in surface.words}

    def relative(face: int, anchor: int) -> np.ndarray:
        cycle = list(surface.faces[face])
        return ambient[cycle] @ inverse[surface.words[anchor]].T

    # 대표: 정렬된 단어 목록이 사전순으로 가장 작은 면
    representatives: list[int] = []
    class_of: dict[int, int] = {}
    for f in sorted(ring, key=lambda g: sorted(surface.words[v] for v in surface.faces[g])):
        own = ambient[list(surface.faces[f])]
        found = next(
            (
                c
                for c, rep in enumerate(representatives)
                if any(_matches(relative(rep, anchor), own) for anchor in surface.faces[rep])
            ),
            None,
        )
        if found is None:
            representatives.append(f)
            found = len(representatives) - 1
        class_of[f] = found

    sides: list[tuple[np.ndarray, np.ndarray]] = []
    for rep in representatives:
        cycle = surface.faces[rep]
        for a, b in zip(cycle, cycle[1:] + cycle[:1]):
            sides.append(
                (inverse[surface.words[a]] @ ambient[b], inverse[surface.words[b]] @ ambient[a])
            )
    classes: list[list[int]] = []
    for i, (x, y) in enumerate(sides):
        for members in classes:
            u, w = sides[members[0]]
            if (_matches(x[None], u[None]) and _matches(y[None], w[None])) or (
                _matches(x[None], w[None]) and _matches(y[None], u[None])
            ):
                members.append(i)
                break
        else:
            classes.append([i])
    if any(len(members) != 2 for members in classes):
        raise UnstableFundamentalSetError(
            "edge classes are not paired, increase depth",
            {"class_sizes": sorted(len(m) for m in classes)},
        )

    return FundamentalSet(
        base=base,
        ring=tuple(ring),
        representatives=tuple(representatives),
        ring_class=tuple(class_of[f] for f in ring),
        edge_classes=len(classes),
    )


def check_single_vertex_orbit(surface: PolyhedralSurface, group: GroupSpec, faces: Sequence[int]) -> None:
    """
    몫 곡면의 꼭짓점 류가 하나(기저점의 궤도)인지 확인
    - 각 꼭짓점 h(p) 를 h⁻¹ 로 되돌리면 기저점 p 와 일치해야 함
    - 어긋나면 원뿔각 합이 다른 꼭짓점 류를 섞은 것
    """
    if surface.words is None or "" not in surface.words:
        raise UnstableFundamentalSetError("surface carries no orbit words")
    ambient = surface.lifted
    base = ambient[surface.words.index("")]
    for f in faces:
        for v in surface.faces[f]:
            pulled = group.element(inverse_word(surface.words[v])) @ ambient[v]
            if not _matches(pulled[None], base[None]):
                raise GeometryError(
                    "face has a vertex outside the base point orbit",
                    {"face": int(f), "vertex": int(v), "word": surface.words[v]},
                )


def quotient_metric(surface: PolyhedralSurface, group: GroupSpec) -> ConeMetricReport:
    """
    ✅ P/Γ 의 원뿔 계량
    - 꼭짓점 류는 기저점의 궤도 하나 (V = 1)
    - 원뿔각: 대표 면들의 모든 모서리각 합
    - 넓이: 대표 면 넓이의 합
    """
    if group.kind == "trivial":
        return closed_surface_metric(surface)

    fset = fundamental_set(surface, group)
    check_single_vertex_orbit(surface, group, fset.representatives)

    geometries = {rep: face_geometry(surface, rep) for rep in fset.representatives}
    theta = float(sum(sum(g.angles) for g in geometries.values()))
    area = float(sum(g.area for g in geometries.values()))
    counts = (1, fset.edge_classes, len(fset.representatives))
    cone_point = ConePoint(vertex=fset.base, word="", angle=theta, curvature=TWO_PI - theta)

    report = _report(
        K=space_curvature(surface.space),
        chi=counts[0] - counts[1] + counts[2],
        counts=counts,
        cone_points=[cone_point],
        area=area,
    )
    logger.info(
        "[MetricService] 몫 계량 계산",
        group=group.name,
        genus=report.genus,
        K=report.K,
        epsilon=report.epsilon,
        cone_angle=theta,
        gb_residual=report.gb_residual,
    )
    return report


def table_row(genus: int, K: int, epsilon: str) -> TableRow | str:
    """Gauss–Bonnet 부호 항등식을 만족하는 (g, K, ε) 조합만 표 안에 있다"""
    if epsilon not in {"+", "-"}:
        raise MixedCurvatureError("curvature signs are mixed", {"epsilon": epsilon})
    sign = 1 if epsilon == "+" else -1
    # Σk = 2π(2 − 2g) − K·A, A > 0: Σk 가 부호 sign 을 가질 수 있어야 함
    euler = 2 - 2 * genus
    if K == 0:
        feasible = euler != 0 and np.sign(euler) == sign
    elif np.sign(-K) == np.sign(euler) or euler == 0:
        feasible = np.sign(-K) == sign
    else:
        feasible = True
    if not feasible:
        return OUTSIDE_TABLE

    genus_class = "0" if genus == 0 else "1" if genus == 1 else ">=2"
    for row, g_class, k, eps, construction in TABLE:
        if (g_class, k, eps) == (genus_class, K, epsilon):
            return TableRow(
                row=row,
                genus_class=g_class,
                K=k,
                epsilon=eps,
                space_form=space_form(k, eps).name,
                construction=construction,
            )
    return OUTSIDE_TABLE


def classify(report: ConeMetricReport) -> TableRow | str:
    return table_row(report.genus, report.K, report.epsilon)
