"""
✅ 쌍곡-de Sitter 극쌍대 (polar duality)
- 면 평면 n·x = d (‖n‖ = 1) 의 극점: Klein chart 에서 n/d, dS³ 에서 (n, d)/√(1 − d²)
- polar_dual(): ℍ³ Klein 다면체 ↔ dS³ 공간꼴 다면체 (양방향)
- dual_metric(), dual_quotient_metric(): 쌍대 (1,−) 계량
- truncate_and_classify(): 일반화된 쌍곡 다면체의 꼭짓점 분류
"""
from __future__ import annotations

from typing import Literal

import numpy as np
import structlog
from pydantic import BaseModel

from app.exception.global_handler import (
    DomainError,
    NotGeneralizedPolyhedronError,
    OpenSurfaceError,
    PoleAtInfinityError,
)
from app.geometry.forms import DS3, EPS_GEOM, H3, R3, form_eval, geodesic_distance
from app.geometry.groups import GroupSpec
from app.geometry.hull import PolyhedralSurface, convex_hull, ordered_polygon
from app.geometry.metric import (
    TWO_PI,
    ConeMetricReport,
    ConePoint,
    _report,
    closed_surface_metric,
    fundamental_set,
    polygon_geometry,
)

logger = structlog.stdlib.get_logger(__name__)


class GeneralizedVertexClass(BaseModel):
    """witness = ‖v‖ − 1 (Klein 점과 단위 구 사이의 부호 있는 거리)"""
    vertex: int
    kind: Literal["finite", "ideal", "hyperideal"]
    witness: float


def face_pole(normal: np.ndarray, offset: float) -> np.ndarray:
    """
    chart 평면 n·x = offset 의 dS³ 극점 (n, offset)/√(1 − offset²)
    - 원점을 지나는 평면도 정의됨 (x4 = 0)
    """
    gap = 1.0 - offset * offset
    if gap <= 0:
        raise PoleAtInfinityError("face plane misses the unit ball", {"offset": offset})
    return np.append(normal, offset) / np.sqrt(gap)


def polar_dual(P: PolyhedralSurface) -> PolyhedralSurface:
    """
    ✅ 단위 구에 대한 극쌍대
    - ℍ³ 입력: 공 안의 닫힌 볼록 다면체, 원점은 내부 → dS³ 곡면
    - dS³ 입력: 위 결과 같은 공간꼴 다면체 → ℍ³ 다면체, (P*)* = P
    - 쌍대 꼭짓점 f 는 P 의 면 f, 쌍대 면 v 는 P 의 꼭짓점 v (결합 행렬은 정확히 전치)
    """
    if P.space not in (H3, DS3):
        raise DomainError("polar duality needs a Klein or de Sitter polytope", {"space": P.space.name})
    if not P.is_closed:
        raise OpenSurfaceError("polar duality needs a closed polytope")
    if len(P.used_vertices) != P.n_vertices:
        raise OpenSurfaceError("polytope has isolated vertices")
    if P.space is H3:
        norms = np.linalg.norm(P.points, axis=1)
        if np.any(norms >= 1.0 - EPS_GEOM):
            raise DomainError(
                "Klein polytope must lie strictly inside the unit ball", {"max_norm": float(norms.max())}
            )

    poles = []
    for f in range(P.n_faces):
        normal, offset = P.face_plane(f)
        if offset <= EPS_GEOM:
            raise PoleAtInfinityError(
                "origin is not interior to the polytope (face plane through or behind the origin)",
                {"face": f, "offset": offset},
            )
        poles.append(normal / offset)
    poles = np.array(poles)

    target = DS3 if P.space is H3 else H3
    if target is H3 and np.any(np.linalg.norm(poles, axis=1) >= 1.0 - EPS_GEOM):
        raise DomainError("dual vertices must lie inside the unit ball")

    faces = []
    for v in range(P.n_vertices):
        ring = P.vertex_ring(v)
        if ring is None:
            raise OpenSurfaceError("vertex link is not closed", {"vertex": v})
        # 쌍대 면은 평면 v·y = 1 위에 있고 바깥 법선은 v 방향
        order = ordered_polygon(poles[ring], P.points[v] / np.linalg.norm(P.points[v]))
        faces.append(tuple(ring[k] for k in order))

    dual = PolyhedralSurface(points=poles, faces=tuple(faces), space=target)
    logger.info(
        "[DualityService] 극쌍대 생성",
        source=P.space.name,
        target=target.name,
        vertices=dual.n_vertices,
        faces=dual.n_faces,
    )
    return dual


def incidence_matrix(P: PolyhedralSurface) -> np.ndarray:
    """꼭짓점 × 면 결합 행렬 (0/1)"""
    matrix = np.zeros((P.n_vertices, P.n_faces), dtype=int)
    for f, cycle in enumerate(P.faces):
        matrix[list(cycle), f] = 1
    return matrix


def _unit_tangent(base: np.ndarray, x: np.ndarray) -> np.ndarray:
    """쌍곡면 위 base 에서 x 방향으로의 단위 접벡터"""
    t = x + form_eval(H3, base, x) * base
    return t / np.sqrt(form_eval(H3, t, t))


def dihedral_angles(P: PolyhedralSurface) -> dict[tuple[int, int], float]:
    """
    ℍ³ 다면체의 내부 이면각, 쌍곡면 위의 접벡터로 계산
    - 변의 중점 M 에서 변 방향 성분을 뺀, 두 면 안쪽을 향하는 접벡터 사이의 각
    """
    if P.space is not H3:
        raise DomainError("dihedral angles are computed for Klein polytopes", {"space": P.space.name})
    lifted = P.lifted
    result: dict[tuple[int, int], float] = {}
    for (a, b), incident in P.edges.items():
        if len(incident) != 2:
            raise OpenSurfaceError("edge is not shared by two faces", {"edge": [a, b]})
        midpoint = lifted[a] + lifted[b]
        midpoint = midpoint / np.sqrt(-form_eval(H3, midpoint, midpoint))
        along = _unit_tangent(midpoint, lifted[b])

        directions = []
        for f in incident:
            third = next(v for v in P.faces[f] if v not in (a, b))
            t = _unit_tangent(midpoint, lifted[third])
            t = t - form_eval(H3, t, along) * along
            directions.append(t / np.sqrt(form_eval(H3, t, t)))
        cosine = float(np.clip(form_eval(H3, directions[0], directions[1]), -1.0, 1.0))
        result[(a, b)] = float(np.arccos(cosine))
    return result


def dual_edge_lengths(P: PolyhedralSurface, Pstar: PolyhedralSurface) -> dict[tuple[int, int], float]:
    """P 의 변 (a, b) 마다, 두 인접 면의 극점을 잇는 쌍대 변의 dS 길이"""
    lifted = Pstar.lifted
    return {edge: geodesic_distance(DS3, lifted[f], lifted[g]) for edge, (f, g) in P.edges.items()}


def dual_metric(Pstar: PolyhedralSurface) -> ConeMetricReport:
    """dS³ 공간꼴 다면체 구면의 유도 계량: K = +1, g = 0, 원뿔각 > 2π"""
    if Pstar.space is not DS3:
        raise DomainError("dual metric needs a de Sitter surface", {"space": Pstar.space.name})
    report = closed_surface_metric(Pstar, large=True)
    logger.info(
        "[DualityService] 쌍대 계량",
        cone_points=len(report.cone_points),
        epsilon=report.epsilon,
        gb_residual=report.gb_residual,
    )
    return report


def dual_quotient_metric(surface: PolyhedralSurface, group: GroupSpec) -> ConeMetricReport:
    """
    ✅ 군 불변 쌍곡 다면체(포물형, ℍ³ Fuchsian)의 쌍대 (1,−) 계량
    - 쌍대 면 p*: 기저점 주위 면들의 극점이 이루는 다각형
    - 면 류 c 의 쌍대 원뿔각 = p* 에서 류 c 에 속한 모서리각의 합 (= 2π + 면 넓이)
    - 몫 복합체: V* = 면 류 수, E* = 변 류 수, F* = 1
    """
    if surface.space is not H3:
        raise DomainError("dual quotient metric needs a hyperbolic surface", {"space": surface.space.name})
    fset = fundamental_set(surface, group)
    poles = np.array([face_pole(*surface.face_plane(f)) for f in fset.ring])
    star = polygon_geometry(DS3, poles)

    cone_points = []
    for c, rep in enumerate(fset.representatives):
        theta = float(sum(angle for angle, cls in zip(star.angles, fset.ring_class) if cls == c))
        cone_points.append(ConePoint(vertex=rep, word=None, angle=theta, curvature=TWO_PI - theta))

    counts = (len(fset.representatives), fset.edge_classes, 1)
    report = _report(
        K=1,
        chi=counts[0] - counts[1] + counts[2],
        counts=counts,
        cone_points=cone_points,
        area=star.area,
        large=True,
    )
    logger.info(
        "[DualityService] 쌍대 몫 계량",
        group=group.name,
        genus=report.genus,
        epsilon=report.epsilon,
        gb_residual=report.gb_residual,
    )
    return report


def segment_meets_open_ball(a: np.ndarray, b: np.ndarray, tol: float = EPS_GEOM) -> bool:
    """
    선분 [a, b] 가 열린 단위 공과 만나는지
    - |a + t(b − a)|² − 1 을 t ∈ [0, 1] 에서 최소화, 최솟값 < −tol 이면 참
    """
    d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    length2 = float(np.dot(d, d))
    t = 0.0 if length2 == 0.0 else float(np.clip(-np.dot(a, d) / length2, 0.0, 1.0))
    closest = a + t * d
    return float(np.dot(closest, closest)) - 1.0 < -tol


def truncate_and_classify(Q: PolyhedralSurface | np.ndarray) -> list[GeneralizedVertexClass]:
    """
    ✅ 일반화된 쌍곡 다면체 판정과 꼭짓점 분류
    - Q: 사영 다면체 (곡면, 또는 꼭짓점 Klein 좌표 → 볼록 껍질)
    - 모든 변이 열린 단위 공과 만나야 함 (아니면 NotGeneralizedPolyhedronError)
    - finite: ‖v‖ < 1 − ε, ideal: |‖v‖ − 1| ≤ ε, hyperideal: ‖v‖ > 1 + ε
    """
    if not isinstance(Q, PolyhedralSurface):
        Q = convex_hull(Q, space=R3)
    missing = [[a, b] for (a, b) in Q.edges if not segment_meets_open_ball(Q.points[a], Q.points[b])]
    if missing:
        raise NotGeneralizedPolyhedronError(
            "not a generalized hyperbolic polyhedron: some edges miss the open unit ball",
            {"edges": missing[:12], "count": len(missing)},
        )

    classes = []
    for v in Q.used_vertices:
        norm = float(np.linalg.norm(Q.points[v]))
        if norm < 1.0 - EPS_GEOM:
            kind = "finite"
        elif norm <= 1.0 + EPS_GEOM:
            kind = "ideal"
        else:
            kind = "hyperideal"
        classes.append(GeneralizedVertexClass(vertex=v, kind=kind, witness=norm - 1.0))
    logger.info(
        "[DualityService] 일반화 다면체 분류",
        finite=sum(c.kind == "finite" for c in classes),
        ideal=sum(c.kind == "ideal" for c in classes),
        hyperideal=sum(c.kind == "hyperideal" for c in classes),
    )
    return classes
