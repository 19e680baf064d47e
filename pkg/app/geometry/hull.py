"""
✅ 볼록 껍질과 다면체 곡면
- convex_hull(): Qhull(scipy) + 공면 삼각형 병합 + 면 평면 안에서 2차원 껍질로 다각형 재구성
- equivariant_hull(): 절단된 궤도의 껍질에서 군 불변 곡면을 골라 안정 면을 인증/보완
- equivariance_check(): 안정 면의 생성원 상이 다시 면인지 검사

🔍 방향 규약:
- 모든 면은 바깥쪽 법선에서 보았을 때 반시계 방향
- 계수 2 입력(평면 다각형)은 방향이 반대인 두 면으로 표현 (이중 덮인 다각형)
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
import structlog
from pydantic import BaseModel
from scipy.spatial import ConvexHull, KDTree

from app.exception.global_handler import (
    DegenerateHullError,
    DimensionMismatchError,
    NonSpacelikeFaceError,
)
from app.geometry.forms import EPS_GEOM, R3, FormSpace, chart_lift, chart_project
from app.geometry.groups import GroupSpec, OrbitPoint, orbit

logger = structlog.stdlib.get_logger(__name__)

STABILITY_HORIZON = 2


@dataclass(frozen=True, eq=False)
class PolyhedralSurface:
    """
    꼭짓점(affine chart 좌표) + 면(순환 꼭짓점 인덱스) + 공간 태그
    - words: 궤도 단어 (궤도에서 만든 곡면만)
    - stable_mask: 궤도 절단의 영향을 받지 않는 면
    - ambient: 주변 공간 좌표 (없으면 chart_lift로 계산)
    """
    points: np.ndarray
    faces: tuple[tuple[int, ...], ...]
    space: FormSpace = R3
    words: Optional[tuple[str, ...]] = None
    stable_mask: tuple[bool, ...] = field(default=())
    depth: Optional[int] = None
    ambient: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 3:
            raise DimensionMismatchError("surface points must be an (n, 3) array", {"shape": list(points.shape)})
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "faces", tuple(tuple(int(i) for i in f) for f in self.faces))
        if not self.stable_mask:
            object.__setattr__(self, "stable_mask", tuple(True for _ in self.faces))

    @property
    def n_vertices(self) -> int:
        return len(self.points)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @cached_property
    def lifted(self) -> np.ndarray:
        if self.ambient is not None:
            return np.asarray(self.ambient, dtype=float)
        return chart_lift(self.space, self.points)

    @cached_property
    def edges(self) -> dict[tuple[int, int], tuple[int, ...]]:
        """정렬된 꼭짓점 쌍 → 인접 면 목록"""
        incidence: dict[tuple[int, int], list[int]] = {}
        for f, cycle in enumerate(self.faces):
            for a, b in zip(cycle, cycle[1:] + cycle[:1]):
                incidence.setdefault((min(a, b), max(a, b)), []).append(f)
        return {edge: tuple(faces) for edge, faces in sorted(incidence.items())}

    @cached_property
    def _directed(self) -> dict[tuple[int, int], int]:
        return {
            (a, b): f
            for f, cycle in enumerate(self.faces)
            for a, b in zip(cycle, cycle[1:] + cycle[:1])
        }

    @property
    def used_vertices(self) -> list[int]:
        return sorted({v for cycle in self.faces for v in cycle})

    @property
    def euler_characteristic(self) -> int:
        return len(self.used_vertices) - len(self.edges) + self.n_faces

    @property
    def is_closed(self) -> bool:
        return all(len(faces) == 2 for faces in self.edges.values())

    @property
    def stable_faces(self) -> list[int]:
        return [f for f, ok in enumerate(self.stable_mask) if ok]

    def vertex_faces(self, v: int) -> list[int]:
        return [f for f, cycle in enumerate(self.faces) if v in cycle]

    def vertex_ring(self, v: int) -> Optional[list[int]]:
        """꼭짓점 v 주위의 면을 순환 순서로, 링크가 열려 있으면 None"""
        incident = self.vertex_faces(v)
        if not incident:
            return None
        ring = [incident[0]]
        while True:
            cycle = self.faces[ring[-1]]
            successor = cycle[(cycle.index(v) + 1) % len(cycle)]
            neighbour = self._directed.get((successor, v))
            if neighbour is None:
                return None
            if neighbour == ring[0]:
                break
            if neighbour in ring or len(ring) > len(incident):
                return None
            ring.append(neighbour)
        return ring if len(ring) == len(incident) else None

    def face_plane(self, f: int) -> tuple[np.ndarray, float]:
        """chart 좌표에서 면 평면 (바깥 단위 법선 n, n·x = offset)"""
        return plane_fit(self.points[list(self.faces[f])])


def plane_fit(vertices: np.ndarray) -> tuple[np.ndarray, float]:
    centroid = vertices.mean(axis=0)
    rolled = np.roll(vertices, -1, axis=0)
    newell = np.cross(vertices - centroid, rolled - centroid).sum(axis=0)
    _, _, vt = np.linalg.svd(vertices - centroid)
    normal = vt[-1]
    if np.dot(normal, newell) < 0:
        normal = -normal
    return normal, float(np.dot(normal, centroid))


def plane_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """u × v = normal 인 평면의 정규 직교 기저"""
    seed = np.zeros(3)
    seed[int(np.argmin(np.abs(normal)))] = 1.0
    u = seed - np.dot(seed, normal) * normal
    u /= np.linalg.norm(u)
    return u, np.cross(normal, u)


def ordered_polygon(vertices: np.ndarray, normal: np.ndarray) -> list[int]:
    """평면 위 점들의 2차원 볼록 껍질 꼭짓점, normal 기준 반시계 순서"""
    u, v = plane_basis(normal)
    centred = vertices - vertices.mean(axis=0)
    xy = np.column_stack([centred @ u, centred @ v])
    return [int(i) for i in ConvexHull(xy).vertices]


def convex_hull(
    points: Sequence[Sequence[float]] | np.ndarray,
    space: FormSpace = R3,
    words: Optional[Sequence[str]] = None,
    ambient: Optional[np.ndarray] = None,
) -> PolyhedralSurface:
    """
    ✅ 좌표 벡터의 유클리드 볼록 껍질 경계
    - ℝ^{2,1}과 Klein 공의 껍질 모두 밑바탕 affine ℝ³ 에서 계산
    - 공면 삼각형은 최대 볼록 면으로 병합, 사용되지 않은 입력 점은 제거
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise DimensionMismatchError("hull input must be an (n, 3) array", {"shape": list(pts.shape)})
    if len(pts) < 4:
        raise DegenerateHullError("convex hull needs at least 4 points", {"points": len(pts)})

    centred = pts - pts.mean(axis=0)
    _, singular, vt = np.linalg.svd(centred, full_matrices=False)
    rank = int(np.sum(singular > EPS_GEOM * max(singular[0], EPS_GEOM)))
    if rank < 2:
        raise DegenerateHullError("points are affinely dependent", {"rank": rank})

    if rank == 2:
        cycle = [int(i) for i in ordered_polygon(pts, vt[-1])]
        faces = [tuple(cycle), tuple(reversed(cycle))]
        logger.debug("[HullBuilder] 이중 덮인 다각형", vertices=len(cycle))
    else:
        faces = _merged_faces(pts)

    used = sorted({v for cycle in faces for v in cycle})
    remap = {old: new for new, old in enumerate(used)}
    return PolyhedralSurface(
        points=pts[used],
        faces=tuple(tuple(remap[v] for v in cycle) for cycle in faces),
        space=space,
        words=None if words is None else tuple(words[i] for i in used),
        ambient=None if ambient is None else np.asarray(ambient, dtype=float)[used],
    )


def _merged_faces(pts: np.ndarray) -> list[tuple[int, ...]]:
    hull = ConvexHull(pts)
    normals = hull.equations[:, :3]
    offsets = -hull.equations[:, 3]
    parent = list(range(len(hull.simplices)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    # 이웃 삼각형의 맞은편 꼭짓점이 평면 위에 있으면 같은 면
    for i, simplex in enumerate(hull.simplices):
        for j in hull.neighbors[i]:
            if j <= i:
                continue
            opposite = pts[np.setdiff1d(hull.simplices[j], simplex)]
            distance = np.abs(opposite @ normals[i] - offsets[i])
            tol = EPS_GEOM * np.maximum(1.0, np.linalg.norm(opposite, axis=1))
            if np.all(distance <= tol):
                parent[find(j)] = find(i)

    groups: dict[int, set[int]] = {}
    for i, simplex in enumerate(hull.simplices):
        groups.setdefault(find(i), set()).update(int(v) for v in simplex)
    for row in getattr(hull, "coplanar", np.empty((0, 3), dtype=int)):
        point, facet = int(row[0]), int(row[1])
        groups[find(facet)].add(point)

    faces = []
    for root in sorted(groups):
        ids = np.array(sorted(groups[root]))
        order = ordered_polygon(pts[ids], normals[root])
        faces.append(tuple(int(ids[k]) for k in order))
    return faces


def equivariant_hull(
    orbit_points: Sequence[OrbitPoint],
    group: GroupSpec,
    depth: int,
    *,
    horizon: int = STABILITY_HORIZON,
    facing: Optional[np.ndarray] = None,
) -> PolyhedralSurface:
    """
    ✅ 절단 궤도의 껍질에서 군 불변 곡면 만들기
    - facing: 바깥 법선과 양의 내적을 갖는 면만 유지 (None이면 모두)
    - 인증: depth + horizon 궤도의 어떤 점도 면 평면 바깥에 있지 않음
    - 보완: 평면 위의 horizon 궤도 점을 모두 꼭짓점으로 추가
    - 안정: 인증되었고, 보완된 순환에서 최대 단어 길이 꼭짓점 두 개가 이웃하지 않음
    """
    space = group.space
    words = [p.word for p in orbit_points]
    if "" not in words:
        raise DegenerateHullError("orbit does not contain its base point")
    core_ambient = np.array([p.point for p in orbit_points])
    hull = convex_hull(chart_project(space, core_ambient), space=space, words=words, ambient=core_ambient)

    outer_depth = depth + horizon
    wide = orbit(group, core_ambient[words.index("")], outer_depth)
    wide_ambient = np.array([p.point for p in wide])
    wide_chart = chart_project(space, wide_ambient)
    wide_words = [p.word for p in wide]
    tol = EPS_GEOM * np.maximum(1.0, np.linalg.norm(wide_chart, axis=1))

    points = list(hull.points)
    ambient = list(hull.lifted)
    vertex_words = list(hull.words or ())
    index_of = {w: i for i, w in enumerate(vertex_words)}

    faces: list[tuple[int, ...]] = []
    stable: list[bool] = []
    for f, cycle in enumerate(hull.faces):
        normal, offset = hull.face_plane(f)
        if facing is not None and np.dot(normal, facing) <= 0:
            continue
        residual = wide_chart @ normal - offset
        if np.any(residual > tol):
            faces.append(cycle)
            stable.append(False)
            continue

        on_plane = np.flatnonzero(np.abs(residual) <= tol)
        order = [int(on_plane[k]) for k in ordered_polygon(wide_chart[on_plane], normal)]
        lengths = [len(wide_words[k]) for k in order]
        trusted = not any(
            lengths[i] == outer_depth and lengths[(i + 1) % len(order)] == outer_depth
            for i in range(len(order))
        )
        completed = []
        for k in order:
            word = wide_words[k]
            if word not in index_of:
                index_of[word] = len(points)
                points.append(wide_chart[k])
                ambient.append(wide_ambient[k])
                vertex_words.append(word)
            completed.append(index_of[word])
        faces.append(tuple(completed))
        stable.append(trusted)

    used = sorted({v for cycle in faces for v in cycle})
    remap = {old: new for new, old in enumerate(used)}
    surface = PolyhedralSurface(
        points=np.array(points)[used],
        faces=tuple(tuple(remap[v] for v in cycle) for cycle in faces),
        space=space,
        words=tuple(vertex_words[i] for i in used),
        stable_mask=tuple(stable),
        depth=depth,
        ambient=np.array(ambient)[used],
    )
    logger.info(
        "[HullBuilder] 불변 곡면 생성",
        group=group.name,
        depth=depth,
        faces=surface.n_faces,
        stable_faces=len(surface.stable_faces),
        vertices=surface.n_vertices,
    )
    return surface


def lower_hull_fuchsian(
    orbit_points: Sequence[OrbitPoint],
    group: GroupSpec,
    depth: int,
    *,
    horizon: int = STABILITY_HORIZON,
) -> PolyhedralSurface:
    """
    Fuchsian 궤도 껍질에서 쌍곡면 쪽을 향한 부분
    - ℝ^{2,1}: 바깥 법선의 시간 성분 < 0 (원점을 향한 면), 안정 면은 공간꼴이어야 함
    - ℍ³ 등거리 곡면: 전측지 평면 반대쪽을 향한 면
    """
    if group.space.name == "R21":
        facing = np.array([0.0, 0.0, -1.0])
    else:
        base = next(p.point for p in orbit_points if p.word == "")
        facing = np.array([0.0, 0.0, 1.0 if base[2] >= 0 else -1.0])
    surface = equivariant_hull(orbit_points, group, depth, horizon=horizon, facing=facing)
    if group.space.name == "R21":
        for f in surface.stable_faces:
            if not is_spacelike_face(surface, f):
                raise NonSpacelikeFaceError("stable Fuchsian face is not space-like", {"face": f})
    return surface


def parabolic_hull(
    orbit_points: Sequence[OrbitPoint],
    group: GroupSpec,
    depth: int,
    *,
    horizon: int = STABILITY_HORIZON,
) -> PolyhedralSurface:
    """포물형 궤도 껍질, 접점 쪽 뚜껑 면은 인증에서 떨어진다"""
    return equivariant_hull(orbit_points, group, depth, horizon=horizon)


def minkowski_normal(surface: PolyhedralSurface, f: int) -> np.ndarray:
    """ℝ^{2,1} 면의 민코프스키 법선 G·n (⟨G n, v⟩ = n·v)"""
    normal, _ = surface.face_plane(f)
    return surface.space.gram @ normal


def is_spacelike_face(surface: PolyhedralSurface, f: int) -> bool:
    """면 평면 위의 형식이 양의 정부호 ⟺ 법선이 시간꼴"""
    if surface.space.name != "R21":
        return True
    n = minkowski_normal(surface, f)
    return bool(n[0] ** 2 + n[1] ** 2 - n[2] ** 2 < 0)


class EquivarianceViolation(BaseModel):
    generator: str
    face: int
    reason: str


class EquivarianceReport(BaseModel):
    checked: int = 0
    skipped: int = 0
    violations: list[EquivarianceViolation] = []


def _same_cycle(a: Sequence[int], b: Sequence[int]) -> bool:
    if len(a) != len(b) or set(a) != set(b):
        return False
    n = len(a)
    start = list(b).index(a[0])
    forward = [b[(start + k) % n] for k in range(n)]
    backward = [b[(start - k) % n] for k in range(n)]
    return list(a) in (forward, backward)


def equivariance_check(surface: PolyhedralSurface, group: GroupSpec) -> EquivarianceReport:
    """
    모든 생성원(과 역원) g, 모든 안정 면 f 에 대해
    g(f)의 꼭짓점이 모두 핵심 꼭짓점(단어 길이 ≤ depth)이면 g(f)는 같은 순환의 면이어야 한다
    """
    report = EquivarianceReport()
    if group.kind == "trivial" or not group.generators:
        return report

    tree = KDTree(surface.points)
    if surface.words is not None and surface.depth is not None:
        core = {i for i, w in enumerate(surface.words) if len(w) <= surface.depth}
    else:
        core = set(range(surface.n_vertices))
    faces_by_set = {frozenset(cycle): cycle for cycle in surface.faces}

    for symbol in group.alphabet:
        iso = group.isometry(symbol)
        for f in surface.stable_faces:
            cycle = surface.faces[f]
            image = iso.apply_chart(surface.points[list(cycle)])
            distance, index = tree.query(image)
            tol = EPS_GEOM * np.maximum(1.0, np.linalg.norm(image, axis=1))
            if np.any(distance > tol) or not all(int(i) in core for i in index):
                report.skipped += 1
                continue
            report.checked += 1
            image_cycle = [int(i) for i in index]
            target = faces_by_set.get(frozenset(image_cycle))
            if target is None:
                report.violations.append(
                    EquivarianceViolation(generator=symbol, face=f, reason="image is not a face")
                )
            elif not _same_cycle(image_cycle, target):
                report.violations.append(
                    EquivarianceViolation(generator=symbol, face=f, reason="image cycle order differs")
                )

    logger.info(
        "[HullBuilder] 군 불변성 검사",
        group=group.name,
        checked=report.checked,
        violations=len(report.violations),
    )
    return report
