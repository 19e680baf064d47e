"""
✅ 장면(scene) 서비스
- 이름 붙은 구성(Fuchsian, 포물형, 극쌍대, 일반화 다면체, 강성)을 만들고 단언을 평가
- 결과는 SceneReport (pydantic), 내보낼 곡면은 SceneResult.meshes
- 기하 오류는 실패 목록으로 보고서에 남고, 설정 오류만 호출자에게 전파

🔍 traced 데코레이터:
- 서비스 메서드의 시작/완료/실패와 경과 시간을 구조적 로그로 남긴다
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import wraps
from typing import Any, Callable, Literal, Optional, Union

import numpy as np
import structlog
from pydantic import BaseModel

from app.config.scene import SceneConfig
from app.config.settings import Settings, get_settings
from app.exception.global_handler import ConfigurationError, DomainError, GeometryError
from app.geometry.dual import (
    GeneralizedVertexClass,
    dihedral_angles,
    dual_edge_lengths,
    dual_metric,
    dual_quotient_metric,
    incidence_matrix,
    polar_dual,
    segment_meets_open_ball,
    truncate_and_classify,
)
from app.geometry.forms import horosphere_residual
from app.geometry.groups import (
    GroupSpec,
    base_point_for,
    equidistant_fuchsian_generators,
    octagon_fuchsian_generators,
    orbit,
    parabolic_square_generators,
    word_lengths,
)
from app.geometry.hull import (
    EquivarianceReport,
    PolyhedralSurface,
    equivariance_check,
    lower_hull_fuchsian,
    parabolic_hull,
)
from app.geometry.metric import (
    TWO_PI,
    ConeMetricReport,
    TableRow,
    classify,
    closed_surface_metric,
    face_geometry,
    quotient_metric,
)
from app.geometry.rigidity import (
    ProjectiveInvarianceReport,
    RigidityReport,
    deformation_space,
    killing_residual,
    projective_invariance_check,
)
from app.service.presets import euclidean_polytope, klein_polytope, projective_polytope

logger = structlog.stdlib.get_logger(__name__)

# 장면 단언의 허용 오차
CURVED_BOUND = 1e-6
FLAT_BOUND = 1e-8
DUALITY_BOUND = 1e-9
KILLING_BOUND = 1e-10
# ℍ³ Fuchsian 장면의 기본 기저점: 전측지 평면 위 거리 0.5
EQUIDISTANT_HEIGHT = 0.5
PROJECTIVE_TRIALS = 20

Relation = Literal["<=", "<", ">=", ">", "=="]
Scalar = Union[bool, int, float, str, None]


def traced(func: Callable) -> Callable:
    """
    ✅ 서비스 메서드 추적 데코레이터
    - 시작, 완료(경과 ms), 실패(예외 종류와 메시지)를 로그로 남기고 예외는 그대로 전파
    """
    @wraps(func)
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        logger.info("[SceneService] ▶️ 시작", operation=func.__name__)
        try:
            result = func(*args, **kwargs)
        except Exception as exc:
            logger.error(
                "[SceneService] ❌ 실패",
                operation=func.__name__,
                error=type(exc).__name__,
                message=str(exc),
                elapsed_ms=round((time.perf_counter() - start) * 1000.0, 3),
            )
            raise
        logger.info(
            "[SceneService] ✅ 완료",
            operation=func.__name__,
            elapsed_ms=round((time.perf_counter() - start) * 1000.0, 3),
        )
        return result

    return wrapper


class SceneCheck(BaseModel):
    name: str
    measured: Scalar
    relation: Relation
    bound: Scalar
    passed: bool


def evaluate(measured: Scalar, relation: Relation, bound: Scalar) -> bool:
    if relation == "==":
        return measured == bound
    if measured is None or bound is None:
        return False
    return {
        "<=": measured <= bound,
        "<": measured < bound,
        ">=": measured >= bound,
        ">": measured > bound,
    }[relation]


def make_check(name: str, measured: Scalar, relation: Relation, bound: Scalar) -> SceneCheck:
    if isinstance(measured, (np.floating, np.integer, np.bool_)):
        measured = measured.item()
    return SceneCheck(
        name=name, measured=measured, relation=relation, bound=bound, passed=evaluate(measured, relation, bound)
    )


class StabilityInfo(BaseModel):
    stable_faces: int
    total_faces: int


class SceneReport(BaseModel):
    scene: str
    config: SceneConfig
    metric: Optional[ConeMetricReport] = None
    dual_metric: Optional[ConeMetricReport] = None
    rows: dict[str, Union[TableRow, str]] = {}
    equivariance: Optional[EquivarianceReport] = None
    stability: Optional[StabilityInfo] = None
    generalized: Optional[list[GeneralizedVertexClass]] = None
    rigidity: Optional[RigidityReport] = None
    projective: Optional[ProjectiveInvarianceReport] = None
    measurements: dict[str, float] = {}
    checks: list[SceneCheck] = []
    failures: list[dict[str, Any]] = []
    passed: bool
    timing_ms: Optional[float] = None


@dataclass
class SceneResult:
    report: SceneReport
    meshes: list[tuple[str, PolyhedralSurface]] = field(default_factory=list)


@dataclass
class _Draft:
    """장면 빌더가 채워 넣는 중간 결과"""
    fields: dict[str, Any] = field(default_factory=lambda: {"rows": {}, "measurements": {}})
    checks: list[SceneCheck] = field(default_factory=list)
    meshes: list[tuple[str, PolyhedralSurface]] = field(default_factory=list)

    def expect(self, name: str, measured: Scalar, relation: Relation, bound: Scalar) -> None:
        self.checks.append(make_check(name, measured, relation, bound))

    def measure(self, name: str, value: float) -> None:
        self.fields["measurements"][name] = float(value)

    def row(self, key: str, report: ConeMetricReport, expected: int) -> None:
        row = classify(report)
        self.fields["rows"][key] = row
        self.expect(f"{key}_table_row", row.row if isinstance(row, TableRow) else row, "==", expected)

    def stability(self, surface: PolyhedralSurface) -> None:
        self.fields["stability"] = StabilityInfo(
            stable_faces=len(surface.stable_faces), total_faces=surface.n_faces
        )

    def single_cone_point(self, report: ConeMetricReport, prefix: str = "") -> Optional[float]:
        self.expect(f"{prefix}cone_points", len(report.cone_points), "==", 1)
        return report.cone_points[0].curvature if len(report.cone_points) == 1 else None


def orbit_height_medians(group: GroupSpec, base: np.ndarray, depth: int) -> dict[int, float]:
    """단어 길이별 시간 좌표(높이)의 중앙값"""
    points = orbit(group, base, depth)
    lengths = word_lengths(points)
    heights = np.array([p.point[-1] for p in points])
    return {k: float(np.median(heights[lengths == k])) for k in range(depth + 1) if np.any(lengths == k)}


class SceneService:
    """
    ✅ 장면 실행 서비스
    - run(): 장면 하나를 만들고 보고서와 곡면을 돌려준다
    - CLI, HTTP 라우터, 검증 서비스가 공통으로 사용
    """

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()
        self.horizon = self.settings.geometry.STABILITY_HORIZON
        self._builders: dict[str, Callable[[SceneConfig, _Draft], None]] = {
            "fuchsian-genus2": self._fuchsian_genus2,
            "parabolic-torus": self._parabolic_torus,
            "polar-dual": self._polar_dual,
            "generalized": self._generalized,
            "rigidity": self._rigidity,
            "fuchsian-hyperbolic": self._fuchsian_hyperbolic,
        }
        logger.debug("[SceneService] 서비스 초기화 완료", horizon=self.horizon)

    @traced
    def run(self, config: SceneConfig) -> SceneResult:
        start = time.perf_counter()
        draft = _Draft()
        failures: list[dict[str, Any]] = []
        try:
            self._builders[config.scene](config, draft)
        except GeometryError as exc:
            logger.warning("[SceneService] 기하 오류", scene=config.scene, error_code=exc.error_code, message=exc.message)
            failures.append(exc.to_failure())

        failures.extend(
            {"check": c.name, "measured": c.measured, "relation": c.relation, "bound": c.bound}
            for c in draft.checks
            if not c.passed
        )
        timing = round((time.perf_counter() - start) * 1000.0, 3) if self.settings.REPORT_TIMING else None
        report = SceneReport(
            scene=config.scene,
            config=config,
            checks=draft.checks,
            failures=failures,
            passed=not failures,
            timing_ms=timing,
            **draft.fields,
        )
        logger.info(
            "[SceneService] 장면 결과",
            scene=config.scene,
            checks=len(draft.checks),
            failures=len(failures),
            passed=report.passed,
        )
        return SceneResult(report=report, meshes=draft.meshes)

    @staticmethod
    def _base_point(group: GroupSpec, point: Optional[tuple[float, float, float]]) -> np.ndarray:
        try:
            return base_point_for(group, point)
        except DomainError as exc:
            raise ConfigurationError(
                "base point is not on the scene surface", {"base_point": point, **(exc.details or {})}
            ) from exc

    def _fuchsian_genus2(self, config: SceneConfig, draft: _Draft) -> None:
        """ℝ^{2,1} 정팔각형 군: 종수 2, K = 0, 원뿔각 6π"""
        group = octagon_fuchsian_generators()
        group.check()
        base = self._base_point(group, config.base_point)
        surface = lower_hull_fuchsian(orbit(group, base, config.depth), group, config.depth, horizon=self.horizon)
        draft.meshes.append(("fuchsian_genus2", surface))
        draft.stability(surface)

        for length, height in orbit_height_medians(group, base, min(config.depth, 3)).items():
            draft.measure(f"median_height_length_{length}", height)

        equivariance = equivariance_check(surface, group)
        draft.fields["equivariance"] = equivariance
        draft.expect("equivariance_violations", len(equivariance.violations), "==", 0)

        metric = quotient_metric(surface, group)
        draft.fields["metric"] = metric
        curvature = draft.single_cone_point(metric)
        if curvature is not None:
            draft.measure("cone_angle", TWO_PI - curvature)
            draft.expect("cone_angle_error", abs(TWO_PI - curvature - 6.0 * np.pi), "<=", CURVED_BOUND)
            draft.expect("curvature_error", abs(curvature + 4.0 * np.pi), "<=", CURVED_BOUND)
        draft.expect("gb_residual", metric.gb_residual, "<=", FLAT_BOUND)
        draft.expect("genus", metric.genus, "==", 2)
        draft.expect("K", metric.K, "==", 0)
        draft.expect("epsilon", metric.epsilon, "==", "-")
        draft.row("metric", metric, 9)

    def _parabolic_torus(self, config: SceneConfig, draft: _Draft) -> None:
        """단위 정사각형 격자의 포물형 다면체: 종수 1, K = −1, 합동인 쌍곡 정사각형 면"""
        group = parabolic_square_generators()
        group.check()
        base = self._base_point(group, config.base_point)
        surface = parabolic_hull(orbit(group, base, config.depth), group, config.depth, horizon=self.horizon)
        draft.meshes.append(("parabolic_torus", surface))
        draft.stability(surface)

        if config.base_point is None:
            residual = max(abs(horosphere_residual(x)) for x in surface.points)
            draft.measure("horosphere_residual", residual)
            draft.expect("horosphere_residual", residual, "<=", DUALITY_BOUND)

        geometries = [face_geometry(surface, f) for f in surface.stable_faces]
        lengths = [length for g in geometries for length in g.lengths]
        draft.expect("non_square_stable_faces", sum(len(g.lengths) != 4 for g in geometries), "==", 0)
        if lengths:
            draft.measure("square_edge_length", float(np.mean(lengths)))
            draft.expect("edge_length_spread", max(lengths) - min(lengths), "<", DUALITY_BOUND)

        equivariance = equivariance_check(surface, group)
        draft.fields["equivariance"] = equivariance
        draft.expect("equivariance_violations", len(equivariance.violations), "==", 0)

        metric = quotient_metric(surface, group)
        draft.fields["metric"] = metric
        curvature = draft.single_cone_point(metric)
        if curvature is not None:
            draft.expect("curvature", curvature, ">", 0.0)
            draft.expect("curvature_minus_area", abs(curvature - metric.total_area), "<=", CURVED_BOUND)
        draft.expect("gb_residual", metric.gb_residual, "<=", CURVED_BOUND)
        draft.expect("genus", metric.genus, "==", 1)
        draft.expect("K", metric.K, "==", -1)
        draft.row("metric", metric, 5)

        dual = dual_quotient_metric(surface, group)
        draft.fields["dual_metric"] = dual
        draft.expect("dual_gb_residual", dual.gb_residual, "<=", CURVED_BOUND)
        draft.expect("dual_large", bool(dual.large_flag and dual.large_flag.value), "==", True)
        draft.row("dual_metric", dual, 6)

    def _polar_dual(self, config: SceneConfig, draft: _Draft) -> None:
        """Klein 다면체와 그 극쌍대: 행 1 과 행 4"""
        rng = np.random.default_rng(config.seed)
        P = klein_polytope(config.preset, rng)
        draft.meshes.append(("klein_polytope", P))

        metric = closed_surface_metric(P)
        draft.fields["metric"] = metric
        draft.expect("gb_residual", metric.gb_residual, "<=", CURVED_BOUND)
        draft.row("metric", metric, 1)

        Pstar = polar_dual(P)
        draft.meshes.append(("polar_dual", Pstar))
        draft.expect(
            "incidence_transposed", bool(np.array_equal(incidence_matrix(Pstar), incidence_matrix(P).T)), "==", True
        )
        involution = float(np.abs(polar_dual(Pstar).points - P.points).max())
        draft.measure("involution_error", involution)
        draft.expect("involution_error", involution, "<=", DUALITY_BOUND)

        dihedral = dihedral_angles(P)
        lengths = dual_edge_lengths(P, Pstar)
        mismatch = max(abs(lengths[e] - (np.pi - dihedral[e])) for e in dihedral)
        draft.expect("dual_edge_length_error", mismatch, "<=", DUALITY_BOUND)

        dual = dual_metric(Pstar)
        draft.fields["dual_metric"] = dual
        angles = [c.angle for c in dual.cone_points]
        draft.expect("dual_cone_points", len(angles), "==", Pstar.n_vertices)
        if angles:
            draft.expect("min_dual_cone_excess", min(angles) - TWO_PI, ">", 0.0)
            if config.preset != "random":
                draft.expect("dual_cone_angle_spread", max(angles) - min(angles), "<=", DUALITY_BOUND)
        draft.expect("dual_gb_residual", dual.gb_residual, "<=", CURVED_BOUND)
        draft.row("dual_metric", dual, 4)

    def _generalized(self, config: SceneConfig, draft: _Draft) -> None:
        """단위 공에 의한 절단과 꼭짓점 분류"""
        Q = projective_polytope(config.preset)
        draft.meshes.append(("projective_polytope", Q))
        closest = max(
            float(np.linalg.norm(_closest_to_origin(Q.points[a], Q.points[b]))) for a, b in Q.edges
        )
        draft.measure("max_edge_distance_to_origin", closest)

        classes = truncate_and_classify(Q)
        draft.fields["generalized"] = classes
        kinds = {kind: sum(c.kind == kind for c in classes) for kind in ("finite", "ideal", "hyperideal")}
        for kind, count in kinds.items():
            draft.measure(f"{kind}_vertices", count)
        expected = {"ideal-tetrahedron": ("ideal", 4), "hyperideal-cube": ("hyperideal", 8)}.get(config.preset)
        if expected is not None:
            draft.expect(f"{expected[0]}_vertices", kinds[expected[0]], "==", expected[1])
        draft.expect(
            "edges_meet_ball",
            all(segment_meets_open_ball(Q.points[a], Q.points[b]) for a, b in Q.edges),
            "==",
            True,
        )

    def _rigidity(self, config: SceneConfig, draft: _Draft) -> None:
        """유클리드 다면체의 무한소 강성과 사영 불변성"""
        rng = np.random.default_rng(config.seed)
        surface = euclidean_polytope(config.preset, rng)
        draft.meshes.append(("rigidity", surface))

        report = deformation_space(surface)
        draft.fields["rigidity"] = report
        draft.expect("deformation_dim", report.deformation_dim, "==", 6)
        draft.expect("killing_residual", killing_residual(surface), "<=", KILLING_BOUND)

        projective = projective_invariance_check(surface, PROJECTIVE_TRIALS, config.seed)
        draft.fields["projective"] = projective
        draft.expect("projective_invariance", projective.passed, "==", True)
        affine = projective_invariance_check(surface, PROJECTIVE_TRIALS, config.seed, affine=True)
        draft.expect("affine_invariance", affine.passed, "==", True)

    def _fuchsian_hyperbolic(self, config: SceneConfig, draft: _Draft) -> None:
        """ℍ³ 등거리 곡면 위의 Fuchsian 다면체와 그 쌍대: 행 7 과 행 10"""
        group = equidistant_fuchsian_generators()
        group.check()
        point = config.base_point or (0.0, 0.0, float(np.tanh(EQUIDISTANT_HEIGHT)))
        if abs(point[2]) <= 1e-6:
            raise ConfigurationError("base point must lie off the invariant plane x3 = 0", {"base_point": point})
        base = self._base_point(group, point)
        surface = lower_hull_fuchsian(orbit(group, base, config.depth), group, config.depth, horizon=self.horizon)
        draft.meshes.append(("fuchsian_hyperbolic", surface))
        draft.stability(surface)

        equivariance = equivariance_check(surface, group)
        draft.fields["equivariance"] = equivariance
        draft.expect("equivariance_violations", len(equivariance.violations), "==", 0)

        metric = quotient_metric(surface, group)
        draft.fields["metric"] = metric
        curvature = draft.single_cone_point(metric)
        if curvature is not None:
            draft.expect("curvature", curvature, ">", 0.0)
        draft.expect("gb_residual", metric.gb_residual, "<=", CURVED_BOUND)
        draft.expect("genus", metric.genus, "==", 2)
        draft.row("metric", metric, 7)

        dual = dual_quotient_metric(surface, group)
        draft.fields["dual_metric"] = dual
        draft.expect("dual_gb_residual", dual.gb_residual, "<=", CURVED_BOUND)
        draft.row("dual_metric", dual, 10)


def _closest_to_origin(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = b - a
    t = float(np.clip(-np.dot(a, d) / np.dot(d, d), 0.0, 1.0))
    return a + t * d
