"""
✅ 유클리드 다면체 곡면의 무한소 강성 (infinitesimal rigidity)
- 미지수: 면마다 Killing 장 x ↦ a_f + ω_f × x (6F 개)
- 제약: 변 e = (u, v) 를 공유하는 면 f, g 의 장이 두 끝점에서 일치 (변마다 12개 식)
- 변형 공간 차원 = 특이값 문턱 아래의 커널 차원, 강성 ⟺ 차원 = 6

🔍 사영 불변성:
- 무작위 사영 변환 I + U(−0.2, 0.2) 을 꼭짓점에 적용해도 변형 공간 차원은 변하지 않는다
"""
from __future__ import annotations

from typing import Optional

import numpy as np
import structlog
from pydantic import BaseModel

from app.exception.global_handler import DomainError, OpenSurfaceError, ProjectiveSamplingError
from app.geometry.hull import PolyhedralSurface, plane_fit

logger = structlog.stdlib.get_logger(__name__)

TRIVIAL_DIM = 6
DEFAULT_REL_TOL = 1e-8
SPECTRUM_TAIL = 12
PERTURBATION = 0.2
MIN_DENOMINATOR = 0.1


class RigidityReport(BaseModel):
    deformation_dim: int
    trivial_dim: int = TRIVIAL_DIM
    rigid: bool
    singular_values: list[float]
    threshold: float


class ProjectiveTrial(BaseModel):
    matrix: list[list[float]]
    deformation_dim: int
    retries: int = 0


class ProjectiveInvarianceReport(BaseModel):
    base_dim: int
    affine: bool
    seed: int
    trials: list[ProjectiveTrial]
    passed: bool


def cross_matrix(x: np.ndarray) -> np.ndarray:
    """[x]× : [x]× y = x × y"""
    return np.array(
        [
            [0.0, -x[2], x[1]],
            [x[2], 0.0, -x[0]],
            [-x[1], x[0], 0.0],
        ]
    )


def _normalized(points: np.ndarray) -> np.ndarray:
    """무게중심을 원점으로, RMS 반지름을 1로 (문턱값의 척도 불변성)"""
    centred = points - points.mean(axis=0)
    rms = float(np.sqrt(np.mean(np.sum(centred * centred, axis=1))))
    return centred / rms if rms > 0 else centred


def _check_surface(surface: PolyhedralSurface, allow_open: bool) -> None:
    if surface.space.model_constant != 0 or surface.space.lorentzian:
        raise DomainError("rigidity system is assembled in Euclidean space", {"space": surface.space.name})
    if not allow_open and not surface.is_closed:
        raise OpenSurfaceError("rigidity needs a closed polyhedral surface", {"faces": surface.n_faces})


def assemble_deformation_system(surface: PolyhedralSurface, *, allow_open: bool = False) -> np.ndarray:
    """
    각 내부 변 (u, v), 인접 면 (f, g), 끝점 x ∈ {u, v} 마다
    (a_f − [x]× ω_f) − (a_g − [x]× ω_g) = 0
    열 순서: 면 f 마다 [a_f, ω_f]
    """
    _check_surface(surface, allow_open)
    points = _normalized(surface.points)
    blocks = []
    for (u, v), incident in surface.edges.items():
        if len(incident) != 2:
            continue
        f, g = incident
        for x in (points[u], points[v]):
            row = np.zeros((3, 6 * surface.n_faces))
            cross = cross_matrix(x)
            row[:, 6 * f : 6 * f + 3] = np.eye(3)
            row[:, 6 * f + 3 : 6 * f + 6] = -cross
            row[:, 6 * g : 6 * g + 3] = -np.eye(3)
            row[:, 6 * g + 3 : 6 * g + 6] = cross
            blocks.append(row)
    if not blocks:
        return np.zeros((0, 6 * surface.n_faces))
    return np.vstack(blocks)


def trivial_fields(n_faces: int) -> np.ndarray:
    """모든 면에 같은 (a, ω) 를 주는 전역 Killing 장 6개 (열 벡터)"""
    basis = np.zeros((6 * n_faces, TRIVIAL_DIM))
    for k in range(TRIVIAL_DIM):
        basis[k::6, k] = 1.0
    return basis


def killing_residual(surface: PolyhedralSurface, *, allow_open: bool = False) -> float:
    """전역 Killing 장이 제약식을 만족하는 정도 (0 이어야 함)"""
    system = assemble_deformation_system(surface, allow_open=allow_open)
    if system.size == 0:
        return 0.0
    return float(np.abs(system @ trivial_fields(surface.n_faces)).max())


def deformation_space(
    surface: PolyhedralSurface,
    rel_tol: float = DEFAULT_REL_TOL,
    *,
    allow_open: bool = False,
) -> RigidityReport:
    """
    ✅ 무한소 등거리 변형 공간의 차원
    - 커널 차원 = 열 수 − #(σ > rel_tol · σ_max)
    - singular_values: 작은 쪽부터 최대 12개 (문턱값 감사용)
    """
    system = assemble_deformation_system(surface, allow_open=allow_open)
    columns = system.shape[1]
    if system.shape[0] == 0:
        singular = np.zeros(0)
        threshold = 0.0
        rank = 0
    else:
        singular = np.linalg.svd(system, compute_uv=False)
        threshold = rel_tol * float(singular[0])
        rank = int(np.count_nonzero(singular > threshold))

    dim = columns - rank
    padded = np.concatenate([singular, np.zeros(max(columns - len(singular), 0))])
    tail = sorted(float(s) for s in padded)[:SPECTRUM_TAIL]
    report = RigidityReport(
        deformation_dim=dim,
        rigid=dim == TRIVIAL_DIM,
        singular_values=tail,
        threshold=threshold,
    )
    logger.debug(
        "[RigidityService] 변형 공간 계산",
        faces=surface.n_faces,
        rows=system.shape[0],
        deformation_dim=dim,
        rigid=report.rigid,
    )
    return report


def random_projective_map(rng: np.random.Generator, *, affine: bool = False) -> np.ndarray:
    """4×4 동차 행렬 I + U(−0.2, 0.2), affine 이면 마지막 행은 (0, 0, 0, 1)"""
    matrix = np.eye(4) + rng.uniform(-PERTURBATION, PERTURBATION, size=(4, 4))
    if affine:
        matrix[3] = (0.0, 0.0, 0.0, 1.0)
    return matrix


def apply_projective_map(surface: PolyhedralSurface, matrix: np.ndarray) -> PolyhedralSurface:
    """
    꼭짓점에 사영 변환 적용, 면 구조는 유지
    - 분모가 0.1 미만이거나 부호가 섞이면 무한 평면이 곡면을 가로지르므로 거부
    """
    homogeneous = np.hstack([surface.points, np.ones((surface.n_vertices, 1))]) @ np.asarray(matrix).T
    denominator = homogeneous[:, 3]
    if np.any(np.abs(denominator) < MIN_DENOMINATOR) or len(set(np.sign(denominator))) > 1:
        raise ProjectiveSamplingError(
            "projective map sends the surface across the plane at infinity",
            {"min_denominator": float(np.abs(denominator).min())},
        )
    image = homogeneous[:, :3] / denominator[:, None]
    mapped = PolyhedralSurface(points=image, faces=surface.faces, space=surface.space)
    scale = max(1.0, float(np.abs(image).max()))
    for f, cycle in enumerate(mapped.faces):
        verts = image[list(cycle)]
        normal, offset = plane_fit(verts)
        if float(np.abs(verts @ normal - offset).max()) > 1e-9 * scale:
            raise ProjectiveSamplingError("projective image of a face is not planar", {"face": f})
    return mapped


def projective_invariance_check(
    surface: PolyhedralSurface,
    n_trials: int = 20,
    seed: int = 0,
    *,
    affine: bool = False,
    max_retries: int = 50,
    rel_tol: float = DEFAULT_REL_TOL,
) -> ProjectiveInvarianceReport:
    """
    ✅ 무작위 사영(또는 affine) 변환마다 변형 공간 차원을 다시 계산
    - 표본이 거부되면 다시 뽑는다, 한 시행에 max_retries 번까지
    """
    base = deformation_space(surface, rel_tol)
    rng = np.random.default_rng(seed)
    trials: list[ProjectiveTrial] = []
    for trial in range(n_trials):
        mapped: Optional[PolyhedralSurface] = None
        for attempt in range(max_retries + 1):
            matrix = random_projective_map(rng, affine=affine)
            try:
                mapped = apply_projective_map(surface, matrix)
            except ProjectiveSamplingError:
                continue
            break
        if mapped is None:
            raise ProjectiveSamplingError(
                "no admissible projective map found", {"trial": trial, "max_retries": max_retries}
            )
        dim = deformation_space(mapped, rel_tol).deformation_dim
        trials.append(ProjectiveTrial(matrix=matrix.tolist(), deformation_dim=dim, retries=attempt))

    report = ProjectiveInvarianceReport(
        base_dim=base.deformation_dim,
        affine=affine,
        seed=seed,
        trials=trials,
        passed=all(t.deformation_dim == base.deformation_dim for t in trials),
    )
    logger.info(
        "[RigidityService] 사영 불변성 검사",
        trials=n_trials,
        affine=affine,
        base_dim=base.deformation_dim,
        passed=report.passed,
    )
    return report
