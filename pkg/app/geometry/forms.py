"""
✅ 이차 형식(quadratic form)과 공간 형식(space form)
- ℝ³, 𝕊³, ℍ³, ℝ^{2,1}, dS³, AdS³ 그리고 ℍ² ⊂ ℝ^{2,1}
- 시간꼴 좌표는 항상 마지막 좌표, 상엽(upper sheet)은 시간꼴 좌표 > 0
- 거리 함수, Hilbert 거리, Klein/상반공간 모델 사이의 변환

🔍 수치 규약:
- EPS_GEOM: 소속/접합 판정 허용 오차
- EPS_REPORT: 계량(metric) 단언 허용 오차
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from app.exception.global_handler import (
    DimensionMismatchError,
    DomainError,
    GeometryError,
    SeparationError,
)

EPS_GEOM = 1e-9
EPS_REPORT = 1e-6


@dataclass(frozen=True)
class FormSpace:
    """
    부호(signature)와 차원으로 식별되는 공간 형식
    - model_constant: 의사구면 ⟨x,x⟩ = c 의 c, 0이면 평탄한 주변 공간 자체
    - curvature/epsilon: 기호 M_K^ε 의 K, ε (ℍ²는 둘 다 None)
    """
    name: str
    dim: int
    signature: tuple[int, ...]
    model_constant: int
    curvature: Optional[int] = None
    epsilon: Optional[str] = None

    def __post_init__(self) -> None:
        if len(self.signature) != self.dim:
            raise DimensionMismatchError(
                "signature length must equal dim", {"space": self.name, "dim": self.dim}
            )

    @property
    def gram(self) -> np.ndarray:
        return np.diag(np.asarray(self.signature, dtype=float))

    @property
    def lorentzian(self) -> bool:
        return -1 in self.signature

    @property
    def has_chart(self) -> bool:
        """3차원 affine chart로 다루는 공간인지 (ℍ², AdS³ 제외)"""
        return self.name in {"R3", "R21", "H3", "S3", "dS3"}

    def __str__(self) -> str:
        return self.name


R3 = FormSpace("R3", 3, (1, 1, 1), 0, 0, "+")
S3 = FormSpace("S3", 4, (1, 1, 1, 1), 1, 1, "+")
H3 = FormSpace("H3", 4, (1, 1, 1, -1), -1, -1, "+")
R21 = FormSpace("R21", 3, (1, 1, -1), 0, 0, "-")
DS3 = FormSpace("dS3", 4, (1, 1, 1, -1), 1, 1, "-")
ADS3 = FormSpace("AdS3", 4, (1, 1, -1, -1), -1, -1, "-")
H2 = FormSpace("H2", 3, (1, 1, -1), -1)

SPACES = {space.name: space for space in (R3, S3, H3, R21, DS3, ADS3, H2)}


def space_form(K: int, epsilon: str) -> FormSpace:
    """기호 M_K^ε 에 해당하는 공간 형식"""
    for space in (R3, S3, H3, R21, DS3, ADS3):
        if space.curvature == K and space.epsilon == epsilon:
            return space
    raise DomainError("no space form for (K, epsilon)", {"K": K, "epsilon": epsilon})


@dataclass(frozen=True, eq=False)
class AmbientPoint:
    coords: np.ndarray
    space: FormSpace

    @classmethod
    def on(cls, space: FormSpace, coords: Sequence[float], tol: float = EPS_GEOM) -> "AmbientPoint":
        """의사구면 소속과 상엽 조건을 검사한 뒤 생성"""
        x = _vector(space, coords)
        if space.model_constant != 0:
            value = form_eval(space, x, x)
            if abs(value - space.model_constant) > tol * max(1.0, float(np.abs(x).max())) ** 2:
                raise DomainError(
                    "point is not on the pseudo-sphere",
                    {"space": space.name, "form_value": value, "expected": space.model_constant},
                )
            if space.model_constant == -1 and space.signature[-1] == -1 and x[-1] <= 0:
                raise DomainError("point is not on the upper sheet", {"space": space.name})
        return cls(x, space)


PointLike = Union[AmbientPoint, Sequence[float], np.ndarray]


def _vector(space: FormSpace, x: PointLike) -> np.ndarray:
    if isinstance(x, AmbientPoint):
        x = x.coords
    v = np.asarray(x, dtype=float)
    if v.shape != (space.dim,):
        raise DimensionMismatchError(
            "vector length does not match the space dimension",
            {"space": space.name, "dim": space.dim, "shape": list(v.shape)},
        )
    return v


def form_eval(space: FormSpace, x: PointLike, y: PointLike) -> float:
    """⟨x, y⟩ = Σ signature_i · x_i · y_i"""
    a, b = _vector(space, x), _vector(space, y)
    return float(np.dot(np.asarray(space.signature, dtype=float) * a, b))


def form_matrix(space: FormSpace, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """행 벡터 묶음에 대한 형식 값 행렬 ⟨xs_i, ys_j⟩"""
    return (np.asarray(xs, dtype=float) * np.asarray(space.signature, dtype=float)) @ np.asarray(ys, dtype=float).T


def geodesic_distance(space: FormSpace, a: PointLike, b: PointLike) -> float:
    """
    공간 형식 위의 측지 거리
    - ℍ³/ℍ²: arcosh(−⟨a,b⟩) 를 2·asinh(√⟨a−b,a−b⟩ / 2) 로 안정적으로 계산
    - 𝕊³: arccos(⟨a,b⟩) 를 2·asin(‖a−b‖ / 2) 로 계산
    - ℝ³, ℝ^{2,1}: 형식에 대한 b−a 의 길이 (공간꼴 선분만)
    - dS³: ⟨a,b⟩ > 1 이면 arcosh, |⟨a,b⟩| ≤ 1 이면 arccos
    """
    x, y = _vector(space, a), _vector(space, b)
    diff = y - x

    if space.model_constant == 0:
        q = form_eval(space, diff, diff)
        if not np.any(diff):
            return 0.0
        if q <= 0:
            raise SeparationError(
                "segment is not space-like", {"space": space.name, "form_value": q}
            )
        return float(np.sqrt(q))

    if space.name in {"H3", "H2"}:
        q = max(form_eval(space, diff, diff), 0.0)
        return float(2.0 * np.arcsinh(np.sqrt(q) / 2.0))

    if space.name == "S3":
        chord = min(float(np.linalg.norm(diff)), 2.0)
        return float(2.0 * np.arcsin(chord / 2.0))

    if space.name == "dS3":
        inner = form_eval(space, x, y)
        if inner > 1.0:
            return float(np.arccosh(inner))
        if inner >= -1.0:
            # 짧은 현에서는 arccos 대신 현 길이 공식이 안정적
            q = form_eval(space, diff, diff)
            if 0.0 <= q < 2.0:
                return float(2.0 * np.arcsin(np.sqrt(q) / 2.0))
            return float(np.arccos(np.clip(inner, -1.0, 1.0)))
        raise SeparationError(
            "de Sitter points are not joined by a geodesic", {"inner": inner}
        )

    raise GeometryError("geodesics are not supported in this space", {"space": space.name})


def hilbert_distance(x: Sequence[float], y: Sequence[float]) -> float:
    """
    단위 공 안의 두 점 사이 Hilbert 거리 ½·log[a,x,y,b]
    - a, b: 직선 xy 와 단위 구의 교점 (a는 x 쪽)
    - 교차비 [a,x,y,b] = (|ay|·|bx|) / (|ax|·|by|)
    """
    p = np.asarray(x, dtype=float)
    q = np.asarray(y, dtype=float)
    for point in (p, q):
        if float(np.dot(point, point)) >= 1.0:
            raise DomainError("point is not inside the open unit ball", {"norm": float(np.linalg.norm(point))})

    length = float(np.linalg.norm(q - p))
    if length == 0.0:
        return 0.0
    d = (q - p) / length

    # s² + 2(p·d)s + ‖p‖² − 1 = 0 의 두 근 s₋ < 0 < s₊
    half_b = float(np.dot(p, d))
    c = float(np.dot(p, p)) - 1.0
    root = np.sqrt(half_b * half_b - c)
    s_plus = -half_b + root if half_b <= 0 else -c / (half_b + root)
    s_minus = c / s_plus

    ax = -s_minus
    ay = length - s_minus
    bx = s_plus
    by = s_plus - length
    return float(0.5 * np.log((ay * bx) / (ax * by)))


def klein_project(p: PointLike, space: Optional[FormSpace] = None) -> np.ndarray:
    """쌍곡면 상엽의 점을 Klein 모델(단위 공/원판)로 사영, 공간은 점의 길이로 추론"""
    if space is None:
        space = p.space if isinstance(p, AmbientPoint) else (H2 if len(p) == 3 else H3)
    x = _vector(space, p)
    if x[-1] <= 0:
        raise DomainError("point is not on the upper sheet", {"space": space.name})
    return x[:-1] / x[-1]


def klein_lift(x: Sequence[float]) -> np.ndarray:
    """Klein 점 x ↦ (x, 1)/√(1 − ‖x‖²), 차원은 입력에서 결정 (ℍ² 또는 ℍ³)"""
    v = np.asarray(x, dtype=float)
    gap = 1.0 - float(np.dot(v, v))
    if gap <= 0:
        raise DomainError("point is not inside the open unit ball", {"norm": float(np.linalg.norm(v))})
    return np.append(v, 1.0) / np.sqrt(gap)


def desitter_lift(x: Sequence[float]) -> np.ndarray:
    """공 바깥의 Klein chart 점 x ↦ (x, 1)/√(‖x‖² − 1) ∈ dS³"""
    v = np.asarray(x, dtype=float)
    gap = float(np.dot(v, v)) - 1.0
    if gap <= 0:
        raise DomainError("point is not outside the closed unit ball", {"norm": float(np.linalg.norm(v))})
    return np.append(v, 1.0) / np.sqrt(gap)


def sphere_lift(x: Sequence[float]) -> np.ndarray:
    """𝕊³ 상반구의 gnomonic chart: x ↦ (x, 1)/√(1 + ‖x‖²)"""
    v = np.asarray(x, dtype=float)
    return np.append(v, 1.0) / np.sqrt(1.0 + float(np.dot(v, v)))


def chart_lift(space: FormSpace, points: np.ndarray) -> np.ndarray:
    """affine chart 좌표 (n×3) → 주변 공간 좌표 (n×dim)"""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if space.model_constant == 0:
        return pts.copy()
    lift = {"H3": klein_lift, "dS3": desitter_lift, "S3": sphere_lift}.get(space.name)
    if lift is None:
        raise GeometryError("space has no affine chart", {"space": space.name})
    return np.array([lift(x) for x in pts])


def chart_project(space: FormSpace, ambient: np.ndarray) -> np.ndarray:
    """주변 공간 좌표 → affine chart 좌표 (마지막 좌표로 나눔)"""
    pts = np.atleast_2d(np.asarray(ambient, dtype=float))
    if space.model_constant == 0:
        return pts.copy()
    if np.any(pts[:, -1] <= 0):
        raise DomainError("point is not in the affine chart x4 > 0", {"space": space.name})
    return pts[:, :-1] / pts[:, -1:]


def halfspace_to_hyperboloid(q: Sequence[float]) -> np.ndarray:
    """
    상반공간 (u, v, h) → 쌍곡면 ℍ³ ⊂ ℝ^{3,1}
    (u/h, v/h, (ρ² + h² − 1)/(2h), (ρ² + h² + 1)/(2h)),  ρ² = u² + v²
    """
    u, v, h = (float(c) for c in q)
    if h <= 0:
        raise DomainError("half-space height must be positive", {"h": h})
    rho2 = u * u + v * v
    return np.array([u / h, v / h, (rho2 + h * h - 1.0) / (2.0 * h), (rho2 + h * h + 1.0) / (2.0 * h)])


def halfspace_to_klein(q: Sequence[float]) -> np.ndarray:
    """
    상반공간 → Klein 공: (2u, 2v, ρ² + h² − 1)/(ρ² + h² + 1)
    - (0,0,1) 은 Klein 원점으로 간다
    - h = 1 평면은 원점을 지나고 (0,0,1)에서 단위 구에 접하는 타원면으로 간다
    """
    u, v, h = (float(c) for c in q)
    if h <= 0:
        raise DomainError("half-space height must be positive", {"h": h})
    s = u * u + v * v + h * h
    return np.array([2.0 * u, 2.0 * v, s - 1.0]) / (s + 1.0)


def halfspace_distance(q1: Sequence[float], q2: Sequence[float]) -> float:
    """cosh d = 1 + |Δ|² / (2 h₁ h₂)"""
    a = np.asarray(q1, dtype=float)
    b = np.asarray(q2, dtype=float)
    if a[2] <= 0 or b[2] <= 0:
        raise DomainError("half-space height must be positive", {"h": [float(a[2]), float(b[2])]})
    delta2 = float(np.dot(a - b, a - b))
    # arcosh(1 + t) = 2·asinh(√(t/2))
    return float(2.0 * np.arcsinh(np.sqrt(delta2 / (4.0 * a[2] * b[2]))))


TANGENCY_POINT = np.array([0.0, 0.0, 1.0])


def horosphere_residual(k: Sequence[float]) -> float:
    """높이 1 호로구 상(image)의 타원면 방정식 잔차: 2(x² + y²) + 4(z − ½)² − 1"""
    x, y, z = (float(c) for c in k)
    return 2.0 * (x * x + y * y) + 4.0 * (z - 0.5) ** 2 - 1.0
