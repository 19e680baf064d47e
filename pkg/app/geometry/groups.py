"""
✅ 등거리 변환군과 궤도 열거
- Isometry: 형식을 보존하는 선형 사상 + 생성원 단어(label)
- GroupSpec: 생성원 목록, 종류(fuchsian/parabolic/trivial), 불변 곡면 설명
- orbit(): 너비 우선, 즉시 자유 약분, 좌표 기반 중복 제거

🔍 단어 규약:
- 소문자 a, b, c, d 는 생성원, 대문자 A, B, C, D 는 역원
- 단어 "abc" 의 행렬은 M_a · M_b · M_c, 점은 M_a M_b M_c p
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Optional, Sequence

import numpy as np
import structlog
from scipy.spatial import KDTree

from app.exception.global_handler import DomainError, GeometryError
from app.geometry.forms import (
    EPS_GEOM,
    H3,
    R21,
    FormSpace,
    PointLike,
    _vector,
    chart_lift,
    form_eval,
)

logger = structlog.stdlib.get_logger(__name__)

MAX_ORBIT_DEPTH = 8


def inverse_word(word: str) -> str:
    return word[::-1].swapcase()


def reduce_word(word: str) -> str:
    """자유 약분 (xX, Xx 제거)"""
    out: list[str] = []
    for letter in word:
        if out and out[-1] == letter.swapcase():
            out.pop()
        else:
            out.append(letter)
    return "".join(out)


@dataclass(frozen=True, eq=False)
class Isometry:
    matrix: np.ndarray
    space: FormSpace
    label: str = ""

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return Isometry(self.matrix @ other.matrix, self.space, reduce_word(self.label + other.label))

    def inverse(self) -> "Isometry":
        g = self.space.gram
        return Isometry(g @ self.matrix.T @ g, self.space, inverse_word(self.label))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """주변 공간 좌표(행 벡터)에 작용"""
        return np.atleast_2d(points) @ self.matrix.T

    def apply_chart(self, points: np.ndarray) -> np.ndarray:
        """affine chart 좌표에 사영적으로 작용 (곡률 공간은 동차 좌표 사용)"""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.space.model_constant == 0:
            return pts @ self.matrix.T
        homogeneous = np.hstack([pts, np.ones((len(pts), 1))]) @ self.matrix.T
        return homogeneous[:, :-1] / homogeneous[:, -1:]

    def form_defect(self) -> float:
        """max |Mᵀ G M − G|"""
        g = self.space.gram
        return float(np.abs(self.matrix.T @ g @ self.matrix - g).max())

    def preserves_upper_sheet(self) -> bool:
        if self.space.signature[-1] != -1:
            return True
        apex = np.zeros(self.space.dim)
        apex[-1] = 1.0
        return bool(self.apply(apex)[0, -1] > 0)


@dataclass(frozen=True)
class OrbitPoint:
    point: np.ndarray = field(compare=False)
    word: str


@dataclass(frozen=True, eq=False)
class GroupSpec:
    name: str
    space: FormSpace
    kind: str
    umbilic_surface: str
    generators: tuple[Isometry, ...]
    relation: Optional[str] = None

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(g.label for g in self.generators)

    @property
    def alphabet(self) -> dict[str, np.ndarray]:
        """생성원과 역원, 기호 순서대로"""
        letters: dict[str, np.ndarray] = {}
        for g in self.generators:
            letters[g.label] = g.matrix
            letters[g.label.upper()] = g.inverse().matrix
        return dict(sorted(letters.items()))

    def element(self, word: str) -> np.ndarray:
        alphabet = self.alphabet
        return reduce(lambda m, letter: m @ alphabet[letter], word, np.eye(self.space.dim))

    def isometry(self, word: str) -> Isometry:
        return Isometry(self.element(word), self.space, reduce_word(word))

    def relation_defect(self) -> float:
        if self.relation is None:
            return 0.0
        return float(np.abs(self.element(self.relation) - np.eye(self.space.dim)).max())

    def check(self, tol: float = EPS_GEOM) -> None:
        """생성원의 형식 보존과 상엽 보존 확인"""
        for g in self.generators:
            defect = g.form_defect()
            if defect > tol * max(1.0, float(np.abs(g.matrix).max())):
                raise GeometryError(
                    "generator does not preserve the form",
                    {"group": self.name, "generator": g.label, "defect": defect},
                )
            if not g.preserves_upper_sheet():
                raise GeometryError(
                    "generator swaps the sheets", {"group": self.name, "generator": g.label}
                )


def lorentz_boost(distance: float) -> np.ndarray:
    """ℝ^{2,1}에서 x축 방향 쌍곡 평행이동 T(d)"""
    ch, sh = np.cosh(distance), np.sinh(distance)
    return np.array([[ch, 0.0, sh], [0.0, 1.0, 0.0], [sh, 0.0, ch]])


def rotation(angle: float) -> np.ndarray:
    """시간 축(세 번째 좌표)에 대한 회전 R(φ)"""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


OCTAGON_INRADIUS = float(np.arccosh(1.0 / np.tan(np.pi / 8)))
OCTAGON_TRANSLATION_LENGTH = 2.0 * OCTAGON_INRADIUS


def octagon_fuchsian_generators() -> GroupSpec:
    """
    ✅ 정팔각형(내각 π/4)의 맞은편 변을 짝짓는 네 쌍곡 평행이동
    - 중심 (0,0,1)에서 변까지 거리 r = arcosh(cot(π/8))
    - g_k = R(kπ/4) · T(2r) · R(−kπ/4),  k = 0..3
    - 관계식: g0 g3 g2⁻¹ g1 g0⁻¹ g3⁻¹ g2 g1⁻¹ = I
    """
    boost = lorentz_boost(OCTAGON_TRANSLATION_LENGTH)
    generators = tuple(
        Isometry(rotation(k * np.pi / 4) @ boost @ rotation(-k * np.pi / 4), R21, symbol)
        for k, symbol in enumerate("abcd")
    )
    return GroupSpec(
        name="octagon",
        space=R21,
        kind="fuchsian",
        umbilic_surface="upper sheet of the hyperboloid <x,x> = -1 in R^{2,1}",
        generators=generators,
        relation="adCbADcB",
    )


def equidistant_fuchsian_generators() -> GroupSpec:
    """
    팔각형 군을 O(3,1)에 넣은 것: ℍ³의 전측지 평면 x₃ = 0 을 보존
    (x, y, t) 성분에만 작용하고 x₃ 는 그대로 둔다
    """
    index = [0, 1, 3]
    generators = []
    for g in octagon_fuchsian_generators().generators:
        m = np.eye(4)
        m[np.ix_(index, index)] = g.matrix
        generators.append(Isometry(m, H3, g.label))
    return GroupSpec(
        name="octagon-equidistant",
        space=H3,
        kind="fuchsian",
        umbilic_surface="equidistant surface of the plane x3 = 0 in H3",
        generators=tuple(generators),
        relation="adCbADcB",
    )


def parabolic_translation(a: float, b: float) -> np.ndarray:
    """상반공간의 수평 이동 (u, v, h) ↦ (u + a, v + b, h) 을 ℝ^{3,1}에서 표현"""
    s = a * a + b * b
    return np.array(
        [
            [1.0, 0.0, -a, a],
            [0.0, 1.0, -b, b],
            [a, b, 1.0 - s / 2.0, s / 2.0],
            [a, b, -s / 2.0, 1.0 + s / 2.0],
        ]
    )


def parabolic_square_generators() -> GroupSpec:
    """
    ✅ 단위 정사각형 격자를 보존하는 두 포물형 등거리 변환
    - 고정점: Klein 공의 북극 (0,0,1) = 영벡터 (0,0,1,1) 방향
    - 높이 1 호로구 = 원점을 지나는 타원면 2(x² + y²) + 4(z − ½)² = 1
    """
    return GroupSpec(
        name="square-lattice",
        space=H3,
        kind="parabolic",
        umbilic_surface="horosphere centred at the Klein point (0,0,1)",
        generators=(
            Isometry(parabolic_translation(1.0, 0.0), H3, "a"),
            Isometry(parabolic_translation(0.0, 1.0), H3, "b"),
        ),
        relation="abAB",
    )


def trivial_group(space: FormSpace) -> GroupSpec:
    return GroupSpec(
        name="trivial",
        space=space,
        kind="trivial",
        umbilic_surface="none (closed surface)",
        generators=(),
    )


def orbit(group: GroupSpec, p: PointLike, depth: int) -> list[OrbitPoint]:
    """
    길이 ≤ depth 인 약분된 단어들에 대한 p 의 궤도
    - 너비 우선, 각 층은 (길이, 사전순 단어) 순으로 정렬
    - 좌표 거리 < EPS_GEOM · max(1, ‖q‖) 인 점은 같은 점으로 보고 가장 짧은(사전순 첫) 단어를 유지
    """
    if not 0 <= depth <= MAX_ORBIT_DEPTH:
        raise DomainError("orbit depth out of range", {"depth": depth, "max": MAX_ORBIT_DEPTH})

    base = _vector(group.space, p)
    alphabet = group.alphabet
    points = [base[None, :]]
    words: list[str] = [""]
    layer_points = base[None, :]
    layer_words = [""]

    for _ in range(depth):
        cand_points = []
        cand_words: list[str] = []
        for symbol, matrix in alphabet.items():
            keep = [i for i, w in enumerate(layer_words) if not w or w[0] != symbol.swapcase()]
            if not keep:
                continue
            cand_points.append(layer_points[keep] @ matrix.T)
            cand_words.extend(symbol + layer_words[i] for i in keep)
        if not cand_words:
            break

        stacked = np.vstack(cand_points)
        order = sorted(range(len(cand_words)), key=cand_words.__getitem__)
        stacked = stacked[order]
        cand_words = [cand_words[i] for i in order]

        known = KDTree(np.vstack(points))
        radius = EPS_GEOM * np.maximum(1.0, np.linalg.norm(stacked, axis=1))
        seen_before = [bool(hits) for hits in known.query_ball_point(stacked, radius)]
        siblings = KDTree(stacked).query_ball_point(stacked, radius)

        kept = np.zeros(len(cand_words), dtype=bool)
        for i in range(len(cand_words)):
            if seen_before[i] or any(kept[j] for j in siblings[i] if j < i):
                continue
            kept[i] = True

        layer_points = stacked[kept]
        layer_words = [w for w, k in zip(cand_words, kept) if k]
        if not layer_words:
            break
        points.append(layer_points)
        words.extend(layer_words)

    result = [OrbitPoint(point, word) for point, word in zip(np.vstack(points), words)]
    logger.debug("[OrbitEnumerator] 궤도 열거 완료", group=group.name, depth=depth, points=len(result))
    return result


def word_lengths(points: Sequence[OrbitPoint]) -> np.ndarray:
    return np.array([len(p.word) for p in points])


def base_point_for(group: GroupSpec, point: Optional[Sequence[float]] = None) -> np.ndarray:
    """장면 기본 기저점: ℝ^{2,1} 에서는 (0,0,1), ℍ³ 에서는 Klein 점의 lift"""
    if group.space.name == "R21":
        point = np.array([0.0, 0.0, 1.0]) if point is None else np.asarray(point, dtype=float)
        value = form_eval(R21, point, point)
        if abs(value + 1.0) > EPS_GEOM * max(1.0, float(np.abs(point).max())) ** 2 or point[2] <= 0:
            raise DomainError("base point is not on the upper hyperboloid sheet", {"form_value": value})
        return point
    klein = np.zeros(3) if point is None else np.asarray(point, dtype=float)
    return chart_lift(group.space, klein)[0]
