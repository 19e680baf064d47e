"""
✅ 장면(scene) 실행 설정
- CLI 플래그, --config JSON 파일, HTTP 요청 본문이 모두 이 모델로 검증된다
- 기저점이 장면의 곡면 위에 있는지는 기하 커널이 필요하므로 서비스에서 검사
"""
from pathlib import Path
from typing import Literal, Optional, get_args

from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from app.config.settings import get_settings

SceneName = Literal[
    "fuchsian-genus2",
    "parabolic-torus",
    "polar-dual",
    "generalized",
    "rigidity",
    "fuchsian-hyperbolic",
]
ExportFormat = Literal["obj", "json"]

SCENES: tuple[str, ...] = get_args(SceneName)

# 장면별 사용 가능한 preset (첫 번째가 기본값)
PRESETS: dict[str, tuple[str, ...]] = {
    "polar-dual": ("cube", "tetrahedron", "octahedron", "random"),
    "generalized": ("ideal-tetrahedron", "hyperideal-cube", "overtruncated-cube"),
    "rigidity": ("tetrahedron", "octahedron", "cube", "random"),
}

# 궤도를 depth + STABILITY_HORIZON 까지 열거하는 장면
ORBIT_SCENES: frozenset[str] = frozenset({"fuchsian-genus2", "parabolic-torus", "fuchsian-hyperbolic"})


class SceneConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scene: SceneName
    depth: int = Field(default_factory=lambda: get_settings().geometry.DEFAULT_DEPTH, ge=0)
    base_point: Optional[tuple[float, float, float]] = None
    seed: int = Field(default_factory=lambda: get_settings().geometry.DEFAULT_SEED)
    export: set[ExportFormat] = {"obj", "json"}
    preset: Optional[str] = None
    out_dir: Path = Field(default=Path("out"), exclude=True)

    @field_validator("base_point", mode="before")
    @classmethod
    def parse_base_point(cls, value):
        """'x,y,z' 문자열도 허용"""
        if isinstance(value, str):
            parts = [p.strip() for p in value.split(",") if p.strip()]
            if len(parts) != 3:
                raise ValueError("base point needs three comma separated coordinates")
            return tuple(float(p) for p in parts)
        return value

    @field_validator("export", mode="before")
    @classmethod
    def parse_export(cls, value):
        if isinstance(value, str):
            return {p.strip() for p in value.split(",") if p.strip()}
        return value

    @field_serializer("export")
    def serialize_export(self, value: set[str]) -> list[str]:
        return sorted(value)

    @model_validator(mode="after")
    def check_scene_options(self) -> "SceneConfig":
        geometry = get_settings().geometry
        max_depth = geometry.MAX_DEPTH
        if self.scene in ORBIT_SCENES:
            max_depth -= geometry.STABILITY_HORIZON
        if self.depth > max_depth:
            raise ValueError(f"depth must be at most {max_depth}")
        allowed = PRESETS.get(self.scene, ())
        if self.preset is None:
            self.preset = allowed[0] if allowed else None
        elif self.preset not in allowed:
            raise ValueError(f"preset {self.preset!r} is not available for scene {self.scene!r}")
        return self
