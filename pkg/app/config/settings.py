"""
✅ 애플리케이션 설정 (pydantic-settings)
- 환경 변수 접두사: SPACEFORM_
- 중첩 설정 구분자: __ (예: SPACEFORM_GEOMETRY__DEFAULT_DEPTH=4)
- .env 파일이 있으면 함께 로드
"""
from functools import lru_cache
from typing import Literal

from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class GeometrySettings(BaseModel):
    """장면(scene) 구성 기본값"""
    DEFAULT_DEPTH: int = Field(default=3, ge=0)
    # 궤도 열거 상한 8 (배정밀도 범위)
    MAX_DEPTH: int = Field(default=8, ge=0, le=8)
    # 안정성 판정에 쓰는 추가 궤도 깊이
    STABILITY_HORIZON: int = Field(default=2, ge=1)
    DEFAULT_SEED: int = 0


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="SPACEFORM_",
        env_nested_delimiter="__",
        env_file=".env",
        extra="ignore",
    )

    APP_NAME: str = "spaceform-poly"
    DESCRIPTION: str = "Convex polyhedral realizations of cone metrics in constant-curvature space forms"
    VERSION: str = "0.1.0"
    ENV: str = "development"

    HOST: str = "127.0.0.1"
    PORT: int = 8000
    RELOAD: bool = False

    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: Literal["console", "json"] = "console"

    # true이면 report.json에 timing_ms 기록 (바이트 단위 결정성은 깨짐)
    REPORT_TIMING: bool = False

    geometry: GeometrySettings = GeometrySettings()


@lru_cache
def get_settings() -> Settings:
    return Settings()
