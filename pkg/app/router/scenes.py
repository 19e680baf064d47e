from typing import Annotated, Any, Dict

import structlog
from fastapi import APIRouter, Body, Depends, Path
from fastapi.concurrency import run_in_threadpool
from pydantic import BaseModel, ValidationError

from app.config.scene import PRESETS, SCENES, SceneConfig, SceneName
from app.config.settings import Settings, get_settings
from app.exception.global_handler import ConfigurationError
from app.service.scene_service import SceneReport, SceneService
from app.service.verification_service import VerificationService, VerificationSummary

logger = structlog.stdlib.get_logger(__name__)

router = APIRouter(prefix="/api", tags=["scenes"])

"""
✅ 장면 라우터
- CLI 와 같은 SceneService/VerificationService 를 HTTP 로 노출
- 기하 계산은 CPU 작업이므로 run_in_threadpool 로 이벤트 루프 밖에서 실행
- 요청 본문은 SceneConfig 와 같은 필드 (scene 은 경로에서 받음)
"""


class SceneOptions(BaseModel):
    """POST /api/scenes/{scene} 요청 본문 (모든 필드 선택)"""
    depth: int | None = None
    base_point: tuple[float, float, float] | str | None = None
    seed: int | None = None
    preset: str | None = None


class VerifyOptions(BaseModel):
    seed: int | None = None
    bound_scale: float = 1.0


def get_scene_service(settings: Annotated[Settings, Depends(get_settings)]) -> SceneService:
    return SceneService(settings)


@router.get("/scenes")
async def list_scenes() -> Dict[str, Any]:
    """사용 가능한 장면과 preset 목록"""
    logger.info("[SceneController] list_scenes() 실행")
    return {"scenes": [{"name": name, "presets": list(PRESETS.get(name, ()))} for name in SCENES]}


@router.post("/scenes/{scene}", response_model=SceneReport)
async def run_scene(
    scene: Annotated[SceneName, Path(description="scene name")],
    service: Annotated[SceneService, Depends(get_scene_service)],
    options: Annotated[SceneOptions, Body()] = SceneOptions(),
) -> SceneReport:
    """
    장면 하나를 실행하고 보고서를 반환
    - 단언 실패나 기하 오류는 200 응답의 failures 에 담긴다
    - 잘못된 옵션은 400 (CFG001)
    """
    logger.info("[SceneController] run_scene() 실행", scene=scene)
    try:
        config = SceneConfig(scene=scene, **options.model_dump(exclude_none=True))
    except ValidationError as exc:
        raise ConfigurationError("invalid scene options", {"errors": exc.errors(include_url=False, include_context=False)})
    result = await run_in_threadpool(service.run, config)
    return result.report


@router.post("/verify", response_model=VerificationSummary)
async def verify(
    settings: Annotated[Settings, Depends(get_settings)],
    options: Annotated[VerifyOptions, Body()] = VerifyOptions(),
) -> VerificationSummary:
    """모든 수용 기준 실행"""
    seed = settings.geometry.DEFAULT_SEED if options.seed is None else options.seed
    logger.info("[SceneController] verify() 실행", seed=seed, bound_scale=options.bound_scale)
    service = VerificationService(settings)
    return await run_in_threadpool(service.verify_all, seed, options.bound_scale)
