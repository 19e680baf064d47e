"""
애플리케이션 메인 파일 (spaceform-poly HTTP 표면)
- 앱 초기화 및 설정
- 라우터 등록
- 미들웨어 등록
- 예외 핸들러 등록
"""
import datetime
from contextlib import asynccontextmanager

import structlog
from fastapi import FastAPI

from app.config.logging import configure_logging
from app.config.settings import get_settings
from app.exception.global_handler import GeometryError, register_exception_handlers
from app.geometry.groups import (
    equidistant_fuchsian_generators,
    octagon_fuchsian_generators,
    parabolic_square_generators,
)
from app.middleware.logging import logging_middleware
from app.router.scenes import router as scenes_router

settings = get_settings()
configure_logging(settings)
logger = structlog.stdlib.get_logger(__name__)

# 시작 시 점검한 생성원 군 상태 (/health 에서 보고)
_GROUP_STATUS: dict[str, str] = {}


def check_generator_groups() -> dict[str, str]:
    """
    생성원 군의 구조 점검 (관계식, 역원, 보존 형식)
    - 실패해도 앱은 뜨고, 해당 군은 DOWN 으로 보고
    """
    status: dict[str, str] = {}
    for name, factory in (
        ("octagon-fuchsian", octagon_fuchsian_generators),
        ("equidistant-fuchsian", equidistant_fuchsian_generators),
        ("parabolic-square", parabolic_square_generators),
    ):
        try:
            factory().check()
            status[name] = "UP"
        except GeometryError as exc:
            logger.warning("[Lifespan] ⚠️ 생성원 군 점검 실패", group=name, error_code=exc.error_code)
            status[name] = "DOWN"
    return status


@asynccontextmanager
async def lifespan(app: FastAPI):
    """
    애플리케이션 라이프사이클 관리
    - 시작 시점에 생성원 군을 점검
    """
    logger.info("🚀 애플리케이션 시작 - 생성원 군 점검 중...")
    _GROUP_STATUS.update(check_generator_groups())
    logger.info("✅ 애플리케이션 초기화 완료", groups=_GROUP_STATUS)

    yield

    logger.info("👋 애플리케이션 정상 종료")


app = FastAPI(
    title=settings.APP_NAME,
    description=settings.DESCRIPTION,
    version=settings.VERSION,
    lifespan=lifespan,
)

app.middleware("http")(logging_middleware)

app.include_router(scenes_router)

register_exception_handlers(app)


@app.get("/")
async def root():
    """애플리케이션 기본 정보"""
    return {
        "app": settings.APP_NAME,
        "description": settings.DESCRIPTION,
        "version": settings.VERSION,
        "docs_url": "/docs",
        "environment": settings.ENV,
        "endpoints": [
            {"path": "/api/scenes", "description": "장면 목록"},
            {"path": "/api/scenes/{scene}", "description": "장면 실행 (POST)"},
            {"path": "/api/verify", "description": "수용 기준 검증 (POST)"},
        ],
    }


@app.get("/health")
async def health_check():
    """
    상태 확인 엔드포인트
    - 생성원 군 중 하나라도 DOWN 이면 전체 DOWN
    """
    groups = {name: {"status": value} for name, value in _GROUP_STATUS.items()}
    overall = "UP" if all(v == "UP" for v in _GROUP_STATUS.values()) else "DOWN"
    return {
        "status": overall,
        "timestamp": datetime.datetime.now().isoformat(),
        "version": settings.VERSION,
        "environment": settings.ENV,
        "components": {"app": {"status": "UP"}, **groups},
    }


if __name__ == "__main__":
    import uvicorn

    logger.info("🚀 Uvicorn ASGI 서버 시작 중...", host=settings.HOST, port=settings.PORT, reload=settings.RELOAD)
    uvicorn.run(
        "app.main:app",
        host=settings.HOST,
        port=settings.PORT,
        reload=settings.RELOAD,
        log_level=settings.LOG_LEVEL.lower(),
    )
