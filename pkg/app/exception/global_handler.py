"""
✅ 예외 계층 + 글로벌 예외 핸들러
- 기하 커널에서 발생하는 모든 오류는 AppException 하위 클래스
- CLI는 종료 코드로, HTTP 표면은 표준 오류 JSON으로 변환

🔍 오류 응답 포맷:
{timestamp, status, error, message, path, error_code, details}
"""
from datetime import datetime
from typing import Any, Dict, Optional

import structlog
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

logger = structlog.stdlib.get_logger(__name__)


class ErrorCodes:
    # 입력/설정 오류 (CLI 종료 코드 2)
    CONFIG_INVALID = "CFG001"

    # 기하 전제 조건 위반
    GEOM_DIMENSION = "GEO001"
    GEOM_DOMAIN = "GEO002"
    GEOM_SEPARATION = "GEO003"
    GEOM_DEGENERATE_HULL = "GEO004"
    GEOM_NON_SPACELIKE = "GEO005"
    GEOM_OPEN_SURFACE = "GEO006"
    GEOM_UNSTABLE = "GEO007"
    GEOM_MIXED_CURVATURE = "GEO008"
    GEOM_POLE_AT_INFINITY = "GEO009"
    GEOM_NOT_GENERALIZED = "GEO010"
    GEOM_PROJECTIVE_SAMPLING = "GEO011"

    SERVER_UNEXPECTED_ERROR = "SRV999"


class AppException(Exception):
    """
    애플리케이션 공통 예외
    - status_code: HTTP 표면에서 사용할 상태 코드
    - error_code: ErrorCodes 값
    - details: 기계 판독용 부가 정보
    """
    def __init__(
        self,
        status_code: int,
        message: str,
        error_code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        self.status_code = status_code
        self.message = message
        self.error_code = error_code
        self.details = details
        super().__init__(message)

    def to_failure(self) -> Dict[str, Any]:
        """CLI 실패 목록 항목"""
        failure: Dict[str, Any] = {"error_code": self.error_code, "message": self.message}
        if self.details:
            failure["details"] = self.details
        return failure


class ConfigurationError(AppException):
    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(400, message, ErrorCodes.CONFIG_INVALID, details)


class GeometryError(AppException):
    """기하 커널 오류의 기반 클래스 (422)"""
    error_code = ErrorCodes.GEOM_DOMAIN

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(422, message, type(self).error_code, details)


class DimensionMismatchError(GeometryError):
    error_code = ErrorCodes.GEOM_DIMENSION


class DomainError(GeometryError):
    """점이 요구되는 의사구면/공 내부에 있지 않음"""
    error_code = ErrorCodes.GEOM_DOMAIN


class SeparationError(GeometryError):
    """로렌츠 공간에서 시간꼴/빛꼴 분리"""
    error_code = ErrorCodes.GEOM_SEPARATION


class DegenerateHullError(GeometryError):
    error_code = ErrorCodes.GEOM_DEGENERATE_HULL


class NonSpacelikeFaceError(GeometryError):
    error_code = ErrorCodes.GEOM_NON_SPACELIKE


class OpenSurfaceError(GeometryError):
    error_code = ErrorCodes.GEOM_OPEN_SURFACE


class UnstableFundamentalSetError(GeometryError):
    """절단 깊이가 부족함 - depth를 늘려야 함"""
    error_code = ErrorCodes.GEOM_UNSTABLE


class MixedCurvatureError(GeometryError):
    error_code = ErrorCodes.GEOM_MIXED_CURVATURE


class PoleAtInfinityError(GeometryError):
    error_code = ErrorCodes.GEOM_POLE_AT_INFINITY


class NotGeneralizedPolyhedronError(GeometryError):
    error_code = ErrorCodes.GEOM_NOT_GENERALIZED


class ProjectiveSamplingError(GeometryError):
    error_code = ErrorCodes.GEOM_PROJECTIVE_SAMPLING


def register_exception_handlers(app: FastAPI) -> None:
    """
    ✅ 글로벌 예외 핸들러 등록
    - RequestValidationError: 요청 유효성 검사 실패 (400)
    - AppException: 설정 오류(400), 기하 오류(422)
    - Exception: 기타 모든 예외 (500)
    """

    @app.exception_handler(RequestValidationError)
    async def validation_exception_handler(request: Request, exc: RequestValidationError) -> JSONResponse:
        logger.warning("[ExceptionHandler] ⚠️ 유효성 검사 예외", path=request.url.path)
        errors = [
            {"location": list(error["loc"]), "message": error["msg"], "type": error["type"]}
            for error in exc.errors()
        ]
        return JSONResponse(
            status_code=400,
            content=_error_body(request, 400, "요청 데이터 유효성 검사 실패", details=errors),
        )

    @app.exception_handler(AppException)
    async def app_exception_handler(request: Request, exc: AppException) -> JSONResponse:
        logger.warning(
            "[ExceptionHandler] ⚠️ 애플리케이션 예외",
            message=exc.message,
            status=exc.status_code,
            error_code=exc.error_code,
        )
        return JSONResponse(
            status_code=exc.status_code,
            content=_error_body(request, exc.status_code, exc.message, exc.error_code, exc.details),
        )

    @app.exception_handler(Exception)
    async def generic_exception_handler(request: Request, exc: Exception) -> JSONResponse:
        logger.exception("[ExceptionHandler] ❌ 처리되지 않은 예외", path=request.url.path)
        return JSONResponse(
            status_code=500,
            content=_error_body(
                request, 500, "서버 내부 오류가 발생했습니다", ErrorCodes.SERVER_UNEXPECTED_ERROR
            ),
        )


def _error_body(
    request: Request,
    status: int,
    message: str,
    error_code: Optional[str] = None,
    details: Any = None,
) -> Dict[str, Any]:
    body: Dict[str, Any] = {
        "timestamp": datetime.now().isoformat(),
        "status": status,
        "error": get_http_error_name(status),
        "message": message,
        "path": request.url.path,
    }
    if error_code:
        body["error_code"] = error_code
    if details:
        body["details"] = details
    return body


def get_http_error_name(status_code: int) -> str:
    """HTTP 상태 코드에 해당하는 표준 오류 이름 반환"""
    http_status_codes = {
        400: "Bad Request",
        404: "Not Found",
        405: "Method Not Allowed",
        422: "Unprocessable Entity",
        500: "Internal Server Error",
    }
    return http_status_codes.get(status_code, "Unknown Error")
