import time
import uuid
from typing import Callable

import structlog
from fastapi import Request

logger = structlog.stdlib.get_logger(__name__)

REQUEST_ID_HEADER = "X-Request-ID"


async def logging_middleware(request: Request, call_next: Callable):
    """
    ✅ HTTP 요청 로깅 미들웨어
    - 요청마다 request_id 를 structlog contextvars 에 묶어 서비스 로그까지 전달 (MDC 와 유사)
    - 요청 전/후와 처리 시간을 기록하고 응답 헤더에 request_id 를 돌려준다
    """
    request_id = request.headers.get(REQUEST_ID_HEADER) or uuid.uuid4().hex
    request.state.request_id = request_id
    structlog.contextvars.clear_contextvars()
    structlog.contextvars.bind_contextvars(request_id=request_id)

    start_time = time.perf_counter()
    method = request.method
    path = request.url.path
    client_host = request.client.host if request.client else "Unknown"
    logger.info("[LoggingMiddleware] ▶️ 요청", method=method, path=path, client=client_host)

    try:
        response = await call_next(request)
    except Exception as exc:
        logger.error(
            "[LoggingMiddleware] ❌ 예외 발생",
            method=method,
            path=path,
            error=str(exc),
            elapsed_ms=round((time.perf_counter() - start_time) * 1000.0, 3),
        )
        structlog.contextvars.unbind_contextvars("request_id")
        raise

    response.headers[REQUEST_ID_HEADER] = request_id
    logger.info(
        "[LoggingMiddleware] ⏹️ 응답 완료",
        method=method,
        path=path,
        status=response.status_code,
        elapsed_ms=round((time.perf_counter() - start_time) * 1000.0, 3),
    )
    structlog.contextvars.unbind_contextvars("request_id")
    return response
