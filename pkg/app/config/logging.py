"""
✅ 구조적 로깅 설정 (structlog + python-json-logger)
- console: 사람이 읽는 key=value 출력
- json: JsonFormatter로 한 줄당 하나의 JSON 레코드
- 모든 로그는 stderr로 (CLI의 stdout은 결과 표 전용)
"""
import logging
import sys

import structlog
from pythonjsonlogger import jsonlogger

from app.config.settings import Settings

_SHARED_PROCESSORS = [
    structlog.contextvars.merge_contextvars,
    structlog.stdlib.add_log_level,
    structlog.stdlib.add_logger_name,
    structlog.processors.TimeStamper(fmt="iso"),
    structlog.processors.StackInfoRenderer(),
    structlog.processors.format_exc_info,
]


def configure_logging(settings: Settings) -> None:
    handler = logging.StreamHandler(sys.stderr)

    if settings.LOG_FORMAT == "json":
        renderer = structlog.stdlib.render_to_log_kwargs
        handler.setFormatter(jsonlogger.JsonFormatter("%(asctime)s %(levelname)s %(name)s %(message)s"))
    else:
        renderer = structlog.dev.ConsoleRenderer(colors=False)
        handler.setFormatter(logging.Formatter("%(message)s"))

    root = logging.getLogger()
    root.handlers.clear()
    root.addHandler(handler)
    root.setLevel(settings.LOG_LEVEL.upper())

    structlog.configure(
        processors=[*_SHARED_PROCESSORS, renderer],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )
