"""
✅ 명령행 진입점 (spaceform-poly)
- spaceform-poly <scene> [--depth N] [--base-point x,y,z] [--seed S] [--export obj,json]
                         [--out DIR] [--config FILE] [--preset NAME]
- spaceform-poly verify [--seed S] [--out DIR] [--bound-scale X]

🔍 종료 코드:
- 0: 모든 단언 통과
- 1: 단언 실패 또는 기하 오류 (실패 목록 JSON 을 stderr 와 report.json 에 기록)
- 2: 사용법/설정 오류
"""
import argparse
import json
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import structlog
from pydantic import ValidationError

from app.config.logging import configure_logging
from app.config.scene import PRESETS, SCENES, SceneConfig
from app.config.settings import get_settings
from app.exception.global_handler import AppException, ConfigurationError
from app.service.export import OBJ_FILE, REPORT_FILE, write_obj, write_report_json
from app.service.scene_service import SceneService
from app.service.verification_service import VerificationService

logger = structlog.stdlib.get_logger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
VERIFY_FILE = "verification.json"

# 값이 '-' 로 시작할 수 있는 옵션 (음수 좌표)
SIGNED_VALUE_OPTIONS = ("--base-point",)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spaceform-poly",
        description="Convex polyhedral realizations of cone metrics in constant-curvature space forms",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    for scene in SCENES:
        sub = commands.add_parser(scene, help=f"build the {scene} scene")
        sub.add_argument("--depth", type=int, help="orbit truncation depth")
        sub.add_argument("--base-point", dest="base_point", help="base point as x,y,z")
        sub.add_argument("--seed", type=int)
        sub.add_argument("--export", help="comma separated subset of obj,json")
        sub.add_argument("--out", type=Path, help="output directory")
        sub.add_argument("--config", type=Path, help="JSON scene config file")
        if scene in PRESETS:
            sub.add_argument("--preset", choices=PRESETS[scene])

    verify = commands.add_parser("verify", help="run every acceptance criterion")
    verify.add_argument("--seed", type=int, default=None)
    verify.add_argument("--out", type=Path, help="write verification.json into this directory")
    verify.add_argument("--bound-scale", dest="bound_scale", type=float, default=1.0)
    return parser


def join_signed_values(argv: Sequence[str]) -> list[str]:
    """'--base-point -0.1,0,0.4' 를 '--base-point=-0.1,0,0.4' 로 합쳐 argparse 가 값을 플래그로 읽지 않게 한다"""
    joined: list[str] = []
    tokens = iter(argv)
    for token in tokens:
        if token in SIGNED_VALUE_OPTIONS:
            value = next(tokens, None)
            joined.append(token if value is None else f"{token}={value}")
        else:
            joined.append(token)
    return joined


def load_scene_config(args: argparse.Namespace) -> SceneConfig:
    """--config 파일을 먼저 읽고 명령행 플래그로 덮어쓴다"""
    data: dict[str, Any] = {}
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError("config file is not readable JSON", {"path": str(args.config)}) from exc
        if not isinstance(data, dict):
            raise ConfigurationError("config file must hold a JSON object", {"path": str(args.config)})

    data["scene"] = args.command
    for key in ("depth", "base_point", "seed", "export", "preset"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    if args.out is not None:
        data["out_dir"] = args.out
    try:
        return SceneConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigurationError(
            "invalid scene options", {"errors": json.loads(exc.json(include_url=False))}
        ) from exc


def _print_rows(rows: Sequence[Any], label: str) -> None:
    width = max((len(getattr(r, label)) for r in rows), default=10)
    for row in rows:
        status = "PASS" if row.passed else "FAIL"
        print(f"{getattr(row, label):<{width}}  {row.measured!s:>24} {row.relation:>2} {row.bound!s:<12} {status}")


def run_scene(args: argparse.Namespace) -> int:
    settings = get_settings()
    config = load_scene_config(args)
    result = SceneService(settings).run(config)
    report = result.report

    if "obj" in config.export:
        write_obj(
            config.out_dir / OBJ_FILE,
            result.meshes,
            comment=f"scene {config.scene}, depth {config.depth}",
        )
    if "json" in config.export:
        write_report_json(config.out_dir / REPORT_FILE, report)

    _print_rows(report.checks, "name")
    if report.failures:
        print(json.dumps({"scene": config.scene, "failures": report.failures}, default=str), file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def run_verify(args: argparse.Namespace) -> int:
    settings = get_settings()
    seed = settings.geometry.DEFAULT_SEED if args.seed is None else args.seed
    summary = VerificationService(settings).verify_all(seed=seed, bound_scale=args.bound_scale)
    if args.out is not None:
        write_report_json(args.out / VERIFY_FILE, summary)

    _print_rows(summary.rows, "check")
    if not summary.passed:
        print(json.dumps([row.model_dump() for row in summary.failures], default=str), file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    configure_logging(get_settings())
    raw = sys.argv[1:] if argv is None else argv
    args = build_parser().parse_args(join_signed_values(raw))
    try:
        if args.command == "verify":
            return run_verify(args)
        return run_scene(args)
    except ConfigurationError as exc:
        logger.error("[CLI] 설정 오류", message=exc.message)
        print(json.dumps({"failures": [exc.to_failure()]}, default=str), file=sys.stderr)
        return EXIT_USAGE
    except AppException as exc:
        logger.error("[CLI] 실행 오류", error_code=exc.error_code, message=exc.message)
        print(json.dumps({"failures": [exc.to_failure()]}, default=str), file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
