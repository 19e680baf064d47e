"""
✅ 결과물 내보내기
- surface.obj: affine chart 좌표 그대로, 다각형 면 유지 (삼각형 분할 없음)
- report.json: pydantic JSON 직렬화 (최단 왕복 float 표현, 결정적)
"""
from pathlib import Path
from typing import Sequence

import structlog
from pydantic import BaseModel

from app.geometry.hull import PolyhedralSurface

logger = structlog.stdlib.get_logger(__name__)

OBJ_FILE = "surface.obj"
REPORT_FILE = "report.json"


def render_obj(meshes: Sequence[tuple[str, PolyhedralSurface]], comment: str = "") -> str:
    """
    이름 붙은 곡면 여러 개를 하나의 OBJ 텍스트로
    - 곡면마다 'o 이름' 블록, 면 인덱스는 1부터 시작하고 블록마다 누적 오프셋
    """
    lines = ["# obj export"]
    if comment:
        lines.append(f"# {comment}")
    offset = 0
    for name, surface in meshes:
        lines.append(f"# {name}: space form {surface.space.name}, depth {surface.depth}")
        lines.append(f"o {name}")
        lines.extend("v %.17g %.17g %.17g" % tuple(vertex) for vertex in surface.points)
        lines.extend("f " + " ".join(str(v + offset + 1) for v in face) for face in surface.faces)
        offset += surface.n_vertices
    return "\n".join(lines) + "\n"


def write_obj(path: Path, meshes: Sequence[tuple[str, PolyhedralSurface]], comment: str = "") -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_obj(meshes, comment), encoding="utf-8")
    logger.info("[ExportService] OBJ 저장", path=str(path), meshes=len(meshes))
    return path


def render_report(report: BaseModel) -> str:
    return report.model_dump_json(indent=2) + "\n"


def write_report_json(path: Path, report: BaseModel) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_report(report), encoding="utf-8")
    logger.info("[ExportService] 보고서 저장", path=str(path))
    return path
