"""结果文件写入工具。"""

import csv
import io
from pathlib import Path
from typing import Iterable, Sequence


def atomic_write_text(path: Path, text: str) -> Path:
    """先写同目录临时文件再 rename，中途失败时不留下半截文件。"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = path.with_name(path.name + ".tmp")
    try:
        with open(tmp_path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        tmp_path.replace(path)
    finally:
        if tmp_path.exists():
            tmp_path.unlink()
    return path


def atomic_write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> Path:
    """写 CSV（\\n 换行），整体原子替换。"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return atomic_write_text(path, buffer.getvalue())


def format_float(value: float) -> str:
    """CSV 浮点格式：8 位有效数字，nan 写作 nan。"""
    return f"{value:.8g}"
