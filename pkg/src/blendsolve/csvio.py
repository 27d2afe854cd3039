"""CSV emission helpers: comma separator, dot decimal point, 17 significant digits."""

from __future__ import annotations

from typing import Iterable


def fmt(value) -> str:
    """One CSV field: floats at 17 significant digits so diffs are exact."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def csv_text(header: Iterable[str], rows: Iterable[Iterable], comments: Iterable[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(header))
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"
