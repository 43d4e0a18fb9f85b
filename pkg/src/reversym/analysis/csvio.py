"""CSV and summary-text output; floats carry 17 significant digits."""

from __future__ import annotations

import os


def format_float(x) -> str:
    return f"{float(x):.17g}"


def _cell(v) -> str:
    if isinstance(v, float):
        return format_float(v)
    return str(v)


def write_csv(path: str, header: list, rows: list) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def write_summary(path: str, lines: list) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
