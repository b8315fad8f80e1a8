"""Flat key=value config files and CSV emission helpers."""

from __future__ import annotations

import io
from pathlib import Path

__all__ = ["load_config", "parse_config", "write_csv", "channel_csv",
           "matrix_from_text"]


def parse_config(text: str) -> dict[str, str]:
    """Parse flat key=value lines; '#' starts a comment; later keys win."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_config(path: str | Path) -> dict[str, str]:
    return parse_config(Path(path).read_text())


def write_csv(header: list[str], rows: list[list], out=None) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    text = buf.getvalue()
    if out is not None:
        Path(out).write_text(text)
    return text


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


def channel_csv(channel) -> str:
    """PauliChannel -> 'pauli_label,probability' lines."""
    rows = [[label, p] for label, p in sorted(channel.probs.items())]
    return write_csv(["pauli_label", "probability"], rows)


def matrix_from_text(text: str):
    """Plain-text binary matrix: one row per line, 0/1 tokens (spaces
    optional); blank lines separate matrices when several are stacked."""
    import numpy as np

    blocks: list[list[list[int]]] = [[]]
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            if blocks[-1]:
                blocks.append([])
            continue
        tokens = line.split() if " " in line else list(line)
        blocks[-1].append([int(t) for t in tokens])
    mats = [np.array(b, dtype="uint8") for b in blocks if b]
    for m in mats:
        if m.size and not set(m.ravel().tolist()) <= {0, 1}:
            raise ValueError("matrix entries must be 0/1")
    return mats
